//! Recursive-descent parser for the defining-function grammar:
//!
//! ```text
//! expr   := ['-'] term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := base ('^' integer)?
//! base   := number | number 'i' | 'z'k | 't' | ident '(' expr ')' | '(' expr ')'
//! ident  := conj | re | im | abs2 | exp | log | chi0 | chi1 | chi{0,1}_d{1,2}
//! ```
//!
//! Complex literals are written `(a+bi)`; the suffix `i` makes a number
//! imaginary and constant folding collapses the parenthesized sum. Errors
//! carry the byte offset of the offending token.

use super::{add, cnum, conj, div, mul, pow, rnum, sub, Expr, ProfileKind};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: unexpected character {ch:?}")]
    UnexpectedChar { offset: usize, ch: char },
    #[error("syntax error at byte {offset}: expected {expected}, found {found}")]
    UnexpectedToken {
        offset: usize,
        expected: &'static str,
        found: String,
    },
    #[error("syntax error at byte {offset}: unexpected end of input")]
    UnexpectedEnd { offset: usize },
    #[error("syntax error at byte {offset}: unknown identifier {name:?}")]
    UnknownIdent { offset: usize, name: String },
    #[error("syntax error at byte {offset}: malformed number")]
    BadNumber { offset: usize },
    #[error("syntax error at byte {offset}: trailing input")]
    TrailingInput { offset: usize },
    #[error("variable z{} exceeds declared dimension n={n}", idx + 1)]
    UnknownVariable { idx: usize, n: usize },
}

impl ParseError {
    pub fn unknown_variable(idx: usize, n: usize) -> Self {
        ParseError::UnknownVariable { idx, n }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    ImagNum(f64),
    /// z-variable, zero-based
    Var(usize),
    T,
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer {
            src: src.as_bytes(),
            pos: 0,
        }
    }

    fn tokens(mut self) -> Result<Vec<(Tok, usize)>, ParseError> {
        let mut out = Vec::new();
        while self.pos < self.src.len() {
            let c = self.src[self.pos] as char;
            let start = self.pos;
            match c {
                ' ' | '\t' | '\n' | '\r' => {
                    self.pos += 1;
                }
                '+' => {
                    out.push((Tok::Plus, start));
                    self.pos += 1;
                }
                '-' => {
                    out.push((Tok::Minus, start));
                    self.pos += 1;
                }
                '*' => {
                    out.push((Tok::Star, start));
                    self.pos += 1;
                }
                '/' => {
                    out.push((Tok::Slash, start));
                    self.pos += 1;
                }
                '^' => {
                    out.push((Tok::Caret, start));
                    self.pos += 1;
                }
                '(' => {
                    out.push((Tok::LParen, start));
                    self.pos += 1;
                }
                ')' => {
                    out.push((Tok::RParen, start));
                    self.pos += 1;
                }
                '0'..='9' => {
                    out.push((self.lex_number()?, start));
                }
                'a'..='z' | 'A'..='Z' | '_' => {
                    out.push((self.lex_ident()?, start));
                }
                _ => {
                    return Err(ParseError::UnexpectedChar {
                        offset: start,
                        ch: c,
                    })
                }
            }
        }
        Ok(out)
    }

    fn lex_number(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos < self.src.len() && self.src[self.pos] == b'.' {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        // exponent part: e or E, optional sign, digits (but not 'e' followed
        // by a letter, which would be an identifier boundary)
        if self.pos < self.src.len() && (self.src[self.pos] | 0x20) == b'e' {
            let save = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && (self.src[self.pos] == b'+' || self.src[self.pos] == b'-')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
            } else {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v: f64 = text
            .parse()
            .map_err(|_| ParseError::BadNumber { offset: start })?;
        // imaginary suffix
        if self.pos < self.src.len() && self.src[self.pos] == b'i' {
            let after = self.src.get(self.pos + 1).copied();
            let is_ident_cont =
                after.is_some_and(|b| b.is_ascii_alphanumeric() || b == b'_');
            if !is_ident_cont {
                self.pos += 1;
                return Ok(Tok::ImagNum(v));
            }
        }
        Ok(Tok::Num(v))
    }

    fn lex_ident(&mut self) -> Result<Tok, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        if name == "t" {
            return Ok(Tok::T);
        }
        if let Some(rest) = name.strip_prefix('z') {
            if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                let k: usize = rest
                    .parse()
                    .map_err(|_| ParseError::BadNumber { offset: start })?;
                if k == 0 {
                    return Err(ParseError::UnknownIdent {
                        offset: start,
                        name: name.to_string(),
                    });
                }
                return Ok(Tok::Var(k - 1));
            }
        }
        Ok(Tok::Ident(name.to_string()))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Tok, usize)> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<(Tok, usize)> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &'static str) -> Result<(), ParseError> {
        match self.next() {
            Some((t, _)) if t == tok => Ok(()),
            Some((t, off)) => Err(ParseError::UnexpectedToken {
                offset: off,
                expected: what,
                found: format!("{:?}", t),
            }),
            None => Err(ParseError::UnexpectedEnd { offset: self.end }),
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut acc = if matches!(self.peek(), Some((Tok::Minus, _))) {
            self.next();
            sub(rnum(0.0), self.term()?)
        } else {
            self.term()?
        };
        loop {
            match self.peek() {
                Some((Tok::Plus, _)) => {
                    self.next();
                    acc = add(acc, self.term()?);
                }
                Some((Tok::Minus, _)) => {
                    self.next();
                    acc = sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some((Tok::Star, _)) => {
                    self.next();
                    acc = mul(acc, self.factor()?);
                }
                Some((Tok::Slash, _)) => {
                    self.next();
                    acc = div(acc, self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.base()?;
        if matches!(self.peek(), Some((Tok::Caret, _))) {
            self.next();
            let neg = if matches!(self.peek(), Some((Tok::Minus, _))) {
                self.next();
                true
            } else {
                false
            };
            match self.next() {
                Some((Tok::Num(v), off)) => {
                    if v.fract() != 0.0 || v.abs() > i32::MAX as f64 {
                        return Err(ParseError::UnexpectedToken {
                            offset: off,
                            expected: "integer exponent",
                            found: format!("{}", v),
                        });
                    }
                    let k = v as i32;
                    return Ok(pow(base, if neg { -k } else { k }));
                }
                Some((t, off)) => {
                    return Err(ParseError::UnexpectedToken {
                        offset: off,
                        expected: "integer exponent",
                        found: format!("{:?}", t),
                    })
                }
                None => return Err(ParseError::UnexpectedEnd { offset: self.end }),
            }
        }
        Ok(base)
    }

    fn base(&mut self) -> Result<Expr, ParseError> {
        match self.next() {
            Some((Tok::Num(v), _)) => Ok(rnum(v)),
            Some((Tok::ImagNum(v), _)) => Ok(cnum(0.0, v)),
            Some((Tok::Var(j), _)) => Ok(Expr::Var(j)),
            Some((Tok::T, _)) => Ok(Expr::T),
            Some((Tok::LParen, _)) => {
                // allow a leading '-' inside parens, e.g. "(-1+2i)"
                let e = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                Ok(e)
            }
            Some((Tok::Ident(name), off)) => {
                self.expect(Tok::LParen, "'(' after function name")?;
                let inner = self.expr()?;
                self.expect(Tok::RParen, "')'")?;
                match name.as_str() {
                    "conj" => Ok(conj(inner)),
                    "re" => Ok(inner.re()),
                    "im" => Ok(inner.im()),
                    "abs2" => Ok(inner.abs2()),
                    "exp" => Ok(inner.exp()),
                    "log" => Ok(inner.log()),
                    "chi0" => Ok(Expr::Profile(ProfileKind::Chi0, 0, Box::new(inner))),
                    "chi1" => Ok(Expr::Profile(ProfileKind::Chi1, 0, Box::new(inner))),
                    other => {
                        if let Some(ord) = parse_profile_deriv(other, "chi0") {
                            return Ok(Expr::Profile(ProfileKind::Chi0, ord, Box::new(inner)));
                        }
                        if let Some(ord) = parse_profile_deriv(other, "chi1") {
                            return Ok(Expr::Profile(ProfileKind::Chi1, ord, Box::new(inner)));
                        }
                        Err(ParseError::UnknownIdent {
                            offset: off,
                            name: other.to_string(),
                        })
                    }
                }
            }
            Some((t, off)) => Err(ParseError::UnexpectedToken {
                offset: off,
                expected: "number, variable, 't', function call or '('",
                found: format!("{:?}", t),
            }),
            None => Err(ParseError::UnexpectedEnd { offset: self.end }),
        }
    }
}

fn parse_profile_deriv(name: &str, prefix: &str) -> Option<u8> {
    let rest = name.strip_prefix(prefix)?;
    let ord = rest.strip_prefix("_d")?;
    let k: u8 = ord.parse().ok()?;
    if (1..=4).contains(&k) {
        Some(k)
    } else {
        None
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = Lexer::new(text).tokens()?;
    let end = text.len();
    let mut p = Parser { toks, pos: 0, end };
    let e = p.expr()?;
    if let Some((_, off)) = p.peek() {
        return Err(ParseError::TrailingInput { offset: *off });
    }
    Ok(e)
}
