//! Defining-function expression language.
//!
//! Expressions are built over complex variables `z1..zn`, their conjugates,
//! a real parameter `t`, complex constants, the arithmetic operators
//! `+ - * / ^k`, and the functions `conj, re, im, abs2, exp, log`. The
//! grammar is closed under the exact Wirtinger derivatives `d/dz_j`,
//! `d/dzbar_j` and `d/dt`, with the convention
//!
//! ```text
//! d/dz    = (d/dx - i d/dy) / 2        d/dzbar = (d/dx + i d/dy) / 2
//! ```
//!
//! Two extra identifiers `chi0` / `chi1` name the smooth cutoff profiles used
//! by the bump construction (flat-zero convex ramp and plateau bump). They
//! are primitive nodes with hand-derived derivative formulas up to second
//! order, so bumped defining functions stay inside the language.

mod compiled;
mod parse;
pub mod profile;

pub use compiled::CompiledExpr;
pub use parse::ParseError;

use num_complex::Complex64;
use thiserror::Error;

pub type C = Complex64;

/// When `|imag| < REAL_EPS` a complex result is accepted as real.
pub const REAL_EPS: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProfileKind {
    /// Convex ramp: 0 on (-inf, 1], `(s-1)^3 exp(-1/(s-1))` beyond.
    Chi0,
    /// Plateau bump: 1 on |s| <= 1, 0 on |s| >= 2, smooth monotone between.
    Chi1,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(C),
    /// z_j, zero-based index.
    Var(usize),
    /// conj(z_j), kept as a primitive so Wirtinger rules stay local.
    ConjVar(usize),
    T,
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Exp(Box<Expr>),
    Log(Box<Expr>),
    Re(Box<Expr>),
    Im(Box<Expr>),
    Abs2(Box<Expr>),
    Conj(Box<Expr>),
    /// chi-profile applied to a (real-valued) inner expression; the u8 is the
    /// derivative order of the profile itself (0..=2).
    Profile(ProfileKind, u8, Box<Expr>),
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("log of nonpositive real value {0}")]
    LogDomain(f64),
    #[error("zero raised to negative power")]
    ZeroToNegativePower,
    #[error("expression value has imaginary residue {0:e}, expected real")]
    NonRealResult(f64),
    #[error("profile derivative order {0} not implemented (max 2)")]
    ProfileOrder(u8),
    #[error("variable z{} out of range for n={n}", idx + 1)]
    VarOutOfRange { idx: usize, n: usize },
}

// ---------------------------------------------------------------------------
// smart constructors (light constant folding keeps derivative trees small)
// ---------------------------------------------------------------------------

fn is_const(e: &Expr, v: f64) -> bool {
    matches!(e, Expr::Const(c) if *c == C::new(v, 0.0))
}

pub fn add(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x + y),
        _ if is_const(&a, 0.0) => b,
        _ if is_const(&b, 0.0) => a,
        _ => Expr::Add(Box::new(a), Box::new(b)),
    }
}

pub fn sub(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x - y),
        _ if is_const(&b, 0.0) => a,
        _ => Expr::Sub(Box::new(a), Box::new(b)),
    }
}

pub fn mul(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        (Expr::Const(x), Expr::Const(y)) => Expr::Const(x * y),
        _ if is_const(&a, 0.0) || is_const(&b, 0.0) => Expr::Const(C::new(0.0, 0.0)),
        _ if is_const(&a, 1.0) => b,
        _ if is_const(&b, 1.0) => a,
        _ => Expr::Mul(Box::new(a), Box::new(b)),
    }
}

pub fn div(a: Expr, b: Expr) -> Expr {
    match (&a, &b) {
        _ if is_const(&b, 1.0) => a,
        // 0/v folds to 0; poles of v are outside the domains we evaluate on.
        _ if is_const(&a, 0.0) => Expr::Const(C::new(0.0, 0.0)),
        (Expr::Const(x), Expr::Const(y)) if y.norm_sqr() != 0.0 => Expr::Const(x / y),
        _ => Expr::Div(Box::new(a), Box::new(b)),
    }
}

pub fn pow(a: Expr, k: i32) -> Expr {
    match (&a, k) {
        (_, 0) => Expr::Const(C::new(1.0, 0.0)),
        (_, 1) => a,
        (Expr::Const(x), _) => Expr::Const(x.powi(k)),
        _ => Expr::Pow(Box::new(a), k),
    }
}

pub fn conj(a: Expr) -> Expr {
    match a {
        Expr::Const(x) => Expr::Const(x.conj()),
        Expr::Var(j) => Expr::ConjVar(j),
        Expr::ConjVar(j) => Expr::Var(j),
        Expr::T => Expr::T,
        Expr::Conj(inner) => *inner,
        _ => Expr::Conj(Box::new(a)),
    }
}

pub fn cnum(re: f64, im: f64) -> Expr {
    Expr::Const(C::new(re, im))
}

pub fn rnum(re: f64) -> Expr {
    cnum(re, 0.0)
}

impl Expr {
    pub fn exp(self) -> Expr {
        Expr::Exp(Box::new(self))
    }
    pub fn log(self) -> Expr {
        Expr::Log(Box::new(self))
    }
    pub fn re(self) -> Expr {
        match self {
            Expr::Const(x) => Expr::Const(C::new(x.re, 0.0)),
            e => Expr::Re(Box::new(e)),
        }
    }
    pub fn im(self) -> Expr {
        match self {
            Expr::Const(x) => Expr::Const(C::new(x.im, 0.0)),
            e => Expr::Im(Box::new(e)),
        }
    }
    pub fn abs2(self) -> Expr {
        match self {
            Expr::Const(x) => Expr::Const(C::new(x.norm_sqr(), 0.0)),
            e => Expr::Abs2(Box::new(e)),
        }
    }

    /// Largest z-variable index appearing in the tree, if any.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Var(j) | Expr::ConjVar(j) => Some(*j),
            Expr::Const(_) | Expr::T => None,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                match (a.max_var(), b.max_var()) {
                    (Some(x), Some(y)) => Some(x.max(y)),
                    (x, y) => x.or(y),
                }
            }
            Expr::Pow(a, _)
            | Expr::Exp(a)
            | Expr::Log(a)
            | Expr::Re(a)
            | Expr::Im(a)
            | Expr::Abs2(a)
            | Expr::Conj(a)
            | Expr::Profile(_, _, a) => a.max_var(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::ConjVar(_) | Expr::T => 1,
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                1 + a.node_count() + b.node_count()
            }
            Expr::Pow(a, _)
            | Expr::Exp(a)
            | Expr::Log(a)
            | Expr::Re(a)
            | Expr::Im(a)
            | Expr::Abs2(a)
            | Expr::Conj(a)
            | Expr::Profile(_, _, a) => 1 + a.node_count(),
        }
    }

    pub fn eval(&self, z: &[C], t: f64) -> Result<C, EvalError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(j) => z
                .get(*j)
                .copied()
                .ok_or(EvalError::VarOutOfRange { idx: *j, n: z.len() }),
            Expr::ConjVar(j) => z
                .get(*j)
                .map(|v| v.conj())
                .ok_or(EvalError::VarOutOfRange { idx: *j, n: z.len() }),
            Expr::T => Ok(C::new(t, 0.0)),
            Expr::Add(a, b) => Ok(a.eval(z, t)? + b.eval(z, t)?),
            Expr::Sub(a, b) => Ok(a.eval(z, t)? - b.eval(z, t)?),
            Expr::Mul(a, b) => Ok(a.eval(z, t)? * b.eval(z, t)?),
            Expr::Div(a, b) => {
                let d = b.eval(z, t)?;
                if d.norm_sqr() == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                Ok(a.eval(z, t)? / d)
            }
            Expr::Pow(a, k) => {
                let v = a.eval(z, t)?;
                if *k < 0 && v.norm_sqr() == 0.0 {
                    return Err(EvalError::ZeroToNegativePower);
                }
                Ok(v.powi(*k))
            }
            Expr::Exp(a) => Ok(a.eval(z, t)?.exp()),
            Expr::Log(a) => {
                let v = a.eval(z, t)?;
                if v.im.abs() < 1e-14 && v.re <= 0.0 {
                    return Err(EvalError::LogDomain(v.re));
                }
                Ok(v.ln())
            }
            Expr::Re(a) => Ok(C::new(a.eval(z, t)?.re, 0.0)),
            Expr::Im(a) => Ok(C::new(a.eval(z, t)?.im, 0.0)),
            Expr::Abs2(a) => Ok(C::new(a.eval(z, t)?.norm_sqr(), 0.0)),
            Expr::Conj(a) => Ok(a.eval(z, t)?.conj()),
            Expr::Profile(kind, order, a) => {
                let v = a.eval(z, t)?;
                let s = v.re; // profile arguments are real by construction
                let val = profile::eval(*kind, *order, s).map_err(EvalError::ProfileOrder)?;
                Ok(C::new(val, 0.0))
            }
        }
    }

    /// Wirtinger derivative d/dz_j.
    pub fn dz(&self, j: usize) -> Expr {
        match self {
            Expr::Const(_) | Expr::T => rnum(0.0),
            Expr::Var(k) => rnum(if *k == j { 1.0 } else { 0.0 }),
            Expr::ConjVar(_) => rnum(0.0),
            Expr::Add(a, b) => add(a.dz(j), b.dz(j)),
            Expr::Sub(a, b) => sub(a.dz(j), b.dz(j)),
            Expr::Mul(a, b) => add(
                mul(a.dz(j), (**b).clone()),
                mul((**a).clone(), b.dz(j)),
            ),
            Expr::Div(a, b) => div(
                sub(
                    mul(a.dz(j), (**b).clone()),
                    mul((**a).clone(), b.dz(j)),
                ),
                pow((**b).clone(), 2),
            ),
            Expr::Pow(a, k) => mul(
                mul(rnum(*k as f64), pow((**a).clone(), k - 1)),
                a.dz(j),
            ),
            Expr::Exp(a) => mul((*self).clone(), a.dz(j)),
            Expr::Log(a) => div(a.dz(j), (**a).clone()),
            // re(u) = (u + conj u)/2, and d/dz conj(u) = conj(d/dzbar u).
            Expr::Re(a) => mul(rnum(0.5), add(a.dz(j), conj(a.dzbar(j)))),
            Expr::Im(a) => mul(cnum(0.0, -0.5), sub(a.dz(j), conj(a.dzbar(j)))),
            Expr::Abs2(a) => add(
                mul(a.dz(j), conj((**a).clone())),
                mul((**a).clone(), conj(a.dzbar(j))),
            ),
            Expr::Conj(a) => conj(a.dzbar(j)),
            Expr::Profile(kind, order, a) => mul(
                Expr::Profile(*kind, order + 1, a.clone()),
                a.dz(j),
            ),
        }
    }

    /// Wirtinger derivative d/dzbar_j.
    pub fn dzbar(&self, j: usize) -> Expr {
        match self {
            Expr::Const(_) | Expr::T => rnum(0.0),
            Expr::Var(_) => rnum(0.0),
            Expr::ConjVar(k) => rnum(if *k == j { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => add(a.dzbar(j), b.dzbar(j)),
            Expr::Sub(a, b) => sub(a.dzbar(j), b.dzbar(j)),
            Expr::Mul(a, b) => add(
                mul(a.dzbar(j), (**b).clone()),
                mul((**a).clone(), b.dzbar(j)),
            ),
            Expr::Div(a, b) => div(
                sub(
                    mul(a.dzbar(j), (**b).clone()),
                    mul((**a).clone(), b.dzbar(j)),
                ),
                pow((**b).clone(), 2),
            ),
            Expr::Pow(a, k) => mul(
                mul(rnum(*k as f64), pow((**a).clone(), k - 1)),
                a.dzbar(j),
            ),
            Expr::Exp(a) => mul((*self).clone(), a.dzbar(j)),
            Expr::Log(a) => div(a.dzbar(j), (**a).clone()),
            Expr::Re(a) => mul(rnum(0.5), add(a.dzbar(j), conj(a.dz(j)))),
            Expr::Im(a) => mul(cnum(0.0, -0.5), sub(a.dzbar(j), conj(a.dz(j)))),
            Expr::Abs2(a) => add(
                mul(a.dzbar(j), conj((**a).clone())),
                mul((**a).clone(), conj(a.dz(j))),
            ),
            Expr::Conj(a) => conj(a.dz(j)),
            Expr::Profile(kind, order, a) => mul(
                Expr::Profile(*kind, order + 1, a.clone()),
                a.dzbar(j),
            ),
        }
    }

    /// Derivative in the real parameter t.
    pub fn dt(&self) -> Expr {
        match self {
            Expr::Const(_) | Expr::Var(_) | Expr::ConjVar(_) => rnum(0.0),
            Expr::T => rnum(1.0),
            Expr::Add(a, b) => add(a.dt(), b.dt()),
            Expr::Sub(a, b) => sub(a.dt(), b.dt()),
            Expr::Mul(a, b) => add(mul(a.dt(), (**b).clone()), mul((**a).clone(), b.dt())),
            Expr::Div(a, b) => div(
                sub(mul(a.dt(), (**b).clone()), mul((**a).clone(), b.dt())),
                pow((**b).clone(), 2),
            ),
            Expr::Pow(a, k) => mul(mul(rnum(*k as f64), pow((**a).clone(), k - 1)), a.dt()),
            Expr::Exp(a) => mul((*self).clone(), a.dt()),
            Expr::Log(a) => div(a.dt(), (**a).clone()),
            // t is real, so d/dt commutes with conj / re / im.
            Expr::Re(a) => a.dt().re(),
            Expr::Im(a) => a.dt().im(),
            Expr::Abs2(a) => add(
                mul(a.dt(), conj((**a).clone())),
                mul((**a).clone(), conj(a.dt())),
            ),
            Expr::Conj(a) => conj(a.dt()),
            Expr::Profile(kind, order, a) => {
                mul(Expr::Profile(*kind, order + 1, a.clone()), a.dt())
            }
        }
    }

    /// Substitute `z_j -> subs[j]` (and `conj(z_j) -> conj(subs[j])`).
    pub fn substitute(&self, subs: &[Expr]) -> Expr {
        match self {
            Expr::Const(_) | Expr::T => self.clone(),
            Expr::Var(j) => subs[*j].clone(),
            Expr::ConjVar(j) => conj(subs[*j].clone()),
            Expr::Add(a, b) => add(a.substitute(subs), b.substitute(subs)),
            Expr::Sub(a, b) => sub(a.substitute(subs), b.substitute(subs)),
            Expr::Mul(a, b) => mul(a.substitute(subs), b.substitute(subs)),
            Expr::Div(a, b) => div(a.substitute(subs), b.substitute(subs)),
            Expr::Pow(a, k) => pow(a.substitute(subs), *k),
            Expr::Exp(a) => a.substitute(subs).exp(),
            Expr::Log(a) => a.substitute(subs).log(),
            Expr::Re(a) => a.substitute(subs).re(),
            Expr::Im(a) => a.substitute(subs).im(),
            Expr::Abs2(a) => a.substitute(subs).abs2(),
            Expr::Conj(a) => conj(a.substitute(subs)),
            Expr::Profile(kind, order, a) => {
                Expr::Profile(*kind, *order, Box::new(a.substitute(subs)))
            }
        }
    }
}

// ---------------------------------------------------------------------------
// printer
// ---------------------------------------------------------------------------

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Pow(..) => 3,
        _ => 4,
    }
}

fn fmt_expr(e: &Expr, f: &mut std::fmt::Formatter<'_>, parent: u8) -> std::fmt::Result {
    let p = prec(e);
    let need_paren = p < parent;
    if need_paren {
        write!(f, "(")?;
    }
    match e {
        Expr::Const(c) => {
            if c.im == 0.0 {
                if c.re < 0.0 && parent > 0 {
                    write!(f, "({})", c.re)?;
                } else {
                    write!(f, "{}", c.re)?;
                }
            } else if c.re == 0.0 {
                write!(f, "({}i)", c.im)?;
            } else if c.im < 0.0 {
                write!(f, "({}-{}i)", c.re, -c.im)?;
            } else {
                write!(f, "({}+{}i)", c.re, c.im)?;
            }
        }
        Expr::Var(j) => write!(f, "z{}", j + 1)?,
        Expr::ConjVar(j) => write!(f, "conj(z{})", j + 1)?,
        Expr::T => write!(f, "t")?,
        Expr::Add(a, b) => {
            fmt_expr(a, f, 1)?;
            write!(f, "+")?;
            fmt_expr(b, f, 2)?;
        }
        Expr::Sub(a, b) => {
            fmt_expr(a, f, 1)?;
            write!(f, "-")?;
            fmt_expr(b, f, 2)?;
        }
        Expr::Mul(a, b) => {
            fmt_expr(a, f, 2)?;
            write!(f, "*")?;
            fmt_expr(b, f, 3)?;
        }
        Expr::Div(a, b) => {
            fmt_expr(a, f, 2)?;
            write!(f, "/")?;
            fmt_expr(b, f, 3)?;
        }
        Expr::Pow(a, k) => {
            fmt_expr(a, f, 4)?;
            if *k < 0 {
                write!(f, "^({})", k)?;
            } else {
                write!(f, "^{}", k)?;
            }
        }
        Expr::Exp(a) => {
            write!(f, "exp(")?;
            fmt_expr(a, f, 0)?;
            write!(f, ")")?;
        }
        Expr::Log(a) => {
            write!(f, "log(")?;
            fmt_expr(a, f, 0)?;
            write!(f, ")")?;
        }
        Expr::Re(a) => {
            write!(f, "re(")?;
            fmt_expr(a, f, 0)?;
            write!(f, ")")?;
        }
        Expr::Im(a) => {
            write!(f, "im(")?;
            fmt_expr(a, f, 0)?;
            write!(f, ")")?;
        }
        Expr::Abs2(a) => {
            write!(f, "abs2(")?;
            fmt_expr(a, f, 0)?;
            write!(f, ")")?;
        }
        Expr::Conj(a) => {
            write!(f, "conj(")?;
            fmt_expr(a, f, 0)?;
            write!(f, ")")?;
        }
        Expr::Profile(kind, order, a) => {
            let name = match kind {
                ProfileKind::Chi0 => "chi0",
                ProfileKind::Chi1 => "chi1",
            };
            if *order == 0 {
                write!(f, "{}(", name)?;
            } else {
                write!(f, "{}_d{}(", name, order)?;
            }
            fmt_expr(a, f, 0)?;
            write!(f, ")")?;
        }
    }
    if need_paren {
        write!(f, ")")?;
    }
    Ok(())
}

impl std::fmt::Display for Expr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        fmt_expr(self, f, 0)
    }
}

// ---------------------------------------------------------------------------
// DefiningExpr: an expression together with its variable count
// ---------------------------------------------------------------------------

/// An expression in `z1..zn` and `t`, intended as (part of) a defining
/// function. Owns its dimension so evaluation can validate argument shape.
#[derive(Debug, Clone, PartialEq)]
pub struct DefiningExpr {
    pub n: usize,
    pub expr: Expr,
}

impl DefiningExpr {
    pub fn new(n: usize, expr: Expr) -> Self {
        DefiningExpr { n, expr }
    }

    /// Parse `text` as a defining function in `n` complex variables.
    pub fn parse(text: &str, n: usize) -> Result<Self, ParseError> {
        let expr = parse::parse(text)?;
        if let Some(j) = expr.max_var() {
            if j >= n {
                return Err(ParseError::unknown_variable(j, n));
            }
        }
        Ok(DefiningExpr { n, expr })
    }

    pub fn eval(&self, z: &[C], t: f64) -> Result<C, EvalError> {
        debug_assert_eq!(z.len(), self.n);
        self.expr.eval(z, t)
    }

    /// Evaluate and insist the result is real to within [`REAL_EPS`].
    pub fn eval_real(&self, z: &[C], t: f64) -> Result<f64, EvalError> {
        let v = self.eval(z, t)?;
        if v.im.abs() >= REAL_EPS {
            return Err(EvalError::NonRealResult(v.im));
        }
        Ok(v.re)
    }

    pub fn dz(&self, j: usize) -> DefiningExpr {
        DefiningExpr::new(self.n, self.expr.dz(j))
    }

    pub fn dzbar(&self, j: usize) -> DefiningExpr {
        DefiningExpr::new(self.n, self.expr.dzbar(j))
    }

    pub fn dt(&self) -> DefiningExpr {
        DefiningExpr::new(self.n, self.expr.dt())
    }

    /// Substitute each variable by an expression (in possibly new variables).
    pub fn substitute(&self, subs: &[Expr], new_n: usize) -> DefiningExpr {
        assert_eq!(subs.len(), self.n);
        DefiningExpr::new(new_n, self.expr.substitute(subs))
    }

    pub fn compile(&self) -> CompiledExpr {
        CompiledExpr::from_expr(&self.expr)
    }
}

impl std::fmt::Display for DefiningExpr {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.expr.fmt(f)
    }
}
