//! Stack-machine form of an expression tree.
//!
//! Kernel quadrature evaluates the same defining function at 10^5..10^6
//! points; walking the boxed tree dominates there. `CompiledExpr` flattens
//! the tree into postfix ops evaluated on a caller-provided scratch stack,
//! so inner loops allocate nothing.

use super::{profile, EvalError, Expr, ProfileKind, C};

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    /// push consts[idx]
    Const(u32),
    Var(u32),
    ConjVar(u32),
    T,
    Add,
    Sub,
    Mul,
    Div,
    Pow(i32),
    Exp,
    Log,
    Re,
    Im,
    Abs2,
    Conj,
    Profile(ProfileKind, u8),
}

#[derive(Debug, Clone)]
pub struct CompiledExpr {
    ops: Vec<Op>,
    consts: Vec<C>,
    max_stack: usize,
}

impl CompiledExpr {
    pub fn from_expr(expr: &Expr) -> Self {
        let mut ops = Vec::new();
        let mut consts = Vec::new();
        emit(expr, &mut ops, &mut consts);
        // stack depth is static; compute it once
        let mut depth = 0usize;
        let mut max_stack = 0usize;
        for op in &ops {
            match op {
                Op::Const(_) | Op::Var(_) | Op::ConjVar(_) | Op::T => depth += 1,
                Op::Add | Op::Sub | Op::Mul | Op::Div => depth -= 1,
                _ => {}
            }
            max_stack = max_stack.max(depth);
        }
        CompiledExpr {
            ops,
            consts,
            max_stack,
        }
    }

    /// Number of scratch slots `eval` needs. Callers may pre-reserve.
    pub fn stack_depth(&self) -> usize {
        self.max_stack
    }

    /// Evaluate at `(z, t)`. `stack` is cleared and reused; pass the same
    /// `Vec` across calls to avoid reallocating.
    pub fn eval(&self, z: &[C], t: f64, stack: &mut Vec<C>) -> Result<C, EvalError> {
        stack.clear();
        stack.reserve(self.max_stack);
        for op in &self.ops {
            match *op {
                Op::Const(i) => stack.push(self.consts[i as usize]),
                Op::Var(j) => {
                    let j = j as usize;
                    if j >= z.len() {
                        return Err(EvalError::VarOutOfRange { idx: j, n: z.len() });
                    }
                    stack.push(z[j]);
                }
                Op::ConjVar(j) => {
                    let j = j as usize;
                    if j >= z.len() {
                        return Err(EvalError::VarOutOfRange { idx: j, n: z.len() });
                    }
                    stack.push(z[j].conj());
                }
                Op::T => stack.push(C::new(t, 0.0)),
                Op::Add => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a += b;
                }
                Op::Sub => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a -= b;
                }
                Op::Mul => {
                    let b = stack.pop().unwrap();
                    let a = stack.last_mut().unwrap();
                    *a *= b;
                }
                Op::Div => {
                    let b = stack.pop().unwrap();
                    if b.norm_sqr() == 0.0 {
                        return Err(EvalError::DivisionByZero);
                    }
                    let a = stack.last_mut().unwrap();
                    *a /= b;
                }
                Op::Pow(k) => {
                    let a = stack.last_mut().unwrap();
                    if k < 0 && a.norm_sqr() == 0.0 {
                        return Err(EvalError::ZeroToNegativePower);
                    }
                    *a = a.powi(k);
                }
                Op::Exp => {
                    let a = stack.last_mut().unwrap();
                    *a = a.exp();
                }
                Op::Log => {
                    let a = *stack.last().unwrap();
                    if a.im.abs() < 1e-14 && a.re <= 0.0 {
                        return Err(EvalError::LogDomain(a.re));
                    }
                    *stack.last_mut().unwrap() = a.ln();
                }
                Op::Re => {
                    let a = stack.last_mut().unwrap();
                    *a = C::new(a.re, 0.0);
                }
                Op::Im => {
                    let a = stack.last_mut().unwrap();
                    *a = C::new(a.im, 0.0);
                }
                Op::Abs2 => {
                    let a = stack.last_mut().unwrap();
                    *a = C::new(a.norm_sqr(), 0.0);
                }
                Op::Conj => {
                    let a = stack.last_mut().unwrap();
                    *a = a.conj();
                }
                Op::Profile(kind, ord) => {
                    let a = *stack.last().unwrap();
                    let v = profile::eval(kind, ord, a.re).map_err(EvalError::ProfileOrder)?;
                    *stack.last_mut().unwrap() = C::new(v, 0.0);
                }
            }
        }
        debug_assert_eq!(stack.len(), 1);
        Ok(stack.pop().unwrap())
    }
}

fn emit(expr: &Expr, ops: &mut Vec<Op>, consts: &mut Vec<C>) {
    match expr {
        Expr::Const(c) => {
            let idx = consts
                .iter()
                .position(|x| x == c)
                .unwrap_or_else(|| {
                    consts.push(*c);
                    consts.len() - 1
                });
            ops.push(Op::Const(idx as u32));
        }
        Expr::Var(j) => ops.push(Op::Var(*j as u32)),
        Expr::ConjVar(j) => ops.push(Op::ConjVar(*j as u32)),
        Expr::T => ops.push(Op::T),
        Expr::Add(a, b) => {
            emit(a, ops, consts);
            emit(b, ops, consts);
            ops.push(Op::Add);
        }
        Expr::Sub(a, b) => {
            emit(a, ops, consts);
            emit(b, ops, consts);
            ops.push(Op::Sub);
        }
        Expr::Mul(a, b) => {
            emit(a, ops, consts);
            emit(b, ops, consts);
            ops.push(Op::Mul);
        }
        Expr::Div(a, b) => {
            emit(a, ops, consts);
            emit(b, ops, consts);
            ops.push(Op::Div);
        }
        Expr::Pow(a, k) => {
            emit(a, ops, consts);
            ops.push(Op::Pow(*k));
        }
        Expr::Exp(a) => {
            emit(a, ops, consts);
            ops.push(Op::Exp);
        }
        Expr::Log(a) => {
            emit(a, ops, consts);
            ops.push(Op::Log);
        }
        Expr::Re(a) => {
            emit(a, ops, consts);
            ops.push(Op::Re);
        }
        Expr::Im(a) => {
            emit(a, ops, consts);
            ops.push(Op::Im);
        }
        Expr::Abs2(a) => {
            emit(a, ops, consts);
            ops.push(Op::Abs2);
        }
        Expr::Conj(a) => {
            emit(a, ops, consts);
            ops.push(Op::Conj);
        }
        Expr::Profile(kind, ord, a) => {
            emit(a, ops, consts);
            ops.push(Op::Profile(*kind, *ord));
        }
    }
}
