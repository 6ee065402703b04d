//! Storage model: shared and thread-local states, expression evaluation.
//!
//! Values are 64-bit two's-complement integers with wrapping arithmetic.
//! `cos` and `sqrt` are total deterministic integer functions (`sqrt` is the
//! integer square root, `cos` a fixed pure stand-in); the symbolic side
//! treats both as uninterpreted, and every evaluator in the crate must agree
//! on one interpretation, which is this one.

use crate::lang::{BoolExpr, Expr, Ident, OpKind};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

pub type Value = i64;

/// Base location and element count of an allocated array.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ArrayMeta {
    pub base: Value,
    pub len: i64,
}

/// The shared state `(s, h)`: shared scalars and array bases in the stack,
/// array cells in the heap.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SharedState {
    pub scalars: BTreeMap<Ident, Value>,
    pub arrays: BTreeMap<Ident, ArrayMeta>,
    pub heap: BTreeMap<Value, Value>,
}

/// A thread state `(s, h, i)`: private stack, private heap, thread id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ThreadState {
    pub scalars: BTreeMap<Ident, Value>,
    pub arrays: BTreeMap<Ident, ArrayMeta>,
    pub heap: BTreeMap<Value, Value>,
    pub tid: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivByZero,
    #[error("variable {0} is not bound")]
    Unbound(Ident),
    #[error("array {0} is not allocated")]
    NoSuchArray(Ident),
}

/// Integer square root (floor), 0 for negative input.
fn isqrt(x: Value) -> Value {
    if x <= 0 {
        return 0;
    }
    let mut r = (x as f64).sqrt() as Value;
    while r > 0 && r.saturating_mul(r) > x {
        r -= 1;
    }
    while (r + 1).saturating_mul(r + 1) <= x {
        r += 1;
    }
    r
}

/// Fixed pure stand-in for `cos` over integers: a hash folded into
/// [-100, 100]. Any pure function works; it only has to be one function.
fn icos(x: Value) -> Value {
    let h = (x as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    ((h >> 33) % 201) as Value - 100
}

/// Apply an operator to already-evaluated operands.
pub fn eval_op(op: OpKind, args: &[Value]) -> Result<Value, EvalError> {
    Ok(match op {
        OpKind::Add => args[0].wrapping_add(args[1]),
        OpKind::Sub => args[0].wrapping_sub(args[1]),
        OpKind::Mul => args[0].wrapping_mul(args[1]),
        OpKind::Div => {
            if args[1] == 0 {
                return Err(EvalError::DivByZero);
            }
            args[0].wrapping_div(args[1])
        }
        OpKind::Mod => {
            if args[1] == 0 {
                return Err(EvalError::DivByZero);
            }
            args[0].wrapping_rem(args[1])
        }
        OpKind::Neg => args[0].wrapping_neg(),
        OpKind::Cos => icos(args[0]),
        OpKind::Sqrt => isqrt(args[0]),
    })
}

impl ThreadState {
    /// Look up a scalar: private stack first, then the shared stack.
    pub fn scalar(&self, sigma: &SharedState, name: &str) -> Result<Value, EvalError> {
        if let Some(v) = self.scalars.get(name) {
            return Ok(*v);
        }
        sigma
            .scalars
            .get(name)
            .copied()
            .ok_or_else(|| EvalError::Unbound(name.to_string()))
    }

    pub fn array<'a>(
        &'a self,
        sigma: &'a SharedState,
        name: &str,
    ) -> Result<(&'a ArrayMeta, bool), EvalError> {
        if let Some(m) = self.arrays.get(name) {
            return Ok((m, false));
        }
        sigma
            .arrays
            .get(name)
            .map(|m| (m, true))
            .ok_or_else(|| EvalError::NoSuchArray(name.to_string()))
    }
}

/// `⟦e⟧_{τ,σ}` — deterministic expression evaluation.
pub fn eval_expr(e: &Expr, tau: &ThreadState, sigma: &SharedState) -> Result<Value, EvalError> {
    match e {
        Expr::Const(c) => Ok(*c),
        Expr::Var(v) => tau.scalar(sigma, v),
        Expr::Tid => Ok(tau.tid as Value),
        Expr::Size(a) => Ok(tau.array(sigma, a)?.0.len),
        Expr::Op(op, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval_expr(a, tau, sigma)?);
            }
            eval_op(*op, &vals)
        }
    }
}

pub fn eval_bool(b: &BoolExpr, tau: &ThreadState, sigma: &SharedState) -> Result<bool, EvalError> {
    Ok(match b {
        BoolExpr::Lt(x, y) => eval_expr(x, tau, sigma)? < eval_expr(y, tau, sigma)?,
        BoolExpr::Eq(x, y) => eval_expr(x, tau, sigma)? == eval_expr(y, tau, sigma)?,
        BoolExpr::And(x, y) => eval_bool(x, tau, sigma)? && eval_bool(y, tau, sigma)?,
        BoolExpr::Not(x) => !eval_bool(x, tau, sigma)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn empty_sigma() -> SharedState {
        SharedState::default()
    }

    fn tau(tid: usize) -> ThreadState {
        ThreadState {
            scalars: BTreeMap::new(),
            arrays: BTreeMap::new(),
            heap: BTreeMap::new(),
            tid,
        }
    }

    #[test]
    fn tid_evaluates_to_thread_id() {
        assert_eq!(eval_expr(&Expr::Tid, &tau(3), &empty_sigma()), Ok(3));
    }

    #[test]
    fn arithmetic_over_private_stack() {
        let mut t = tau(0);
        t.scalars.insert("x".into(), 5);
        let e = Expr::bin(OpKind::Mul, Expr::Const(2), Expr::Var("x".into()));
        assert_eq!(eval_expr(&e, &t, &empty_sigma()), Ok(10));
    }

    #[test]
    fn size_returns_declared_element_count() {
        let mut s = empty_sigma();
        s.arrays.insert("A".into(), ArrayMeta { base: 16, len: 8 });
        assert_eq!(eval_expr(&Expr::Size("A".into()), &tau(0), &s), Ok(8));
    }

    #[test]
    fn division_by_zero_is_an_error() {
        let e = Expr::bin(OpKind::Div, Expr::Const(1), Expr::Const(0));
        assert_eq!(
            eval_expr(&e, &tau(0), &empty_sigma()),
            Err(EvalError::DivByZero)
        );
    }

    #[test]
    fn isqrt_matches_brute_force() {
        for x in -5..1000 {
            let r = isqrt(x);
            if x < 0 {
                assert_eq!(r, 0);
            } else {
                assert!(r * r <= x && (r + 1) * (r + 1) > x, "isqrt({x}) = {r}");
            }
        }
    }
}
