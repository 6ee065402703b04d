//! Model-based evaluation of symbolic expressions and function expressions.
//!
//! A [`Model`] bundles a concrete thread state, shared state, an
//! interpretation for named function symbols, and an assignment for primed
//! variables. Evaluation follows the satisfaction semantics: pure atoms are
//! evaluated under the stack, function expressions are applied to concrete
//! indices, and an `eta` picks its branch by evaluating the condition with
//! the index substituted.

use super::syntax::{Atom, FunctionExpr, Pure, SymExpr};
use crate::concrete::{eval_op, SharedState, ThreadState, Value};
use std::collections::BTreeMap;

/// Finite interpretation of a named content symbol.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FnInterp {
    pub table: BTreeMap<Value, Value>,
    pub default: Value,
}

impl FnInterp {
    pub fn from_cells(cells: &[Value]) -> FnInterp {
        FnInterp {
            table: cells
                .iter()
                .enumerate()
                .map(|(i, v)| (i as Value, *v))
                .collect(),
            default: 0,
        }
    }

    pub fn eval(&self, i: Value) -> Value {
        self.table.get(&i).copied().unwrap_or(self.default)
    }
}

#[derive(Debug, Clone)]
pub struct Model<'a> {
    pub tau: &'a ThreadState,
    pub sigma: &'a SharedState,
    pub fns: &'a BTreeMap<String, FnInterp>,
    /// Witness values for primed variables.
    pub primed: BTreeMap<(String, u64), Value>,
    /// Value of the symbolic thread count `N`.
    pub nthreads: Value,
    /// Indices over which embedded `g = F` atoms are checked pointwise.
    pub fneq_domain: (Value, Value),
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymEvalError {
    #[error("name {0} has no value in the model")]
    Unbound(String),
    #[error("primed variable {0}'{1} has no witness")]
    UnboundPrimed(String, u64),
    #[error("index variable used outside a function body")]
    UnboundIdx,
    #[error("no interpretation for function symbol {0}")]
    NoInterp(String),
    #[error("arithmetic fault: {0}")]
    Arith(String),
}

/// Evaluate a symbolic expression. `idx` binds the function-body index
/// variable when evaluating under a binder.
pub fn eval_sym(e: &SymExpr, m: &Model, idx: Option<Value>) -> Result<Value, SymEvalError> {
    match e {
        SymExpr::Const(c) => Ok(*c),
        SymExpr::Var(v) => {
            if let Ok(x) = m.tau.scalar(m.sigma, v) {
                return Ok(x);
            }
            // array names evaluate to their base location, as in the
            // concrete stack
            if let Ok((meta, _)) = m.tau.array(m.sigma, v) {
                return Ok(meta.base);
            }
            Err(SymEvalError::Unbound(v.clone()))
        }
        SymExpr::Primed(h, id) => m
            .primed
            .get(&(h.clone(), *id))
            .copied()
            .ok_or_else(|| SymEvalError::UnboundPrimed(h.clone(), *id)),
        SymExpr::Tid => Ok(m.tau.tid as Value),
        SymExpr::NThreads => Ok(m.nthreads),
        SymExpr::Size(a) => m
            .tau
            .array(m.sigma, a)
            .map(|(meta, _)| meta.len)
            .map_err(|e| SymEvalError::Unbound(e.to_string())),
        SymExpr::Idx => idx.ok_or(SymEvalError::UnboundIdx),
        SymExpr::Op(op, args) => {
            let mut vals = Vec::with_capacity(args.len());
            for a in args {
                vals.push(eval_sym(a, m, idx)?);
            }
            eval_op(*op, &vals).map_err(|e| SymEvalError::Arith(e.to_string()))
        }
        SymExpr::App(fe, arg) => {
            let at = eval_sym(arg, m, idx)?;
            eval_fexpr(fe, m, at)
        }
    }
}

/// `⟦F⟧(index)` under the model.
pub fn eval_fexpr(fe: &FunctionExpr, m: &Model, index: Value) -> Result<Value, SymEvalError> {
    match fe {
        FunctionExpr::Lambda(body) => eval_sym(body, m, Some(index)),
        FunctionExpr::Eta { cond, then, els } => {
            if pure_holds(cond, m, Some(index))? {
                eval_fexpr(then, m, index)
            } else {
                eval_fexpr(els, m, index)
            }
        }
        FunctionExpr::Symbol(s) => m
            .fns
            .get(s)
            .map(|f| f.eval(index))
            .ok_or_else(|| SymEvalError::NoInterp(s.clone())),
    }
}

/// Evaluate a pure conjunction. Embedded `g = F` atoms hold when the
/// interpretation of `g` agrees with `F` pointwise on the configured index
/// domain.
pub fn pure_holds(p: &Pure, m: &Model, idx: Option<Value>) -> Result<bool, SymEvalError> {
    for a in &p.0 {
        let ok = match a {
            Atom::Eq(x, y) => eval_sym(x, m, idx)? == eval_sym(y, m, idx)?,
            Atom::Ne(x, y) => eval_sym(x, m, idx)? != eval_sym(y, m, idx)?,
            Atom::Le(x, y) => eval_sym(x, m, idx)? <= eval_sym(y, m, idx)?,
            Atom::FnEq(g, fe) => {
                let interp = m
                    .fns
                    .get(g)
                    .ok_or_else(|| SymEvalError::NoInterp(g.clone()))?;
                let (lo, hi) = m.fneq_domain;
                let mut all = true;
                for j in lo..=hi {
                    if interp.eval(j) != eval_fexpr(fe, m, j)? {
                        all = false;
                        break;
                    }
                }
                all
            }
        };
        if !ok {
            return Ok(false);
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symheap::syntax::Pure;

    fn model_fixture() -> (ThreadState, SharedState, BTreeMap<String, FnInterp>) {
        let tau = ThreadState {
            scalars: BTreeMap::new(),
            arrays: BTreeMap::new(),
            heap: BTreeMap::new(),
            tid: 2,
        };
        (tau, SharedState::default(), BTreeMap::new())
    }

    fn m<'a>(
        tau: &'a ThreadState,
        sigma: &'a SharedState,
        fns: &'a BTreeMap<String, FnInterp>,
    ) -> Model<'a> {
        Model {
            tau,
            sigma,
            fns,
            primed: BTreeMap::new(),
            nthreads: 4,
            fneq_domain: (0, 7),
        }
    }

    #[test]
    fn constant_function_evaluates_everywhere() {
        let (tau, sigma, fns) = model_fixture();
        let f = FunctionExpr::lambda(SymExpr::Const(0));
        for i in -3..10 {
            assert_eq!(eval_fexpr(&f, &m(&tau, &sigma, &fns), i), Ok(0));
        }
    }

    #[test]
    fn eta_selects_then_branch_at_own_tid() {
        // eta(i = tid; lam i. 1; lam i. 0) at index = thread id → 1, else 0
        let (tau, sigma, fns) = model_fixture();
        let f = FunctionExpr::eta(
            Pure::atom(Atom::Eq(SymExpr::Idx, SymExpr::Tid)),
            FunctionExpr::lambda(SymExpr::Const(1)),
            FunctionExpr::lambda(SymExpr::Const(0)),
        );
        let model = m(&tau, &sigma, &fns);
        assert_eq!(eval_fexpr(&f, &model, 2), Ok(1));
        for i in [0, 1, 3, 4] {
            assert_eq!(eval_fexpr(&f, &model, i), Ok(0));
        }
    }

    #[test]
    fn nested_eta_chain_is_last_writer_wins() {
        // newest layer writes 9 at index 3 over a layer writing 5 at 3 and 4;
        // brute-force expectation computed index by index
        let (tau, sigma, mut fns) = model_fixture();
        fns.insert("f0".into(), FnInterp::from_cells(&[0, 0, 0, 0, 0, 0, 0, 0]));
        let older = FunctionExpr::eta(
            Pure(vec![Atom::Le(SymExpr::Const(3), SymExpr::Idx), Atom::Le(SymExpr::Idx, SymExpr::Const(4))]),
            FunctionExpr::lambda(SymExpr::Const(5)),
            FunctionExpr::Symbol("f0".into()),
        );
        let newer = FunctionExpr::eta(
            Pure::atom(Atom::Eq(SymExpr::Idx, SymExpr::Const(3))),
            FunctionExpr::lambda(SymExpr::Const(9)),
            older.clone(),
        );
        let model = m(&tau, &sigma, &fns);
        let expected = |i: Value| {
            if i == 3 {
                9
            } else if i == 4 {
                5
            } else {
                0
            }
        };
        for i in 0..8 {
            assert_eq!(eval_fexpr(&newer, &model, i), Ok(expected(i)), "index {i}");
        }
    }
}
