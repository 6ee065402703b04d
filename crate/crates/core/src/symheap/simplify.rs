//! Equi-satisfiable normalization: constant folding, trivial-atom pruning,
//! eta-branch resolution and shadowed-layer collapse.
//!
//! Everything here is purely syntactic (constants and literal atom shapes);
//! prover-backed simplification lives with the symbolic executor. The
//! invariant is that evaluation agrees pointwise before and after.

use super::syntax::{Atom, FunctionExpr, Pure, Spatial, SymExpr, SymbolicHeap};
use crate::concrete::eval_op;
use std::collections::BTreeSet;

pub fn simplify(h: &SymbolicHeap) -> SymbolicHeap {
    SymbolicHeap {
        pure: simplify_pure(&h.pure),
        spatial: h
            .spatial
            .iter()
            .map(|s| match s {
                Spatial::PointsTo(a, b) => Spatial::PointsTo(fold(a), fold(b)),
                Spatial::ArraySeg {
                    base,
                    lo,
                    hi,
                    contents,
                } => Spatial::ArraySeg {
                    base: fold(base),
                    lo: fold(lo),
                    hi: fold(hi),
                    contents: simplify_fexpr(contents),
                },
            })
            .collect(),
    }
}

/// Truth status of an atom decidable by syntax alone.
fn atom_truth(a: &Atom) -> Option<bool> {
    match a {
        Atom::Eq(x, y) => {
            if x == y {
                return Some(true);
            }
            match (x, y) {
                (SymExpr::Const(a), SymExpr::Const(b)) => Some(a == b),
                _ => None,
            }
        }
        Atom::Ne(x, y) => {
            if x == y {
                return Some(false);
            }
            match (x, y) {
                (SymExpr::Const(a), SymExpr::Const(b)) => Some(a != b),
                _ => None,
            }
        }
        Atom::Le(x, y) => {
            if x == y {
                return Some(true);
            }
            match (x, y) {
                (SymExpr::Const(a), SymExpr::Const(b)) => Some(a <= b),
                _ => None,
            }
        }
        Atom::FnEq(..) => None,
    }
}

fn fold_atom(a: &Atom) -> Atom {
    match a {
        Atom::Eq(x, y) => Atom::Eq(fold(x), fold(y)),
        Atom::Ne(x, y) => Atom::Ne(fold(x), fold(y)),
        Atom::Le(x, y) => Atom::Le(fold(x), fold(y)),
        Atom::FnEq(n, fe) => Atom::FnEq(n.clone(), simplify_fexpr(fe)),
    }
}

/// Drop duplicate and trivially-true atoms. A trivially-false atom is kept:
/// the conjunction is unsatisfiable and the execution layer prunes it.
pub fn simplify_pure(p: &Pure) -> Pure {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for a in &p.0 {
        let a = fold_atom(a);
        if atom_truth(&a) == Some(true) {
            continue;
        }
        if seen.insert(a.clone()) {
            out.push(a);
        }
    }
    Pure(out)
}

/// Conjunction truth decidable by syntax: all atoms true → true, any atom
/// false → false.
fn pure_truth(p: &Pure) -> Option<bool> {
    let mut all_true = true;
    for a in &p.0 {
        match atom_truth(a) {
            Some(false) => return Some(false),
            Some(true) => {}
            None => all_true = false,
        }
    }
    if all_true {
        Some(true)
    } else {
        None
    }
}

pub fn simplify_fexpr(fe: &FunctionExpr) -> FunctionExpr {
    match fe {
        FunctionExpr::Lambda(body) => FunctionExpr::lambda(fold(body)),
        FunctionExpr::Symbol(s) => FunctionExpr::Symbol(s.clone()),
        FunctionExpr::Eta { cond, then, els } => {
            let cond = simplify_pure(cond);
            let then = simplify_fexpr(then);
            let els = simplify_fexpr(els);
            match pure_truth(&cond) {
                Some(true) => then,
                Some(false) => els,
                None => {
                    // collapse a shadowed inner layer: if the inner condition
                    // syntactically contains every atom of the outer one, the
                    // inner layer is unreachable (its condition implies the
                    // outer condition, which is false on the else path)
                    let els = match &els {
                        FunctionExpr::Eta {
                            cond: inner_cond,
                            els: inner_els,
                            ..
                        } if covers(&cond, inner_cond) => (**inner_els).clone(),
                        _ => els,
                    };
                    FunctionExpr::eta(cond, then, els)
                }
            }
        }
    }
}

/// `outer` covers `inner` when every atom of `outer` appears in `inner`
/// (so inner ⟹ outer).
fn covers(outer: &Pure, inner: &Pure) -> bool {
    let inner_atoms: BTreeSet<&Atom> = inner.0.iter().collect();
    !outer.0.is_empty() && outer.0.iter().all(|a| inner_atoms.contains(a))
}

/// Bottom-up constant folding. Faulting operations (division by zero) are
/// left unfolded.
pub fn fold(e: &SymExpr) -> SymExpr {
    match e {
        SymExpr::Op(op, args) => {
            let args: Vec<SymExpr> = args.iter().map(fold).collect();
            let consts: Option<Vec<i64>> = args
                .iter()
                .map(|a| match a {
                    SymExpr::Const(c) => Some(*c),
                    _ => None,
                })
                .collect();
            if let Some(vals) = consts {
                if let Ok(v) = eval_op(*op, &vals) {
                    return SymExpr::Const(v);
                }
            }
            SymExpr::Op(*op, args)
        }
        SymExpr::App(fe, arg) => {
            let fe2 = simplify_fexpr(fe);
            let arg2 = fold(arg);
            match fe2 {
                // β-reduce: (lam i. body)(e) → body[e/i]
                FunctionExpr::Lambda(_) => fold(&super::syntax::apply(&fe2, &arg2)),
                _ => SymExpr::app(fe2, arg2),
            }
        }
        _ => e.clone(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::OpKind;

    #[test]
    fn false_condition_reduces_to_else() {
        let f = FunctionExpr::eta(
            Pure::atom(Atom::Eq(SymExpr::Const(1), SymExpr::Const(0))),
            FunctionExpr::Symbol("f".into()),
            FunctionExpr::Symbol("g".into()),
        );
        assert_eq!(simplify_fexpr(&f), FunctionExpr::Symbol("g".into()));
    }

    #[test]
    fn true_condition_reduces_to_then() {
        let f = FunctionExpr::eta(
            Pure::truth(),
            FunctionExpr::Symbol("f".into()),
            FunctionExpr::Symbol("g".into()),
        );
        assert_eq!(simplify_fexpr(&f), FunctionExpr::Symbol("f".into()));
    }

    #[test]
    fn shadowed_layer_is_collapsed() {
        // outer writes at i = x under context C; inner wrote at i = x under a
        // superset condition — inner is dead
        let outer_cond = Pure(vec![Atom::Eq(SymExpr::Idx, SymExpr::var("x"))]);
        let inner_cond = Pure(vec![
            Atom::Eq(SymExpr::Idx, SymExpr::var("x")),
            Atom::Le(SymExpr::Const(0), SymExpr::var("x")),
        ]);
        let inner = FunctionExpr::eta(
            inner_cond,
            FunctionExpr::lambda(SymExpr::Const(1)),
            FunctionExpr::Symbol("f0".into()),
        );
        let outer = FunctionExpr::eta(
            outer_cond.clone(),
            FunctionExpr::lambda(SymExpr::Const(2)),
            inner,
        );
        let simplified = simplify_fexpr(&outer);
        assert_eq!(
            simplified,
            FunctionExpr::eta(
                outer_cond,
                FunctionExpr::lambda(SymExpr::Const(2)),
                FunctionExpr::Symbol("f0".into())
            )
        );
    }

    #[test]
    fn folding_is_wrapping_and_skips_faults() {
        let e = SymExpr::bin(
            OpKind::Add,
            SymExpr::Const(i64::MAX),
            SymExpr::Const(1),
        );
        assert_eq!(fold(&e), SymExpr::Const(i64::MIN));
        let div0 = SymExpr::bin(OpKind::Div, SymExpr::Const(1), SymExpr::Const(0));
        assert_eq!(fold(&div0), div0);
    }

    #[test]
    fn duplicate_and_trivial_atoms_are_dropped() {
        let x = SymExpr::var("x");
        let p = Pure(vec![
            Atom::Eq(x.clone(), x.clone()),
            Atom::Le(x.clone(), SymExpr::Const(3)),
            Atom::Le(x.clone(), SymExpr::Const(3)),
        ]);
        assert_eq!(
            simplify_pure(&p),
            Pure(vec![Atom::Le(x, SymExpr::Const(3))])
        );
    }
}
