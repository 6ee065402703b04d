//! Model-based satisfaction of a full symbolic heap.
//!
//! The designated heap (shared or thread-private, per caller) must be
//! covered *exactly* by the spatial part: footprints of the separating
//! conjuncts are computed from the stack, checked pairwise disjoint, and
//! their union must equal the heap's domain with matching values.
//! Existentially quantified primed variables are searched over a finite,
//! caller-supplied value domain; a search space that is too large is an
//! explicit error, never a silent `false`.

use super::eval::{eval_fexpr, eval_sym, pure_holds, FnInterp, Model, SymEvalError};
use super::syntax::{Spatial, SymbolicHeap};
use crate::concrete::{SharedState, ThreadState, Value};
use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub struct SatisfiesCfg {
    /// Candidate values for each existential variable.
    pub value_domain: Vec<Value>,
    /// Cap on the total number of assignments tried.
    pub max_assignments: u64,
    pub nthreads: Value,
    pub fneq_domain: (Value, Value),
}

impl Default for SatisfiesCfg {
    fn default() -> Self {
        SatisfiesCfg {
            value_domain: (-8..=8).collect(),
            max_assignments: 250_000,
            nthreads: 2,
            fneq_domain: (0, 7),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SatisfiesError {
    #[error("existential search space too large: {vars} variables over {domain} values")]
    DomainTooLarge { vars: usize, domain: usize },
    #[error(transparent)]
    Eval(#[from] SymEvalError),
}

/// Does `(tau, sigma)` with the designated `heap` satisfy `h`?
pub fn satisfies(
    tau: &ThreadState,
    sigma: &SharedState,
    heap: &BTreeMap<Value, Value>,
    fns: &BTreeMap<String, FnInterp>,
    h: &SymbolicHeap,
    cfg: &SatisfiesCfg,
) -> Result<bool, SatisfiesError> {
    let existentials: Vec<(String, u64)> = h.primed_vars().into_iter().collect();
    let domain = &cfg.value_domain;
    let total = (domain.len() as u64).checked_pow(existentials.len() as u32);
    match total {
        Some(t) if t <= cfg.max_assignments => {}
        _ => {
            return Err(SatisfiesError::DomainTooLarge {
                vars: existentials.len(),
                domain: domain.len(),
            })
        }
    }

    let mut counters = vec![0usize; existentials.len()];
    loop {
        let primed: BTreeMap<(String, u64), Value> = existentials
            .iter()
            .zip(&counters)
            .map(|(k, &c)| (k.clone(), domain[c]))
            .collect();
        let m = Model {
            tau,
            sigma,
            fns,
            primed,
            nthreads: cfg.nthreads,
            fneq_domain: cfg.fneq_domain,
        };
        match witness_holds(heap, h, &m) {
            Ok(true) => return Ok(true),
            Ok(false) => {}
            // a fault under one witness assignment just means that
            // assignment does not satisfy the heap
            Err(SymEvalError::Arith(_)) => {}
            Err(e) => return Err(e.into()),
        }
        // odometer over the assignment space
        let mut k = 0;
        loop {
            if k == existentials.len() {
                return Ok(false);
            }
            counters[k] += 1;
            if counters[k] < domain.len() {
                break;
            }
            counters[k] = 0;
            k += 1;
        }
    }
}

fn witness_holds(
    heap: &BTreeMap<Value, Value>,
    h: &SymbolicHeap,
    m: &Model,
) -> Result<bool, SymEvalError> {
    if !pure_holds(&h.pure, m, None)? {
        return Ok(false);
    }
    // footprint of each conjunct, then exact-partition check
    let mut claimed: BTreeMap<Value, Value> = BTreeMap::new();
    for s in &h.spatial {
        match s {
            Spatial::PointsTo(addr, val) => {
                let a = eval_sym(addr, m, None)?;
                let v = eval_sym(val, m, None)?;
                if claimed.insert(a, v).is_some() {
                    return Ok(false); // conjuncts overlap
                }
            }
            Spatial::ArraySeg {
                base,
                lo,
                hi,
                contents,
            } => {
                let b = eval_sym(base, m, None)?;
                let l = eval_sym(lo, m, None)?;
                let u = eval_sym(hi, m, None)?;
                for j in l..=u {
                    let v = eval_fexpr(contents, m, j)?;
                    if claimed.insert(b + j, v).is_some() {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(claimed == *heap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symheap::syntax::{Atom, FunctionExpr, Pure, SymExpr};

    fn tau_with(scalars: &[(&str, Value)]) -> ThreadState {
        ThreadState {
            scalars: scalars.iter().map(|(n, v)| (n.to_string(), *v)).collect(),
            arrays: BTreeMap::new(),
            heap: BTreeMap::new(),
            tid: 0,
        }
    }

    fn cfg() -> SatisfiesCfg {
        SatisfiesCfg::default()
    }

    #[test]
    fn points_to_satisfied_by_exact_singleton_heap() {
        let tau = tau_with(&[("x", 100)]);
        let sigma = SharedState::default();
        let heap = BTreeMap::from([(100, 7)]);
        let h = SymbolicHeap::new(
            Pure::truth(),
            vec![Spatial::PointsTo(SymExpr::var("x"), SymExpr::Const(7))],
        );
        let fns = BTreeMap::new();
        assert_eq!(satisfies(&tau, &sigma, &heap, &fns, &h, &cfg()), Ok(true));
    }

    #[test]
    fn empty_heap_satisfies_emp_and_falsifies_points_to() {
        let tau = tau_with(&[("x", 100)]);
        let sigma = SharedState::default();
        let empty = BTreeMap::new();
        let fns = BTreeMap::new();
        assert_eq!(
            satisfies(&tau, &sigma, &empty, &fns, &SymbolicHeap::emp(), &cfg()),
            Ok(true)
        );
        let pt = SymbolicHeap::new(
            Pure::truth(),
            vec![Spatial::PointsTo(SymExpr::var("x"), SymExpr::Const(7))],
        );
        assert_eq!(satisfies(&tau, &sigma, &empty, &fns, &pt, &cfg()), Ok(false));
    }

    #[test]
    fn array_segment_matches_pointwise_contents() {
        // heap covering exactly base..base+3 with values k²
        use crate::concrete::ArrayMeta;
        use crate::lang::OpKind;
        let mut sigma = SharedState::default();
        sigma.arrays.insert("A".into(), ArrayMeta { base: 40, len: 4 });
        let tau = tau_with(&[]);
        let heap: BTreeMap<Value, Value> = (0..4).map(|k| (40 + k, k * k)).collect();
        let fns = BTreeMap::new();
        let h = SymbolicHeap::new(
            Pure::truth(),
            vec![Spatial::ArraySeg {
                base: SymExpr::var("A"),
                lo: SymExpr::Const(0),
                hi: SymExpr::Const(3),
                contents: FunctionExpr::lambda(SymExpr::bin(
                    OpKind::Mul,
                    SymExpr::Idx,
                    SymExpr::Idx,
                )),
            }],
        );
        assert_eq!(satisfies(&tau, &sigma, &heap, &fns, &h, &cfg()), Ok(true));
        // a heap with one extra cell no longer satisfies it
        let mut bigger = heap.clone();
        bigger.insert(99, 0);
        assert_eq!(satisfies(&tau, &sigma, &bigger, &fns, &h, &cfg()), Ok(false));
    }

    #[test]
    fn separating_conjunction_requires_disjoint_split() {
        let tau = tau_with(&[("x", 10), ("y", 10)]);
        let sigma = SharedState::default();
        let heap = BTreeMap::from([(10, 1)]);
        let fns = BTreeMap::new();
        // x |-> 1 * y |-> 1 with x = y = 10: the two conjuncts overlap
        let h = SymbolicHeap::new(
            Pure::truth(),
            vec![
                Spatial::PointsTo(SymExpr::var("x"), SymExpr::Const(1)),
                Spatial::PointsTo(SymExpr::var("y"), SymExpr::Const(1)),
            ],
        );
        assert_eq!(satisfies(&tau, &sigma, &heap, &fns, &h, &cfg()), Ok(false));
    }

    #[test]
    fn existential_witness_found_by_search() {
        // ∃v'. x |-> v' ∧ v' <= 3
        let tau = tau_with(&[("x", 10)]);
        let sigma = SharedState::default();
        let heap = BTreeMap::from([(10, 2)]);
        let fns = BTreeMap::new();
        let vp = SymExpr::Primed("v".into(), 0);
        let h = SymbolicHeap::new(
            Pure::atom(Atom::Le(vp.clone(), SymExpr::Const(3))),
            vec![Spatial::PointsTo(SymExpr::var("x"), vp)],
        );
        assert_eq!(satisfies(&tau, &sigma, &heap, &fns, &h, &cfg()), Ok(true));
    }

    #[test]
    fn substitution_instance_implies_existential() {
        // if (τ,σ) ⊨ h[c/v'] for a constant c then (τ,σ) ⊨ h
        let tau = tau_with(&[("x", 10)]);
        let sigma = SharedState::default();
        let heap = BTreeMap::from([(10, 5)]);
        let fns = BTreeMap::new();
        let vp = SymExpr::Primed("v".into(), 0);
        let h = SymbolicHeap::new(
            Pure::atom(Atom::Le(SymExpr::Const(0), vp.clone())),
            vec![Spatial::PointsTo(SymExpr::var("x"), vp)],
        );
        let instance = crate::symheap::subst_heap(
            &h,
            &crate::symheap::Target::Primed("v".into(), 0),
            &SymExpr::Const(5),
        );
        assert_eq!(
            satisfies(&tau, &sigma, &heap, &fns, &instance, &cfg()),
            Ok(true)
        );
        assert_eq!(satisfies(&tau, &sigma, &heap, &fns, &h, &cfg()), Ok(true));
    }

    #[test]
    fn oversized_search_space_is_an_explicit_error() {
        let tau = tau_with(&[]);
        let sigma = SharedState::default();
        let fns = BTreeMap::new();
        let atoms: Vec<Atom> = (0..12)
            .map(|i| Atom::Le(SymExpr::Primed("v".into(), i), SymExpr::Const(8)))
            .collect();
        let h = SymbolicHeap::new(Pure(atoms), vec![]);
        assert!(matches!(
            satisfies(&tau, &sigma, &BTreeMap::new(), &fns, &h, &cfg()),
            Err(SatisfiesError::DomainTooLarge { .. })
        ));
    }
}
