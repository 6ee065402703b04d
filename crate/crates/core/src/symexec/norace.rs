//! The barrier-time race check.
//!
//! Two fresh thread-instance variables `i ≠ j` (both ≥ 0) instantiate every
//! ordered pair of heaps in the symbolic state, including a heap paired
//! with itself — two instances of one heap is the primary SIMD race source.
//! The shared cells each instance *claims to have written* are then
//! compared pairwise: wherever the two addresses cannot be proven apart,
//! the values must be provably equal, else the pair is a race witness.
//!
//! Cells come in three shapes:
//!
//! * scalar points-to facts, compared directly;
//! * eta write layers of array segments — a cell at `base + e` holding the
//!   written value, guarded by the layer's captured context (plus the
//!   negation of any newer layer's index, which shadows it);
//! * the base (pre-epoch) content function of a segment, compared as an
//!   indexed family against the other instance's base function at one
//!   shared index.
//!
//! Write layers are *not* compared against base functions: a cell written
//! by one thread and merely carried, unwritten, in the other's view is not
//! an access conflict. Pairs whose combined context is unsatisfiable are
//! skipped — the two instantiations cannot coexist (for example both
//! instances on a `tid == 0` branch).

use super::ExecCtx;
use crate::prover::{compare_ctx, sat, SatOutcome};
use crate::symheap::{
    apply, heap_to_string, pure_to_string, rename, simplify, subst_pure, sym_to_string, Atom,
    FunctionExpr, Pure, Spatial, SymExpr, SymbolicHeap, Target,
};
use serde::{Deserialize, Serialize};

/// A failed comparison: the pair of instantiated heaps and the
/// address/value pair that could not be reconciled.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NoRaceWitness {
    pub heap_a: String,
    pub heap_b: String,
    pub address_a: String,
    pub address_b: String,
    pub value_a: String,
    pub value_b: String,
}

/// One shared cell claimed by an instantiated heap.
#[derive(Debug, Clone)]
enum Cell {
    /// `addr |-> value`, guarded (guard is `true` for plain points-to).
    Claim {
        base: Option<String>,
        addr: SymExpr,
        value: SymExpr,
        guard: Pure,
    },
    /// A whole segment's pre-epoch contents as an indexed family.
    Family {
        base: Option<String>,
        base_expr: SymExpr,
        lo: SymExpr,
        hi: SymExpr,
        contents: FunctionExpr,
    },
}

/// Peel the current epoch's eta write layers off a content function,
/// resolving per-epoch layer symbols through the heap's pure definitions.
/// Peeling stops at shared symbols (initial contents and committed
/// snapshots) — those are the pre-epoch state, not writes. Returns the
/// layers (newest first) and the terminal pre-epoch function.
pub(super) fn peel_layers(
    h: &SymbolicHeap,
    contents: &FunctionExpr,
    shared_fns: &std::collections::BTreeSet<String>,
) -> (Vec<(Pure, FunctionExpr)>, FunctionExpr) {
    let mut layers = Vec::new();
    let mut at = contents.clone();
    let mut fuel = 64;
    loop {
        fuel -= 1;
        if fuel == 0 {
            return (layers, at);
        }
        match at {
            FunctionExpr::Eta { cond, then, els } => {
                layers.push((cond, (*then).clone()));
                at = *els;
            }
            FunctionExpr::Symbol(ref s) => {
                let root = s.split('@').next().unwrap_or(s);
                if shared_fns.contains(s) || shared_fns.contains(root) {
                    return (layers, at);
                }
                match h.pure.fn_def(s) {
                    Some(def) => at = def.clone(),
                    None => return (layers, at),
                }
            }
            FunctionExpr::Lambda(_) => return (layers, at),
        }
    }
}

/// The written-index expression of a store layer: the `i = e` atom the
/// store rule appended to the captured context.
pub(super) fn split_layer(cond: &Pure) -> Option<(SymExpr, Pure)> {
    let mut index = None;
    let mut guard = Vec::new();
    for a in &cond.0 {
        match a {
            Atom::Eq(SymExpr::Idx, e) if index.is_none() => index = Some(e.clone()),
            _ => guard.push(a.clone()),
        }
    }
    index.map(|e| (e, Pure(guard)))
}

fn cells_of(
    h: &SymbolicHeap,
    rctx_bases: &std::collections::BTreeSet<String>,
    shared_fns: &std::collections::BTreeSet<String>,
) -> Vec<Cell> {
    let mut out = Vec::new();
    for s in &h.spatial {
        match s {
            Spatial::PointsTo(addr, value) => out.push(Cell::Claim {
                base: base_of(addr, rctx_bases),
                addr: addr.clone(),
                value: value.clone(),
                guard: Pure::truth(),
            }),
            Spatial::ArraySeg {
                base,
                lo,
                hi,
                contents,
            } => {
                let base_name = base_of(base, rctx_bases);
                let (layers, terminal) = peel_layers(h, contents, shared_fns);
                let mut outer: Vec<SymExpr> = Vec::new();
                for (cond, then) in layers {
                    match split_layer(&cond) {
                        Some((e, mut guard)) => {
                            // shadowing: a newer layer at the same index
                            // overwrote this one
                            for o in &outer {
                                guard.push(Atom::Ne(e.clone(), o.clone()));
                            }
                            let value = apply(&then, &e);
                            out.push(Cell::Claim {
                                base: base_name.clone(),
                                addr: SymExpr::add(base.clone(), e.clone()),
                                value,
                                guard,
                            });
                            outer.push(e);
                        }
                        None => {
                            // unrecognized layer shape (hand-built heaps):
                            // treat the remaining chain as an indexed family
                            out.push(Cell::Family {
                                base: base_name.clone(),
                                base_expr: base.clone(),
                                lo: lo.clone(),
                                hi: hi.clone(),
                                contents: FunctionExpr::eta(
                                    cond.clone(),
                                    then.clone(),
                                    terminal.clone(),
                                ),
                            });
                            break;
                        }
                    }
                }
                out.push(Cell::Family {
                    base: base_name,
                    base_expr: base.clone(),
                    lo: lo.clone(),
                    hi: hi.clone(),
                    contents: terminal,
                });
            }
        }
    }
    out
}

/// The array parameter a renamed base expression is rooted at, if any.
fn base_of(
    e: &SymExpr,
    bases: &std::collections::BTreeSet<String>,
) -> Option<String> {
    match e {
        SymExpr::Var(v) => {
            let root = v.split('@').next().unwrap_or(v);
            if bases.contains(root) {
                Some(v.clone())
            } else {
                None
            }
        }
        SymExpr::Op(crate::lang::OpKind::Add, args) => {
            base_of(&args[0], bases).or_else(|| base_of(&args[1], bases))
        }
        _ => None,
    }
}

/// Check the race-freedom of a symbolic state. `Ok(())` means every
/// possibly-overlapping cell pair provably agrees; otherwise the first
/// failing pair is returned. Prover incompleteness only ever produces a
/// witness (an over-approximation of races), never a false pass.
pub fn no_race(state: &[SymbolicHeap], ctx: &ExecCtx) -> Result<(), NoRaceWitness> {
    let rctx = ctx.rename_ctx();
    let shared_fns = rctx.shared_fns.clone();
    let bases: std::collections::BTreeSet<String> = ctx
        .kernel
        .arrays()
        .map(|p| p.name.clone())
        .collect();
    let i = ctx.fresh.primed("tid@i");
    let j = ctx.fresh.primed("tid@j");
    let side = Pure(vec![
        Atom::Le(SymExpr::Const(0), i.clone()),
        Atom::Le(SymExpr::Const(0), j.clone()),
        Atom::Ne(i.clone(), j.clone()),
    ]);
    for ha in state {
        for hb in state {
            let ra = rename(&simplify(ha), &i, "i", &rctx);
            let rb = rename(&simplify(hb), &j, "j", &rctx);
            let pair_ctx = ra.pure.and(&rb.pure).and(&side);
            if sat(&pair_ctx, &ctx.prover) == SatOutcome::Unsat {
                continue; // the two instances cannot coexist
            }
            let cells_a = cells_of(&ra, &bases, &shared_fns);
            let cells_b = cells_of(&rb, &bases, &shared_fns);
            for ca in &cells_a {
                for cb in &cells_b {
                    if let Some((addr_a, addr_b, val_a, val_b)) =
                        conflicting(ca, cb, &pair_ctx, ctx)
                    {
                        return Err(NoRaceWitness {
                            heap_a: heap_to_string(&ra),
                            heap_b: heap_to_string(&rb),
                            address_a: sym_to_string(&addr_a),
                            address_b: sym_to_string(&addr_b),
                            value_a: sym_to_string(&val_a),
                            value_b: sym_to_string(&val_b),
                        });
                    }
                }
            }
        }
    }
    Ok(())
}

/// Is this cell pair a potential conflict the prover cannot discharge?
///
/// Implements the paper's implication per pair: where the addresses cannot
/// be proven apart (the overlap hypothesis is satisfiable), the values must
/// be provably equal under that hypothesis.
fn conflicting(
    ca: &Cell,
    cb: &Cell,
    pair_ctx: &Pure,
    ctx: &ExecCtx,
) -> Option<(SymExpr, SymExpr, SymExpr, SymExpr)> {
    match (ca, cb) {
        (
            Cell::Claim {
                base: base_a,
                addr: addr_a,
                value: val_a,
                guard: guard_a,
            },
            Cell::Claim {
                base: base_b,
                addr: addr_b,
                value: val_b,
                guard: guard_b,
            },
        ) => {
            if distinct_allocations(base_a, base_b) {
                return None;
            }
            let mut overlap = pair_ctx.and(guard_a).and(guard_b);
            overlap.push(Atom::Eq(addr_a.clone(), addr_b.clone()));
            if sat(&overlap, &ctx.prover) == SatOutcome::Unsat {
                return None; // provably disjoint (or guards cannot co-hold)
            }
            if compare_ctx(&overlap, val_a, val_b, &ctx.prover) {
                return None;
            }
            Some((addr_a.clone(), addr_b.clone(), val_a.clone(), val_b.clone()))
        }
        (
            Cell::Family {
                base: base_a,
                base_expr: be_a,
                lo: lo_a,
                hi: hi_a,
                contents: fa,
            },
            Cell::Family {
                base: base_b,
                base_expr: be_b,
                lo: lo_b,
                hi: hi_b,
                contents: fb,
            },
        ) => {
            if distinct_allocations(base_a, base_b) {
                return None;
            }
            // one shared index at the overlap: base_a + k = base_b + k
            let k = ctx.fresh.primed("k");
            let mut overlap = pair_ctx.clone();
            overlap.push(Atom::Le(lo_a.clone(), k.clone()));
            overlap.push(Atom::Le(k.clone(), hi_a.clone()));
            overlap.push(Atom::Le(lo_b.clone(), k.clone()));
            overlap.push(Atom::Le(k.clone(), hi_b.clone()));
            overlap.push(Atom::Eq(be_a.clone(), be_b.clone()));
            if sat(&overlap, &ctx.prover) == SatOutcome::Unsat {
                return None;
            }
            let va = apply(fa, &k);
            let vb = apply(fb, &k);
            if compare_ctx(&overlap, &va, &vb, &ctx.prover) {
                return None;
            }
            Some((
                SymExpr::add(be_a.clone(), k.clone()),
                SymExpr::add(be_b.clone(), k),
                va,
                vb,
            ))
        }
        // a written cell against the other instance's pre-epoch view is not
        // an access conflict
        (Cell::Claim { .. }, Cell::Family { .. })
        | (Cell::Family { .. }, Cell::Claim { .. }) => None,
    }
}

/// Distinct array parameters are disjoint allocations; renamed private
/// bases with different tags are distinct per-thread allocations too.
fn distinct_allocations(a: &Option<String>, b: &Option<String>) -> bool {
    match (a, b) {
        (Some(a), Some(b)) => a != b,
        _ => false,
    }
}

/// Instantiate an eta condition at a concrete index expression (used by the
/// barrier commit below and by tests).
pub(super) fn cond_at(cond: &Pure, at: &SymExpr) -> Pure {
    subst_pure(cond, &Target::Idx, at)
}
