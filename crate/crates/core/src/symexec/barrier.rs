//! The barrier rule: race check, then epoch commit.
//!
//! After a successful race check, each array's per-thread eta write layers
//! are folded into one fresh shared snapshot symbol describing the
//! collective post-barrier contents: a cell is written iff *some* thread's
//! store condition selects it. For a store at index `tid` the writer of
//! cell `k` is thread `k`, so `tid` is replaced by the cell index; for a
//! `tid`-free index the store condition keeps an existentially witnessed
//! thread variable. Store indices that mention `tid` non-trivially cannot
//! be inverted here, and the whole array havocs to an unconstrained fresh
//! symbol — an over-approximation that only costs precision.

use super::exec::stable_hash;
use super::norace::{no_race, peel_layers, NoRaceWitness};
use super::ExecCtx;
use crate::symheap::simplify::simplify_fexpr;
use crate::symheap::{
    simplify, subst_fexpr, subst_pure, subst_sym, Atom, FunctionExpr, Pure, Spatial, SymExpr,
    SymbolicHeap, Target,
};

/// Does the expression mention `tid`?
fn mentions_tid(e: &SymExpr) -> bool {
    let mut found = false;
    fn walk(e: &SymExpr, found: &mut bool) {
        match e {
            SymExpr::Tid => *found = true,
            SymExpr::Op(_, args) => args.iter().for_each(|a| walk(a, found)),
            SymExpr::App(_, arg) => walk(arg, found),
            _ => {}
        }
    }
    walk(e, &mut found);
    found
}

/// Fold the eta write layers of `contents` into the collective post-epoch
/// function. Returns `None` when a layer's index cannot be inverted (the
/// caller havocs the array).
pub fn commit_contents(
    h: &SymbolicHeap,
    contents: &FunctionExpr,
    fresh_writer: &SymExpr,
) -> Option<FunctionExpr> {
    let (layers, terminal) = peel_layers(h, contents);
    if layers.is_empty() {
        return Some(terminal);
    }
    let mut committed = terminal;
    // rebuild oldest-first so the newest layer ends up outermost
    for (cond, then) in layers.into_iter().rev() {
        let Some((index, guard)) = super::norace::split_layer(&cond) else {
            return None;
        };
        let (written_cond, value) = if index == SymExpr::Tid {
            // writer of cell k is thread k: substitute tid := k everywhere
            let mut c = subst_pure(&guard, &Target::Tid, &SymExpr::Idx);
            c.push(Atom::Eq(SymExpr::Idx, SymExpr::Idx)); // keeps the layer shape recognizable
            let body = match &then {
                FunctionExpr::Lambda(b) => (**b).clone(),
                other => SymExpr::app(other.clone(), SymExpr::Idx),
            };
            (
                c,
                FunctionExpr::lambda(subst_sym(&body, &Target::Tid, &SymExpr::Idx)),
            )
        } else if !mentions_tid(&index) {
            // all threads wrote the same cell: one existential writer
            // witnesses the condition
            let mut c = subst_pure(&guard, &Target::Tid, fresh_writer);
            c.push(Atom::Eq(SymExpr::Idx, index.clone()));
            let body = match &then {
                FunctionExpr::Lambda(b) => (**b).clone(),
                other => SymExpr::app(other.clone(), SymExpr::Idx),
            };
            (
                c,
                FunctionExpr::lambda(subst_sym(&body, &Target::Tid, fresh_writer)),
            )
        } else {
            return None;
        };
        committed = FunctionExpr::eta(written_cond, value, committed);
    }
    Some(simplify_fexpr(&committed))
}

/// The barrier rule over a symbolic state: `⊥` (a potential race, with
/// witness) when the race check fails; otherwise the state passes through
/// with each heap's arrays committed to fresh shared snapshot symbols.
pub fn exec_barrier(
    state: &[SymbolicHeap],
    ctx: &ExecCtx,
) -> Result<Vec<SymbolicHeap>, NoRaceWitness> {
    no_race(state, ctx)?;
    let mut out = Vec::new();
    for h in state {
        let h2 = commit_heap(h, ctx);
        let h2 = simplify(&h2);
        if !out.contains(&h2) {
            out.push(h2);
        }
    }
    Ok(out)
}

pub(super) fn commit_heap(h: &SymbolicHeap, ctx: &ExecCtx) -> SymbolicHeap {
    let mut h2 = h.clone();
    let writer = ctx.fresh.primed("w");
    for s in &mut h2.spatial {
        let Spatial::ArraySeg { base, contents, .. } = s else {
            continue;
        };
        let SymExpr::Var(array) = base.clone() else {
            continue;
        };
        let (layers, _) = peel_layers(h, contents);
        if layers.is_empty() {
            continue;
        }
        match commit_contents(h, contents, &writer) {
            Some(folded) => {
                let name = format!("{array}#{:012x}", stable_hash(&folded));
                h2.pure.push(Atom::FnEq(name.clone(), folded));
                *contents = FunctionExpr::Symbol(name.clone());
                ctx.mark_shared_fn(name);
            }
            None => {
                // uninvertible store index: havoc the array's contents
                let name = format!("{array}#havoc{:08x}", stable_hash(&(h, &array)));
                *contents = FunctionExpr::Symbol(name.clone());
                ctx.mark_shared_fn(name);
            }
        }
    }
    h2
}
