//! The entailment engine: sound, deliberately incomplete.
//!
//! Queries are refutation-based: `prove(ctx ⊢ goal)` succeeds iff
//! `ctx ∧ ¬goal` is refuted by the integer-aware Fourier–Motzkin core in
//! [`fm`], over the abstracted vocabulary built in [`translate`]. Every
//! failure direction — nonlinear terms, exhausted budgets, undecided eta
//! conditions — degrades to *not proven* / *unknown*, never to a wrong
//! `proven`/`unsat`.
//!
//! An external SMT-LIB solver can be configured as an escape hatch; its
//! answers are trusted only in the `unsat` (proving) direction.

mod fm;
mod smt;
mod translate;

pub use fm::{LinCon, LinExpr, Refutation};

use crate::symheap::{Atom, FunctionExpr, Pure, Spatial, SymExpr, SymbolicHeap};
use std::cell::Cell;
use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;

/// Per-analysis prover configuration.
#[derive(Debug, Clone)]
pub struct ProverCtx {
    /// Array parameter names: distinct arrays are axiomatically disjoint
    /// allocations, mirroring the separating conjunction of the initial
    /// state.
    pub array_bases: BTreeSet<String>,
    /// Optional external SMT-LIB solver executable.
    pub solver: Option<PathBuf>,
    /// Elimination-step budget per query; exhaustion fails toward
    /// not-proven/unknown.
    pub max_steps: u64,
    /// Unfold depth for function applications and eta conditions.
    pub max_unfold_depth: u32,
    /// Cap on disequality case splits per refutation.
    pub split_cap: u32,
}

impl Default for ProverCtx {
    fn default() -> Self {
        ProverCtx {
            array_bases: BTreeSet::new(),
            solver: None,
            max_steps: 10_000,
            max_unfold_depth: 8,
            split_cap: 16,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ProofResult {
    Proven,
    NotProven,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SatOutcome {
    /// No contradiction found: satisfiable under the abstraction (which may
    /// mask nonlinear or deep-integer unsatisfiability — the conservative
    /// direction for path exploration).
    Sat,
    Unsat,
    /// Budget exhausted; callers treat this like `Sat`.
    Unknown,
}

/// One query's working state: the abstraction table, context constraints,
/// function definitions in scope, and the step budget.
pub(crate) struct Solver {
    pub(crate) atoms: HashMap<SymExpr, usize>,
    pub(crate) defs: std::collections::BTreeMap<String, FunctionExpr>,
    pub(crate) context_cons: Vec<LinCon>,
    pub(crate) decision_memo: HashMap<Vec<Atom>, Option<bool>>,
    budget: Cell<u64>,
    split_cap: u32,
    depth: u32,
    smt: Option<PathBuf>,
    budget_hit: Cell<bool>,
}

impl Solver {
    fn new(ctx: &Pure, p: &ProverCtx) -> Solver {
        let mut s = Solver {
            atoms: HashMap::new(),
            defs: std::collections::BTreeMap::new(),
            context_cons: Vec::new(),
            decision_memo: HashMap::new(),
            budget: Cell::new(p.max_steps),
            split_cap: p.split_cap,
            depth: p.max_unfold_depth,
            smt: p.solver.clone(),
            budget_hit: Cell::new(false),
        };
        for a in &ctx.0 {
            if let Atom::FnEq(name, fe) = a {
                s.defs.entry(name.clone()).or_insert_with(|| fe.clone());
            }
        }
        // context constraints are accumulated incrementally; eta decisions
        // made while translating atom k see atoms 0..k, which is sound
        // (fewer facts, weaker decisions)
        for a in &ctx.0 {
            let depth = s.depth;
            let cs = s.atom_cons(a, depth);
            s.context_cons.extend(cs);
        }
        s
    }

    pub(crate) fn refute_cons(&self, cons: &[LinCon]) -> bool {
        match fm::refute(cons, &self.budget, self.split_cap) {
            Refutation::Refuted => true,
            Refutation::Unknown => {
                if self.budget.get() == 0 {
                    self.budget_hit.set(true);
                }
                if let Some(exe) = &self.smt {
                    return smt::refute_external(exe, cons, self.atoms.len()) == Some(true);
                }
                false
            }
        }
    }

    fn prove_atom_now(&mut self, goal: &Atom) -> bool {
        if matches!(goal, Atom::FnEq(..)) {
            return false;
        }
        let depth = self.depth;
        let mut cons = self.context_cons.clone();
        let neg = self.negate_atom(goal, depth);
        if neg.is_empty() {
            return false;
        }
        cons.extend(neg);
        self.refute_cons(&cons)
    }

    fn unsat_now(&mut self) -> bool {
        let cons = self.context_cons.clone();
        self.refute_cons(&cons)
    }
}

/// `ctx ⊢ goal` for a single pure atom.
pub fn prove_pure(ctx: &Pure, goal: &Atom, p: &ProverCtx) -> ProofResult {
    let mut s = Solver::new(ctx, p);
    if s.prove_atom_now(goal) {
        ProofResult::Proven
    } else {
        ProofResult::NotProven
    }
}

/// `ctx ⊢ goal₁ ∧ … ∧ goalₙ`.
pub fn prove_pure_all(ctx: &Pure, goals: &[Atom], p: &ProverCtx) -> ProofResult {
    let mut s = Solver::new(ctx, p);
    if goals.iter().all(|g| s.prove_atom_now(g)) {
        ProofResult::Proven
    } else {
        ProofResult::NotProven
    }
}

/// Satisfiability of a pure conjunction under the abstraction.
pub fn sat(ctx: &Pure, p: &ProverCtx) -> SatOutcome {
    let mut s = Solver::new(ctx, p);
    if s.unsat_now() {
        SatOutcome::Unsat
    } else if s.budget_hit.get() {
        SatOutcome::Unknown
    } else {
        SatOutcome::Sat
    }
}

/// Split `e` into an array base and the remaining offset when the additive
/// structure names exactly one array base positively.
fn split_base(e: &SymExpr, bases: &BTreeSet<String>) -> Option<(String, Vec<(i64, SymExpr)>)> {
    fn walk(e: &SymExpr, sign: i64, terms: &mut Vec<(i64, SymExpr)>) {
        match e {
            SymExpr::Op(crate::lang::OpKind::Add, args) => {
                walk(&args[0], sign, terms);
                walk(&args[1], sign, terms);
            }
            SymExpr::Op(crate::lang::OpKind::Sub, args) => {
                walk(&args[0], sign, terms);
                walk(&args[1], -sign, terms);
            }
            _ => terms.push((sign, e.clone())),
        }
    }
    let mut terms = Vec::new();
    walk(e, 1, &mut terms);
    let mut base: Option<String> = None;
    let mut rest = Vec::new();
    for (sign, t) in terms {
        match &t {
            SymExpr::Var(v) if bases.contains(v) && sign == 1 && base.is_none() => {
                base = Some(v.clone());
            }
            SymExpr::Var(v) if bases.contains(v) => return None, // negative or repeated base
            _ => rest.push((sign, t)),
        }
    }
    base.map(|b| (b, rest))
}

/// `compare` over an explicit combined context: provably equal values.
pub fn compare_ctx(ctx: &Pure, e1: &SymExpr, e2: &SymExpr, p: &ProverCtx) -> bool {
    prove_pure(ctx, &Atom::Eq(e1.clone(), e2.clone()), p) == ProofResult::Proven
}

/// `disjoint` over an explicit combined context: provably different values.
/// Addresses rooted at distinct array parameters are disjoint by the
/// allocation axiom.
pub fn disjoint_ctx(ctx: &Pure, e1: &SymExpr, e2: &SymExpr, p: &ProverCtx) -> bool {
    if let (Some((b1, _)), Some((b2, _))) = (split_base(e1, &p.array_bases), split_base(e2, &p.array_bases))
    {
        if b1 != b2 {
            return true;
        }
    }
    prove_pure(ctx, &Atom::Ne(e1.clone(), e2.clone()), p) == ProofResult::Proven
}

/// `compare((e1, H1), (e2, H2))`: the two expressions provably denote the
/// same value under the heaps' combined pure context. Returns `false` when
/// it cannot be stated, including when the contexts cannot coexist at all.
pub fn compare(e1: &SymExpr, h1: &SymbolicHeap, e2: &SymExpr, h2: &SymbolicHeap, p: &ProverCtx) -> bool {
    let ctx = h1.pure.and(&h2.pure);
    if sat(&ctx, p) == SatOutcome::Unsat {
        return false;
    }
    compare_ctx(&ctx, e1, e2, p)
}

/// `disjoint((e1, H1), (e2, H2))`: provably different values under the
/// combined context; `false` when it cannot be stated.
pub fn disjoint(e1: &SymExpr, h1: &SymbolicHeap, e2: &SymExpr, h2: &SymbolicHeap, p: &ProverCtx) -> bool {
    let ctx = h1.pure.and(&h2.pure);
    if sat(&ctx, p) == SatOutcome::Unsat {
        return false;
    }
    disjoint_ctx(&ctx, e1, e2, p)
}

/// Entailment goals the executor generates.
#[derive(Debug, Clone)]
pub enum Consequent {
    Atom(Atom),
    Atoms(Vec<Atom>),
    Heap(SymbolicHeap),
}

/// `ant ⊢ cons`. Spatial consequents are matched one-to-one against the
/// antecedent's conjuncts (addresses and contents provably equal under the
/// antecedent's pure part); the consequent's pure atoms must each be
/// provable. Anything outside these shapes is not proven.
pub fn prove_entailment(ant: &SymbolicHeap, cons: &Consequent, p: &ProverCtx) -> ProofResult {
    match cons {
        Consequent::Atom(a) => prove_pure(&ant.pure, a, p),
        Consequent::Atoms(atoms) => prove_pure_all(&ant.pure, atoms, p),
        Consequent::Heap(h) => {
            if ant.spatial.len() != h.spatial.len() {
                return ProofResult::NotProven;
            }
            let mut used = vec![false; ant.spatial.len()];
            if !match_spatial(&ant.pure, &ant.spatial, &h.spatial, &mut used, 0, p) {
                return ProofResult::NotProven;
            }
            prove_pure_all(&ant.pure, &h.pure.0, p)
        }
    }
}

fn match_spatial(
    ctx: &Pure,
    ant: &[Spatial],
    cons: &[Spatial],
    used: &mut [bool],
    at: usize,
    p: &ProverCtx,
) -> bool {
    if at == cons.len() {
        return true;
    }
    for (i, cand) in ant.iter().enumerate() {
        if used[i] || !spatial_matches(ctx, cand, &cons[at], p) {
            continue;
        }
        used[i] = true;
        if match_spatial(ctx, ant, cons, used, at + 1, p) {
            return true;
        }
        used[i] = false;
    }
    false
}

fn spatial_matches(ctx: &Pure, a: &Spatial, c: &Spatial, p: &ProverCtx) -> bool {
    match (a, c) {
        (Spatial::PointsTo(a1, v1), Spatial::PointsTo(a2, v2)) => {
            compare_ctx(ctx, a1, a2, p) && compare_ctx(ctx, v1, v2, p)
        }
        (
            Spatial::ArraySeg {
                base: b1,
                lo: l1,
                hi: h1,
                contents: f1,
            },
            Spatial::ArraySeg {
                base: b2,
                lo: l2,
                hi: h2,
                contents: f2,
            },
        ) => {
            compare_ctx(ctx, b1, b2, p)
                && compare_ctx(ctx, l1, l2, p)
                && compare_ctx(ctx, h1, h2, p)
                && f1 == f2
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests;
