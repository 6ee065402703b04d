//! The per-command symbolic execution rules and their lifting to sets.

use super::ExecCtx;
use crate::lang::{BoolExpr, Command, Expr, OpKind};
use crate::prover::{prove_pure_all, sat, ProofResult, SatOutcome};
use crate::symheap::{
    apply, heap_to_string, simplify, subst_heap, Atom, FunctionExpr, Pure, Spatial, SymExpr,
    SymbolicHeap, Target,
};

/// Translate a program expression into a symbolic expression.
pub fn sym_of_expr(e: &Expr) -> SymExpr {
    match e {
        Expr::Const(c) => SymExpr::Const(*c),
        Expr::Var(v) => SymExpr::Var(v.clone()),
        Expr::Tid => SymExpr::Tid,
        Expr::Size(a) => SymExpr::Size(a.clone()),
        Expr::Op(op, args) => SymExpr::Op(*op, args.iter().map(sym_of_expr).collect()),
    }
}

/// Disjunctive normal form of a guard, as alternative atom conjunctions.
/// `a < b` becomes `a + 1 <= b`; negation flips atoms. `None` when the
/// blowup cap is hit.
pub fn bool_dnf(b: &BoolExpr, positive: bool) -> Option<Vec<Vec<Atom>>> {
    const CAP: usize = 64;
    let out = match (b, positive) {
        (BoolExpr::Lt(x, y), true) => vec![vec![Atom::Le(
            SymExpr::add(sym_of_expr(x), SymExpr::Const(1)),
            sym_of_expr(y),
        )]],
        (BoolExpr::Lt(x, y), false) => vec![vec![Atom::Le(sym_of_expr(y), sym_of_expr(x))]],
        (BoolExpr::Eq(x, y), true) => vec![vec![Atom::Eq(sym_of_expr(x), sym_of_expr(y))]],
        (BoolExpr::Eq(x, y), false) => vec![vec![Atom::Ne(sym_of_expr(x), sym_of_expr(y))]],
        (BoolExpr::Not(inner), pos) => bool_dnf(inner, !pos)?,
        (BoolExpr::And(x, y), true) => {
            let xs = bool_dnf(x, true)?;
            let ys = bool_dnf(y, true)?;
            let mut prod = Vec::new();
            for a in &xs {
                for b in &ys {
                    let mut conj = a.clone();
                    conj.extend(b.iter().cloned());
                    prod.push(conj);
                }
            }
            prod
        }
        (BoolExpr::And(x, y), false) => {
            let mut alts = bool_dnf(x, false)?;
            alts.extend(bool_dnf(y, false)?);
            alts
        }
    };
    if out.len() > CAP {
        None
    } else {
        Some(out)
    }
}

/// Why a path ended at ⊥.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BottomInfo {
    pub reason: String,
    pub heap: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CmdOutcome {
    /// Surviving result heaps (more than one only for disjunctive assumes).
    Heaps(Vec<SymbolicHeap>),
    /// Path infeasible.
    Top,
    /// Definite error on this heap.
    Bottom(BottomInfo),
}

fn bounds_goal(index: &SymExpr, array: &str) -> Vec<Atom> {
    vec![
        Atom::Le(SymExpr::Const(0), index.clone()),
        // index < size(a)  ⟺  index + 1 ≤ size(a)
        Atom::Le(
            SymExpr::add(index.clone(), SymExpr::Const(1)),
            SymExpr::Size(array.to_string()),
        ),
    ]
}

fn segment_mut<'a>(
    h: &'a mut SymbolicHeap,
    array: &str,
) -> Option<&'a mut FunctionExpr> {
    h.spatial.iter_mut().find_map(|s| match s {
        Spatial::ArraySeg { base, contents, .. } if *base == SymExpr::var(array) => {
            Some(contents)
        }
        _ => None,
    })
}

fn segment_contents(h: &SymbolicHeap, array: &str) -> Option<FunctionExpr> {
    h.spatial.iter().find_map(|s| match s {
        Spatial::ArraySeg { base, contents, .. } if *base == SymExpr::var(array) => {
            Some(contents.clone())
        }
        _ => None,
    })
}

/// Execute one non-barrier command on a single symbolic heap.
pub fn exec_command(cmd: &Command, h: &SymbolicHeap, ctx: &ExecCtx) -> CmdOutcome {
    match cmd {
        Command::Barrier => unreachable!("barriers go through exec_barrier"),
        Command::Assign { var, value } => {
            // v := e  ⟹  v = e[v'/v] ∧ (Π ∧ Σ)[v'/v]
            let vp = ctx.fresh.primed(var);
            let mut h2 = subst_heap(h, &Target::Var(var.clone()), &vp);
            let value = crate::symheap::subst_sym(&sym_of_expr(value), &Target::Var(var.clone()), &vp);
            h2.pure.push(Atom::Eq(SymExpr::Var(var.clone()), value));
            CmdOutcome::Heaps(vec![h2])
        }
        Command::Load { var, array, index } => {
            let idx = sym_of_expr(index);
            if prove_pure_all(&h.pure, &bounds_goal(&idx, array), &ctx.prover)
                != ProofResult::Proven
            {
                return CmdOutcome::Bottom(BottomInfo {
                    reason: format!(
                        "cannot prove 0 <= {} < size({array})",
                        crate::symheap::sym_to_string(&idx)
                    ),
                    heap: heap_to_string(h),
                });
            }
            let Some(contents) = segment_contents(h, array) else {
                return CmdOutcome::Bottom(BottomInfo {
                    reason: format!("array {array} is not in the symbolic footprint"),
                    heap: heap_to_string(h),
                });
            };
            // v = f(e[v'/v]) ∧ (Π ∧ Σ ∗ a ↦ f)[v'/v]
            let vp = ctx.fresh.primed(var);
            let mut h2 = subst_heap(h, &Target::Var(var.clone()), &vp);
            let idx2 = crate::symheap::subst_sym(&idx, &Target::Var(var.clone()), &vp);
            let contents2 =
                crate::symheap::subst_fexpr(&contents, &Target::Var(var.clone()), &vp);
            h2.pure
                .push(Atom::Eq(SymExpr::Var(var.clone()), apply(&contents2, &idx2)));
            CmdOutcome::Heaps(vec![h2])
        }
        Command::Store {
            array,
            index,
            value,
        } => {
            let idx = sym_of_expr(index);
            if prove_pure_all(&h.pure, &bounds_goal(&idx, array), &ctx.prover)
                != ProofResult::Proven
            {
                return CmdOutcome::Bottom(BottomInfo {
                    reason: format!(
                        "cannot prove 0 <= {} < size({array})",
                        crate::symheap::sym_to_string(&idx)
                    ),
                    heap: heap_to_string(h),
                });
            }
            let mut h2 = h.clone();
            let Some(contents) = segment_mut(&mut h2, array) else {
                return CmdOutcome::Bottom(BottomInfo {
                    reason: format!("array {array} is not in the symbolic footprint"),
                    heap: heap_to_string(h),
                });
            };
            let old = contents.clone();
            // φ: i ↦ Π ∧ i = e
            let mut phi = h.pure.clone();
            phi.push(Atom::Eq(SymExpr::Idx, idx));
            let layer = FunctionExpr::eta(
                phi,
                FunctionExpr::lambda(sym_of_expr(value)),
                old,
            );
            // deterministic content-addressed name so identical re-commits
            // and re-stores deduplicate syntactically
            let g = format!("{array}${:012x}", stable_hash(&layer));
            *contents = FunctionExpr::Symbol(g.clone());
            h2.pure.push(Atom::FnEq(g, layer));
            CmdOutcome::Heaps(vec![h2])
        }
        Command::Assume(b) => {
            let Some(alts) = bool_dnf(b, true) else {
                // guard too large to normalize: keep the heap unconstrained,
                // the sound over-approximation for assume
                return CmdOutcome::Heaps(vec![h.clone()]);
            };
            let mut out = Vec::new();
            for alt in alts {
                let mut h2 = h.clone();
                for a in alt {
                    h2.pure.push(a);
                }
                if sat(&h2.pure, &ctx.prover) != SatOutcome::Unsat {
                    out.push(h2);
                }
            }
            if out.is_empty() {
                CmdOutcome::Top
            } else {
                CmdOutcome::Heaps(out)
            }
        }
        Command::Assert(b) => {
            // Π ⊢ b  ⟺  every disjunct of ¬b is inconsistent with Π
            let Some(neg_alts) = bool_dnf(b, false) else {
                return CmdOutcome::Bottom(BottomInfo {
                    reason: "assert guard too large to normalize".into(),
                    heap: heap_to_string(h),
                });
            };
            for alt in neg_alts {
                let mut refut = h.pure.clone();
                for a in alt {
                    refut.push(a);
                }
                if sat(&refut, &ctx.prover) != SatOutcome::Unsat {
                    return CmdOutcome::Bottom(BottomInfo {
                        reason: format!("cannot prove {cmd}"),
                        heap: heap_to_string(h),
                    });
                }
            }
            CmdOutcome::Heaps(vec![h.clone()])
        }
    }
}

pub(super) fn stable_hash<T: std::hash::Hash>(t: &T) -> u64 {
    use std::hash::{Hash, Hasher};
    struct Fnv(u64);
    impl Hasher for Fnv {
        fn finish(&self) -> u64 {
            self.0
        }
        fn write(&mut self, bytes: &[u8]) {
            for b in bytes {
                self.0 ^= *b as u64;
                self.0 = self.0.wrapping_mul(0x0000_0100_0000_01b3);
            }
        }
    }
    let mut h = Fnv(0xcbf2_9ce4_8422_2325);
    t.hash(&mut h);
    h.finish() & 0xffff_ffff_ffff
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SetOutcome {
    State(Vec<SymbolicHeap>),
    /// Some member heap stepped to ⊥ — the whole system errors, with that
    /// heap as witness.
    Bottom(BottomInfo),
}

/// Lift execution to a symbolic state: union of per-heap results,
/// ⊤-pruned members dropped, ⊥ on any member erroring.
pub fn exec_set(cmd: &Command, state: &[SymbolicHeap], ctx: &ExecCtx) -> SetOutcome {
    let mut out: Vec<SymbolicHeap> = Vec::new();
    for h in state {
        match exec_command(cmd, h, ctx) {
            CmdOutcome::Bottom(info) => return SetOutcome::Bottom(info),
            CmdOutcome::Top => {}
            CmdOutcome::Heaps(hs) => {
                for h2 in hs {
                    let h2 = simplify(&h2);
                    if !out.contains(&h2) {
                        out.push(h2);
                    }
                }
            }
        }
    }
    SetOutcome::State(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::parse_kernel;
    use crate::prover::ProverCtx;
    use crate::symheap::{parse_heap, Pure};

    fn ctx_for(kernel: &'static str) -> (crate::lang::Kernel, ProverCtx) {
        let k = parse_kernel(kernel).unwrap();
        let mut p = ProverCtx::default();
        p.array_bases = k.arrays().map(|a| a.name.clone()).collect();
        (k, p)
    }

    fn initial_bounds() -> Pure {
        crate::symheap::parse_heap("0 <= tid & tid + 1 <= N | emp")
            .unwrap()
            .pure
    }

    #[test]
    fn constant_assignment_binds_and_primes() {
        let (k, p) = ctx_for("kernel() { int v; v = 5; }");
        let ctx = ExecCtx::new(&k, p);
        let h = SymbolicHeap::emp();
        let cmd = Command::Assign {
            var: "v".into(),
            value: Expr::Const(5),
        };
        let CmdOutcome::Heaps(hs) = exec_command(&cmd, &h, &ctx) else {
            panic!()
        };
        assert_eq!(hs.len(), 1);
        assert!(hs[0]
            .pure
            .0
            .contains(&Atom::Eq(SymExpr::var("v"), SymExpr::Const(5))));
    }

    #[test]
    fn unprovable_bounds_is_bottom() {
        let (k, p) = ctx_for("kernel(int A[]) { A[tid] = 1; }");
        let ctx = ExecCtx::new(&k, p);
        // no bounds facts in the pure part at all
        let h = parse_heap("true | A |-> A[0, size(A) - 1 | f_A]").unwrap();
        let cmd = Command::Store {
            array: "A".into(),
            index: Expr::Tid,
            value: Expr::Const(1),
        };
        let CmdOutcome::Bottom(info) = exec_command(&cmd, &h, &ctx) else {
            panic!("expected bottom");
        };
        assert!(info.reason.contains("cannot prove"));
    }

    #[test]
    fn provable_bounds_store_adds_an_eta_layer() {
        let (k, p) = ctx_for("kernel(int A[]) { A[tid] = 1; }");
        let ctx = ExecCtx::new(&k, p);
        let mut h = parse_heap("true | A |-> A[0, size(A) - 1 | f_A]").unwrap();
        h.pure = initial_bounds().and(&Pure::atom(Atom::Le(
            SymExpr::NThreads,
            SymExpr::Size("A".into()),
        )));
        let cmd = Command::Store {
            array: "A".into(),
            index: Expr::Tid,
            value: Expr::Const(1),
        };
        let CmdOutcome::Heaps(hs) = exec_command(&cmd, &h, &ctx) else {
            panic!("expected success");
        };
        let has_layer = hs[0]
            .pure
            .0
            .iter()
            .any(|a| matches!(a, Atom::FnEq(_, FunctionExpr::Eta { .. })));
        assert!(has_layer, "store introduced a named eta layer");
    }

    #[test]
    fn contradictory_assume_is_top_and_feasible_assume_constrains() {
        let (k, p) = ctx_for("kernel() { assume(tid < 0); }");
        let ctx = ExecCtx::new(&k, p);
        let mut h = SymbolicHeap::emp();
        h.pure = initial_bounds();
        let tl0 = Command::Assume(BoolExpr::Lt(Expr::Tid, Expr::Const(0)));
        assert_eq!(exec_command(&tl0, &h, &ctx), CmdOutcome::Top);
        let ok = Command::Assume(BoolExpr::Lt(Expr::Tid, Expr::Const(10)));
        assert!(matches!(exec_command(&ok, &h, &ctx), CmdOutcome::Heaps(v) if v.len() == 1));
    }

    #[test]
    fn assert_proven_keeps_heap_unproven_bottoms() {
        let (k, p) = ctx_for("kernel() { assert(0 <= tid); }");
        let ctx = ExecCtx::new(&k, p);
        let mut h = SymbolicHeap::emp();
        h.pure = initial_bounds();
        let provable = Command::Assert(BoolExpr::Not(Box::new(BoolExpr::Lt(
            Expr::Tid,
            Expr::Const(0),
        ))));
        assert!(matches!(
            exec_command(&provable, &h, &ctx),
            CmdOutcome::Heaps(_)
        ));
        let unprovable = Command::Assert(BoolExpr::Lt(Expr::Tid, Expr::Const(1)));
        assert!(matches!(
            exec_command(&unprovable, &h, &ctx),
            CmdOutcome::Bottom(_)
        ));
    }

    #[test]
    fn set_lifting_drops_top_and_propagates_bottom() {
        let (k, p) = ctx_for("kernel(int A[]) { assume(tid < 1); }");
        let ctx = ExecCtx::new(&k, p);
        let mut live = SymbolicHeap::emp();
        live.pure = initial_bounds();
        let mut dead = SymbolicHeap::emp();
        dead.pure = Pure(vec![Atom::Le(
            SymExpr::add(SymExpr::Tid, SymExpr::Const(1)),
            SymExpr::Const(0),
        )])
        .and(&initial_bounds());
        let guard = Command::Assume(BoolExpr::Lt(Expr::Tid, Expr::Const(10)));
        let SetOutcome::State(out) = exec_set(&guard, &[live.clone(), dead], &ctx) else {
            panic!()
        };
        // the dead heap (tid < 0 contradiction with 0 <= tid) was pruned
        assert_eq!(out.len(), 1);
        // bottom propagates with the witness heap recorded
        let store = Command::Store {
            array: "A".into(),
            index: Expr::Tid,
            value: Expr::Const(0),
        };
        let with_seg = parse_heap("true | A |-> A[0, size(A) - 1 | f_A]").unwrap();
        match exec_set(&store, &[live, with_seg], &ctx) {
            SetOutcome::Bottom(info) => assert!(info.reason.contains("cannot prove")),
            other => panic!("expected bottom, got {other:?}"),
        }
    }
}
