//! Thread-local and global transition rules.

use super::state::{eval_bool, eval_expr, EvalError, SharedState, ThreadState, Value};
use crate::lang::{Command, Ident, Kernel, Node, NodeId};
use serde::{Deserialize, Serialize};

/// Result of one thread executing one command.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepOutcome {
    /// Normal step to a new thread/shared state pair.
    Next(ThreadState, SharedState),
    /// The thread suspended at a barrier, snapshotting the shared state.
    Suspended(ThreadState, SharedState),
    /// The path has no continuation (failed `assume`).
    Top,
    /// Runtime error: out-of-bounds access, failed `assert`, division by zero.
    Bottom(String),
}

/// What kind of ⊥ a path hit; the oracle report distinguishes genuine
/// runtime faults from the strict-mode barrier race rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BottomKind {
    RuntimeError,
    BarrierSnapshotRace,
}

fn bounds_check(idx: Value, len: i64, array: &Ident) -> Result<(), String> {
    if idx < 0 || idx >= len {
        Err(format!(
            "index {idx} out of bounds for array {array} of size {len}"
        ))
    } else {
        Ok(())
    }
}

fn bottom_from_eval(e: EvalError) -> StepOutcome {
    StepOutcome::Bottom(e.to_string())
}

/// Execute one (non-start, non-exit) command in thread state `tau` and
/// shared state `sigma`, per the thread-local rules: private writes go to
/// the thread stack/heap, shared writes to the shared stack/heap, `barrier`
/// suspends, `assume(false)` is ⊤, `assert(false)` and out-of-bounds
/// accesses are ⊥.
pub fn step_thread(cmd: &Command, tau: &ThreadState, sigma: &SharedState) -> StepOutcome {
    match cmd {
        Command::Assign { var, value } => {
            let n = match eval_expr(value, tau, sigma) {
                Ok(n) => n,
                Err(e) => return bottom_from_eval(e),
            };
            write_scalar(var, n, tau, sigma)
        }
        Command::Store {
            array,
            index,
            value,
        } => {
            let n = match eval_expr(value, tau, sigma) {
                Ok(n) => n,
                Err(e) => return bottom_from_eval(e),
            };
            let m = match eval_expr(index, tau, sigma) {
                Ok(m) => m,
                Err(e) => return bottom_from_eval(e),
            };
            let (meta, shared) = match tau.array(sigma, array) {
                Ok(x) => x,
                Err(e) => return bottom_from_eval(e),
            };
            if let Err(msg) = bounds_check(m, meta.len, array) {
                return StepOutcome::Bottom(msg);
            }
            let loc = meta.base + m;
            if shared {
                let mut sigma = sigma.clone();
                sigma.heap.insert(loc, n);
                StepOutcome::Next(tau.clone(), sigma)
            } else {
                let mut tau = tau.clone();
                tau.heap.insert(loc, n);
                StepOutcome::Next(tau, sigma.clone())
            }
        }
        Command::Load { var, array, index } => {
            let m = match eval_expr(index, tau, sigma) {
                Ok(m) => m,
                Err(e) => return bottom_from_eval(e),
            };
            let (meta, shared) = match tau.array(sigma, array) {
                Ok(x) => x,
                Err(e) => return bottom_from_eval(e),
            };
            if let Err(msg) = bounds_check(m, meta.len, array) {
                return StepOutcome::Bottom(msg);
            }
            let loc = meta.base + m;
            let value = if shared {
                sigma.heap.get(&loc).copied()
            } else {
                tau.heap.get(&loc).copied()
            };
            let Some(value) = value else {
                return StepOutcome::Bottom(format!("array {array} cell {m} is unallocated"));
            };
            // destination is the variable's own stack slot (the printed form
            // of this rule indexes the stack with the variable's *value*,
            // which is not type-correct; see the oracle docs)
            write_scalar(var, value, tau, sigma)
        }
        Command::Barrier => StepOutcome::Suspended(tau.clone(), sigma.clone()),
        Command::Assume(b) => match eval_bool(b, tau, sigma) {
            Ok(true) => StepOutcome::Next(tau.clone(), sigma.clone()),
            Ok(false) => StepOutcome::Top,
            Err(e) => bottom_from_eval(e),
        },
        Command::Assert(b) => match eval_bool(b, tau, sigma) {
            Ok(true) => StepOutcome::Next(tau.clone(), sigma.clone()),
            Ok(false) => StepOutcome::Bottom(format!("assert failed: {cmd}")),
            Err(e) => bottom_from_eval(e),
        },
    }
}

/// A scalar write lands in the shared stack iff the name is bound there;
/// shared and private stacks have disjoint domains by construction.
fn write_scalar(var: &Ident, n: Value, tau: &ThreadState, sigma: &SharedState) -> StepOutcome {
    if sigma.scalars.contains_key(var) {
        let mut sigma = sigma.clone();
        sigma.scalars.insert(var.clone(), n);
        StepOutcome::Next(tau.clone(), sigma)
    } else if tau.scalars.contains_key(var) {
        let mut tau = tau.clone();
        tau.scalars.insert(var.clone(), n);
        StepOutcome::Next(tau, sigma.clone())
    } else {
        StepOutcome::Bottom(EvalError::Unbound(var.clone()).to_string())
    }
}

/// Scheduling status of one thread.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ThreadStatus {
    Running,
    /// Suspended at a barrier node, carrying the shared state observed at
    /// suspension.
    AtBarrier { snapshot: SharedState },
    /// Reached exit; the snapshot is the shared state at arrival (exit is
    /// treated as arrival at the implicit final barrier).
    Done { snapshot: SharedState },
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ThreadEntry {
    pub state: ThreadState,
    /// Last node this thread completed (`start` initially). The nodes it may
    /// execute next are this node's CFG successors.
    pub pc: NodeId,
    pub status: ThreadStatus,
}

/// One global configuration: all thread entries plus the shared state.
/// `epochs_released` counts barrier releases along the path so that epoch
/// observations from different paths line up.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GlobalState {
    pub threads: Vec<ThreadEntry>,
    pub shared: SharedState,
    pub epochs_released: u32,
}

impl GlobalState {
    pub fn all_done(&self) -> bool {
        self.threads
            .iter()
            .all(|t| matches!(t.status, ThreadStatus::Done { .. }))
    }

    pub fn runnable(&self) -> impl Iterator<Item = usize> + '_ {
        self.threads
            .iter()
            .enumerate()
            .filter(|(_, t)| t.status == ThreadStatus::Running)
            .map(|(i, _)| i)
    }

    /// True when no thread can step but at least one waits at a barrier.
    pub fn at_release_point(&self) -> bool {
        self.runnable().next().is_none()
            && self
                .threads
                .iter()
                .any(|t| matches!(t.status, ThreadStatus::AtBarrier { .. }))
    }
}

/// Result of one global step for a chosen thread.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum StepResult {
    /// Successor states; two when the step lands on a branch fork, empty
    /// when the only continuation was ⊤-pruned.
    States(Vec<GlobalState>),
    /// The step reached ⊥.
    Bottom { kind: BottomKind, reason: String },
}

/// Step thread `i` of `g`: execute each CFG successor of the thread's
/// program counter (both arms of a branch are explored; `assume` keeps
/// exactly the feasible ones) and return the surviving successor states.
pub fn step_global(kernel: &Kernel, g: &GlobalState, i: usize) -> StepResult {
    debug_assert!(g.threads[i].status == ThreadStatus::Running);
    let mut out = Vec::new();
    for &next in &kernel.succs[g.threads[i].pc] {
        match &kernel.nodes[next] {
            Node::Start => unreachable!("start node has no predecessors"),
            Node::Exit => {
                let mut g2 = g.clone();
                g2.threads[i].pc = next;
                g2.threads[i].status = ThreadStatus::Done {
                    snapshot: g.shared.clone(),
                };
                out.push(g2);
            }
            Node::Command(cmd) => match step_thread(cmd, &g.threads[i].state, &g.shared) {
                StepOutcome::Next(tau, sigma) => {
                    let mut g2 = g.clone();
                    g2.threads[i].state = tau;
                    g2.threads[i].pc = next;
                    g2.shared = sigma;
                    out.push(g2);
                }
                StepOutcome::Suspended(tau, sigma) => {
                    let mut g2 = g.clone();
                    g2.threads[i].state = tau;
                    g2.threads[i].pc = next;
                    g2.threads[i].status = ThreadStatus::AtBarrier { snapshot: sigma };
                    out.push(g2);
                }
                StepOutcome::Top => {}
                StepOutcome::Bottom(reason) => {
                    return StepResult::Bottom {
                        kind: BottomKind::RuntimeError,
                        reason,
                    }
                }
            },
        }
    }
    StepResult::States(out)
}

/// Release all threads waiting at barriers once no thread can step.
///
/// In strict mode this is the literal race rule: if any waiting thread's
/// snapshot differs from the current shared state, the system goes to ⊥.
/// Threads already at exit keep their status; they participate in the final
/// check at termination instead.
pub fn release_barriers(g: &GlobalState, strict: bool) -> StepResult {
    debug_assert!(g.at_release_point());
    if strict {
        for (i, t) in g.threads.iter().enumerate() {
            if let ThreadStatus::AtBarrier { snapshot } = &t.status {
                if *snapshot != g.shared {
                    return StepResult::Bottom {
                        kind: BottomKind::BarrierSnapshotRace,
                        reason: format!(
                            "thread {i} suspended in a shared state different from the state at release"
                        ),
                    };
                }
            }
        }
    }
    let mut g2 = g.clone();
    for t in &mut g2.threads {
        if matches!(t.status, ThreadStatus::AtBarrier { .. }) {
            t.status = ThreadStatus::Running;
        }
    }
    g2.epochs_released += 1;
    StepResult::States(vec![g2])
}

/// The strict-mode check at the implicit final barrier: every thread's
/// exit-time snapshot must equal the final shared state.
pub fn final_snapshot_mismatch(g: &GlobalState) -> Option<usize> {
    for (i, t) in g.threads.iter().enumerate() {
        if let ThreadStatus::Done { snapshot } = &t.status {
            if *snapshot != g.shared {
                return Some(i);
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lang::BoolExpr;
    use crate::lang::Expr;
    use std::collections::BTreeMap;

    fn tau() -> ThreadState {
        ThreadState {
            scalars: BTreeMap::new(),
            arrays: BTreeMap::new(),
            heap: BTreeMap::new(),
            tid: 1,
        }
    }

    #[test]
    fn barrier_suspends_with_current_states() {
        let sigma = SharedState::default();
        let out = step_thread(&Command::Barrier, &tau(), &sigma);
        assert_eq!(out, StepOutcome::Suspended(tau(), sigma));
    }

    #[test]
    fn unsatisfiable_assume_is_top() {
        let b = BoolExpr::Eq(Expr::Const(0), Expr::Const(1));
        assert_eq!(
            step_thread(&Command::Assume(b), &tau(), &SharedState::default()),
            StepOutcome::Top
        );
    }

    #[test]
    fn store_at_size_is_bottom() {
        let mut sigma = SharedState::default();
        sigma.arrays.insert(
            "A".into(),
            super::super::state::ArrayMeta { base: 16, len: 4 },
        );
        for i in 0..4 {
            sigma.heap.insert(16 + i, 0);
        }
        let mut t = tau();
        t.scalars.insert("k".into(), 4);
        let cmd = Command::Store {
            array: "A".into(),
            index: Expr::Var("k".into()),
            value: Expr::Const(7),
        };
        match step_thread(&cmd, &t, &sigma) {
            StepOutcome::Bottom(msg) => assert!(msg.contains("out of bounds")),
            other => panic!("expected bottom, got {other:?}"),
        }
    }

    #[test]
    fn shared_scalar_assignment_updates_shared_stack() {
        let mut sigma = SharedState::default();
        sigma.scalars.insert("g".into(), 0);
        let cmd = Command::Assign {
            var: "g".into(),
            value: Expr::Const(9),
        };
        match step_thread(&cmd, &tau(), &sigma) {
            StepOutcome::Next(t, s) => {
                assert_eq!(s.scalars["g"], 9);
                assert!(t.scalars.is_empty());
            }
            other => panic!("expected next, got {other:?}"),
        }
    }
}
