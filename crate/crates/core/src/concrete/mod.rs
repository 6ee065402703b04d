//! Concrete interleaving semantics: the ground-truth race oracle.
//!
//! A kernel is executed by `n` threads over concrete inputs. Every
//! interleaving of thread steps is explored (with optional visited-state
//! merging), and the kernel is classified as racy when the shared state at
//! some barrier release — including the implicit final barrier at exit —
//! depends on the schedule.
//!
//! Two notions of "racy" are implemented, because the literal barrier rule
//! and the prose definition it accompanies do not coincide:
//!
//! * [`OracleMode::Strict`] — a schedule errors the moment any suspended
//!   thread's shared-state snapshot differs from the shared state when the
//!   last thread arrives. This flags schedules of kernels with disjoint
//!   same-epoch writes (an early-arriving thread's snapshot predates later,
//!   perfectly disjoint writes).
//! * [`OracleMode::Epoch`] — the shared states at release of epoch `k` are
//!   compared *across schedules*; a kernel is racy iff two schedules
//!   disagree at some epoch. This is the notion that separates benign from
//!   non-benign races and is the labeling authority for tests.

mod explore;
mod state;
mod step;

pub use explore::{
    replay, run_oracle, ExploreOpts, OracleClass, OracleError, OracleMode, OracleVerdict,
    RaceWitness, ReplayError, ReplayOutcome, ScheduleStep,
};
pub use state::{
    eval_bool, eval_expr, eval_op, ArrayMeta, EvalError, SharedState, ThreadState, Value,
};
pub use step::{step_global, step_thread, BottomKind, GlobalState, StepOutcome, StepResult, ThreadStatus};
