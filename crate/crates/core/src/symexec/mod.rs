//! Symbolic execution over sets of symbolic heaps, with the barrier-time
//! race check.
//!
//! A single generic thread is executed symbolically over the CFG; `tid`
//! stays a free variable constrained only by the initial pure context, so
//! one run stands for all threads. At each barrier (and at the implicit
//! final barrier at exit) the race check instantiates the symbolic state at
//! two distinct thread ids and demands that every pair of possibly-
//! overlapping heap cells provably carries equal values. A passing barrier
//! commits the epoch's per-thread write layers into a fresh shared snapshot
//! symbol so later epochs read the collective effect.
//!
//! Known, deliberate imprecision (both inherited from the method):
//! in-epoch array reads see only the reading thread's own writes, so
//! branches that depend on other threads' same-epoch writes are missed; and
//! shared *scalars* are tracked purely (no heap cell), so scalar races are
//! invisible to this analyzer. The concrete oracle catches both; the
//! combined report classifies such runs as known misses.

mod analyze;
mod barrier;
mod exec;
mod norace;

pub use analyze::{analyze, AnalyzeOpts};
pub use barrier::{commit_contents, exec_barrier};
pub use exec::{exec_command, exec_set, CmdOutcome, SetOutcome};
pub use norace::{no_race, NoRaceWitness};

use crate::lang::Kernel;
use crate::prover::ProverCtx;
use crate::symheap::{FreshSupply, RenameCtx};
use std::collections::BTreeSet;
use std::sync::Mutex;

/// Shared machinery for one analysis run.
pub struct ExecCtx<'a> {
    pub kernel: &'a Kernel,
    pub prover: ProverCtx,
    pub fresh: FreshSupply,
    /// Function symbols denoting shared contents: initial array symbols
    /// plus snapshots committed at barriers. Grows during the run.
    shared_fns: Mutex<BTreeSet<String>>,
}

impl<'a> ExecCtx<'a> {
    pub fn new(kernel: &'a Kernel, prover: ProverCtx) -> Self {
        let shared_fns = kernel
            .arrays()
            .map(|p| initial_symbol(&p.name))
            .collect::<BTreeSet<_>>();
        ExecCtx {
            kernel,
            prover,
            fresh: FreshSupply::new(),
            shared_fns: Mutex::new(shared_fns),
        }
    }

    pub fn mark_shared_fn(&self, name: String) {
        self.shared_fns.lock().unwrap().insert(name);
    }

    pub fn rename_ctx(&self) -> RenameCtx {
        RenameCtx {
            shared_vars: self.kernel.shared_names().into_iter().collect(),
            shared_fns: self.shared_fns.lock().unwrap().clone(),
        }
    }
}

/// Name of the symbol carrying an array's unknown initial contents.
pub fn initial_symbol(array: &str) -> String {
    format!("f_{array}")
}
