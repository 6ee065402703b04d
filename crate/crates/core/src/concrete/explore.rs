//! Exhaustive interleaving exploration and witness replay.

use super::state::{ArrayMeta, SharedState, ThreadState, Value};
use super::step::{
    final_snapshot_mismatch, release_barriers, step_global, BottomKind, GlobalState, StepResult,
    ThreadEntry, ThreadStatus,
};
use crate::inputs::InputBindings;
use crate::lang::{Kernel, Node, NodeId, ParamKind, Space};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashMap};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum OracleMode {
    Strict,
    #[default]
    Epoch,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExploreOpts {
    pub mode: OracleMode,
    /// Merge revisited global states. Turning this off makes the explorer
    /// walk the full schedule tree, which is what the schedule-counting
    /// sanity property needs.
    pub dedup: bool,
    /// Cap on distinct states (dedup on) or visited nodes (dedup off).
    pub max_states: u64,
    pub max_threads: usize,
    pub max_array_len: i64,
}

impl Default for ExploreOpts {
    fn default() -> Self {
        ExploreOpts {
            mode: OracleMode::Epoch,
            dedup: true,
            max_states: 1 << 20,
            max_threads: 4,
            max_array_len: 8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("exploration budget exceeded after {states} states; result inconclusive")]
    BudgetExceeded { states: u64 },
    #[error("bad oracle input: {0}")]
    BadInput(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OracleClass {
    RaceFree,
    Race,
    RuntimeError,
}

/// One scheduled thread step, for human-readable witnesses.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScheduleStep {
    pub tid: usize,
    pub command: String,
}

pub type Schedule = Vec<ScheduleStep>;

/// Readable view of a shared state (array cells resolved against their
/// bases).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct SharedView {
    pub scalars: BTreeMap<String, Value>,
    pub arrays: BTreeMap<String, Vec<Value>>,
}

impl SharedView {
    pub fn of(sigma: &SharedState) -> Self {
        let mut arrays = BTreeMap::new();
        for (name, meta) in &sigma.arrays {
            let cells = (0..meta.len)
                .map(|i| sigma.heap.get(&(meta.base + i)).copied().unwrap_or(0))
                .collect();
            arrays.insert(name.clone(), cells);
        }
        SharedView {
            scalars: sigma.scalars.clone(),
            arrays,
        }
    }

    pub fn digest(&self) -> String {
        let json = serde_json::to_string(self).expect("shared view serializes");
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for b in json.as_bytes() {
            h ^= *b as u64;
            h = h.wrapping_mul(0x0000_0100_0000_01b3);
        }
        format!("{h:016x}")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum RaceWitness {
    /// Two schedules that disagree on the shared state at the release of
    /// the same barrier epoch.
    EpochDivergence {
        epoch: u32,
        schedule_a: Schedule,
        state_a: SharedView,
        schedule_b: Schedule,
        state_b: SharedView,
    },
    /// A schedule on which the literal barrier rule fires (strict mode).
    BarrierSnapshotMismatch { schedule: Schedule, detail: String },
    /// A schedule reaching ⊥ through assert/bounds/division.
    RuntimeError { schedule: Schedule, reason: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OracleVerdict {
    pub classification: OracleClass,
    pub mode: OracleMode,
    pub witnesses: Vec<RaceWitness>,
    /// Distinct shared-state digests observed at each barrier epoch
    /// (the final entry is the implicit barrier at exit).
    pub epoch_digests: BTreeMap<u32, Vec<String>>,
    pub schedules_completed: u64,
    pub states_explored: u64,
}

/// Build the initial global state from concrete input bindings.
pub fn initial_state(
    kernel: &Kernel,
    threads: usize,
    inputs: &InputBindings,
    opts: &ExploreOpts,
) -> Result<GlobalState, OracleError> {
    if threads == 0 {
        return Err(OracleError::BadInput("thread count must be at least 1".into()));
    }
    if threads > opts.max_threads {
        return Err(OracleError::BadInput(format!(
            "thread count {threads} exceeds the configured limit {}",
            opts.max_threads
        )));
    }
    for (name, _) in inputs.scalars.iter() {
        if kernel.scalar_space(name).is_none() {
            return Err(OracleError::BadInput(format!(
                "input binds unknown scalar `{name}`"
            )));
        }
    }
    for (name, _) in inputs.arrays.iter() {
        if kernel.array_param(name).is_none() {
            return Err(OracleError::BadInput(format!(
                "input binds unknown array `{name}`"
            )));
        }
    }

    let mut shared = SharedState::default();
    let mut private_arrays: Vec<(String, ArrayMeta, &Vec<Value>)> = Vec::new();
    let mut next_base: Value = 0x10;
    for p in kernel.params.iter() {
        match p.kind {
            ParamKind::Array => {
                let cells = inputs.arrays.get(&p.name).ok_or_else(|| {
                    OracleError::BadInput(format!("no initial value bound for array `{}`", p.name))
                })?;
                if cells.len() as i64 > opts.max_array_len {
                    return Err(OracleError::BadInput(format!(
                        "array `{}` has {} elements, limit is {}",
                        p.name,
                        cells.len(),
                        opts.max_array_len
                    )));
                }
                let meta = ArrayMeta {
                    base: next_base,
                    len: cells.len() as i64,
                };
                next_base += cells.len() as Value + 0x10;
                if p.space == Space::Shared {
                    for (i, v) in cells.iter().enumerate() {
                        shared.heap.insert(meta.base + i as Value, *v);
                    }
                    shared.arrays.insert(p.name.clone(), meta);
                } else {
                    private_arrays.push((p.name.clone(), meta, cells));
                }
            }
            ParamKind::Scalar => {
                let v = inputs.scalars.get(&p.name).copied().unwrap_or(0);
                if p.space == Space::Shared {
                    shared.scalars.insert(p.name.clone(), v);
                }
            }
        }
    }
    for name in &kernel.shared_scalars {
        let v = inputs.scalars.get(name).copied().unwrap_or(0);
        shared.scalars.insert(name.clone(), v);
    }

    let mut entries = Vec::with_capacity(threads);
    for tid in 0..threads {
        let mut tau = ThreadState {
            scalars: BTreeMap::new(),
            arrays: BTreeMap::new(),
            heap: BTreeMap::new(),
            tid,
        };
        for p in kernel.scalar_params() {
            if p.space == Space::Private {
                tau.scalars
                    .insert(p.name.clone(), inputs.scalars.get(&p.name).copied().unwrap_or(0));
            }
        }
        for l in &kernel.locals {
            tau.scalars.insert(l.clone(), 0);
        }
        for (name, meta, cells) in &private_arrays {
            tau.arrays.insert(name.clone(), *meta);
            for (i, v) in cells.iter().enumerate() {
                tau.heap.insert(meta.base + i as Value, *v);
            }
        }
        entries.push(ThreadEntry {
            state: tau,
            pc: kernel.start,
            status: ThreadStatus::Running,
        });
    }
    let mut g = GlobalState {
        threads: entries,
        shared,
        epochs_released: 0,
    };
    for i in 0..threads {
        normalize_exit(kernel, &mut g, i);
    }
    Ok(g)
}

/// A thread whose only continuation is the exit node is done; arrival at
/// exit is not a scheduled step. The snapshot taken here feeds the implicit
/// final barrier check.
fn normalize_exit(kernel: &Kernel, g: &mut GlobalState, i: usize) {
    if g.threads[i].status != ThreadStatus::Running {
        return;
    }
    let succs = &kernel.succs[g.threads[i].pc];
    if succs.len() == 1 && matches!(kernel.nodes[succs[0]], Node::Exit) {
        g.threads[i].pc = succs[0];
        g.threads[i].status = ThreadStatus::Done {
            snapshot: g.shared.clone(),
        };
    }
}

struct Explorer<'a> {
    kernel: &'a Kernel,
    opts: &'a ExploreOpts,
    states: Vec<GlobalState>,
    parents: Vec<Option<(usize, Option<usize>)>>,
    interned: HashMap<GlobalState, usize>,
    stack: Vec<usize>,
    // epoch -> shared state -> first state id observed with it
    epoch_obs: BTreeMap<u32, BTreeMap<SharedState, usize>>,
    schedules_completed: u64,
    states_explored: u64,
    runtime_errors: Vec<RaceWitness>,
    strict_races: Vec<RaceWitness>,
}

impl<'a> Explorer<'a> {
    fn push(&mut self, g: GlobalState, parent: Option<(usize, Option<usize>)>) -> Result<(), OracleError> {
        if self.opts.dedup {
            if self.interned.contains_key(&g) {
                return Ok(());
            }
        }
        if self.states.len() as u64 >= self.opts.max_states {
            return Err(OracleError::BudgetExceeded {
                states: self.states.len() as u64,
            });
        }
        let id = self.states.len();
        if self.opts.dedup {
            self.interned.insert(g.clone(), id);
        }
        self.states.push(g);
        self.parents.push(parent);
        self.stack.push(id);
        Ok(())
    }

    /// Reconstruct the thread schedule leading to a state.
    fn schedule_of(&self, mut id: usize) -> Schedule {
        let mut steps = Vec::new();
        while let Some((parent, tid)) = self.parents[id] {
            if let Some(tid) = tid {
                let node = self.states[id].threads[tid].pc;
                steps.push(ScheduleStep {
                    tid,
                    command: node_label(self.kernel, node),
                });
            }
            id = parent;
        }
        steps.reverse();
        steps
    }

    fn record_epoch(&mut self, epoch: u32, id: usize) {
        self.epoch_obs
            .entry(epoch)
            .or_default()
            .entry(self.states[id].shared.clone())
            .or_insert(id);
    }

    fn run(&mut self, initial: GlobalState) -> Result<(), OracleError> {
        self.push(initial, None)?;
        while let Some(id) = self.stack.pop() {
            self.states_explored += 1;
            let g = self.states[id].clone();
            if g.all_done() {
                self.schedules_completed += 1;
                self.record_epoch(g.epochs_released + 1, id);
                if self.opts.mode == OracleMode::Strict {
                    if let Some(thread) = final_snapshot_mismatch(&g) {
                        if self.strict_races.is_empty() {
                            self.strict_races.push(RaceWitness::BarrierSnapshotMismatch {
                                schedule: self.schedule_of(id),
                                detail: format!(
                                    "thread {thread} exited in a shared state different from the final shared state"
                                ),
                            });
                        }
                    }
                }
                continue;
            }
            if g.at_release_point() {
                self.record_epoch(g.epochs_released + 1, id);
                match release_barriers(&g, self.opts.mode == OracleMode::Strict) {
                    StepResult::Bottom { reason, .. } => {
                        if self.strict_races.is_empty() {
                            self.strict_races.push(RaceWitness::BarrierSnapshotMismatch {
                                schedule: self.schedule_of(id),
                                detail: reason,
                            });
                        }
                    }
                    StepResult::States(mut next) => {
                        let mut g2 = next.pop().expect("release yields one state");
                        for i in 0..g2.threads.len() {
                            normalize_exit(self.kernel, &mut g2, i);
                        }
                        self.push(g2, Some((id, None)))?;
                    }
                }
                continue;
            }
            let runnable: Vec<usize> = g.runnable().collect();
            for tid in runnable {
                match step_global(self.kernel, &g, tid) {
                    StepResult::Bottom { reason, .. } => {
                        if self.runtime_errors.is_empty() {
                            let mut schedule = self.schedule_of(id);
                            schedule.push(ScheduleStep {
                                tid,
                                command: format!("<fault: {reason}>"),
                            });
                            self.runtime_errors.push(RaceWitness::RuntimeError {
                                schedule,
                                reason,
                            });
                        }
                    }
                    StepResult::States(states) => {
                        for mut s in states {
                            normalize_exit(self.kernel, &mut s, tid);
                            self.push(s, Some((id, Some(tid))))?;
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

fn node_label(kernel: &Kernel, node: NodeId) -> String {
    match &kernel.nodes[node] {
        Node::Start => "start".into(),
        Node::Exit => "exit".into(),
        Node::Command(c) => c.to_string(),
    }
}

/// Exhaustively explore all interleavings of `threads` threads running
/// `kernel` over `inputs`, and classify the kernel.
///
/// Classification: `runtime-error` if any schedule reaches ⊥ through
/// assert/bounds/division; otherwise `race` per the selected mode (strict:
/// the literal barrier rule fires on some schedule; epoch: two schedules
/// disagree on the shared state at the same barrier epoch); otherwise
/// `race-free`. Benign same-value writes are race-free in epoch mode by
/// construction — identical shared states compare equal.
///
/// Exceeding the state budget is an explicit error, never a silent verdict.
pub fn run_oracle(
    kernel: &Kernel,
    threads: usize,
    inputs: &InputBindings,
    opts: &ExploreOpts,
) -> Result<OracleVerdict, OracleError> {
    let initial = initial_state(kernel, threads, inputs, opts)?;
    let mut ex = Explorer {
        kernel,
        opts,
        states: Vec::new(),
        parents: Vec::new(),
        interned: HashMap::new(),
        stack: Vec::new(),
        epoch_obs: BTreeMap::new(),
        schedules_completed: 0,
        states_explored: 0,
        runtime_errors: Vec::new(),
        strict_races: Vec::new(),
    };
    ex.run(initial)?;

    let mut witnesses = Vec::new();
    let mut epoch_digests = BTreeMap::new();
    for (epoch, obs) in &ex.epoch_obs {
        epoch_digests.insert(
            *epoch,
            obs.keys().map(|s| SharedView::of(s).digest()).collect::<Vec<_>>(),
        );
        if obs.len() > 1 && opts.mode == OracleMode::Epoch {
            let mut it = obs.iter();
            let (sa, ia) = it.next().unwrap();
            let (sb, ib) = it.next().unwrap();
            witnesses.push(RaceWitness::EpochDivergence {
                epoch: *epoch,
                schedule_a: ex.schedule_of(*ia),
                state_a: SharedView::of(sa),
                schedule_b: ex.schedule_of(*ib),
                state_b: SharedView::of(sb),
            });
        }
    }
    let epoch_race = !witnesses.is_empty();
    let classification = if !ex.runtime_errors.is_empty() {
        OracleClass::RuntimeError
    } else if match opts.mode {
        OracleMode::Epoch => epoch_race,
        OracleMode::Strict => !ex.strict_races.is_empty(),
    } {
        OracleClass::Race
    } else {
        OracleClass::RaceFree
    };
    let mut all_witnesses = ex.runtime_errors;
    all_witnesses.extend(ex.strict_races);
    all_witnesses.extend(witnesses);
    if classification == OracleClass::RaceFree {
        all_witnesses.clear();
    }
    Ok(OracleVerdict {
        classification,
        mode: opts.mode,
        witnesses: all_witnesses,
        epoch_digests,
        schedules_completed: ex.schedules_completed,
        states_explored: ex.states_explored,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ReplayError {
    #[error("schedule step {step}: thread {tid} {why}")]
    InvalidSchedule {
        step: usize,
        tid: usize,
        why: String,
    },
    #[error("schedule step {step}: path has no continuation (assume pruned it)")]
    PathPruned { step: usize },
    #[error("schedule step {step}: branch is not determined by the thread state")]
    NondeterministicFork { step: usize },
    #[error(transparent)]
    BadInput(#[from] OracleError),
}

/// Final configuration of a replayed schedule.
#[derive(Debug, Clone)]
pub struct ReplayOutcome {
    pub state: GlobalState,
    /// Set when the schedule ran into ⊥ (runtime error, or the strict
    /// barrier rule).
    pub bottom: Option<(BottomKind, String)>,
}

/// Deterministically re-execute `schedule` (a sequence of thread ids).
/// Barrier releases are applied implicitly whenever no thread can run.
pub fn replay(
    kernel: &Kernel,
    threads: usize,
    inputs: &InputBindings,
    opts: &ExploreOpts,
    schedule: &[usize],
) -> Result<ReplayOutcome, ReplayError> {
    let mut g = initial_state(kernel, threads, inputs, opts)?;
    let strict = opts.mode == OracleMode::Strict;
    for (step, &tid) in schedule.iter().enumerate() {
        while g.at_release_point() {
            match release_barriers(&g, strict) {
                StepResult::Bottom { kind, reason } => {
                    return Ok(ReplayOutcome {
                        state: g,
                        bottom: Some((kind, reason)),
                    })
                }
                StepResult::States(mut s) => {
                    g = s.pop().unwrap();
                    for i in 0..g.threads.len() {
                        normalize_exit(kernel, &mut g, i);
                    }
                }
            }
        }
        if tid >= g.threads.len() {
            return Err(ReplayError::InvalidSchedule {
                step,
                tid,
                why: format!("does not exist (thread count {})", g.threads.len()),
            });
        }
        match g.threads[tid].status {
            ThreadStatus::Running => {}
            ThreadStatus::AtBarrier { .. } => {
                return Err(ReplayError::InvalidSchedule {
                    step,
                    tid,
                    why: "is suspended at a barrier".into(),
                })
            }
            ThreadStatus::Done { .. } => {
                return Err(ReplayError::InvalidSchedule {
                    step,
                    tid,
                    why: "has already finished".into(),
                })
            }
        }
        match step_global(kernel, &g, tid) {
            StepResult::Bottom { kind, reason } => {
                return Ok(ReplayOutcome {
                    state: g,
                    bottom: Some((kind, reason)),
                })
            }
            StepResult::States(mut states) => match states.len() {
                0 => return Err(ReplayError::PathPruned { step }),
                1 => {
                    g = states.pop().unwrap();
                    normalize_exit(kernel, &mut g, tid);
                }
                _ => return Err(ReplayError::NondeterministicFork { step }),
            },
        }
    }
    while g.at_release_point() {
        match release_barriers(&g, strict) {
            StepResult::Bottom { kind, reason } => {
                return Ok(ReplayOutcome {
                    state: g,
                    bottom: Some((kind, reason)),
                })
            }
            StepResult::States(mut s) => {
                g = s.pop().unwrap();
                for i in 0..g.threads.len() {
                    normalize_exit(kernel, &mut g, i);
                }
            }
        }
    }
    if strict && g.all_done() {
        if let Some(thread) = final_snapshot_mismatch(&g) {
            return Ok(ReplayOutcome {
                state: g,
                bottom: Some((
                    BottomKind::BarrierSnapshotRace,
                    format!("thread {thread} exited in a stale shared state"),
                )),
            });
        }
    }
    Ok(ReplayOutcome {
        state: g,
        bottom: None,
    })
}
