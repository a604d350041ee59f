//! Schedulers (single adversary strategies) and the exhaustive sweep over
//! every adaptive schedule.

use std::collections::{BTreeSet, HashSet};
use std::str::FromStr;
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{
    BudgetConfig, ExecutionState, Model, Output, Protocol, RunError, Simulator, Whiteboard,
};
use crate::graph::{LabeledGraph, NodeId};
use crate::verify::Verdict;

/// Picks which active node writes next.
pub trait Scheduler: Send + Sync {
    /// `active` is non-empty and ascending. Must return one of its members.
    fn choose(&self, active: &[NodeId], board: &Whiteboard, step: usize) -> NodeId;
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AdversaryError {
    #[error("fixed order {0:?} is not a permutation of 1..=len")]
    InvalidOrder(Vec<NodeId>),
    #[error("unrecognized scheduler `{0}`")]
    Unrecognized(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum SchedulerKind {
    /// Earliest listed id present in the active set wins.
    FixedOrder(Vec<NodeId>),
    MinId,
    MaxId,
    SeededRandom(u64),
}

impl FromStr for SchedulerKind {
    type Err = AdversaryError;

    /// `fixed:2,1,3`, `min-id`, `max-id` or `random:SEED`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || AdversaryError::Unrecognized(s.to_string());
        match s {
            "min-id" => return Ok(SchedulerKind::MinId),
            "max-id" => return Ok(SchedulerKind::MaxId),
            _ => {}
        }
        if let Some(list) = s.strip_prefix("fixed:") {
            let order = list
                .split(',')
                .map(|t| t.trim().parse::<NodeId>())
                .collect::<Result<Vec<_>, _>>()
                .map_err(|_| bad())?;
            return Ok(SchedulerKind::FixedOrder(order));
        }
        if let Some(seed) = s.strip_prefix("random:") {
            return seed.parse().map(SchedulerKind::SeededRandom).map_err(|_| bad());
        }
        Err(bad())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BuiltinScheduler {
    kind: SchedulerKind,
}

impl BuiltinScheduler {
    pub fn kind(&self) -> &SchedulerKind {
        &self.kind
    }
}

pub fn make_scheduler(kind: SchedulerKind) -> Result<BuiltinScheduler, AdversaryError> {
    if let SchedulerKind::FixedOrder(order) = &kind {
        let ids: BTreeSet<NodeId> = order.iter().copied().collect();
        let expected: BTreeSet<NodeId> = (1..=order.len()).collect();
        if ids != expected {
            return Err(AdversaryError::InvalidOrder(order.clone()));
        }
    }
    Ok(BuiltinScheduler { kind })
}

impl Scheduler for BuiltinScheduler {
    fn choose(&self, active: &[NodeId], _board: &Whiteboard, step: usize) -> NodeId {
        match &self.kind {
            SchedulerKind::FixedOrder(order) => order
                .iter()
                .copied()
                .find(|v| active.contains(v))
                .unwrap_or(active[0]),
            SchedulerKind::MinId => *active.iter().min().expect("non-empty active set"),
            SchedulerKind::MaxId => *active.iter().max().expect("non-empty active set"),
            SchedulerKind::SeededRandom(seed) => {
                // Fresh stream per step keeps the choice a pure function of
                // (seed, step, active).
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                rng.set_stream(step as u64);
                active[rng.gen_range(0..active.len())]
            }
        }
    }
}

/// Extends a (possibly partial) witness schedule to a full priority order;
/// replaying it with [`SchedulerKind::FixedOrder`] reproduces the witness.
pub fn witness_order(schedule: &[NodeId], n: usize) -> Vec<NodeId> {
    let mut order = schedule.to_vec();
    order.extend((1..=n).filter(|v| !schedule.contains(v)));
    order
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepLimits {
    pub max_states: u64,
    pub max_time: Duration,
}

impl Default for SweepLimits {
    fn default() -> Self {
        Self {
            max_states: 10_000_000,
            max_time: Duration::from_secs(60),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SweepOptions {
    pub limits: SweepLimits,
    pub budget: BudgetConfig,
    pub memoize: bool,
    /// Replay-check the timing laws at every leaf.
    pub check_timing: bool,
    /// Worker threads for top-level branches; 1 runs sequentially.
    pub jobs: usize,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self {
            limits: SweepLimits::default(),
            budget: BudgetConfig::default(),
            memoize: true,
            check_timing: true,
            jobs: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Failure {
    pub schedule: Vec<NodeId>,
    pub output: Option<Output>,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetViolation {
    pub schedule: Vec<NodeId>,
    pub node: NodeId,
    pub bits: u32,
    pub budget: u32,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SweepReport {
    pub exhaustive: bool,
    pub schedules_explored: u64,
    pub distinct_states: u64,
    pub failures: Vec<Failure>,
    pub deadlocks: Vec<Vec<NodeId>>,
    pub budget_violations: Vec<BudgetViolation>,
    /// Every distinct output reached at a leaf, sorted.
    pub distinct_outputs: Vec<Output>,
}

impl SweepReport {
    pub fn is_clean(&self) -> bool {
        self.failures.is_empty() && self.deadlocks.is_empty() && self.budget_violations.is_empty()
    }

    fn merge(&mut self, other: SweepReport) {
        self.exhaustive &= other.exhaustive;
        self.schedules_explored += other.schedules_explored;
        self.distinct_states += other.distinct_states;
        self.failures.extend(other.failures);
        self.deadlocks.extend(other.deadlocks);
        self.budget_violations.extend(other.budget_violations);
        self.distinct_outputs.extend(other.distinct_outputs);
        self.distinct_outputs.sort();
        self.distinct_outputs.dedup();
    }
}

#[derive(Debug, Error)]
pub enum SweepError {
    #[error(transparent)]
    Run(#[from] RunError),
    #[error("sweep limits hit after {} schedules; report is partial", .0.schedules_explored)]
    LimitExceeded(Box<SweepReport>),
}

/// Leaf check: receives the output and the final board.
pub type Check<'c> = dyn Fn(&Output, &Whiteboard) -> Verdict + Sync + 'c;

struct Explorer<'s, 'c> {
    sim: &'s Simulator<'s>,
    check: &'c Check<'c>,
    opts: SweepOptions,
    started: Instant,
    visited: &'s AtomicU64,
    stopped: &'s AtomicBool,
    memo: HashSet<ExecutionState>,
    outputs: BTreeSet<Output>,
    report: SweepReport,
}

impl<'s, 'c> Explorer<'s, 'c> {
    fn new(
        sim: &'s Simulator<'s>,
        check: &'c Check<'c>,
        opts: SweepOptions,
        started: Instant,
        visited: &'s AtomicU64,
        stopped: &'s AtomicBool,
    ) -> Self {
        Self {
            sim,
            check,
            opts,
            started,
            visited,
            stopped,
            memo: HashSet::new(),
            outputs: BTreeSet::new(),
            report: SweepReport::default(),
        }
    }

    fn over_limits(&self) -> bool {
        if self.stopped.load(Ordering::Relaxed) {
            return true;
        }
        let visited = self.visited.fetch_add(1, Ordering::Relaxed) + 1;
        let hit = visited > self.opts.limits.max_states
            || (visited.is_multiple_of(256) && self.started.elapsed() > self.opts.limits.max_time);
        if hit {
            self.stopped.store(true, Ordering::Relaxed);
        }
        hit
    }

    fn record_error(&mut self, err: RunError, schedule: &[NodeId]) {
        match err {
            RunError::Budget { node, bits, budget } => {
                self.report.budget_violations.push(BudgetViolation {
                    schedule: schedule.to_vec(),
                    node,
                    bits,
                    budget,
                })
            }
            other => self.report.failures.push(Failure {
                schedule: schedule.to_vec(),
                output: None,
                verdict: other.to_string(),
            }),
        }
        self.report.schedules_explored += 1;
    }

    fn leaf(&mut self, state: &ExecutionState, schedule: &[NodeId]) {
        self.report.schedules_explored += 1;
        let board = state.board();
        let output = match self.sim.decide(board) {
            Ok(o) => o,
            Err(e) => {
                self.report.failures.push(Failure {
                    schedule: schedule.to_vec(),
                    output: None,
                    verdict: e.to_string(),
                });
                return;
            }
        };
        let verdict = match self.opts.check_timing.then(|| self.sim.check_timing_laws(board)) {
            Some(Err(law)) => Verdict::Incorrect(format!("timing law: {law}")),
            _ => (self.check)(&output, board),
        };
        if let Verdict::Incorrect(reason) = verdict {
            self.report.failures.push(Failure {
                schedule: schedule.to_vec(),
                output: Some(output.clone()),
                verdict: reason,
            });
        }
        self.outputs.insert(output);
    }

    fn explore(&mut self, state: ExecutionState, schedule: &mut Vec<NodeId>) {
        if self.over_limits() {
            return;
        }
        if self.opts.memoize {
            if self.memo.contains(&state) {
                return;
            }
            self.memo.insert(state.clone());
        } else {
            self.report.distinct_states += 1;
        }
        if state.is_complete() {
            self.leaf(&state, schedule);
            return;
        }
        let mut state = state;
        if let Err(e) = self.sim.activate(&mut state) {
            self.record_error(e, schedule);
            return;
        }
        let active = state.active();
        if active.is_empty() {
            self.report.deadlocks.push(schedule.clone());
            self.report.schedules_explored += 1;
            return;
        }
        self.branch(&state, &active, schedule);
    }

    fn branch(&mut self, state: &ExecutionState, active: &[NodeId], schedule: &mut Vec<NodeId>) {
        for &v in active {
            let mut child = state.clone();
            schedule.push(v);
            match self.sim.write(&mut child, v) {
                Ok(_) => self.explore(child, schedule),
                Err(e) => self.record_error(e, schedule),
            }
            schedule.pop();
        }
    }

    fn finish(mut self) -> SweepReport {
        if self.opts.memoize {
            self.report.distinct_states = self.memo.len() as u64;
        }
        self.report.distinct_outputs = self.outputs.into_iter().collect();
        self.report.exhaustive = !self.stopped.load(Ordering::Relaxed);
        self.report
    }
}

/// Explores every schedule the adversary can pick for `protocol` on `g`,
/// checking each leaf output with `check`.
pub fn sweep(
    g: &LabeledGraph,
    protocol: &dyn Protocol,
    model: Model,
    check: &Check<'_>,
    opts: SweepOptions,
) -> Result<SweepReport, SweepError> {
    let sim = Simulator::new(g, protocol, model, opts.budget)?;
    let started = Instant::now();
    let visited = AtomicU64::new(0);
    let stopped = AtomicBool::new(false);

    let report = if opts.jobs <= 1 {
        let mut ex = Explorer::new(&sim, check, opts, started, &visited, &stopped);
        ex.explore(sim.initial_state(), &mut Vec::new());
        ex.finish()
    } else {
        sweep_parallel(&sim, check, opts, started, &visited, &stopped)
    };
    if report.exhaustive {
        Ok(report)
    } else {
        Err(SweepError::LimitExceeded(Box::new(report)))
    }
}

fn sweep_parallel(
    sim: &Simulator<'_>,
    check: &Check<'_>,
    opts: SweepOptions,
    started: Instant,
    visited: &AtomicU64,
    stopped: &AtomicBool,
) -> SweepReport {
    let mut root = sim.initial_state();
    let mut head = Explorer::new(sim, check, opts, started, visited, stopped);
    let active = if root.is_complete() {
        Vec::new()
    } else {
        match sim.activate(&mut root) {
            Ok(_) => root.active(),
            Err(_) => Vec::new(),
        }
    };
    if active.len() <= 1 {
        head.explore(sim.initial_state(), &mut Vec::new());
        return head.finish();
    }
    head.over_limits();
    if opts.memoize {
        head.memo.insert(sim.initial_state());
    } else {
        head.report.distinct_states += 1;
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(opts.jobs)
        .build()
        .expect("thread pool");
    let parts: Vec<SweepReport> = pool.install(|| {
        active
            .par_iter()
            .map(|&v| {
                let mut ex = Explorer::new(sim, check, opts, started, visited, stopped);
                let mut schedule = Vec::new();
                ex.branch(&root, &[v], &mut schedule);
                ex.finish()
            })
            .collect()
    });
    let mut report = head.finish();
    for part in parts {
        report.merge(part);
    }
    report.exhaustive = !stopped.load(Ordering::Relaxed);
    report
}
