//! Simulator and exhaustive checker for distributed computing on a shared
//! whiteboard.
//!
//! Each node of a labeled graph knows only its identifier, its neighbors and
//! `n`, and writes exactly one short message on a common append-only board.
//! Four models differ in when nodes may become active (all at once, or by
//! their own rule) and when they compose their message (on activation, or
//! when the adversary picks them to write).
//!
//! - [`graph`]: labeled graphs, oracles, gadget generators, enumeration.
//! - [`engine`]: model semantics, bit budgets, traces, lifts between models.
//! - [`adversary`]: schedulers and the all-schedules sweep.
//! - [`protocols`]: MIS, 2-CLIQUES, SQUARE on class C, spanning tree, BFS.
//! - [`verify`]: output checking and the board-capacity auditor.

pub mod adversary;
pub mod engine;
pub mod graph;
pub mod protocols;
pub mod verify;

pub use adversary::{make_scheduler, sweep, Scheduler, SchedulerKind, SweepOptions, SweepReport};
pub use engine::{lift, lift_to, run, BudgetConfig, Model, Output, Protocol, RunError, RunResult};
pub use graph::{LabeledGraph, NodeId, ProblemInstance};
pub use verify::{check_output, Verdict};
