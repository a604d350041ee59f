//! Executable semantics of the four whiteboard models.
//!
//! A run proceeds in steps. Within step `t`:
//!
//! 1. every awake node evaluates its activation rule against the board as it
//!    stood at the start of the step (simultaneous models instead force all
//!    nodes active at `t = 1`); asynchronous models compose the message of
//!    each newly active node right away, against that same snapshot;
//! 2. if no node is active while some are unterminated, the run deadlocks;
//! 3. the scheduler picks one active node;
//! 4. that node's message is appended (composed now in synchronous models)
//!    and the node terminates.
//!
//! After `n` writes the protocol's decision function maps the board to the
//! common output.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::adversary::Scheduler;
use crate::graph::{LabeledGraph, NodeId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    SimAsync,
    SimSync,
    FreeAsync,
    FreeSync,
}

impl Model {
    pub const ALL: [Model; 4] = [Model::SimAsync, Model::SimSync, Model::FreeAsync, Model::FreeSync];

    /// All nodes are forced active in the first step.
    pub fn is_simultaneous(self) -> bool {
        matches!(self, Model::SimAsync | Model::SimSync)
    }

    /// Messages are composed at activation rather than when written.
    pub fn is_async(self) -> bool {
        matches!(self, Model::SimAsync | Model::FreeAsync)
    }

    /// Next model up the power chain.
    pub fn successor(self) -> Option<Model> {
        match self {
            Model::SimAsync => Some(Model::SimSync),
            Model::SimSync => Some(Model::FreeAsync),
            Model::FreeAsync => Some(Model::FreeSync),
            Model::FreeSync => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Model::SimAsync => "simasync",
            Model::SimSync => "simsync",
            Model::FreeAsync => "freeasync",
            Model::FreeSync => "freesync",
        }
    }
}

impl fmt::Display for Model {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Model {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Model::ALL
            .into_iter()
            .find(|m| m.name() == s.to_ascii_lowercase())
            .ok_or_else(|| format!("unknown model `{s}`"))
    }
}

/// Everything a node knows about the network: itself, its neighbors and `n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LocalView {
    self_id: NodeId,
    neighbor_ids: BTreeSet<NodeId>,
    n: usize,
}

impl LocalView {
    pub fn of(g: &LabeledGraph, v: NodeId) -> Self {
        Self {
            self_id: v,
            neighbor_ids: g.neighbors(v).clone(),
            n: g.n(),
        }
    }

    pub fn self_id(&self) -> NodeId {
        self.self_id
    }

    pub fn neighbor_ids(&self) -> &BTreeSet<NodeId> {
        &self.neighbor_ids
    }

    pub fn is_neighbor(&self, v: NodeId) -> bool {
        self.neighbor_ids.contains(&v)
    }

    pub fn degree(&self) -> usize {
        self.neighbor_ids.len()
    }

    pub fn n(&self) -> usize {
        self.n
    }
}

/// Small enumerated payload values; at most eight variants so each costs
/// three bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Flag {
    No,
    Zero,
    One,
    Yes,
    Empty,
    Root,
    Unreachable,
}

pub const FLAG_BITS: u32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Field {
    /// Identifier in `0..=n`; 0 encodes "none".
    Id(NodeId),
    /// Integer in `0..=n`.
    Count(usize),
    Flag(Flag),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Payload(pub Vec<Field>);

impl Payload {
    pub fn new(fields: Vec<Field>) -> Self {
        Self(fields)
    }

    pub fn flag(flag: Flag) -> Self {
        Self(vec![Field::Flag(flag)])
    }

    pub fn fields(&self) -> &[Field] {
        &self.0
    }

    pub fn as_flag(&self) -> Option<Flag> {
        match self.0.as_slice() {
            [Field::Flag(f)] => Some(*f),
            _ => None,
        }
    }
}

/// `⌈log2(n + 1)⌉`: bits needed for a value in `0..=n`.
pub fn id_bits(n: usize) -> u32 {
    usize::BITS - n.leading_zeros()
}

/// Payload size in bits at network size `n`.
pub fn encode_bits(payload: &Payload, n: usize) -> u32 {
    payload
        .0
        .iter()
        .map(|f| match f {
            Field::Id(_) | Field::Count(_) => id_bits(n),
            Field::Flag(_) => FLAG_BITS,
        })
        .sum()
}

/// Per-message payload budget `B(n) = c_msg · ⌈log2(n + 1)⌉`. The
/// author/created_at header is not charged.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetConfig {
    pub c_msg: u32,
}

impl Default for BudgetConfig {
    fn default() -> Self {
        Self { c_msg: 8 }
    }
}

impl BudgetConfig {
    pub fn new(c_msg: u32) -> Self {
        Self { c_msg }
    }

    pub fn payload_bits(&self, n: usize) -> u32 {
        self.c_msg * id_bits(n)
    }

    pub fn header_bits(&self, n: usize) -> u32 {
        2 * id_bits(n)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Message {
    pub author: NodeId,
    /// Board length when the message was composed.
    pub created_at: usize,
    pub payload: Payload,
}

/// Append-only shared board.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Whiteboard {
    messages: Vec<Message>,
}

impl Whiteboard {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_messages(messages: Vec<Message>) -> Self {
        Self { messages }
    }

    pub fn len(&self) -> usize {
        self.messages.len()
    }

    pub fn is_empty(&self) -> bool {
        self.messages.is_empty()
    }

    pub fn messages(&self) -> &[Message] {
        &self.messages
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Message> {
        self.messages.iter()
    }

    pub fn by_author(&self, v: NodeId) -> Option<&Message> {
        self.messages.iter().find(|m| m.author == v)
    }

    pub fn is_written(&self, v: NodeId) -> bool {
        self.by_author(v).is_some()
    }

    /// The first `len` messages, as the board looked back then.
    pub fn prefix(&self, len: usize) -> Whiteboard {
        Whiteboard {
            messages: self.messages[..len.min(self.len())].to_vec(),
        }
    }

    pub fn is_prefix_of(&self, other: &Whiteboard) -> bool {
        other.messages.starts_with(&self.messages)
    }

    fn push(&mut self, message: Message) {
        self.messages.push(message);
    }
}

impl<'a> IntoIterator for &'a Whiteboard {
    type Item = &'a Message;
    type IntoIter = std::slice::Iter<'a, Message>;

    fn into_iter(self) -> Self::IntoIter {
        self.messages.iter()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Awake,
    Active,
    Terminated,
}

/// Complete engine state between steps. Cheap to clone and hashable, so the
/// sweep can memoize on it.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ExecutionState {
    step: usize,
    status: Vec<Status>,
    pending: Vec<Option<Message>>,
    activated_at: Vec<Option<usize>>,
    board: Whiteboard,
}

impl ExecutionState {
    pub fn initial(n: usize) -> Self {
        Self {
            step: 1,
            status: vec![Status::Awake; n],
            pending: vec![None; n],
            activated_at: vec![None; n],
            board: Whiteboard::new(),
        }
    }

    pub fn step(&self) -> usize {
        self.step
    }

    pub fn n(&self) -> usize {
        self.status.len()
    }

    pub fn status(&self, v: NodeId) -> Status {
        self.status[v - 1]
    }

    pub fn pending(&self, v: NodeId) -> Option<&Message> {
        self.pending[v - 1].as_ref()
    }

    /// Board length at the moment `v` became active.
    pub fn activated_at(&self, v: NodeId) -> Option<usize> {
        self.activated_at[v - 1]
    }

    pub fn board(&self) -> &Whiteboard {
        &self.board
    }

    pub fn active(&self) -> Vec<NodeId> {
        self.nodes_with(Status::Active)
    }

    pub fn awake(&self) -> Vec<NodeId> {
        self.nodes_with(Status::Awake)
    }

    fn nodes_with(&self, s: Status) -> Vec<NodeId> {
        (1..=self.n()).filter(|&v| self.status(v) == s).collect()
    }

    pub fn is_complete(&self) -> bool {
        self.board.len() == self.n()
    }

    /// Checks the structural invariants tying status, pending and board.
    pub fn check_invariants(&self, model: Model) -> Result<(), String> {
        let terminated = self.nodes_with(Status::Terminated);
        if terminated.len() != self.board.len() {
            return Err(format!(
                "{} terminated nodes but {} messages",
                terminated.len(),
                self.board.len()
            ));
        }
        for v in 1..=self.n() {
            let written = self.board.iter().filter(|m| m.author == v).count();
            let terminated = self.status(v) == Status::Terminated;
            if written > 1 || (written == 1) != terminated {
                return Err(format!("node {v}: {written} messages, status {:?}", self.status(v)));
            }
            if self.pending(v).is_some() && !(model.is_async() && self.status(v) == Status::Active) {
                return Err(format!("node {v} holds a pending message outside an async active state"));
            }
        }
        Ok(())
    }
}

/// Protocol output, identical at every node.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Output {
    Boolean(bool),
    VertexSet(BTreeSet<NodeId>),
    /// child → parent
    ParentMap(BTreeMap<NodeId, NodeId>),
    BfsTree {
        parents: BTreeMap<NodeId, NodeId>,
        layers: BTreeMap<NodeId, usize>,
    },
    Count(u64),
    NotConnected,
    AdjacencyMatrix(Vec<Vec<bool>>),
}

impl Output {
    pub fn tag(&self) -> &'static str {
        match self {
            Output::Boolean(_) => "boolean",
            Output::VertexSet(_) => "vertex_set",
            Output::ParentMap(_) => "parent_map",
            Output::BfsTree { .. } => "bfs_tree",
            Output::Count(_) => "count",
            Output::NotConnected => "not_connected",
            Output::AdjacencyMatrix(_) => "adjacency_matrix",
        }
    }
}

fn fmt_parents(f: &mut fmt::Formatter<'_>, parents: &BTreeMap<NodeId, NodeId>) -> fmt::Result {
    let items: Vec<String> = parents.iter().map(|(c, p)| format!("{c}->{p}")).collect();
    write!(f, "{{{}}}", items.join(", "))
}

impl fmt::Display for Output {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Output::Boolean(b) => write!(f, "{b}"),
            Output::VertexSet(s) => {
                let items: Vec<String> = s.iter().map(ToString::to_string).collect();
                write!(f, "{{{}}}", items.join(", "))
            }
            Output::ParentMap(p) => fmt_parents(f, p),
            Output::BfsTree { parents, layers } => {
                let items: Vec<String> = layers.iter().map(|(v, l)| format!("{v}:{l}")).collect();
                write!(f, "layers {{{}}} parents ", items.join(", "))?;
                fmt_parents(f, parents)
            }
            Output::Count(k) => write!(f, "{k}"),
            Output::NotConnected => f.write_str("not-connected"),
            Output::AdjacencyMatrix(rows) => {
                for (i, row) in rows.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    let bits: String = row.iter().map(|&b| if b { '1' } else { '0' }).collect();
                    f.write_str(&bits)?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DecideError {
    #[error("degree sum {0} is odd")]
    OddDegreeSum(u64),
    #[error("malformed instance: {0}")]
    MalformedInstance(String),
    #[error("malformed board: {0}")]
    MalformedBoard(String),
}

/// A whiteboard protocol: activation, message composition and decision.
///
/// Behaviors only ever see a [`LocalView`] and the board, never the graph.
pub trait Protocol: Send + Sync + fmt::Debug {
    fn name(&self) -> String;

    fn target_model(&self) -> Model;

    /// Ignored in simultaneous models.
    fn activation(&self, _view: &LocalView, _board: &Whiteboard) -> bool {
        true
    }

    /// `board` is the snapshot the message is composed against: the board at
    /// activation in asynchronous models, the current board in synchronous
    /// ones. `activated_at` is the board length when the node became active.
    fn compose(&self, view: &LocalView, board: &Whiteboard, activated_at: usize) -> Payload;

    fn decide(&self, board: &Whiteboard, n: usize) -> Result<Output, DecideError>;
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub newly_active: Vec<NodeId>,
    pub chosen: NodeId,
    pub message: Message,
    pub board_len: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunStats {
    pub steps: usize,
    pub max_payload_bits: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunResult {
    pub trace: Vec<StepRecord>,
    pub board: Whiteboard,
    pub output: Output,
    pub stats: RunStats,
}

#[derive(Serialize)]
struct FinalRecord<'a> {
    output: &'a Output,
    stats: &'a RunStats,
}

#[derive(Serialize)]
struct DeadlockRecord {
    deadlock: DeadlockInfo,
}

#[derive(Serialize)]
struct DeadlockInfo {
    step: usize,
    board_len: usize,
}

fn write_steps<W: Write>(out: &mut W, trace: &[StepRecord]) -> io::Result<()> {
    for record in trace {
        serde_json::to_writer(&mut *out, record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

impl RunResult {
    /// JSON lines: one record per step, then `{"output":..,"stats":..}`.
    pub fn write_trace<W: Write>(&self, mut out: W) -> io::Result<()> {
        write_steps(&mut out, &self.trace)?;
        serde_json::to_writer(
            &mut out,
            &FinalRecord {
                output: &self.output,
                stats: &self.stats,
            },
        )?;
        out.write_all(b"\n")
    }

    pub fn trace_jsonl(&self) -> String {
        let mut buf = Vec::new();
        self.write_trace(&mut buf).expect("writing to a Vec");
        String::from_utf8(buf).expect("serde_json emits UTF-8")
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RunError {
    #[error("deadlock at step {step}: no active node, {} of {n} messages written", board.len())]
    Deadlock {
        step: usize,
        n: usize,
        board: Whiteboard,
        trace: Vec<StepRecord>,
    },
    #[error("node {node} composed {bits} payload bits, budget is {budget}")]
    Budget { node: NodeId, bits: u32, budget: u32 },
    #[error("decision failed: {0}")]
    Decide(#[from] DecideError),
    #[error("protocol `{protocol}` targets {expected}, cannot run in {actual} without a lift")]
    ModelMismatch {
        protocol: String,
        expected: Model,
        actual: Model,
    },
    #[error("scheduler chose node {chosen} at step {step}, which is not active")]
    InvalidChoice { chosen: NodeId, step: usize },
}

impl RunError {
    /// Writes whatever trace exists up to a deadlock, then a marker record.
    pub fn write_partial_trace<W: Write>(&self, mut out: W) -> io::Result<()> {
        if let RunError::Deadlock { step, board, trace, .. } = self {
            write_steps(&mut out, trace)?;
            serde_json::to_writer(
                &mut out,
                &DeadlockRecord {
                    deadlock: DeadlockInfo {
                        step: *step,
                        board_len: board.len(),
                    },
                },
            )?;
            out.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// A protocol bound to a graph and a model. Drives single runs and exposes
/// the step primitives the sweep uses.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    views: Vec<LocalView>,
    protocol: &'a dyn Protocol,
    model: Model,
    budget: BudgetConfig,
}

impl<'a> Simulator<'a> {
    pub fn new(
        g: &LabeledGraph,
        protocol: &'a dyn Protocol,
        model: Model,
        budget: BudgetConfig,
    ) -> Result<Self, RunError> {
        if protocol.target_model() != model {
            return Err(RunError::ModelMismatch {
                protocol: protocol.name(),
                expected: protocol.target_model(),
                actual: model,
            });
        }
        Ok(Self {
            views: g.nodes().map(|v| LocalView::of(g, v)).collect(),
            protocol,
            model,
            budget,
        })
    }

    pub fn n(&self) -> usize {
        self.views.len()
    }

    pub fn model(&self) -> Model {
        self.model
    }

    pub fn protocol(&self) -> &'a dyn Protocol {
        self.protocol
    }

    pub fn view(&self, v: NodeId) -> &LocalView {
        &self.views[v - 1]
    }

    pub fn initial_state(&self) -> ExecutionState {
        ExecutionState::initial(self.n())
    }

    fn compose_checked(
        &self,
        v: NodeId,
        board: &Whiteboard,
        activated_at: usize,
    ) -> Result<Payload, RunError> {
        let payload = self.protocol.compose(self.view(v), board, activated_at);
        let bits = encode_bits(&payload, self.n());
        let budget = self.budget.payload_bits(self.n());
        if bits > budget {
            return Err(RunError::Budget { node: v, bits, budget });
        }
        Ok(payload)
    }

    /// Activation phase of the current step. Returns the newly active nodes
    /// in ascending order.
    pub fn activate(&self, state: &mut ExecutionState) -> Result<Vec<NodeId>, RunError> {
        let snapshot = state.board.len();
        let newly: Vec<NodeId> = if self.model.is_simultaneous() {
            if state.step == 1 {
                state.awake()
            } else {
                Vec::new()
            }
        } else {
            state
                .awake()
                .into_iter()
                .filter(|&v| self.protocol.activation(self.view(v), &state.board))
                .collect()
        };
        let mut composed = Vec::new();
        if self.model.is_async() {
            for &v in &newly {
                let payload = self.compose_checked(v, &state.board, snapshot)?;
                composed.push(Message {
                    author: v,
                    created_at: snapshot,
                    payload,
                });
            }
        }
        for &v in &newly {
            state.status[v - 1] = Status::Active;
            state.activated_at[v - 1] = Some(snapshot);
        }
        for message in composed {
            let author = message.author;
            state.pending[author - 1] = Some(message);
        }
        Ok(newly)
    }

    /// Write phase: `v` writes and terminates; the step counter advances.
    pub fn write(&self, state: &mut ExecutionState, v: NodeId) -> Result<Message, RunError> {
        if !(1..=self.n()).contains(&v) || state.status(v) != Status::Active {
            return Err(RunError::InvalidChoice {
                chosen: v,
                step: state.step,
            });
        }
        let message = match state.pending[v - 1].take() {
            Some(m) => m,
            None => {
                let activated_at = state.activated_at[v - 1].unwrap_or(state.board.len());
                let payload = self.compose_checked(v, &state.board, activated_at)?;
                Message {
                    author: v,
                    created_at: state.board.len(),
                    payload,
                }
            }
        };
        state.board.push(message.clone());
        state.status[v - 1] = Status::Terminated;
        state.step += 1;
        Ok(message)
    }

    pub fn decide(&self, board: &Whiteboard) -> Result<Output, DecideError> {
        self.protocol.decide(board, self.n())
    }

    pub fn stats(&self, board: &Whiteboard) -> RunStats {
        RunStats {
            steps: board.len(),
            max_payload_bits: board
                .iter()
                .map(|m| encode_bits(&m.payload, self.n()))
                .max()
                .unwrap_or(0),
        }
    }

    pub fn run(&self, scheduler: &dyn Scheduler) -> Result<RunResult, RunError> {
        let mut state = self.initial_state();
        let mut trace = Vec::with_capacity(self.n());
        while !state.is_complete() {
            let newly_active = self.activate(&mut state)?;
            let active = state.active();
            if active.is_empty() {
                return Err(RunError::Deadlock {
                    step: state.step,
                    n: self.n(),
                    board: state.board,
                    trace,
                });
            }
            let step = state.step;
            let chosen = scheduler.choose(&active, &state.board, step);
            let message = self.write(&mut state, chosen)?;
            trace.push(StepRecord {
                step,
                newly_active,
                chosen,
                message,
                board_len: state.board.len(),
            });
        }
        let output = self.decide(&state.board)?;
        let stats = self.stats(&state.board);
        Ok(RunResult {
            trace,
            board: state.board,
            output,
            stats,
        })
    }

    /// Async models: each payload equals `compose` replayed on the board
    /// prefix of length `created_at`. Sync models: `created_at` is the write
    /// position.
    pub fn check_timing_laws(&self, board: &Whiteboard) -> Result<(), String> {
        for (pos, m) in board.iter().enumerate() {
            if m.created_at > pos {
                return Err(format!("message {pos} by {} created at {}", m.author, m.created_at));
            }
            if self.model.is_async() {
                let prefix = board.prefix(m.created_at);
                let replayed = self.protocol.compose(self.view(m.author), &prefix, m.created_at);
                if replayed != m.payload {
                    return Err(format!(
                        "message {pos} by {} does not replay from its {}-message prefix",
                        m.author, m.created_at
                    ));
                }
            } else if m.created_at != pos {
                return Err(format!(
                    "sync message {pos} by {} has created_at {}",
                    m.author, m.created_at
                ));
            }
        }
        Ok(())
    }
}

/// Runs `protocol` on `g` in `model` under `scheduler`.
pub fn run(
    g: &LabeledGraph,
    protocol: &dyn Protocol,
    model: Model,
    scheduler: &dyn Scheduler,
    budget: BudgetConfig,
) -> Result<RunResult, RunError> {
    Simulator::new(g, protocol, model, budget)?.run(scheduler)
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LiftError {
    #[error("cannot lift a {from} protocol to {to}")]
    InvalidLift { from: Model, to: Model },
}

/// A protocol carried one step up the model chain.
#[derive(Debug)]
pub struct Lifted {
    inner: Arc<dyn Protocol>,
    target: Model,
}

impl Protocol for Lifted {
    fn name(&self) -> String {
        format!("{}@{}", self.inner.name(), self.target)
    }

    fn target_model(&self) -> Model {
        self.target
    }

    fn activation(&self, view: &LocalView, board: &Whiteboard) -> bool {
        match self.target {
            // v_i goes when i-1 messages are on the board.
            Model::FreeAsync => board.len() + 1 == view.self_id(),
            Model::FreeSync => self.inner.activation(view, board),
            _ => true,
        }
    }

    fn compose(&self, view: &LocalView, board: &Whiteboard, activated_at: usize) -> Payload {
        match self.target {
            Model::SimSync => self.inner.compose(view, &Whiteboard::new(), 0),
            Model::FreeSync => self
                .inner
                .compose(view, &board.prefix(activated_at), activated_at),
            _ => self.inner.compose(view, board, activated_at),
        }
    }

    fn decide(&self, board: &Whiteboard, n: usize) -> Result<Output, DecideError> {
        self.inner.decide(board, n)
    }
}

/// Lifts `p` exactly one model up the chain.
pub fn lift(p: Arc<dyn Protocol>, target: Model) -> Result<Arc<dyn Protocol>, LiftError> {
    let from = p.target_model();
    if from.successor() != Some(target) {
        return Err(LiftError::InvalidLift { from, to: target });
    }
    Ok(Arc::new(Lifted { inner: p, target }))
}

/// Composes single lifts until `p` targets `target`; identity when equal.
pub fn lift_to(mut p: Arc<dyn Protocol>, target: Model) -> Result<Arc<dyn Protocol>, LiftError> {
    let from = p.target_model();
    if target < from {
        return Err(LiftError::InvalidLift { from, to: target });
    }
    while p.target_model() != target {
        let next = p.target_model().successor().expect("target is above");
        p = lift(p, next)?;
    }
    Ok(p)
}
