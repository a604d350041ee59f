//! Whiteboard protocols, each declared for the model it is designed for.

use std::collections::{BTreeMap, BTreeSet};

use crate::engine::{
    DecideError, Field, Flag, LocalView, Model, Output, Payload, Protocol, Whiteboard,
};
use crate::graph::NodeId;

fn in_set(p: &Payload) -> bool {
    matches!(p.fields(), [Field::Id(_)])
}

/// Greedy rooted maximal independent set in SimSync.
///
/// A node writes its own id when it is `x`, or when it is not adjacent to
/// `x` and no neighbor has written its id yet; otherwise it writes "no".
#[derive(Debug, Clone, Copy)]
pub struct MisSimSync {
    pub x: NodeId,
}

pub fn mis_simsync(x: NodeId) -> MisSimSync {
    MisSimSync { x }
}

impl Protocol for MisSimSync {
    fn name(&self) -> String {
        format!("mis(x={})", self.x)
    }

    fn target_model(&self) -> Model {
        Model::SimSync
    }

    fn compose(&self, view: &LocalView, board: &Whiteboard, _: usize) -> Payload {
        let v = view.self_id();
        let neighbor_in_set = board
            .iter()
            .any(|m| view.is_neighbor(m.author) && in_set(&m.payload));
        if v == self.x || (!view.is_neighbor(self.x) && !neighbor_in_set) {
            Payload::new(vec![Field::Id(v)])
        } else {
            Payload::flag(Flag::No)
        }
    }

    fn decide(&self, board: &Whiteboard, _: usize) -> Result<Output, DecideError> {
        Ok(Output::VertexSet(
            board
                .iter()
                .filter(|m| in_set(&m.payload))
                .map(|m| m.author)
                .collect(),
        ))
    }
}

/// Message alphabet of the 2-CLIQUES protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum CliqueLabel {
    Zero,
    One,
    No,
}

impl CliqueLabel {
    pub fn to_flag(self) -> Flag {
        match self {
            CliqueLabel::Zero => Flag::Zero,
            CliqueLabel::One => Flag::One,
            CliqueLabel::No => Flag::No,
        }
    }

    pub fn from_payload(p: &Payload) -> Option<Self> {
        match p.as_flag()? {
            Flag::Zero => Some(CliqueLabel::Zero),
            Flag::One => Some(CliqueLabel::One),
            Flag::No => Some(CliqueLabel::No),
            _ => None,
        }
    }
}

/// 2-CLIQUES in SimSync.
///
/// The first writer labels itself 0. A later writer copies the common label
/// of its already-written neighbors, takes 1 if none has written, and says
/// "no" when they disagree. The graph is two cliques iff no "no" appears and
/// the labels split exactly in half; the "no"-free condition alone accepts a
/// 6-cycle written in order 1..6.
#[derive(Debug, Clone, Copy, Default)]
pub struct TwoCliquesSimSync;

pub fn two_cliques_simsync() -> TwoCliquesSimSync {
    TwoCliquesSimSync
}

impl Protocol for TwoCliquesSimSync {
    fn name(&self) -> String {
        "two-cliques".into()
    }

    fn target_model(&self) -> Model {
        Model::SimSync
    }

    fn compose(&self, view: &LocalView, board: &Whiteboard, _: usize) -> Payload {
        if board.is_empty() {
            return Payload::flag(Flag::Zero);
        }
        let seen: BTreeSet<Option<CliqueLabel>> = board
            .iter()
            .filter(|m| view.is_neighbor(m.author))
            .map(|m| CliqueLabel::from_payload(&m.payload))
            .collect();
        let label = match seen.into_iter().collect::<Vec<_>>().as_slice() {
            [] => CliqueLabel::One,
            [Some(c @ (CliqueLabel::Zero | CliqueLabel::One))] => *c,
            _ => CliqueLabel::No,
        };
        Payload::flag(label.to_flag())
    }

    fn decide(&self, board: &Whiteboard, n: usize) -> Result<Output, DecideError> {
        let mut zeros = 0;
        let mut ones = 0;
        let mut conflict = false;
        for m in board {
            match CliqueLabel::from_payload(&m.payload) {
                Some(CliqueLabel::Zero) => zeros += 1,
                Some(CliqueLabel::One) => ones += 1,
                Some(CliqueLabel::No) => conflict = true,
                None => {
                    return Err(DecideError::MalformedBoard(format!(
                        "node {} wrote no clique label",
                        m.author
                    )))
                }
            }
        }
        let balanced = n.is_multiple_of(2) && zeros == n / 2 && ones == n / 2;
        Ok(Output::Boolean(!conflict && balanced))
    }
}

/// SQUARE restricted to class C, in FreeAsync.
///
/// Pendant-layer nodes (ids above `N/2`) go first and write their at most two
/// neighbors. Once all of them are on the board the base nodes activate
/// together; the two feet of the unique pendant-pendant edge report whether
/// they are adjacent, everyone else writes an empty flag.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquareClassC;

pub fn square_class_c_freeasync() -> SquareClassC {
    SquareClassC
}

/// Feet `(u, w)` of the single pendant-pendant edge, read off the pendant
/// layer's messages.
fn pendant_edge_feet(board: &Whiteboard, half: usize) -> Result<(NodeId, NodeId), String> {
    let mut listed: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for m in board.iter().filter(|m| m.author > half) {
        let ids = m
            .payload
            .fields()
            .iter()
            .filter_map(|f| match f {
                Field::Id(id) if *id != 0 => Some(*id),
                _ => None,
            })
            .collect();
        listed.insert(m.author, ids);
    }
    let edges: Vec<(NodeId, NodeId)> = listed
        .iter()
        .flat_map(|(&p, ids)| ids.iter().filter(move |&&q| q > p && q > half).map(move |&q| (p, q)))
        .collect();
    let [(p, q)] = edges.as_slice() else {
        return Err(format!("{} pendant-pendant edges on the board", edges.len()));
    };
    let foot = |h: NodeId| {
        let low: Vec<NodeId> = listed[&h].iter().copied().filter(|&id| id <= half).collect();
        match low.as_slice() {
            [f] => Ok(*f),
            _ => Err(format!("pendant node {h} lists {} base neighbors", low.len())),
        }
    };
    Ok((foot(*p)?, foot(*q)?))
}

impl Protocol for SquareClassC {
    fn name(&self) -> String {
        "square-c".into()
    }

    fn target_model(&self) -> Model {
        Model::FreeAsync
    }

    fn activation(&self, view: &LocalView, board: &Whiteboard) -> bool {
        let half = view.n() / 2;
        if view.self_id() > half {
            board.is_empty()
        } else {
            board.len() == half
        }
    }

    fn compose(&self, view: &LocalView, board: &Whiteboard, _: usize) -> Payload {
        let half = view.n() / 2;
        let v = view.self_id();
        if v > half {
            let mut ids: Vec<Field> = view.neighbor_ids().iter().map(|&u| Field::Id(u)).collect();
            ids.resize(2, Field::Id(0));
            return Payload::new(ids);
        }
        let Ok((u, w)) = pendant_edge_feet(board, half) else {
            return Payload::flag(Flag::Empty);
        };
        let partner = if v == u {
            w
        } else if v == w {
            u
        } else {
            return Payload::flag(Flag::Empty);
        };
        Payload::flag(if view.is_neighbor(partner) { Flag::Yes } else { Flag::No })
    }

    fn decide(&self, board: &Whiteboard, n: usize) -> Result<Output, DecideError> {
        pendant_edge_feet(board, n / 2).map_err(DecideError::MalformedInstance)?;
        Ok(Output::Boolean(
            board.iter().any(|m| m.payload.as_flag() == Some(Flag::Yes)),
        ))
    }
}

/// Greedy spanning tree in FreeAsync: the root goes first, then every node
/// activates as soon as a neighbor is on the board and takes the smallest
/// such neighbor as its parent.
#[derive(Debug, Clone, Copy)]
pub struct SpanningTreeFreeAsync {
    pub root: NodeId,
}

pub fn spanning_tree_freeasync(root: NodeId) -> SpanningTreeFreeAsync {
    SpanningTreeFreeAsync { root }
}

impl Protocol for SpanningTreeFreeAsync {
    fn name(&self) -> String {
        format!("spanning-tree(root={})", self.root)
    }

    fn target_model(&self) -> Model {
        Model::FreeAsync
    }

    fn activation(&self, view: &LocalView, board: &Whiteboard) -> bool {
        if view.self_id() == self.root {
            board.is_empty()
        } else {
            board.iter().any(|m| view.is_neighbor(m.author))
        }
    }

    fn compose(&self, view: &LocalView, board: &Whiteboard, _: usize) -> Payload {
        if view.self_id() == self.root {
            return Payload::flag(Flag::Root);
        }
        let parent = board
            .iter()
            .map(|m| m.author)
            .filter(|&a| view.is_neighbor(a))
            .min()
            .unwrap_or(0);
        Payload::new(vec![Field::Id(parent)])
    }

    fn decide(&self, board: &Whiteboard, _: usize) -> Result<Output, DecideError> {
        let mut parents = BTreeMap::new();
        for m in board {
            match m.payload.fields() {
                [Field::Flag(Flag::Root)] => {}
                [Field::Id(p)] if *p != 0 => {
                    parents.insert(m.author, *p);
                }
                _ => {
                    return Err(DecideError::MalformedBoard(format!(
                        "node {} wrote no parent",
                        m.author
                    )))
                }
            }
        }
        Ok(Output::ParentMap(parents))
    }
}

/// Content of a layered BFS message.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BfsFields {
    pub layer: usize,
    /// 0 for the root.
    pub parent: NodeId,
    /// Neighbors in the previous layer.
    pub a: usize,
    /// Neighbors not in the previous layer.
    pub b: usize,
    /// Same-layer neighbors already written when the message was composed.
    pub c: usize,
}

impl BfsFields {
    fn to_payload(self, author: NodeId, with_c: bool) -> Payload {
        let mut fields = vec![
            Field::Id(author),
            Field::Count(self.layer),
            Field::Id(self.parent),
            Field::Count(self.a),
            Field::Count(self.b),
        ];
        if with_c {
            fields.push(Field::Count(self.c));
        }
        Payload::new(fields)
    }

    /// Accepts the six-field layout and the five-field one without `c`.
    pub fn from_payload(p: &Payload) -> Option<Self> {
        match *p.fields() {
            [Field::Id(_), Field::Count(layer), Field::Id(parent), Field::Count(a), Field::Count(b), ref rest @ ..] => {
                let c = match rest {
                    [] => 0,
                    [Field::Count(c)] => c.to_owned(),
                    _ => return None,
                };
                Some(Self { layer, parent, a, b, c })
            }
            _ => None,
        }
    }
}

/// Phase bookkeeping recovered from the board alone.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct PhaseAccounting {
    /// `edge_counts[i]` is the number of edges between layers `i` and
    /// `i + 1`, for every completed phase `i`.
    pub edge_counts: Vec<i64>,
    /// Layer of every author of a layered message.
    pub layer_of: BTreeMap<NodeId, usize>,
}

impl PhaseAccounting {
    pub fn from_board(board: &Whiteboard) -> Self {
        let mut by_layer: BTreeMap<usize, Vec<BfsFields>> = BTreeMap::new();
        let mut layer_of = BTreeMap::new();
        for m in board {
            if let Some(f) = BfsFields::from_payload(&m.payload) {
                layer_of.insert(m.author, f.layer);
                by_layer.entry(f.layer).or_default().push(f);
            }
        }
        let mut edge_counts = Vec::new();
        if let Some(root) = by_layer.get(&0).and_then(|l| l.first()) {
            edge_counts.push(root.b as i64);
            let mut layer = 1;
            while let Some(&prev) = edge_counts.last() {
                if prev == 0 {
                    break;
                }
                let msgs = by_layer.get(&layer).map(Vec::as_slice).unwrap_or_default();
                let reached: i64 = msgs.iter().map(|f| f.a as i64).sum();
                if reached != prev {
                    break;
                }
                edge_counts.push(msgs.iter().map(|f| f.b as i64 - 2 * f.c as i64).sum());
                layer += 1;
            }
        }
        Self { edge_counts, layer_of }
    }

    /// Last completed phase, if any.
    pub fn last_complete(&self) -> Option<usize> {
        self.edge_counts.len().checked_sub(1)
    }

    /// Every reachable node is on the board: the last completed phase has
    /// no outgoing edges.
    pub fn exhausted(&self) -> bool {
        self.edge_counts.last() == Some(&0)
    }
}

/// Phase-by-phase BFS tree construction.
///
/// The FreeSync variant counts, at write time, the same-layer neighbors that
/// already wrote; the FreeAsync variant for bipartite inputs omits that
/// count and composes at activation. When a phase closes with no outgoing
/// edges while nodes remain, those nodes are unreachable: they activate and
/// write an `Unreachable` flag, and the output is `NotConnected`.
#[derive(Debug, Clone, Copy)]
pub struct Bfs {
    pub root: NodeId,
    same_layer_counts: bool,
}

pub fn bfs_freesync(root: NodeId) -> Bfs {
    Bfs {
        root,
        same_layer_counts: true,
    }
}

pub fn bfs_bipartite_freeasync(root: NodeId) -> Bfs {
    Bfs {
        root,
        same_layer_counts: false,
    }
}

impl Protocol for Bfs {
    fn name(&self) -> String {
        let kind = if self.same_layer_counts { "bfs" } else { "bfs-bipartite" };
        format!("{kind}(root={})", self.root)
    }

    fn target_model(&self) -> Model {
        if self.same_layer_counts {
            Model::FreeSync
        } else {
            Model::FreeAsync
        }
    }

    fn activation(&self, view: &LocalView, board: &Whiteboard) -> bool {
        if view.self_id() == self.root {
            return board.is_empty();
        }
        let phases = PhaseAccounting::from_board(board);
        let Some(k) = phases.last_complete() else {
            return false;
        };
        phases.exhausted()
            || view
                .neighbor_ids()
                .iter()
                .any(|u| phases.layer_of.get(u) == Some(&k))
    }

    fn compose(&self, view: &LocalView, board: &Whiteboard, _: usize) -> Payload {
        let v = view.self_id();
        if v == self.root {
            let fields = BfsFields {
                layer: 0,
                parent: 0,
                a: 0,
                b: view.degree(),
                c: 0,
            };
            return fields.to_payload(v, self.same_layer_counts);
        }
        let phases = PhaseAccounting::from_board(board);
        let written: Vec<(NodeId, usize)> = view
            .neighbor_ids()
            .iter()
            .filter_map(|&u| phases.layer_of.get(&u).map(|&l| (u, l)))
            .collect();
        let Some(prev) = written.iter().map(|&(_, l)| l).min() else {
            return Payload::flag(Flag::Unreachable);
        };
        if phases.exhausted() {
            return Payload::flag(Flag::Unreachable);
        }
        let parent = written
            .iter()
            .filter(|&&(_, l)| l == prev)
            .map(|&(u, _)| u)
            .min()
            .expect("prev is attained");
        let a = written.iter().filter(|&&(_, l)| l == prev).count();
        let c = if self.same_layer_counts {
            written.iter().filter(|&&(_, l)| l == prev + 1).count()
        } else {
            0
        };
        BfsFields {
            layer: prev + 1,
            parent,
            a,
            b: view.degree() - a,
            c,
        }
        .to_payload(v, self.same_layer_counts)
    }

    fn decide(&self, board: &Whiteboard, _: usize) -> Result<Output, DecideError> {
        if board.iter().any(|m| m.payload.as_flag() == Some(Flag::Unreachable)) {
            return Ok(Output::NotConnected);
        }
        let mut parents = BTreeMap::new();
        let mut layers = BTreeMap::new();
        for m in board {
            let f = BfsFields::from_payload(&m.payload).ok_or_else(|| {
                DecideError::MalformedBoard(format!("node {} wrote no BFS fields", m.author))
            })?;
            layers.insert(m.author, f.layer);
            if f.layer > 0 {
                parents.insert(m.author, f.parent);
            }
        }
        Ok(Output::BfsTree { parents, layers })
    }
}

/// Every node writes its degree; the output is half the sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct NumEdgesSimAsync;

pub fn num_edges_simasync() -> NumEdgesSimAsync {
    NumEdgesSimAsync
}

impl Protocol for NumEdgesSimAsync {
    fn name(&self) -> String {
        "num-edges".into()
    }

    fn target_model(&self) -> Model {
        Model::SimAsync
    }

    fn compose(&self, view: &LocalView, _: &Whiteboard, _: usize) -> Payload {
        Payload::new(vec![Field::Count(view.degree())])
    }

    fn decide(&self, board: &Whiteboard, _: usize) -> Result<Output, DecideError> {
        let mut sum = 0u64;
        for m in board {
            match m.payload.fields() {
                [Field::Count(d)] => sum += *d as u64,
                _ => {
                    return Err(DecideError::MalformedBoard(format!(
                        "node {} wrote no degree",
                        m.author
                    )))
                }
            }
        }
        if sum % 2 == 1 {
            return Err(DecideError::OddDegreeSum(sum));
        }
        Ok(Output::Count(sum / 2))
    }
}
