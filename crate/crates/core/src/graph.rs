//! Labeled graphs, ground-truth oracles and gadget generators.
//!
//! Vertices carry the identifiers `1..=n`. Every oracle here is a direct,
//! unoptimized computation over the adjacency sets; the protocol code never
//! calls into them, so they can serve as independent referees.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

/// Node identifier, 1-based.
pub type NodeId = usize;

/// Default node-count cap for [`enumerate_graphs`].
pub const DEFAULT_ENUMERATION_CAP: usize = 7;

const FILE_HEADER: &str = "# whiteboard-graph v1";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("graph must have at least one node")]
    Empty,
    #[error("identifier {id} out of range 1..={n}")]
    InvalidNode { id: NodeId, n: usize },
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("graph is not in the input class: {0}")]
    NotInInputClass(String),
    #[error("invalid gadget spec: {0}")]
    InvalidSpec(String),
    #[error("enumeration of n={n} exceeds cap {cap}")]
    CapExceeded { n: usize, cap: usize },
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

/// Simple undirected graph on identifiers `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct LabeledGraph {
    adjacency: Vec<BTreeSet<NodeId>>,
}

impl LabeledGraph {
    /// Edgeless graph on `n >= 1` nodes.
    pub fn new(n: usize) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        Ok(Self {
            adjacency: vec![BTreeSet::new(); n],
        })
    }

    pub fn from_edges<I>(n: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        let mut g = Self::new(n)?;
        for (u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    /// Builds the graph whose edge set is the bitmask `mask` over the
    /// lexicographic edge order `(1,2), (1,3), ..., (n-1,n)`.
    pub fn from_edge_mask(n: usize, mask: u64) -> Result<Self, GraphError> {
        let mut g = Self::new(n)?;
        let mut bit = 0;
        for u in 1..=n {
            for v in u + 1..=n {
                if mask >> bit & 1 == 1 {
                    g.add_edge(u, v)?;
                }
                bit += 1;
            }
        }
        Ok(g)
    }

    pub fn n(&self) -> usize {
        self.adjacency.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> {
        1..=self.n()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        (1..=self.n()).contains(&id)
    }

    fn check(&self, id: NodeId) -> Result<(), GraphError> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(GraphError::InvalidNode { id, n: self.n() })
        }
    }

    /// Adds `{u, v}`; adding an existing edge is a no-op.
    pub fn add_edge(&mut self, u: NodeId, v: NodeId) -> Result<(), GraphError> {
        self.check(u)?;
        self.check(v)?;
        if u == v {
            return Err(GraphError::SelfLoop(u));
        }
        self.adjacency[u - 1].insert(v);
        self.adjacency[v - 1].insert(u);
        Ok(())
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.contains(u) && self.adjacency[u - 1].contains(&v)
    }

    /// Panics if `v` is not a node.
    pub fn neighbors(&self, v: NodeId) -> &BTreeSet<NodeId> {
        &self.adjacency[v - 1]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adjacency[v - 1].len()
    }

    /// Edges as `(u, v)` with `u < v`, in ascending lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency.iter().enumerate().flat_map(|(i, nbrs)| {
            let u = i + 1;
            nbrs.range(u + 1..).map(move |&v| (u, v))
        })
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Row-major adjacency matrix; entry `[u-1][v-1]`.
    pub fn adjacency_matrix(&self) -> Vec<Vec<bool>> {
        (1..=self.n())
            .map(|u| (1..=self.n()).map(|v| self.has_edge(u, v)).collect())
            .collect()
    }

    /// Serializes to the line-oriented graph file format.
    pub fn to_file_string(&self) -> String {
        let mut out = format!("{FILE_HEADER}\nn={}\n", self.n());
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }
}

impl FromStr for LabeledGraph {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let perr = |line: usize, msg: &str| GraphError::Parse {
            line,
            msg: msg.to_string(),
        };
        let mut lines = s.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
        match lines.next() {
            Some((_, FILE_HEADER)) => {}
            _ => return Err(perr(1, "missing `# whiteboard-graph v1` header")),
        }
        let mut graph: Option<LabeledGraph> = None;
        for (no, line) in lines {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            match graph.as_mut() {
                None => {
                    let n = line
                        .strip_prefix("n=")
                        .and_then(|v| v.parse::<usize>().ok())
                        .ok_or_else(|| perr(no, "expected `n=<N>`"))?;
                    graph = Some(LabeledGraph::new(n).map_err(|e| perr(no, &e.to_string()))?);
                }
                Some(g) => {
                    let mut parts = line.split_whitespace().map(str::parse::<usize>);
                    let (u, v) = match (parts.next(), parts.next(), parts.next()) {
                        (Some(Ok(u)), Some(Ok(v)), None) => (u, v),
                        _ => return Err(perr(no, "expected `<u> <v>`")),
                    };
                    g.add_edge(u, v).map_err(|e| perr(no, &e.to_string()))?;
                }
            }
        }
        graph.ok_or_else(|| perr(2, "missing `n=<N>` line"))
    }
}

impl fmt::Display for LabeledGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_file_string())
    }
}

/// Problem the network is asked to solve, with its distinguished identifiers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProblemInstance {
    Mis { x: NodeId },
    TwoCliques,
    Square,
    SpanningTree { root: NodeId },
    Bfs { root: NodeId },
    Connectivity,
    NumEdges,
    Build,
}

impl ProblemInstance {
    pub fn validate(&self, n: usize) -> Result<(), GraphError> {
        match *self {
            ProblemInstance::Mis { x: id }
            | ProblemInstance::SpanningTree { root: id }
            | ProblemInstance::Bfs { root: id }
                if !(1..=n).contains(&id) =>
            {
                Err(GraphError::InvalidNode { id, n })
            }
            _ => Ok(()),
        }
    }
}

/// True iff four distinct vertices `a, b, c, d` form the cycle `a-b-c-d-a`.
pub fn has_square(g: &LabeledGraph) -> bool {
    let n = g.n();
    for a in 1..=n {
        for b in 1..=n {
            for c in 1..=n {
                for d in 1..=n {
                    let distinct = a != b && a != c && a != d && b != c && b != d && c != d;
                    if distinct
                        && g.has_edge(a, b)
                        && g.has_edge(b, c)
                        && g.has_edge(c, d)
                        && g.has_edge(d, a)
                    {
                        return true;
                    }
                }
            }
        }
    }
    false
}

/// Distance from `root` to every node; `None` marks unreachable nodes.
pub fn bfs_layers(g: &LabeledGraph, root: NodeId) -> BTreeMap<NodeId, Option<usize>> {
    let mut layers: BTreeMap<NodeId, Option<usize>> = g.nodes().map(|v| (v, None)).collect();
    layers.insert(root, Some(0));
    let mut queue = VecDeque::from([root]);
    while let Some(u) = queue.pop_front() {
        let next = layers[&u].map(|d| d + 1);
        for &w in g.neighbors(u) {
            if layers[&w].is_none() {
                layers.insert(w, next);
                queue.push_back(w);
            }
        }
    }
    layers
}

/// Nodes of the connected component containing `v`.
pub fn component_of(g: &LabeledGraph, v: NodeId) -> BTreeSet<NodeId> {
    bfs_layers(g, v)
        .into_iter()
        .filter_map(|(u, d)| d.map(|_| u))
        .collect()
}

pub fn is_connected(g: &LabeledGraph) -> bool {
    component_of(g, 1).len() == g.n()
}

fn check_two_cliques_class(g: &LabeledGraph) -> Result<usize, GraphError> {
    let order = g.n();
    if !order.is_multiple_of(2) {
        return Err(GraphError::NotInInputClass(format!(
            "order {order} is odd"
        )));
    }
    let half = order / 2;
    if let Some(v) = g.nodes().find(|&v| g.degree(v) != half - 1) {
        return Err(GraphError::NotInInputClass(format!(
            "node {v} has degree {}, expected {}",
            g.degree(v),
            half - 1
        )));
    }
    Ok(half)
}

/// Whether an `(n-1)`-regular `2n`-node graph is `K_n ⊎ K_n`, checked
/// directly: node 1's closed neighborhood and its complement must both be
/// cliques of size `n`.
pub fn is_two_cliques(g: &LabeledGraph) -> Result<bool, GraphError> {
    let half = check_two_cliques_class(g)?;
    let mut first: BTreeSet<NodeId> = g.neighbors(1).clone();
    first.insert(1);
    let second: BTreeSet<NodeId> = g.nodes().filter(|v| !first.contains(v)).collect();
    let is_clique = |part: &BTreeSet<NodeId>| {
        part.iter()
            .all(|&u| part.iter().all(|&v| u == v || g.has_edge(u, v)))
    };
    Ok(first.len() == half && second.len() == half && is_clique(&first) && is_clique(&second))
}

/// Same question answered through the disconnection equivalence.
pub fn is_two_cliques_via_connectivity(g: &LabeledGraph) -> Result<bool, GraphError> {
    check_two_cliques_class(g)?;
    Ok(!is_connected(g))
}

/// True iff `s` is an inclusion-maximal independent set containing `x`.
pub fn mis_valid(g: &LabeledGraph, x: NodeId, s: &BTreeSet<NodeId>) -> bool {
    if !s.contains(&x) || s.iter().any(|&v| !g.contains(v)) {
        return false;
    }
    let independent = s
        .iter()
        .all(|&u| s.iter().all(|&v| !g.has_edge(u, v)));
    let maximal = g
        .nodes()
        .filter(|v| !s.contains(v))
        .all(|v| s.iter().any(|&u| g.has_edge(u, v)));
    independent && maximal
}

/// Gadget families used by the separation arguments, plus plain shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GadgetKind {
    /// Base graph plus a vertex `n+1` adjacent to all but `v_i`, `v_j`.
    MisGadget { i: NodeId, j: NodeId },
    /// Square-free base, pendant layer `n+1..=2n`, one extra pendant edge.
    ClassC { i: NodeId, j: NodeId },
    /// Base graph plus root, `a`, `b`, `c` layers (`4n-1` nodes).
    BfsGadget { i: NodeId },
    TwoCliques { n: usize },
    Cycle { n: usize },
    Path { n: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GadgetSpec {
    pub kind: GadgetKind,
    pub base: Option<LabeledGraph>,
}

impl GadgetSpec {
    pub fn new(kind: GadgetKind) -> Self {
        Self { kind, base: None }
    }

    pub fn with_base(kind: GadgetKind, base: LabeledGraph) -> Self {
        Self {
            kind,
            base: Some(base),
        }
    }
}

fn invalid(msg: impl Into<String>) -> GraphError {
    GraphError::InvalidSpec(msg.into())
}

pub fn generate(spec: &GadgetSpec) -> Result<LabeledGraph, GraphError> {
    let base = || {
        spec.base
            .as_ref()
            .ok_or_else(|| invalid(format!("{:?} requires a base graph", spec.kind)))
    };
    let pair_in_range = |i: NodeId, j: NodeId, n: usize| {
        if 1 <= i && i < j && j <= n {
            Ok(())
        } else {
            Err(invalid(format!("need 1 <= i < j <= {n}, got i={i}, j={j}")))
        }
    };
    match spec.kind {
        GadgetKind::MisGadget { i, j } => {
            let h = base()?;
            let n = h.n();
            pair_in_range(i, j, n)?;
            let x = n + 1;
            let mut g = LabeledGraph::from_edges(x, h.edges())?;
            for k in (1..=n).filter(|&k| k != i && k != j) {
                g.add_edge(k, x)?;
            }
            Ok(g)
        }
        GadgetKind::ClassC { i, j } => {
            let h = base()?;
            let n = h.n();
            pair_in_range(i, j, n)?;
            if has_square(h) {
                return Err(invalid("class C base graph must be square-free"));
            }
            let mut g = LabeledGraph::from_edges(2 * n, h.edges())?;
            for k in 1..=n {
                g.add_edge(k, n + k)?;
            }
            g.add_edge(n + i, n + j)?;
            Ok(g)
        }
        GadgetKind::BfsGadget { i } => {
            let h = base()?;
            let n = h.n();
            if !(1..=n).contains(&i) {
                return Err(invalid(format!("need 1 <= i <= {n}, got i={i}")));
            }
            let r = n + 1;
            let a = |j: NodeId| n + 1 + j;
            // b_j and c_j skip j = i.
            let slot = |j: NodeId| if j < i { j } else { j - 1 };
            let b = |j: NodeId| 2 * n + 1 + slot(j);
            let c = |j: NodeId| 3 * n + slot(j);
            let mut g = LabeledGraph::from_edges(4 * n - 1, h.edges())?;
            for j in 1..=n {
                g.add_edge(r, a(j))?;
                if j == i {
                    g.add_edge(a(j), j)?;
                } else {
                    g.add_edge(b(j), j)?;
                    g.add_edge(c(j), a(j))?;
                    g.add_edge(c(j), b(j))?;
                }
            }
            Ok(g)
        }
        GadgetKind::TwoCliques { n } => {
            if n == 0 {
                return Err(invalid("two-cliques needs n >= 1"));
            }
            let mut g = LabeledGraph::new(2 * n)?;
            for offset in [0, n] {
                for u in 1..=n {
                    for v in u + 1..=n {
                        g.add_edge(offset + u, offset + v)?;
                    }
                }
            }
            Ok(g)
        }
        GadgetKind::Cycle { n } => {
            if n < 3 {
                return Err(invalid("cycle needs n >= 3"));
            }
            LabeledGraph::from_edges(n, (1..=n).map(|u| (u, u % n + 1)))
        }
        GadgetKind::Path { n } => {
            if n == 0 {
                return Err(invalid("path needs n >= 1"));
            }
            LabeledGraph::from_edges(n, (1..n).map(|u| (u, u + 1)))
        }
    }
}

/// All labeled graphs on `n` nodes in ascending edge-bitmask order.
#[derive(Debug, Clone)]
pub struct GraphEnumeration {
    n: usize,
    next: u64,
    end: u64,
}

impl Iterator for GraphEnumeration {
    type Item = LabeledGraph;

    fn next(&mut self) -> Option<LabeledGraph> {
        if self.next >= self.end {
            return None;
        }
        let mask = self.next;
        self.next += 1;
        Some(LabeledGraph::from_edge_mask(self.n, mask).expect("n >= 1 checked at construction"))
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        let left = (self.end - self.next) as usize;
        (left, Some(left))
    }
}

impl ExactSizeIterator for GraphEnumeration {}

pub fn enumerate_graphs(n: usize) -> Result<GraphEnumeration, GraphError> {
    enumerate_graphs_capped(n, DEFAULT_ENUMERATION_CAP)
}

pub fn enumerate_graphs_capped(n: usize, cap: usize) -> Result<GraphEnumeration, GraphError> {
    // 64-bit masks bound the cap at 11 nodes (55 edges).
    if n > cap || n > 11 {
        return Err(GraphError::CapExceeded { n, cap });
    }
    if n == 0 {
        return Err(GraphError::Empty);
    }
    let pairs = n * (n - 1) / 2;
    Ok(GraphEnumeration {
        n,
        next: 0,
        end: 1u64 << pairs,
    })
}
