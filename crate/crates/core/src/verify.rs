//! Output checking against the graph oracles, and the information-budget
//! auditor.
//!
//! Nothing here reuses protocol logic: every verdict is recomputed from the
//! graph itself.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::engine::{BudgetConfig, Output};
use crate::graph::{
    bfs_layers, enumerate_graphs_capped, generate, has_square, is_connected, is_two_cliques,
    mis_valid, GadgetKind, GadgetSpec, GraphError, LabeledGraph, NodeId, ProblemInstance,
    DEFAULT_ENUMERATION_CAP,
};

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Correct,
    Incorrect(String),
}

impl Verdict {
    pub fn is_correct(&self) -> bool {
        matches!(self, Verdict::Correct)
    }

    fn expect(ok: bool, reason: impl FnOnce() -> String) -> Self {
        if ok {
            Verdict::Correct
        } else {
            Verdict::Incorrect(reason())
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Verdict::Correct => f.write_str("correct"),
            Verdict::Incorrect(r) => write!(f, "incorrect: {r}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum VerifyError {
    #[error("output `{output}` does not answer {problem:?}")]
    TagMismatch {
        problem: ProblemInstance,
        output: &'static str,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

fn check_boolean(claimed: bool, truth: bool, what: &str) -> Verdict {
    Verdict::expect(claimed == truth, || format!("answered {claimed}, {what} is {truth}"))
}

/// Walks parent pointers from every node; `None` when all reach `root`.
fn tree_defect(
    g: &LabeledGraph,
    root: NodeId,
    parents: &BTreeMap<NodeId, NodeId>,
) -> Option<String> {
    for v in g.nodes() {
        let mut seen = BTreeSet::new();
        let mut cur = v;
        while cur != root {
            if !seen.insert(cur) {
                return Some(format!("cycle through node {cur}"));
            }
            match parents.get(&cur) {
                Some(&p) => cur = p,
                None => return Some(format!("node {cur} has no parent")),
            }
        }
    }
    if parents.contains_key(&root) {
        return Some(format!("root {root} has a parent"));
    }
    if parents.len() != g.n() - 1 {
        return Some(format!("{} tree edges for {} nodes", parents.len(), g.n()));
    }
    parents
        .iter()
        .find(|&(&c, &p)| !g.has_edge(c, p))
        .map(|(c, p)| format!("{c}->{p} is not an edge"))
}

fn check_bfs(
    g: &LabeledGraph,
    root: NodeId,
    parents: &BTreeMap<NodeId, NodeId>,
    layers: &BTreeMap<NodeId, usize>,
) -> Verdict {
    let truth = bfs_layers(g, root);
    for (v, d) in &truth {
        let Some(d) = d else {
            return Verdict::Incorrect(format!("node {v} is unreachable, graph is disconnected"));
        };
        if layers.get(v) != Some(d) {
            return Verdict::Incorrect(format!("node {v} at layer {:?}, distance is {d}", layers.get(v)));
        }
    }
    if layers.len() != g.n() {
        return Verdict::Incorrect("layer map has nodes outside the graph".into());
    }
    if let Some(defect) = tree_defect(g, root, parents) {
        return Verdict::Incorrect(defect);
    }
    match parents.iter().find(|&(c, p)| layers[p] + 1 != layers[c]) {
        Some((c, p)) => Verdict::Incorrect(format!("parent {p} of {c} is not one layer closer")),
        None => Verdict::Correct,
    }
}

/// Judges `out` as an answer to `problem` on `g`.
pub fn check_output(
    problem: &ProblemInstance,
    g: &LabeledGraph,
    out: &Output,
) -> Result<Verdict, VerifyError> {
    problem.validate(g.n())?;
    let mismatch = || VerifyError::TagMismatch {
        problem: *problem,
        output: out.tag(),
    };
    let verdict = match (problem, out) {
        (ProblemInstance::Mis { x }, Output::VertexSet(s)) => Verdict::expect(mis_valid(g, *x, s), || {
            format!("{out} is not a maximal independent set containing {x}")
        }),
        (ProblemInstance::TwoCliques, Output::Boolean(b)) => check_boolean(*b, is_two_cliques(g)?, "two-cliques"),
        (ProblemInstance::Square, Output::Boolean(b)) => check_boolean(*b, has_square(g), "square"),
        (ProblemInstance::Connectivity, Output::Boolean(b)) => check_boolean(*b, is_connected(g), "connected"),
        (ProblemInstance::Connectivity | ProblemInstance::SpanningTree { .. } | ProblemInstance::Bfs { .. }, Output::NotConnected) => {
            Verdict::expect(!is_connected(g), || "graph is connected".into())
        }
        (ProblemInstance::SpanningTree { root }, Output::ParentMap(parents)) => {
            match tree_defect(g, *root, parents) {
                Some(defect) => Verdict::Incorrect(defect),
                None => Verdict::Correct,
            }
        }
        (ProblemInstance::Bfs { root }, Output::BfsTree { parents, layers }) => check_bfs(g, *root, parents, layers),
        (ProblemInstance::NumEdges, Output::Count(k)) => {
            let m = g.edge_count() as u64;
            Verdict::expect(*k == m, || format!("counted {k}, graph has {m} edges"))
        }
        (ProblemInstance::Build, Output::AdjacencyMatrix(rows)) => {
            Verdict::expect(*rows == g.adjacency_matrix(), || "adjacency matrix differs".into())
        }
        _ => return Err(mismatch()),
    };
    Ok(verdict)
}

/// Graph families the auditor can count.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Family {
    AllGraphs,
    SquareFree,
    /// Parameter `n` is the base size; members have `2n` nodes.
    ClassC,
    /// `(n-1)`-regular graphs on `2n` nodes.
    TwoCliquesClass,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::AllGraphs, Family::SquareFree, Family::ClassC, Family::TwoCliquesClass];

    pub fn name(self) -> &'static str {
        match self {
            Family::AllGraphs => "all-graphs",
            Family::SquareFree => "square-free",
            Family::ClassC => "class-c",
            Family::TwoCliquesClass => "two-cliques-class",
        }
    }

    /// Node count of the family's members at parameter `n`.
    pub fn order(self, n: usize) -> usize {
        match self {
            Family::AllGraphs | Family::SquareFree => n,
            Family::ClassC | Family::TwoCliquesClass => 2 * n,
        }
    }
}

impl FromStr for Family {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Family::ALL
            .into_iter()
            .find(|f| f.name() == s)
            .ok_or_else(|| format!("unknown family `{s}`"))
    }
}

fn as_decimal<S: Serializer>(g: &BigUint, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&g.to_str_radix(10))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub family: Family,
    pub n: usize,
    /// Node count of each member.
    pub order: usize,
    #[serde(serialize_with = "as_decimal")]
    pub family_size: BigUint,
    /// `⌈log2 family_size⌉`; 0 for families of size 0 or 1.
    pub bits_needed: u64,
    /// `order × (payload budget + header bits)`.
    pub board_capacity: u64,
    pub feasible: bool,
}

/// `⌈log2 g⌉` computed on the integer: the bit length of `g - 1`.
pub fn ceil_log2(g: &BigUint) -> u64 {
    if *g <= BigUint::from(1u8) {
        0
    } else {
        (g - 1u8).bits()
    }
}

/// Counts `family` at parameter `n` by exhaustive enumeration and compares
/// the bits needed to tell members apart with what a full board can hold.
pub fn lemma1_audit(family: Family, n: usize, budget: BudgetConfig) -> Result<AuditReport, GraphError> {
    lemma1_audit_capped(family, n, budget, DEFAULT_ENUMERATION_CAP)
}

pub fn lemma1_audit_capped(
    family: Family,
    n: usize,
    budget: BudgetConfig,
    cap: usize,
) -> Result<AuditReport, GraphError> {
    let order = family.order(n);
    let count: u64 = match family {
        Family::AllGraphs => enumerate_graphs_capped(n, cap)?.count() as u64,
        Family::SquareFree => enumerate_graphs_capped(n, cap)?.filter(|g| !has_square(g)).count() as u64,
        Family::TwoCliquesClass => {
            let members = enumerate_graphs_capped(order, cap)?;
            members.filter(|g| g.nodes().all(|v| g.degree(v) + 1 == n)).count() as u64
        }
        Family::ClassC => {
            let mut members = HashSet::new();
            for h in enumerate_graphs_capped(n, cap)?.filter(|h| !has_square(h)) {
                for i in 1..=n {
                    for j in i + 1..=n {
                        let spec = GadgetSpec::with_base(GadgetKind::ClassC { i, j }, h.clone());
                        members.insert(generate(&spec)?);
                    }
                }
            }
            members.len() as u64
        }
    };
    let family_size = BigUint::from(count);
    let bits_needed = ceil_log2(&family_size);
    let per_message = budget.payload_bits(order) + budget.header_bits(order);
    let board_capacity = order as u64 * per_message as u64;
    Ok(AuditReport {
        family,
        n,
        order,
        family_size,
        bits_needed,
        board_capacity,
        feasible: bits_needed <= board_capacity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g(n: usize, edges: &[(NodeId, NodeId)]) -> LabeledGraph {
        LabeledGraph::from_edges(n, edges.iter().copied()).unwrap()
    }

    #[test]
    fn bfs_check_examples() {
        let c4 = g(4, &[(1, 2), (2, 3), (3, 4), (1, 4)]);
        let out = Output::BfsTree {
            parents: BTreeMap::from([(2, 1), (4, 1), (3, 2)]),
            layers: BTreeMap::from([(1, 0), (2, 1), (4, 1), (3, 2)]),
        };
        assert_eq!(check_output(&ProblemInstance::Bfs { root: 1 }, &c4, &out), Ok(Verdict::Correct));
        let wrong = Output::BfsTree {
            parents: BTreeMap::from([(2, 1), (4, 3), (3, 2)]),
            layers: BTreeMap::from([(1, 0), (2, 1), (4, 3), (3, 2)]),
        };
        assert!(!check_output(&ProblemInstance::Bfs { root: 1 }, &c4, &wrong).unwrap().is_correct());
        assert!(!check_output(&ProblemInstance::Bfs { root: 1 }, &c4, &Output::NotConnected)
            .unwrap()
            .is_correct());
    }

    #[test]
    fn spanning_tree_cycle_is_rejected() {
        let k3 = g(3, &[(1, 2), (1, 3), (2, 3)]);
        let out = Output::ParentMap(BTreeMap::from([(2, 1), (3, 2), (1, 3)]));
        match check_output(&ProblemInstance::SpanningTree { root: 1 }, &k3, &out).unwrap() {
            Verdict::Incorrect(reason) => assert!(reason.contains("root") || reason.contains("cycle"), "{reason}"),
            Verdict::Correct => panic!("accepted a cycle"),
        }
        let cyc = Output::ParentMap(BTreeMap::from([(2, 3), (3, 2)]));
        match check_output(&ProblemInstance::SpanningTree { root: 1 }, &k3, &cyc).unwrap() {
            Verdict::Incorrect(reason) => assert!(reason.contains("cycle"), "{reason}"),
            Verdict::Correct => panic!("accepted a cycle"),
        }
        let ok = Output::ParentMap(BTreeMap::from([(2, 1), (3, 2)]));
        assert!(check_output(&ProblemInstance::SpanningTree { root: 1 }, &k3, &ok).unwrap().is_correct());
        let non_edge = Output::ParentMap(BTreeMap::from([(2, 1), (3, 2)]));
        let path = g(3, &[(1, 2), (1, 3)]);
        assert!(!check_output(&ProblemInstance::SpanningTree { root: 1 }, &path, &non_edge)
            .unwrap()
            .is_correct());
    }

    #[test]
    fn boolean_and_count_checks() {
        let p4 = g(4, &[(1, 2), (2, 3), (3, 4)]);
        assert!(!check_output(&ProblemInstance::Square, &p4, &Output::Boolean(true)).unwrap().is_correct());
        assert!(check_output(&ProblemInstance::Square, &p4, &Output::Boolean(false)).unwrap().is_correct());
        assert!(check_output(&ProblemInstance::NumEdges, &p4, &Output::Count(3)).unwrap().is_correct());
        assert!(check_output(&ProblemInstance::Connectivity, &p4, &Output::Boolean(true)).unwrap().is_correct());
        assert!(!check_output(&ProblemInstance::Connectivity, &p4, &Output::NotConnected).unwrap().is_correct());
        assert!(matches!(
            check_output(&ProblemInstance::TwoCliques, &p4, &Output::Boolean(false)),
            Err(VerifyError::Graph(GraphError::NotInInputClass(_)))
        ));
    }

    #[test]
    fn tag_mismatch() {
        let p4 = g(4, &[(1, 2), (2, 3), (3, 4)]);
        assert!(matches!(
            check_output(&ProblemInstance::Square, &p4, &Output::Count(1)),
            Err(VerifyError::TagMismatch { .. })
        ));
        assert!(matches!(
            check_output(&ProblemInstance::Mis { x: 9 }, &p4, &Output::VertexSet(BTreeSet::new())),
            Err(VerifyError::Graph(GraphError::InvalidNode { .. }))
        ));
    }

    #[test]
    fn build_check_is_exact_equality() {
        for n in 1..=4 {
            for graph in crate::graph::enumerate_graphs(n).unwrap() {
                let out = Output::AdjacencyMatrix(graph.adjacency_matrix());
                assert!(check_output(&ProblemInstance::Build, &graph, &out).unwrap().is_correct());
            }
        }
        let p3 = g(3, &[(1, 2), (2, 3)]);
        let other = g(3, &[(1, 2)]);
        let out = Output::AdjacencyMatrix(other.adjacency_matrix());
        assert!(!check_output(&ProblemInstance::Build, &p3, &out).unwrap().is_correct());
    }

    #[test]
    fn ceil_log2_is_exact() {
        let cases = [(0u64, 0), (1, 0), (2, 1), (3, 2), (4, 2), (5, 3), (64, 6), (65, 7), (1 << 40, 40)];
        for (g, bits) in cases {
            assert_eq!(ceil_log2(&BigUint::from(g)), bits, "g={g}");
        }
    }

    #[test]
    fn audit_examples() {
        let b = BudgetConfig::default();
        let r = lemma1_audit(Family::AllGraphs, 4, b).unwrap();
        assert_eq!(r.family_size, BigUint::from(64u8));
        assert_eq!(r.bits_needed, 6);
        // 4 messages × (8·3 + 2·3) bits
        assert_eq!(r.board_capacity, 120);
        assert!(r.feasible);
        let r = lemma1_audit(Family::AllGraphs, 1, b).unwrap();
        assert_eq!((r.family_size.clone(), r.bits_needed, r.feasible), (BigUint::from(1u8), 0, true));
        let r = lemma1_audit(Family::SquareFree, 4, b).unwrap();
        assert_eq!(r.family_size, BigUint::from(54u8));
        assert_eq!(r.bits_needed, 6);
        assert!(lemma1_audit(Family::AllGraphs, 8, b).is_err());
    }

    #[test]
    fn audit_class_c_and_two_cliques() {
        let b = BudgetConfig::default();
        // square-free H on 3 nodes: all 8; 3 placements each
        let r = lemma1_audit(Family::ClassC, 3, b).unwrap();
        assert_eq!(r.order, 6);
        assert_eq!(r.family_size, BigUint::from(24u8));
        // 2-regular 6-node graphs: 60 hexagons + 10 triangle pairs
        let r = lemma1_audit(Family::TwoCliquesClass, 3, b).unwrap();
        assert_eq!(r.family_size, BigUint::from(70u8));
        assert_eq!(r.bits_needed, 7);
    }

    #[test]
    fn audit_serializes_size_as_decimal_string() {
        let r = lemma1_audit(Family::AllGraphs, 4, BudgetConfig::default()).unwrap();
        let json = serde_json::to_string(&r).unwrap();
        assert_eq!(
            json,
            r#"{"family":"all-graphs","n":4,"order":4,"family_size":"64","bits_needed":6,"board_capacity":120,"feasible":true}"#
        );
    }
}
