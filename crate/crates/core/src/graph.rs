//! Multi-branch inference DAG.
//!
//! Each sensing band feeds one branch, a simple chain of jobs. Branch tails
//! meet at alignment nodes, which feed an optional fusion head
//! (`Fusion -> Classifier -> Output`). Cross-branch nodes carry branch id 0.

use alloc::collections::{BTreeMap, BTreeSet, BinaryHeap};
use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Reverse;
use core::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Dense node index in `[0, V)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// One job of the inference DAG. All times are milliseconds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DagNode {
    pub id: NodeId,
    /// 1..=K for branch jobs, 0 for cross-branch jobs.
    pub branch: u32,
    pub label: String,
    pub d_cmp: f64,
    pub r_on: f64,
    pub w_on: f64,
    pub r_off: f64,
    pub w_off: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphRecord {
    nodes: Vec<DagNode>,
    edges: Vec<(NodeId, NodeId)>,
    entries: BTreeMap<u32, NodeId>,
}

/// Inference DAG with precomputed adjacency.
///
/// Serializes as `{nodes, edges, entries}`. Adjacency only covers edges whose
/// endpoints exist; [`DagGraph::validate`] reports the rest.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "GraphRecord", into = "GraphRecord")]
pub struct DagGraph {
    nodes: Vec<DagNode>,
    edges: Vec<(NodeId, NodeId)>,
    entries: BTreeMap<u32, NodeId>,
    preds: Vec<Vec<NodeId>>,
    succs: Vec<Vec<NodeId>>,
}

impl From<GraphRecord> for DagGraph {
    fn from(r: GraphRecord) -> Self {
        DagGraph::from_parts(r.nodes, r.edges, r.entries)
    }
}

impl From<DagGraph> for GraphRecord {
    fn from(g: DagGraph) -> Self {
        GraphRecord {
            nodes: g.nodes,
            edges: g.edges,
            entries: g.entries,
        }
    }
}

/// Uniform sampling range `[lo, hi]`, serialized as a two-element array.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct CostRange {
    pub lo: f64,
    pub hi: f64,
}

impl CostRange {
    pub const fn new(lo: f64, hi: f64) -> Self {
        CostRange { lo, hi }
    }

    fn is_valid(&self) -> bool {
        self.lo.is_finite() && self.hi.is_finite() && self.lo >= 0.0 && self.lo <= self.hi
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        rng.gen_range(self.lo..=self.hi)
    }
}

impl From<[f64; 2]> for CostRange {
    fn from(v: [f64; 2]) -> Self {
        CostRange::new(v[0], v[1])
    }
}

impl From<CostRange> for [f64; 2] {
    fn from(r: CostRange) -> Self {
        [r.lo, r.hi]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CostRanges {
    pub d_cmp: CostRange,
    pub r_on: CostRange,
    pub w_on: CostRange,
    pub r_off: CostRange,
    pub w_off: CostRange,
}

impl CostRanges {
    /// Compute U[1,11] ms, on-chip U[0.1,0.6] ms, off-chip U[2,8] ms.
    pub const fn reference() -> Self {
        CostRanges {
            d_cmp: CostRange::new(1.0, 11.0),
            r_on: CostRange::new(0.1, 0.6),
            w_on: CostRange::new(0.1, 0.6),
            r_off: CostRange::new(2.0, 8.0),
            w_off: CostRange::new(2.0, 8.0),
        }
    }

    fn check(&self) -> Result<(), GraphError> {
        let fields = [
            ("d_cmp", self.d_cmp),
            ("r_on", self.r_on),
            ("w_on", self.w_on),
            ("r_off", self.r_off),
            ("w_off", self.w_off),
        ];
        for (field, r) in fields {
            if !r.is_valid() {
                return Err(GraphError::BadCostRange {
                    field,
                    lo: r.lo,
                    hi: r.hi,
                });
            }
        }
        // every sampled on-chip latency must stay below every off-chip one
        if self.r_on.hi > self.r_off.lo {
            return Err(GraphError::OnChipOverlapsOffChip { field: "r" });
        }
        if self.w_on.hi > self.w_off.lo {
            return Err(GraphError::OnChipOverlapsOffChip { field: "w" });
        }
        Ok(())
    }
}

impl Default for CostRanges {
    fn default() -> Self {
        Self::reference()
    }
}

/// Parameters of the generated DAG family.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DagTopologySpec {
    pub branch_node_counts: Vec<usize>,
    pub align_groups: Vec<u32>,
    pub fusion_head: bool,
    pub cost_ranges: CostRanges,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GraphError {
    #[error("topology has no branches")]
    NoBranches,
    #[error("{counts} branch node counts but {groups} align group labels")]
    GroupCountMismatch { counts: usize, groups: usize },
    #[error("branch {branch} has no nodes")]
    EmptyBranch { branch: u32 },
    #[error("align group labels must form the contiguous set 1..=G")]
    AlignGroupsNotContiguous,
    #[error("invalid cost range for {field}: [{lo}, {hi}]")]
    BadCostRange {
        field: &'static str,
        lo: f64,
        hi: f64,
    },
    #[error("on-chip {field} range overlaps the off-chip range")]
    OnChipOverlapsOffChip { field: &'static str },
    #[error("cycle detected through edge {u} -> {v}")]
    Cycle { u: NodeId, v: NodeId },
}

/// One broken [`DagGraph`] invariant.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    IdMismatch { index: usize, id: NodeId },
    BadCost { node: NodeId, field: &'static str },
    OnChipSlower { node: NodeId, field: &'static str },
    MissingEndpoint { u: NodeId, v: NodeId },
    DuplicateEdge { u: NodeId, v: NodeId },
    EntryMissing { branch: u32 },
    EntryUnknownBranch { branch: u32 },
    EntryUnknownNode { branch: u32, node: NodeId },
    EntryHasPredecessors { branch: u32, node: NodeId },
    Cycle { u: NodeId, v: NodeId },
    SinkCount { count: usize },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::IdMismatch { index, id } => {
                write!(f, "node at position {index} has id {id}")
            }
            Violation::BadCost { node, field } => {
                write!(f, "node {node}: {field} is negative or not finite")
            }
            Violation::OnChipSlower { node, field } => {
                write!(f, "node {node}: on-chip {field} exceeds off-chip {field}")
            }
            Violation::MissingEndpoint { u, v } => {
                write!(f, "edge ({u},{v}): endpoint does not exist")
            }
            Violation::DuplicateEdge { u, v } => write!(f, "duplicate edge ({u},{v})"),
            Violation::EntryMissing { branch } => {
                write!(f, "branch {branch}: no entry node")
            }
            Violation::EntryUnknownBranch { branch } => {
                write!(f, "entry listed for branch {branch} which has no nodes")
            }
            Violation::EntryUnknownNode { branch, node } => {
                write!(f, "branch {branch}: entry node {node} does not exist")
            }
            Violation::EntryHasPredecessors { branch, node } => {
                write!(f, "branch {branch}: entry node {node} has predecessors")
            }
            Violation::Cycle { u, v } => write!(f, "cycle through edge ({u},{v})"),
            Violation::SinkCount { count } => {
                write!(f, "graph with fusion head has {count} sinks, expected 1")
            }
        }
    }
}

impl DagGraph {
    /// Builds a graph from raw parts. No validation beyond skipping edges with
    /// missing endpoints in the adjacency lists.
    pub fn from_parts(
        nodes: Vec<DagNode>,
        edges: Vec<(NodeId, NodeId)>,
        entries: BTreeMap<u32, NodeId>,
    ) -> Self {
        let n = nodes.len();
        let mut preds = vec![Vec::new(); n];
        let mut succs = vec![Vec::new(); n];
        for &(u, v) in &edges {
            if u.0 < n && v.0 < n {
                preds[v.0].push(u);
                succs[u.0].push(v);
            }
        }
        DagGraph {
            nodes,
            edges,
            entries,
            preds,
            succs,
        }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[DagNode] {
        &self.nodes
    }

    pub fn node(&self, v: NodeId) -> &DagNode {
        &self.nodes[v.0]
    }

    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    pub fn entries(&self) -> &BTreeMap<u32, NodeId> {
        &self.entries
    }

    pub fn entry_of_branch(&self, branch: u32) -> Option<NodeId> {
        self.entries.get(&branch).copied()
    }

    pub fn preds(&self, v: NodeId) -> &[NodeId] {
        &self.preds[v.0]
    }

    pub fn succs(&self, v: NodeId) -> &[NodeId] {
        &self.succs[v.0]
    }

    pub fn node_by_label(&self, label: &str) -> Option<NodeId> {
        self.nodes.iter().find(|n| n.label == label).map(|n| n.id)
    }

    /// Kahn ordering emitting the smallest-id ready node first.
    pub fn topological_order(&self) -> Result<Vec<NodeId>, GraphError> {
        self.topological_order_by(|v| v.0)
    }

    /// Kahn ordering where ready nodes are emitted by ascending `(key, id)`.
    pub fn topological_order_by<K: Ord, F: Fn(NodeId) -> K>(
        &self,
        key: F,
    ) -> Result<Vec<NodeId>, GraphError> {
        let n = self.len();
        let mut indeg: Vec<usize> = self.preds.iter().map(Vec::len).collect();
        let mut ready = BinaryHeap::new();
        for (i, &d) in indeg.iter().enumerate() {
            if d == 0 {
                ready.push(Reverse((key(NodeId(i)), i)));
            }
        }
        let mut order = Vec::with_capacity(n);
        while let Some(Reverse((_, i))) = ready.pop() {
            order.push(NodeId(i));
            for &w in &self.succs[i] {
                indeg[w.0] -= 1;
                if indeg[w.0] == 0 {
                    ready.push(Reverse((key(w), w.0)));
                }
            }
        }
        if order.len() == n {
            return Ok(order);
        }
        // Every unemitted node keeps a predecessor that is also unemitted, so
        // walking predecessors must revisit a node; that closing edge is on a cycle.
        let start = (0..n)
            .find(|&i| indeg[i] > 0)
            .expect("stalled Kahn leaves a node");
        let mut seen = vec![false; n];
        let mut cur = start;
        loop {
            seen[cur] = true;
            let p = self.preds[cur]
                .iter()
                .find(|p| indeg[p.0] > 0)
                .expect("blocked node has a blocked predecessor")
                .0;
            if seen[p] {
                return Err(GraphError::Cycle {
                    u: NodeId(p),
                    v: NodeId(cur),
                });
            }
            cur = p;
        }
    }

    /// Lists every broken invariant. Empty iff the graph is well formed.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        let n = self.len();
        for (i, node) in self.nodes.iter().enumerate() {
            if node.id.0 != i {
                out.push(Violation::IdMismatch {
                    index: i,
                    id: node.id,
                });
            }
            let id = NodeId(i);
            for (field, x) in [
                ("d_cmp", node.d_cmp),
                ("r_on", node.r_on),
                ("w_on", node.w_on),
                ("r_off", node.r_off),
                ("w_off", node.w_off),
            ] {
                if !(x.is_finite() && x >= 0.0) {
                    out.push(Violation::BadCost { node: id, field });
                }
            }
            if node.r_on > node.r_off {
                out.push(Violation::OnChipSlower {
                    node: id,
                    field: "read",
                });
            }
            if node.w_on > node.w_off {
                out.push(Violation::OnChipSlower {
                    node: id,
                    field: "write",
                });
            }
        }

        let mut seen = BTreeSet::new();
        let mut reported = BTreeSet::new();
        for &(u, v) in &self.edges {
            if u.0 >= n || v.0 >= n {
                out.push(Violation::MissingEndpoint { u, v });
                continue;
            }
            if !seen.insert((u, v)) && reported.insert((u, v)) {
                out.push(Violation::DuplicateEdge { u, v });
            }
        }

        let branches = self.nodes.iter().map(|n| n.branch).max().unwrap_or(0);
        for k in 1..=branches {
            if !self.entries.contains_key(&k) {
                out.push(Violation::EntryMissing { branch: k });
            }
        }
        for (&k, &node) in &self.entries {
            if k == 0 || k > branches {
                out.push(Violation::EntryUnknownBranch { branch: k });
            } else if node.0 >= n {
                out.push(Violation::EntryUnknownNode { branch: k, node });
            } else if !self.preds[node.0].is_empty() {
                out.push(Violation::EntryHasPredecessors { branch: k, node });
            }
        }

        if let Err(GraphError::Cycle { u, v }) = self.topological_order() {
            out.push(Violation::Cycle { u, v });
        }

        if self.nodes.iter().any(|n| n.label == "Fusion") {
            let sinks = self.succs.iter().filter(|s| s.is_empty()).count();
            if sinks != 1 {
                out.push(Violation::SinkCount { count: sinks });
            }
        }
        out
    }
}

/// Generates the branch/align/fusion DAG for `spec`.
///
/// Ids are assigned branch-major, then `Align 1..G`, then the head, so id
/// order is a topological order. Costs are drawn in id order, field order
/// `d_cmp, r_on, w_on, r_off, w_off`, from a ChaCha8 stream seeded by `spec.seed`.
pub fn build_dag(spec: &DagTopologySpec) -> Result<DagGraph, GraphError> {
    let k = spec.branch_node_counts.len();
    if k == 0 {
        return Err(GraphError::NoBranches);
    }
    if spec.align_groups.len() != k {
        return Err(GraphError::GroupCountMismatch {
            counts: k,
            groups: spec.align_groups.len(),
        });
    }
    if let Some(b) = spec.branch_node_counts.iter().position(|&c| c == 0) {
        return Err(GraphError::EmptyBranch {
            branch: b as u32 + 1,
        });
    }
    let groups: BTreeSet<u32> = spec.align_groups.iter().copied().collect();
    let group_count = groups.len() as u32;
    if groups.iter().copied().ne(1..=group_count) {
        return Err(GraphError::AlignGroupsNotContiguous);
    }
    spec.cost_ranges.check()?;

    let ranges = &spec.cost_ranges;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut nodes = Vec::new();
    let mut push = |branch: u32, label: String, rng: &mut ChaCha8Rng| -> NodeId {
        let id = NodeId(nodes.len());
        nodes.push(DagNode {
            id,
            branch,
            label,
            d_cmp: ranges.d_cmp.sample(rng),
            r_on: ranges.r_on.sample(rng),
            w_on: ranges.w_on.sample(rng),
            r_off: ranges.r_off.sample(rng),
            w_off: ranges.w_off.sample(rng),
        });
        id
    };

    let mut edges = Vec::new();
    let mut entries = BTreeMap::new();
    let mut tails = Vec::with_capacity(k);
    for (b, &count) in spec.branch_node_counts.iter().enumerate() {
        let branch = b as u32 + 1;
        let mut prev = None;
        for i in 1..=count {
            let id = push(branch, format!("B{branch}.{i}"), &mut rng);
            match prev {
                None => {
                    entries.insert(branch, id);
                }
                Some(p) => edges.push((p, id)),
            }
            prev = Some(id);
        }
        tails.push(prev.expect("non-empty branch"));
    }

    let aligns: Vec<NodeId> = (1..=group_count)
        .map(|g| push(0, format!("Align {g}"), &mut rng))
        .collect();
    for (tail, &g) in tails.iter().zip(&spec.align_groups) {
        edges.push((*tail, aligns[g as usize - 1]));
    }

    if spec.fusion_head {
        let fusion = push(0, String::from("Fusion"), &mut rng);
        let classifier = push(0, String::from("Classifier"), &mut rng);
        let output = push(0, String::from("Output"), &mut rng);
        for &a in &aligns {
            edges.push((a, fusion));
        }
        edges.push((fusion, classifier));
        edges.push((classifier, output));
    }

    Ok(DagGraph::from_parts(nodes, edges, entries))
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    pub(crate) fn reference_spec(seed: u64) -> DagTopologySpec {
        DagTopologySpec {
            branch_node_counts: vec![5, 6, 7, 6, 8, 6],
            align_groups: vec![1, 1, 1, 2, 2, 2],
            fusion_head: true,
            cost_ranges: CostRanges::reference(),
            seed,
        }
    }

    fn bare(branch: u32, id: usize) -> DagNode {
        DagNode {
            id: NodeId(id),
            branch,
            label: format!("n{id}"),
            d_cmp: 1.0,
            r_on: 0.0,
            w_on: 0.0,
            r_off: 0.0,
            w_off: 0.0,
        }
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> DagGraph {
        let nodes = (0..n).map(|i| bare(1, i)).collect();
        let edges = edges.iter().map(|&(u, v)| (NodeId(u), NodeId(v))).collect();
        let mut entries = BTreeMap::new();
        entries.insert(1, NodeId(0));
        DagGraph::from_parts(nodes, edges, entries)
    }

    fn ids(order: &[NodeId]) -> Vec<usize> {
        order.iter().map(|v| v.0).collect()
    }

    #[test]
    fn reference_topology() {
        let g = build_dag(&reference_spec(7)).unwrap();
        assert_eq!(g.len(), 43);
        assert_eq!(g.entries().len(), 6);
        for &e in g.entries().values() {
            assert!(g.preds(e).is_empty());
        }
        let sinks: Vec<_> = g
            .nodes()
            .iter()
            .filter(|n| g.succs(n.id).is_empty())
            .collect();
        assert_eq!(sinks.len(), 1);
        assert_eq!(sinks[0].label, "Output");
        assert!(g.validate().is_empty());
        let a1 = g.node_by_label("Align 1").unwrap();
        let a2 = g.node_by_label("Align 2").unwrap();
        assert_eq!(g.preds(a1).len(), 3);
        assert_eq!(g.preds(a2).len(), 3);
    }

    #[test]
    fn minimal_topology() {
        let spec = DagTopologySpec {
            branch_node_counts: vec![1],
            align_groups: vec![1],
            fusion_head: false,
            cost_ranges: CostRanges::reference(),
            seed: 1,
        };
        let g = build_dag(&spec).unwrap();
        assert_eq!(g.len(), 2);
        assert_eq!(g.edges(), &[(NodeId(0), NodeId(1))]);
        assert_eq!(g.node(NodeId(1)).label, "Align 1");
    }

    #[test]
    fn two_groups_with_head() {
        let spec = DagTopologySpec {
            branch_node_counts: vec![2, 2],
            align_groups: vec![1, 2],
            fusion_head: true,
            cost_ranges: CostRanges::reference(),
            seed: 3,
        };
        let g = build_dag(&spec).unwrap();
        assert_eq!(g.len(), 9);
        let a1 = g.node_by_label("Align 1").unwrap();
        let a2 = g.node_by_label("Align 2").unwrap();
        let fu = g.node_by_label("Fusion").unwrap();
        assert_eq!(g.preds(a1).len(), 1);
        assert_eq!(g.preds(a2).len(), 1);
        assert_eq!(g.preds(fu).len(), 2);
        assert_eq!(g.node(fu).branch, 0);
    }

    #[test]
    fn build_rejects_bad_specs() {
        let mut spec = reference_spec(0);
        spec.branch_node_counts.clear();
        spec.align_groups.clear();
        assert_eq!(build_dag(&spec), Err(GraphError::NoBranches));

        let mut spec = reference_spec(0);
        spec.cost_ranges.d_cmp = CostRange::new(3.0, 1.0);
        assert!(matches!(
            build_dag(&spec),
            Err(GraphError::BadCostRange { field: "d_cmp", .. })
        ));

        let mut spec = reference_spec(0);
        spec.cost_ranges.r_on = CostRange::new(-0.1, 0.5);
        assert!(matches!(
            build_dag(&spec),
            Err(GraphError::BadCostRange { field: "r_on", .. })
        ));

        let mut spec = reference_spec(0);
        spec.align_groups = vec![1, 1, 1, 3, 3, 3];
        assert_eq!(build_dag(&spec), Err(GraphError::AlignGroupsNotContiguous));
    }

    #[test]
    fn chain_order() {
        let g = graph(3, &[(0, 1), (1, 2)]);
        assert_eq!(ids(&g.topological_order().unwrap()), [0, 1, 2]);
    }

    #[test]
    fn diamond_order() {
        let g = graph(4, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        assert_eq!(ids(&g.topological_order().unwrap()), [0, 1, 2, 3]);
    }

    #[test]
    fn min_id_tie_break_is_not_insertion_order() {
        // 3 is ready immediately but 0 comes first; 2 unlocks only after 1.
        let g = graph(4, &[(1, 2), (0, 1)]);
        assert_eq!(ids(&g.topological_order().unwrap()), [0, 1, 2, 3]);
        let g = graph(3, &[(2, 0)]);
        assert_eq!(ids(&g.topological_order().unwrap()), [1, 2, 0]);
    }

    #[test]
    fn self_loop_is_a_cycle() {
        let g = graph(1, &[(0, 0)]);
        assert_eq!(
            g.topological_order(),
            Err(GraphError::Cycle {
                u: NodeId(0),
                v: NodeId(0)
            })
        );
    }

    #[test]
    fn cycle_edge_lies_on_cycle() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 1), (3, 4)]);
        let Err(GraphError::Cycle { u, v }) = g.topological_order() else {
            panic!("expected cycle");
        };
        let on_cycle = [(1, 2), (2, 3), (3, 1)];
        assert!(on_cycle.contains(&(u.0, v.0)), "{u}->{v}");
    }

    #[test]
    fn entry_with_predecessor_is_reported() {
        let g = build_dag(&reference_spec(1)).unwrap();
        let e2 = g.entry_of_branch(2).unwrap();
        let mut edges = g.edges().to_vec();
        edges.push((NodeId(0), e2));
        let bad = DagGraph::from_parts(g.nodes().to_vec(), edges, g.entries().clone());
        let v = bad.validate();
        assert_eq!(
            v,
            [Violation::EntryHasPredecessors {
                branch: 2,
                node: e2
            }]
        );
        assert!(v[0].to_string().contains("entry node"));
        assert!(v[0].to_string().contains("has predecessors"));
    }

    #[test]
    fn duplicate_edge_is_reported_once() {
        let g = graph(5, &[(0, 1), (1, 2), (2, 3), (3, 4), (3, 4)]);
        let v = g.validate();
        assert_eq!(
            v,
            [Violation::DuplicateEdge {
                u: NodeId(3),
                v: NodeId(4)
            }]
        );
        assert!(v[0].to_string().starts_with("duplicate edge"));
    }

    #[test]
    fn validate_reports_missing_endpoint_and_cycle() {
        let g = graph(2, &[(0, 1), (1, 0), (1, 7)]);
        let v = g.validate();
        assert!(v.contains(&Violation::MissingEndpoint {
            u: NodeId(1),
            v: NodeId(7)
        }));
        assert!(v.iter().any(|x| matches!(x, Violation::Cycle { .. })));
    }

    #[test]
    fn serialization_field_names() {
        let g = build_dag(&DagTopologySpec {
            branch_node_counts: vec![1],
            align_groups: vec![1],
            fusion_head: false,
            cost_ranges: CostRanges::reference(),
            seed: 9,
        })
        .unwrap();
        let json: serde_json::Value = serde_json::to_value(&g).unwrap();
        let obj = json.as_object().unwrap();
        let keys: Vec<_> = obj.keys().cloned().collect();
        assert_eq!(keys, ["edges", "entries", "nodes"]);
        let node = json["nodes"][0].as_object().unwrap();
        for k in [
            "id", "branch", "label", "d_cmp", "r_on", "w_on", "r_off", "w_off",
        ] {
            assert!(node.contains_key(k), "{k}");
        }
        assert_eq!(json["edges"][0], serde_json::json!([0, 1]));
        assert_eq!(json["entries"]["1"], serde_json::json!(0));
        let back: DagGraph = serde_json::from_value(json).unwrap();
        assert_eq!(back, g);
    }

    fn arb_spec() -> impl Strategy<Value = DagTopologySpec> {
        (1usize..9, any::<u64>(), any::<bool>())
            .prop_flat_map(|(k, seed, head)| {
                (
                    proptest::collection::vec(1usize..10, k),
                    proptest::collection::vec(0u32..k as u32, k),
                    Just(seed),
                    Just(head),
                )
            })
            .prop_map(|(counts, raw_groups, seed, fusion_head)| {
                // relabel to a contiguous 1..=G set in first-seen order
                let mut map = BTreeMap::new();
                let align_groups = raw_groups
                    .iter()
                    .map(|g| {
                        let next = map.len() as u32 + 1;
                        *map.entry(*g).or_insert(next)
                    })
                    .collect();
                DagTopologySpec {
                    branch_node_counts: counts,
                    align_groups,
                    fusion_head,
                    cost_ranges: CostRanges::reference(),
                    seed,
                }
            })
    }

    proptest! {
        #[test]
        fn generated_graphs_are_valid(spec in arb_spec()) {
            let g = build_dag(&spec).unwrap();
            prop_assert!(g.validate().is_empty(), "{:?}", g.validate());
            let order = g.topological_order().unwrap();
            prop_assert_eq!(order.len(), g.len());
            let pos: Vec<usize> = {
                let mut p = vec![0; g.len()];
                for (i, v) in order.iter().enumerate() { p[v.0] = i; }
                p
            };
            for &(u, v) in g.edges() {
                prop_assert!(pos[u.0] < pos[v.0]);
                // id order is itself topological for generated graphs
                prop_assert!(u.0 < v.0);
            }
        }

        #[test]
        fn generation_is_pure(spec in arb_spec()) {
            let a = serde_json::to_vec(&build_dag(&spec).unwrap()).unwrap();
            let b = serde_json::to_vec(&build_dag(&spec).unwrap()).unwrap();
            prop_assert_eq!(a, b);
        }
    }
}
