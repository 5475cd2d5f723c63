//! Graph-level analyses built on per-edge heaviness.

mod betweenness;
mod relations;

use serde::Serialize;

pub use betweenness::{edge_betweenness, EdgeBetweenness};
pub use relations::{classify_parent_pair, source_score, PairRelation, SourceScore};

use crate::graph::{distances_from, Digraph, GraphDocument, GraphEdge, GraphNode, UNREACHABLE};
use crate::heaviness::HeavinessTable;
use crate::{DepGraph, EdgeId, NodeId, Scalar};

pub const DEFAULT_CORE_THRESHOLD: u64 = 30;
pub const DEFAULT_KEY_PATH_THRESHOLD: u64 = 20;

/// Strong edges whose heaviness reaches a threshold, over the same node ids
/// as the full graph.
#[derive(Debug, Clone)]
pub struct CoreGraph {
    pub threshold: u64,
    pub graph: Digraph,
    /// Indexed by the core graph's own edge ids.
    pub edge_h: Vec<u64>,
    /// Packages with at least one retained edge, sorted.
    pub nodes: Vec<NodeId>,
    pub flow_kept: u64,
    pub flow_total: u64,
}

impl CoreGraph {
    pub fn edge_count(&self) -> usize {
        self.graph.edge_count()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// `Σ h` retained over `Σ h` in the whole graph; zero for an empty graph.
    pub fn flow_fraction<T: Scalar>(&self) -> T {
        if self.flow_total == 0 {
            T::zero()
        } else {
            T::ratio(self.flow_kept, self.flow_total)
        }
    }

    pub fn contains(&self, v: NodeId) -> bool {
        self.nodes.binary_search(&v).is_ok()
    }

    pub fn to_document(&self, g: &DepGraph, betweenness: Option<&EdgeBetweenness<f64>>, highlight: Option<f64>) -> GraphDocument {
        let nodes = self
            .nodes
            .iter()
            .map(|&v| GraphNode { name: g.name(v).to_string(), repository: g.repository(v).to_string(), members: None, depth: None })
            .collect();
        let edges = self
            .graph
            .edges()
            .map(|(e, p, c)| {
                let bt = betweenness.map(|b| b.values[e.index()]);
                GraphEdge {
                    h: Some(self.edge_h[e.index()]),
                    betweenness: bt,
                    highlighted: matches!((bt, highlight), (Some(b), Some(t)) if b >= t),
                    ..GraphEdge::strong(g.name(p), g.name(c))
                }
            })
            .collect();
        GraphDocument { nodes, edges }
    }
}

/// Keeps every strong edge with `h ≥ threshold`.
pub fn core_graph(g: &DepGraph, table: &HeavinessTable, threshold: u64) -> CoreGraph {
    let s = g.strong();
    let mut kept = Vec::new();
    let mut edge_h = Vec::new();
    let mut flow_kept = 0;
    let mut flow_total = 0;
    for (e, p, c) in s.edges() {
        let h = table.edge_h[e.index()];
        flow_total += h;
        if h >= threshold {
            kept.push((p, c));
            edge_h.push(h);
            flow_kept += h;
        }
    }
    // edges() is parent-major and sorted, as is the new graph's edge order
    let graph = Digraph::from_edges(s.node_count(), kept);
    debug_assert_eq!(graph.edge_count(), edge_h.len());
    let nodes = graph.nodes().filter(|&v| graph.in_degree(v) + graph.out_degree(v) > 0).collect();
    CoreGraph { threshold, graph, edge_h, nodes, flow_kept, flow_total }
}

/// Weakly connected components of the packages of `cg`, each sorted; the
/// list is ordered by size descending, then by first member.
pub fn components(cg: &CoreGraph) -> Vec<Vec<NodeId>> {
    let n = cg.graph.node_count();
    let mut parent: Vec<u32> = (0..n as u32).collect();
    fn find(parent: &mut [u32], mut x: u32) -> u32 {
        while parent[x as usize] != x {
            parent[x as usize] = parent[parent[x as usize] as usize];
            x = parent[x as usize];
        }
        x
    }
    for (_, p, c) in cg.graph.edges() {
        let (a, b) = (find(&mut parent, p.0), find(&mut parent, c.0));
        if a != b {
            parent[a.max(b) as usize] = a.min(b);
        }
    }
    let mut groups: std::collections::BTreeMap<u32, Vec<NodeId>> = Default::default();
    for &v in &cg.nodes {
        groups.entry(find(&mut parent, v.0)).or_default().push(v);
    }
    let mut out: Vec<Vec<NodeId>> = groups.into_values().collect();
    out.sort_by(|a, b| b.len().cmp(&a.len()).then(a[0].cmp(&b[0])));
    out
}

pub fn component_sizes(cg: &CoreGraph) -> Vec<usize> {
    components(cg).iter().map(Vec::len).collect()
}

/// Edges of the core graph whose betweenness reaches a threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct KeyPaths<T> {
    pub threshold: T,
    pub edges: Vec<EdgeId>,
    pub nodes: Vec<NodeId>,
    pub betweenness_kept: T,
    pub betweenness_total: T,
}

impl<T: Scalar> KeyPaths<T> {
    pub fn flow_fraction(&self) -> T {
        if self.betweenness_total == T::zero() {
            T::zero()
        } else {
            self.betweenness_kept / self.betweenness_total
        }
    }
}

pub fn key_paths<T: Scalar>(cg: &CoreGraph, bt: &EdgeBetweenness<T>, threshold: T) -> KeyPaths<T> {
    let mut edges = Vec::new();
    let mut nodes = Vec::new();
    let mut kept = T::zero();
    let mut total = T::zero();
    for (e, p, c) in cg.graph.edges() {
        let b = bt.values[e.index()];
        total = total + b;
        if b >= threshold {
            edges.push(e);
            nodes.push(p);
            nodes.push(c);
            kept = kept + b;
        }
    }
    nodes.sort_unstable();
    nodes.dedup();
    KeyPaths { threshold, edges, nodes, betweenness_kept: kept, betweenness_total: total }
}

/// Longest shortest-path distance from `p` to a leaf it reaches; 0 when `p`
/// is itself a leaf.
pub fn transmission_length(g: &Digraph, p: NodeId) -> u32 {
    distances_from(g, p)
        .iter()
        .enumerate()
        .filter(|&(v, &d)| d != UNREACHABLE && g.is_leaf(NodeId(v as u32)))
        .map(|(_, &d)| d)
        .max()
        .unwrap_or(0)
}
