use serde::{Deserialize, Serialize};

/// Dense node index. Indices follow sorted package-name order in a
/// [`DepGraph`](super::DepGraph), so comparing ids compares names.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Index of an edge in its graph's parent-major edge order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EdgeId(pub u32);

impl EdgeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

/// Immutable directed graph in compressed adjacency form. Edges point from
/// parent to child; both directions are indexed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Digraph {
    out_offsets: Vec<u32>,
    out_targets: Vec<NodeId>,
    edge_sources: Vec<NodeId>,
    in_offsets: Vec<u32>,
    in_sources: Vec<NodeId>,
    in_edges: Vec<EdgeId>,
}

impl Digraph {
    /// Builds the graph; self-loops and duplicate edges are dropped.
    pub fn from_edges(node_count: usize, edges: impl IntoIterator<Item = (NodeId, NodeId)>) -> Self {
        let mut list: Vec<(NodeId, NodeId)> = edges.into_iter().filter(|(p, c)| p != c).collect();
        list.sort_unstable();
        list.dedup();
        for &(p, c) in &list {
            assert!(p.index() < node_count && c.index() < node_count, "edge endpoint out of range");
        }

        let mut out_offsets = vec![0u32; node_count + 1];
        let mut in_offsets = vec![0u32; node_count + 1];
        for &(p, c) in &list {
            out_offsets[p.index() + 1] += 1;
            in_offsets[c.index() + 1] += 1;
        }
        for i in 0..node_count {
            out_offsets[i + 1] += out_offsets[i];
            in_offsets[i + 1] += in_offsets[i];
        }
        let out_targets: Vec<NodeId> = list.iter().map(|&(_, c)| c).collect();
        let edge_sources: Vec<NodeId> = list.iter().map(|&(p, _)| p).collect();

        let mut fill = in_offsets.clone();
        let mut in_sources = vec![NodeId(0); list.len()];
        let mut in_edges = vec![EdgeId(0); list.len()];
        // parent-major order keeps each in-list sorted by parent
        for (e, &(p, c)) in list.iter().enumerate() {
            let slot = fill[c.index()] as usize;
            in_sources[slot] = p;
            in_edges[slot] = EdgeId(e as u32);
            fill[c.index()] += 1;
        }

        Digraph { out_offsets, out_targets, edge_sources, in_offsets, in_sources, in_edges }
    }

    pub fn node_count(&self) -> usize {
        self.out_offsets.len().saturating_sub(1)
    }

    pub fn edge_count(&self) -> usize {
        self.out_targets.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count() as u32).map(NodeId)
    }

    /// Children of `v`, sorted.
    #[inline]
    pub fn children(&self, v: NodeId) -> &[NodeId] {
        let (a, b) = (self.out_offsets[v.index()] as usize, self.out_offsets[v.index() + 1] as usize);
        &self.out_targets[a..b]
    }

    /// Parents of `v`, sorted.
    #[inline]
    pub fn parents(&self, v: NodeId) -> &[NodeId] {
        let (a, b) = (self.in_offsets[v.index()] as usize, self.in_offsets[v.index() + 1] as usize);
        &self.in_sources[a..b]
    }

    pub fn out_degree(&self, v: NodeId) -> usize {
        self.children(v).len()
    }

    pub fn in_degree(&self, v: NodeId) -> usize {
        self.parents(v).len()
    }

    /// `(edge, child)` pairs leaving `v`.
    pub fn out_edges(&self, v: NodeId) -> impl Iterator<Item = (EdgeId, NodeId)> + '_ {
        let a = self.out_offsets[v.index()];
        self.children(v).iter().enumerate().map(move |(i, &c)| (EdgeId(a + i as u32), c))
    }

    /// `(edge, parent)` pairs entering `v`.
    pub fn in_edges(&self, v: NodeId) -> impl Iterator<Item = (EdgeId, NodeId)> + '_ {
        let (a, b) = (self.in_offsets[v.index()] as usize, self.in_offsets[v.index() + 1] as usize);
        self.in_edges[a..b].iter().copied().zip(self.in_sources[a..b].iter().copied())
    }

    /// `(parent, child)` of an edge.
    #[inline]
    pub fn edge(&self, e: EdgeId) -> (NodeId, NodeId) {
        (self.edge_sources[e.index()], self.out_targets[e.index()])
    }

    pub fn edge_id(&self, parent: NodeId, child: NodeId) -> Option<EdgeId> {
        let a = self.out_offsets[parent.index()];
        self.children(parent).binary_search(&child).ok().map(|i| EdgeId(a + i as u32))
    }

    pub fn has_edge(&self, parent: NodeId, child: NodeId) -> bool {
        self.edge_id(parent, child).is_some()
    }

    /// All edges as `(id, parent, child)` in id order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, NodeId, NodeId)> + '_ {
        (0..self.edge_count()).map(move |e| (EdgeId(e as u32), self.edge_sources[e], self.out_targets[e]))
    }

    /// Nodes without children.
    pub fn is_leaf(&self, v: NodeId) -> bool {
        self.out_degree(v) == 0
    }
}
