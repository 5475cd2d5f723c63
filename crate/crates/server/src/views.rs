use std::collections::BTreeMap;

use depheavy::analytics::edge_betweenness;
use depheavy::graph::{distances_from, GraphDocument, GraphEdge, GraphNode, UNREACHABLE};
use depheavy::heaviness::HeavinessTable;
use depheavy::{DepGraph, Digraph, NodeId};

/// Index of the largest drop in a descending sequence: values at or before
/// it are "high". `None` with fewer than two values or no drop.
pub fn elbow_cutoff(sorted_desc: &[f64]) -> Option<usize> {
    let mut best: Option<(f64, usize)> = None;
    for (i, w) in sorted_desc.windows(2).enumerate() {
        let drop = w[0] - w[1];
        if drop > 0.0 && best.is_none_or(|(d, _)| drop > d) {
            best = Some((drop, i));
        }
    }
    best.map(|(_, i)| i)
}

/// The strong downstream subgraph of `p`, restricted to packages whose
/// distance from `p` lies in `[min_depth, max_depth]` (the root is always
/// kept). Leaves whose only parent in the subgraph is the same package are
/// merged into one group node named `<parent>:leaves`. Edges carry `h`, and
/// those above the elbow of the sorted betweenness are highlighted.
pub fn downstream_graph_grouped(
    g: &DepGraph,
    table: &HeavinessTable,
    p: NodeId,
    min_depth: u32,
    max_depth: u32,
) -> GraphDocument {
    let s = g.strong();
    let dist = distances_from(s, p);
    let keep = |v: NodeId| v == p || (dist[v.index()] != UNREACHABLE && (min_depth..=max_depth).contains(&dist[v.index()]));
    let nodes: Vec<NodeId> = g.nodes().filter(|&v| keep(v)).collect();
    let local: BTreeMap<NodeId, usize> = nodes.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let edges: Vec<(NodeId, NodeId)> =
        nodes.iter().flat_map(|&v| s.children(v).iter().filter(|&&c| local.contains_key(&c)).map(move |&c| (v, c))).collect();

    let mut in_parents: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    let mut has_out: BTreeMap<NodeId, bool> = BTreeMap::new();
    for &(a, c) in &edges {
        in_parents.entry(c).or_default().push(a);
        has_out.insert(a, true);
    }
    // group id per leaf, keyed by its single parent
    let mut groups: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
    for &v in &nodes {
        if v == p || has_out.get(&v).copied().unwrap_or(false) {
            continue;
        }
        if let Some([only]) = in_parents.get(&v).map(Vec::as_slice) {
            groups.entry(*only).or_default().push(v);
        }
    }
    let grouped: BTreeMap<NodeId, NodeId> = groups.iter().flat_map(|(&q, leaves)| leaves.iter().map(move |&l| (l, q))).collect();
    let group_name = |q: NodeId| format!("{}:leaves", g.name(q));

    let mut doc = GraphDocument::default();
    for &v in &nodes {
        if grouped.contains_key(&v) {
            continue;
        }
        doc.nodes.push(GraphNode {
            name: g.name(v).to_string(),
            repository: g.repository(v).to_string(),
            members: None,
            depth: Some(dist[v.index()]),
        });
    }
    for (&q, leaves) in &groups {
        doc.nodes.push(GraphNode {
            name: group_name(q),
            repository: "group".into(),
            members: Some(leaves.iter().map(|&l| g.name(l).to_string()).collect()),
            depth: leaves.iter().map(|l| dist[l.index()]).min(),
        });
    }

    // one collapsed edge per group; h is the group's total
    let mut collapsed: BTreeMap<(String, String), u64> = BTreeMap::new();
    for &(a, c) in &edges {
        let h = table.edge_h[s.edge_id(a, c).expect("strong edge").index()];
        let child = match grouped.get(&c) {
            Some(&q) => group_name(q),
            None => g.name(c).to_string(),
        };
        *collapsed.entry((g.name(a).to_string(), child)).or_insert(0) += h;
    }

    let names: Vec<&str> = doc.nodes.iter().map(|n| n.name.as_str()).collect();
    let mut sorted_names = names.clone();
    sorted_names.sort_unstable();
    let id_of = |n: &str| NodeId(sorted_names.binary_search(&n).expect("node listed") as u32);
    let view = Digraph::from_edges(sorted_names.len(), collapsed.keys().map(|(a, c)| (id_of(a), id_of(c))));
    let bt = edge_betweenness::<f64>(&view);
    let mut values: Vec<f64> = bt.values.clone();
    values.sort_by(|a, b| b.total_cmp(a));
    let cutoff = elbow_cutoff(&values).map(|i| values[i]);

    for ((a, c), h) in collapsed {
        let e = view.edge_id(id_of(&a), id_of(&c)).expect("edge in view");
        let b = bt.values[e.index()];
        doc.edges.push(GraphEdge {
            h: Some(h),
            betweenness: Some(b),
            highlighted: cutoff.is_some_and(|t| b >= t),
            ..GraphEdge::strong(a, c)
        });
    }
    doc
}
