use std::collections::{BTreeSet, VecDeque};

use super::{DepGraph, Digraph, EdgeId, NodeId, NodeSet};
use crate::Result;

pub const UNREACHABLE: u32 = u32::MAX;

/// Upstream set of `p` following only edges accepted by `allow`, sorted,
/// excluding `p`.
pub fn upstream_filtered(g: &Digraph, p: NodeId, mut allow: impl FnMut(EdgeId) -> bool) -> Vec<NodeId> {
    let mut seen = vec![false; g.node_count()];
    seen[p.index()] = true;
    let mut queue = VecDeque::from([p]);
    let mut out = Vec::new();
    while let Some(v) = queue.pop_front() {
        for (e, u) in g.in_edges(v) {
            if !seen[u.index()] && allow(e) {
                seen[u.index()] = true;
                out.push(u);
                queue.push_back(u);
            }
        }
    }
    out.sort_unstable();
    out
}

/// Upstream set of `p` in the view of `g` without `removed`. The graph is not
/// modified. Every removed edge must exist.
pub fn reach_without(g: &DepGraph, p: NodeId, removed: &[(NodeId, NodeId)]) -> Result<NodeSet> {
    let mut skip = BTreeSet::new();
    for &(a, b) in removed {
        skip.insert(g.strong_edge(a, b)?);
    }
    Ok(upstream_filtered(g.strong(), p, |e| !skip.contains(&e)).into_iter().collect())
}

/// BFS distances from `a` along edges; [`UNREACHABLE`] where not reached.
pub fn distances_from(g: &Digraph, a: NodeId) -> Vec<u32> {
    bfs(g, a, true)
}

/// BFS distances to `b` against edges; [`UNREACHABLE`] where not reached.
pub fn distances_to(g: &Digraph, b: NodeId) -> Vec<u32> {
    bfs(g, b, false)
}

fn bfs(g: &Digraph, start: NodeId, forward: bool) -> Vec<u32> {
    let mut dist = vec![UNREACHABLE; g.node_count()];
    dist[start.index()] = 0;
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        let next = if forward { g.children(v) } else { g.parents(v) };
        for &w in next {
            if dist[w.index()] == UNREACHABLE {
                dist[w.index()] = dist[v.index()] + 1;
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Length of the shortest directed path `a → … → b`.
pub fn distance(g: &Digraph, a: NodeId, b: NodeId) -> Option<u32> {
    if a == b {
        return Some(0);
    }
    let d = distances_from(g, a)[b.index()];
    (d != UNREACHABLE).then_some(d)
}

/// Largest distance from any upstream package to `p`; 0 without upstream.
pub fn depth(g: &Digraph, p: NodeId) -> u32 {
    distances_to(g, p).into_iter().filter(|&d| d != UNREACHABLE).max().unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::super::fixtures::*;
    use super::*;

    #[test]
    fn reach_without_on_g1() {
        let g = g1();
        let (a, p) = (g.id("A").unwrap(), g.id("P").unwrap());
        assert_eq!(reach_without(&g, p, &[(a, p)]).unwrap(), ids(&g, &["B", "C", "E"]));
        assert_eq!(reach_without(&g, p, &[]).unwrap(), g.upstream(p));
    }

    #[test]
    fn reach_without_rejects_missing_edge() {
        let g = g1();
        let (e, p) = (g.id("E").unwrap(), g.id("P").unwrap());
        assert!(matches!(reach_without(&g, p, &[(e, p)]), Err(crate::Error::MissingEdge { .. })));
    }

    #[test]
    fn distances_on_g1() {
        let g = g1();
        let s = g.strong();
        let (e, p, a) = (g.id("E").unwrap(), g.id("P").unwrap(), g.id("A").unwrap());
        assert_eq!(distance(s, e, p), Some(3));
        assert_eq!(distance(s, p, p), Some(0));
        assert_eq!(distance(s, p, e), None);
        assert_eq!(depth(s, p), 3);
        assert_eq!(depth(s, a), 2);
        assert_eq!(depth(s, e), 0);
    }
}
