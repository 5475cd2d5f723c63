use super::{distances_from, distances_to, Digraph, NodeId, UNREACHABLE};

/// For every package upstream of `p`, one shortest path to `p`, choosing the
/// first child by name at every hop. Sorted by the upstream package.
pub fn upstream_paths(g: &Digraph, p: NodeId) -> Vec<(NodeId, Vec<NodeId>)> {
    let dist = distances_to(g, p);
    let mut out = Vec::new();
    for u in g.nodes() {
        if u == p || dist[u.index()] == UNREACHABLE {
            continue;
        }
        let mut path = vec![u];
        let mut cur = u;
        while cur != p {
            let d = dist[cur.index()];
            cur = *g.children(cur).iter().find(|c| dist[c.index()] == d - 1).expect("a child one step closer");
            path.push(cur);
        }
        out.push((u, path));
    }
    out
}

/// For every package downstream of `p`, its distance and the
/// lexicographically smallest shortest path from `p`. Sorted by package.
pub fn downstream_paths(g: &Digraph, p: NodeId) -> Vec<(NodeId, u32, Vec<NodeId>)> {
    let dist = distances_from(g, p);
    let mut order: Vec<NodeId> = g.nodes().filter(|v| dist[v.index()] != UNREACHABLE).collect();
    order.sort_by_key(|v| (dist[v.index()], *v));
    let mut best: Vec<Option<Vec<NodeId>>> = vec![None; g.node_count()];
    best[p.index()] = Some(vec![p]);
    for &v in order.iter().skip(1) {
        let d = dist[v.index()];
        let mut choice: Option<&Vec<NodeId>> = None;
        for &q in g.parents(v) {
            if dist[q.index()] != UNREACHABLE && dist[q.index()] + 1 == d {
                let cand = best[q.index()].as_ref().expect("earlier layer done");
                if choice.is_none_or(|c| cand < c) {
                    choice = Some(cand);
                }
            }
        }
        let mut path = choice.expect("a parent one step closer").clone();
        path.push(v);
        best[v.index()] = Some(path);
    }
    let mut out: Vec<(NodeId, u32, Vec<NodeId>)> = order
        .into_iter()
        .filter(|&v| v != p)
        .map(|v| (v, dist[v.index()], best[v.index()].take().expect("path built")))
        .collect();
    out.sort_by_key(|x| x.0);
    out
}
