//! Whole-ecosystem heaviness computation.
//!
//! For a package `b`, reverse the strong edges of its upstream subgraph and
//! root the result at `b`, with one extra node splitting each edge from `b`
//! to a parent. In that graph an upstream package `x` is lost when the edges
//! leaving `c` are demoted exactly when `c` dominates `x`, and lost when the
//! edge `a → b` is demoted exactly when the split node of `a` dominates `x`.
//! Subtree sizes in the dominator tree therefore give `h_u(c → b)` for every
//! upstream `c` and `h(a → b)` for every parent `a` in one pass. Co-heaviness
//! comes from counting, for every upstream package, which parents it still
//! reaches `b` through: a package covered by exactly the pair `{a, b}` is the
//! pair's co-heaviness.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use super::gini;
use crate::graph::{iter_ones, DepGraph, NodeId, ReachabilityIndex};
use crate::Scalar;

const NONE: u32 = u32::MAX;

/// Heaviness metrics of one package, kept as exact integer sums.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct PackageHeaviness {
    pub n_strong: u64,
    pub k_p: u64,
    pub k_c: u64,
    pub k_d: u64,
    pub k_id: u64,
    pub mhp: u64,
    pub mhp_parents: Vec<NodeId>,
    pub mcohp: u64,
    pub mcohp_pair: Option<(NodeId, NodeId)>,
    /// Σ h over children.
    pub hc_sum: u64,
    /// Σ h_u over downstream packages; the total downstream heaviness.
    pub hd_sum: u64,
    /// Σ h_u over indirect downstream packages.
    pub hid_sum: u64,
    pub depth: u32,
}

impl PackageHeaviness {
    pub fn hc<T: Scalar>(&self) -> Option<T> {
        (self.k_c > 0).then(|| T::ratio(self.hc_sum, self.k_c))
    }

    pub fn hd<T: Scalar>(&self) -> Option<T> {
        (self.k_d > 0).then(|| T::ratio(self.hd_sum, self.k_d))
    }

    /// Zero without indirect downstream packages.
    pub fn hid<T: Scalar>(&self) -> T {
        if self.k_id > 0 {
            T::ratio(self.hid_sum, self.k_id)
        } else {
            T::zero()
        }
    }

    pub fn total_downstream(&self) -> u64 {
        self.hd_sum
    }
}

/// Heaviness of every strong edge and every package of a graph.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct HeavinessTable {
    /// Indexed by strong [`EdgeId`](crate::EdgeId).
    pub edge_h: Vec<u64>,
    /// Indexed by [`NodeId`].
    pub packages: Vec<PackageHeaviness>,
}

impl HeavinessTable {
    pub fn package(&self, v: NodeId) -> &PackageHeaviness {
        &self.packages[v.index()]
    }

    /// Gini index of the heaviness values from `p`'s parents.
    pub fn gini_from_parents<T: Scalar>(&self, g: &DepGraph, p: NodeId) -> Option<T> {
        let values: Vec<T> = g.strong().in_edges(p).map(|(e, _)| T::from_count(self.edge_h[e.index()])).collect();
        gini(&values).ok()
    }

    /// Gini index of `p`'s heaviness values on its children.
    pub fn gini_on_children<T: Scalar>(&self, g: &DepGraph, p: NodeId) -> Option<T> {
        let values: Vec<T> = g.strong().out_edges(p).map(|(e, _)| T::from_count(self.edge_h[e.index()])).collect();
        gini(&values).ok()
    }
}

struct LocalOut {
    b: NodeId,
    /// Aligned with the parent list of `b`.
    parent_h: Vec<u64>,
    depth: u32,
    mcohp: u64,
    mcohp_pair: Option<(NodeId, NodeId)>,
}

#[derive(Default)]
struct Scratch {
    local: Vec<u32>,
    global: Vec<NodeId>,
    dist: Vec<u32>,
    succ_off: Vec<u32>,
    succ: Vec<u32>,
    pred_off: Vec<u32>,
    pred: Vec<u32>,
    post: Vec<u32>,
    rpo_num: Vec<u32>,
    idom: Vec<u32>,
    size: Vec<u64>,
    stack: Vec<(u32, u32)>,
    queue: VecDeque<NodeId>,
    cover_cnt: Vec<u8>,
    cover_first: Vec<u32>,
    cover_second: Vec<u32>,
    seen: Vec<u32>,
    pairs: Vec<(u32, u32)>,
}

struct Acc {
    hd: Vec<u64>,
    hid: Vec<u64>,
    outs: Vec<LocalOut>,
    scratch: Scratch,
}

impl Acc {
    fn new(n: usize) -> Self {
        let scratch = Scratch { local: vec![NONE; n], ..Default::default() };
        Acc { hd: vec![0; n], hid: vec![0; n], outs: Vec::new(), scratch }
    }
}

/// Computes heaviness metrics for every package. Per-package work runs in
/// parallel; all sums are integers, so the result does not depend on the
/// schedule.
pub fn compute_heaviness_table(g: &DepGraph) -> HeavinessTable {
    let n = g.node_count();
    let reach = g.reach();
    let accs: Vec<Acc> = (0..n as u32)
        .into_par_iter()
        .with_min_len(64)
        .fold(
            || Acc::new(n),
            |mut acc, b| {
                let out = analyze(g, reach, NodeId(b), &mut acc.scratch, &mut acc.hd, &mut acc.hid, None);
                acc.outs.push(out);
                acc
            },
        )
        .collect();

    let mut hd = vec![0u64; n];
    let mut hid = vec![0u64; n];
    let mut outs = Vec::with_capacity(n);
    for acc in accs {
        for (dst, src) in hd.iter_mut().zip(&acc.hd) {
            *dst += src;
        }
        for (dst, src) in hid.iter_mut().zip(&acc.hid) {
            *dst += src;
        }
        outs.extend(acc.outs);
    }
    outs.sort_unstable_by_key(|o| o.b);

    let s = g.strong();
    let mut edge_h = vec![0u64; s.edge_count()];
    let mut hc = vec![0u64; n];
    for out in &outs {
        for ((e, a), &h) in s.in_edges(out.b).zip(&out.parent_h) {
            edge_h[e.index()] = h;
            hc[a.index()] += h;
        }
    }

    let packages = outs
        .into_iter()
        .map(|out| {
            let b = out.b;
            let parents = s.parents(b);
            let mhp = out.parent_h.iter().copied().max().unwrap_or(0);
            let mhp_parents = parents.iter().zip(&out.parent_h).filter(|(_, &h)| h == mhp).map(|(&a, _)| a).collect();
            let k_c = s.out_degree(b) as u64;
            let k_d = reach.downstream_count(b) as u64;
            PackageHeaviness {
                n_strong: reach.upstream_count(b) as u64,
                k_p: parents.len() as u64,
                k_c,
                k_d,
                k_id: k_d - k_c,
                mhp,
                mhp_parents,
                mcohp: out.mcohp,
                mcohp_pair: out.mcohp_pair,
                hc_sum: hc[b.index()],
                hd_sum: hd[b.index()],
                hid_sum: hid[b.index()],
                depth: out.depth,
            }
        })
        .collect();

    HeavinessTable { edge_h, packages }
}

/// `h_u(c → p)` for every upstream package `c` of `p`, sorted by `c`.
pub fn upstream_heaviness_all(g: &DepGraph, p: NodeId) -> Vec<(NodeId, u64)> {
    let n = g.node_count();
    let mut acc = Acc::new(n);
    let mut out = Vec::new();
    analyze(g, g.reach(), p, &mut acc.scratch, &mut acc.hd, &mut acc.hid, Some(&mut out));
    out.sort_unstable();
    out
}

fn analyze(
    g: &DepGraph,
    reach: &ReachabilityIndex,
    b: NodeId,
    sc: &mut Scratch,
    hd: &mut [u64],
    hid: &mut [u64],
    mut hu_out: Option<&mut Vec<(NodeId, u64)>>,
) -> LocalOut {
    let s = g.strong();
    let parents = s.parents(b);
    let kp = parents.len();
    let first_real = 1 + kp;

    // Local ids: 0 is b, 1..=kp split the edges from b to its parents, then
    // upstream packages in BFS order.
    sc.global.clear();
    sc.dist.clear();
    sc.global.push(b);
    sc.dist.push(0);
    for &a in parents {
        sc.global.push(a);
        sc.dist.push(0);
    }
    sc.local[b.index()] = 0;
    sc.queue.clear();
    sc.queue.push_back(b);
    let mut depth = 0;
    while let Some(v) = sc.queue.pop_front() {
        let dv = if v == b { 0 } else { sc.dist[sc.local[v.index()] as usize] };
        for &q in s.parents(v) {
            if sc.local[q.index()] == NONE {
                sc.local[q.index()] = sc.global.len() as u32;
                sc.global.push(q);
                sc.dist.push(dv + 1);
                depth = depth.max(dv + 1);
                sc.queue.push_back(q);
            }
        }
    }
    let len = sc.global.len();

    // successors point towards upstream
    sc.succ_off.clear();
    sc.succ.clear();
    sc.succ_off.push(0);
    for v in 0..len {
        if v == 0 {
            sc.succ.extend(1..=kp as u32);
        } else if v < first_real {
            sc.succ.push(sc.local[parents[v - 1].index()]);
        } else {
            for &q in s.parents(sc.global[v]) {
                if q != b {
                    sc.succ.push(sc.local[q.index()]);
                }
            }
        }
        sc.succ_off.push(sc.succ.len() as u32);
    }

    sc.pred_off.clear();
    sc.pred_off.resize(len + 1, 0);
    for &w in &sc.succ {
        sc.pred_off[w as usize + 1] += 1;
    }
    for i in 0..len {
        sc.pred_off[i + 1] += sc.pred_off[i];
    }
    sc.pred.clear();
    sc.pred.resize(sc.succ.len(), 0);
    {
        let mut fill: Vec<u32> = sc.pred_off[..len].to_vec();
        for v in 0..len {
            for k in sc.succ_off[v]..sc.succ_off[v + 1] {
                let w = sc.succ[k as usize] as usize;
                sc.pred[fill[w] as usize] = v as u32;
                fill[w] += 1;
            }
        }
    }

    // reverse postorder from the root
    sc.post.clear();
    sc.rpo_num.clear();
    sc.rpo_num.resize(len, NONE);
    sc.stack.clear();
    sc.stack.push((0, sc.succ_off[0]));
    sc.rpo_num[0] = 0;
    while let Some(top) = sc.stack.last_mut() {
        let (v, k) = *top;
        if k < sc.succ_off[v as usize + 1] {
            top.1 += 1;
            let w = sc.succ[k as usize];
            if sc.rpo_num[w as usize] == NONE {
                sc.rpo_num[w as usize] = 0;
                sc.stack.push((w, sc.succ_off[w as usize]));
            }
        } else {
            sc.post.push(v);
            sc.stack.pop();
        }
    }
    debug_assert_eq!(sc.post.len(), len);
    sc.post.reverse();
    for (i, &v) in sc.post.iter().enumerate() {
        sc.rpo_num[v as usize] = i as u32;
    }

    // iterative dominators (Cooper, Harvey, Kennedy)
    sc.idom.clear();
    sc.idom.resize(len, NONE);
    sc.idom[0] = 0;
    let mut changed = true;
    while changed {
        changed = false;
        for i in 1..len {
            let v = sc.post[i] as usize;
            let mut new = NONE;
            for k in sc.pred_off[v]..sc.pred_off[v + 1] {
                let p = sc.pred[k as usize];
                if sc.idom[p as usize] == NONE {
                    continue;
                }
                new = if new == NONE { p } else { intersect(&sc.idom, &sc.rpo_num, p, new) };
            }
            if sc.idom[v] != new {
                sc.idom[v] = new;
                changed = true;
            }
        }
    }

    sc.size.clear();
    sc.size.extend((0..len).map(|v| u64::from(v >= first_real)));
    for i in (1..len).rev() {
        let v = sc.post[i] as usize;
        let d = sc.idom[v] as usize;
        sc.size[d] += sc.size[v];
    }

    let parent_h: Vec<u64> = (1..=kp).map(|v| sc.size[v]).collect();
    for v in first_real..len {
        let x = sc.global[v];
        let hu = sc.size[v];
        if let Some(out) = hu_out.as_deref_mut() {
            out.push((x, hu));
        }
        hd[x.index()] += hu;
        if parents.binary_search(&x).is_err() {
            hid[x.index()] += hu;
        }
    }

    let (mcohp, mcohp_pair) = if kp >= 2 { max_pair_cover(g, reach, b, sc, first_real) } else { (0, None) };

    for &v in &sc.global {
        sc.local[v.index()] = NONE;
    }

    LocalOut { b, parent_h, depth, mcohp, mcohp_pair }
}

fn intersect(idom: &[u32], rpo_num: &[u32], mut a: u32, mut b: u32) -> u32 {
    while a != b {
        while rpo_num[a as usize] > rpo_num[b as usize] {
            a = idom[a as usize];
        }
        while rpo_num[b as usize] > rpo_num[a as usize] {
            b = idom[b as usize];
        }
    }
    a
}

fn max_pair_cover(
    g: &DepGraph,
    reach: &ReachabilityIndex,
    b: NodeId,
    sc: &mut Scratch,
    first_real: usize,
) -> (u64, Option<(NodeId, NodeId)>) {
    let s = g.strong();
    let parents = s.parents(b);
    let len = sc.global.len();
    sc.cover_cnt.clear();
    sc.cover_cnt.resize(len, 0);
    sc.cover_first.clear();
    sc.cover_first.resize(len, NONE);
    sc.cover_second.clear();
    sc.cover_second.resize(len, NONE);

    fn mark(sc: &mut Scratch, lx: usize, i: u32) {
        match sc.cover_cnt[lx] {
            0 => sc.cover_first[lx] = i,
            1 => sc.cover_second[lx] = i,
            _ => {}
        }
        sc.cover_cnt[lx] = sc.cover_cnt[lx].saturating_add(1).min(3);
    }

    if !reach.on_cycle(b) {
        // no path into a parent can pass through b, so full closures apply
        for (i, &a) in parents.iter().enumerate() {
            let la = sc.local[a.index()] as usize;
            mark(sc, la, i as u32);
            for x in iter_ones(reach.upstream_words(a)) {
                let lx = sc.local[x] as usize;
                mark(sc, lx, i as u32);
            }
        }
    } else {
        sc.seen.clear();
        sc.seen.resize(len, 0);
        for (i, &a) in parents.iter().enumerate() {
            let stamp = i as u32 + 1;
            let la = sc.local[a.index()] as usize;
            sc.seen[la] = stamp;
            mark(sc, la, i as u32);
            sc.queue.clear();
            sc.queue.push_back(a);
            while let Some(v) = sc.queue.pop_front() {
                for &q in s.parents(v) {
                    if q == b {
                        continue;
                    }
                    let lq = sc.local[q.index()] as usize;
                    if sc.seen[lq] != stamp {
                        sc.seen[lq] = stamp;
                        mark(sc, lq, i as u32);
                        sc.queue.push_back(q);
                    }
                }
            }
        }
    }

    sc.pairs.clear();
    for lx in first_real..len {
        if sc.cover_cnt[lx] == 2 {
            sc.pairs.push((sc.cover_first[lx], sc.cover_second[lx]));
        }
    }
    sc.pairs.sort_unstable();
    let mut best = (0u64, (0u32, 1u32));
    let mut i = 0;
    while i < sc.pairs.len() {
        let mut j = i;
        while j < sc.pairs.len() && sc.pairs[j] == sc.pairs[i] {
            j += 1;
        }
        let count = (j - i) as u64;
        if count > best.0 {
            best = (count, sc.pairs[i]);
        }
        i = j;
    }
    let (h, (x, y)) = best;
    (h, Some((parents[x as usize], parents[y as usize])))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;
    use crate::Exact;

    #[test]
    fn g1_table() {
        let g = g1();
        let t = compute_heaviness_table(&g);
        let s = g.strong();
        let h = |p: &str, c: &str| t.edge_h[s.edge_id(g.id(p).unwrap(), g.id(c).unwrap()).unwrap().index()];
        assert_eq!(
            [h("A", "P"), h("B", "P"), h("C", "A"), h("D", "A"), h("C", "B"), h("E", "C")],
            [2, 1, 2, 1, 2, 1]
        );
        let c = t.package(g.id("C").unwrap());
        assert_eq!((c.n_strong, c.k_p, c.k_c, c.k_d, c.k_id, c.depth), (1, 1, 2, 3, 1, 1));
        assert_eq!(c.hc::<Exact>(), Some(Exact::from_integer(2)));
        assert_eq!(c.hd::<Exact>(), Some(Exact::from_integer(2)));
        assert_eq!(c.hid::<Exact>(), Exact::from_integer(2));
        assert_eq!(c.total_downstream(), 6);
        let p = t.package(g.id("P").unwrap());
        assert_eq!((p.mhp, p.mcohp, p.depth), (2, 2, 3));
        assert_eq!(p.mhp_parents, vec![g.id("A").unwrap()]);
        assert_eq!(p.mcohp_pair, Some((g.id("A").unwrap(), g.id("B").unwrap())));
        assert_eq!(t.gini_from_parents::<Exact>(&g, g.id("P").unwrap()), Some(Exact::new(1, 6)));
        assert_eq!(t.gini_on_children::<Exact>(&g, g.id("P").unwrap()), None);
    }

    #[test]
    fn cycles_are_tolerated() {
        let g = DepGraph::from_named_edges(&[("A", "B"), ("B", "A"), ("B", "P"), ("C", "P"), ("X", "A")], &[], &[]);
        let t = compute_heaviness_table(&g);
        let p = g.id("P").unwrap();
        for &a in g.strong().parents(p) {
            let e = g.strong().edge_id(a, p).unwrap();
            assert_eq!(t.edge_h[e.index()], super::super::edge_heaviness(&g, a, p).unwrap().h);
        }
        assert_eq!(t.package(p).mcohp, super::super::max_co_heaviness(&g, p).0);
    }
}
