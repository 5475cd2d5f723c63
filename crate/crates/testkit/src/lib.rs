//! Random graph generators and a deliberately naive reference
//! implementation of the heaviness metrics, for tests.
//!
//! The reference works on package names and edge sets and recomputes every
//! closure from scratch with a plain DFS; it shares no code with the library.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet, VecDeque};

use num_rational::Ratio;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub mod check;

pub type Q = Ratio<i64>;
pub type Edge = (String, String);

/// Strong edges `(parent, child)` plus the node list.
#[derive(Debug, Clone, Default)]
pub struct NaiveGraph {
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<Edge>,
    // plain closures only; edges are never mutated after construction
    up_cache: RefCell<BTreeMap<String, BTreeSet<String>>>,
    down_cache: RefCell<BTreeMap<String, BTreeSet<String>>>,
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random DAG with up to `max_nodes` nodes and `max_edges` edges. Names are
/// shuffled against the topological order.
pub fn random_dag(seed: u64, max_nodes: usize, max_edges: usize) -> NaiveGraph {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_nodes);
    let mut names: Vec<String> = (0..n).map(|i| format!("p{i:02}")).collect();
    names.shuffle(&mut r);
    let density: f64 = r.gen_range(0.05..0.6);
    let mut edges = BTreeSet::new();
    let target = r.gen_range(1..=max_edges);
    let mut tries = 0;
    while edges.len() < target && tries < target * 20 {
        tries += 1;
        let i = r.gen_range(0..n);
        let j = r.gen_range(0..n);
        if i < j && r.gen_bool(density.max(0.3)) {
            edges.insert((names[i].clone(), names[j].clone()));
        }
    }
    NaiveGraph { nodes: names.into_iter().collect(), edges, ..Default::default() }
}

/// Random directed graph that may contain cycles.
pub fn random_digraph(seed: u64, max_nodes: usize, max_edges: usize) -> NaiveGraph {
    let mut r = rng(seed);
    let n = r.gen_range(2..=max_nodes);
    let names: Vec<String> = (0..n).map(|i| format!("q{i:02}")).collect();
    let m = r.gen_range(1..=max_edges);
    let mut edges = BTreeSet::new();
    for _ in 0..m {
        let i = r.gen_range(0..n);
        let j = r.gen_range(0..n);
        if i != j {
            edges.insert((names[i].clone(), names[j].clone()));
        }
    }
    NaiveGraph { nodes: names.into_iter().collect(), edges, ..Default::default() }
}

/// Scale-free DAG by preferential attachment: node `i` picks its parents
/// among nodes `< i`, weighted by current child count plus one. Edge counts
/// per node are drawn so the total lands on `edges`.
pub fn scale_free_dag(seed: u64, nodes: usize, edges: usize) -> Vec<(u32, u32)> {
    let mut r = rng(seed);
    let mean = edges as f64 / nodes as f64;
    // ticket pool: each node appears once, plus once per child it gains
    let mut pool: Vec<u32> = Vec::with_capacity(nodes + edges);
    let mut out = Vec::with_capacity(edges);
    let mut picked = BTreeSet::new();
    for i in 0..nodes as u32 {
        let remaining = edges - out.len();
        let left = nodes - i as usize;
        let want = if left == 1 {
            remaining
        } else {
            let k = (r.gen::<f64>().powi(3) * mean * 4.0).round() as usize;
            k.min(remaining).min(i as usize)
        }
        .min(i as usize);
        picked.clear();
        let mut guard = 0;
        while picked.len() < want && guard < want * 50 {
            guard += 1;
            let p = if r.gen_bool(0.8) && !pool.is_empty() { pool[r.gen_range(0..pool.len())] } else { r.gen_range(0..i) };
            picked.insert(p);
        }
        for &p in &picked {
            out.push((p, i));
            pool.push(p);
        }
        pool.push(i);
    }
    out
}

impl NaiveGraph {
    pub fn from_edges(edges: &[(&str, &str)]) -> Self {
        let mut g = NaiveGraph::default();
        for &(p, c) in edges {
            g.nodes.insert(p.to_string());
            g.nodes.insert(c.to_string());
            g.edges.insert((p.to_string(), c.to_string()));
        }
        g
    }

    pub fn edge_list(&self) -> Vec<(&str, &str)> {
        self.edges.iter().map(|(p, c)| (p.as_str(), c.as_str())).collect()
    }

    pub fn parents(&self, p: &str) -> Vec<String> {
        self.edges.iter().filter(|(_, c)| c == p).map(|(a, _)| a.clone()).collect()
    }

    pub fn children(&self, p: &str) -> Vec<String> {
        self.edges.iter().filter(|(a, _)| a == p).map(|(_, c)| c.clone()).collect()
    }

    /// Everything that reaches `p` without using `removed`, excluding `p`.
    pub fn upstream_without(&self, p: &str, removed: &BTreeSet<Edge>) -> BTreeSet<String> {
        let mut parents: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
        for e in &self.edges {
            if !removed.contains(e) {
                parents.entry(e.1.as_str()).or_default().push(e.0.as_str());
            }
        }
        let mut seen = BTreeSet::new();
        let mut stack = vec![p];
        while let Some(v) = stack.pop() {
            for &a in parents.get(v).into_iter().flatten() {
                if seen.insert(a.to_string()) {
                    stack.push(a);
                }
            }
        }
        seen.remove(p);
        seen
    }

    pub fn upstream(&self, p: &str) -> BTreeSet<String> {
        if let Some(s) = self.up_cache.borrow().get(p) {
            return s.clone();
        }
        let s = self.upstream_without(p, &BTreeSet::new());
        self.up_cache.borrow_mut().insert(p.to_string(), s.clone());
        s
    }

    pub fn downstream(&self, p: &str) -> BTreeSet<String> {
        if let Some(s) = self.down_cache.borrow().get(p) {
            return s.clone();
        }
        let s: BTreeSet<String> = self.nodes.iter().filter(|x| *x != p && self.upstream(x).contains(p)).cloned().collect();
        self.down_cache.borrow_mut().insert(p.to_string(), s.clone());
        s
    }

    fn edges_from(&self, c: &str) -> BTreeSet<Edge> {
        self.edges.iter().filter(|(a, _)| a == c).cloned().collect()
    }

    fn edges_into(&self, p: &str, parents: &[&str]) -> BTreeSet<Edge> {
        parents.iter().map(|a| (a.to_string(), p.to_string())).collect()
    }

    /// Packages `p` loses when the edges from `parents` are demoted.
    pub fn reduced(&self, p: &str, parents: &[&str]) -> BTreeSet<String> {
        let before = self.upstream(p);
        let after = self.upstream_without(p, &self.edges_into(p, parents));
        before.difference(&after).cloned().collect()
    }

    pub fn h(&self, a: &str, p: &str) -> u64 {
        self.reduced(p, &[a]).len() as u64
    }

    pub fn h_u(&self, c: &str, p: &str) -> u64 {
        let before = self.upstream(p).len();
        let after = self.upstream_without(p, &self.edges_from(c)).len();
        (before - after) as u64
    }

    pub fn h_co(&self, a: &str, b: &str, p: &str) -> u64 {
        let s_a = self.reduced(p, &[a]);
        let s_b = self.reduced(p, &[b]);
        let s_ab = self.reduced(p, &[a, b]);
        s_ab.iter().filter(|x| !s_a.contains(*x) && !s_b.contains(*x)).count() as u64
    }

    pub fn mhp(&self, p: &str) -> (u64, Vec<String>) {
        let hs: Vec<(String, u64)> = self.parents(p).into_iter().map(|a| {
            let h = self.h(&a, p);
            (a, h)
        }).collect();
        let best = hs.iter().map(|x| x.1).max().unwrap_or(0);
        (best, hs.into_iter().filter(|x| x.1 == best).map(|x| x.0).collect())
    }

    pub fn mcohp(&self, p: &str) -> (u64, Option<(String, String)>) {
        let ps = self.parents(p);
        let mut best: Option<(u64, (String, String))> = None;
        for i in 0..ps.len() {
            for j in i + 1..ps.len() {
                let h = self.h_co(&ps[i], &ps[j], p);
                if best.as_ref().is_none_or(|b| h > b.0) {
                    best = Some((h, (ps[i].clone(), ps[j].clone())));
                }
            }
        }
        match best {
            Some((h, pair)) => (h, Some(pair)),
            None => (0, None),
        }
    }

    pub fn hc(&self, p: &str) -> Option<Q> {
        let ch = self.children(p);
        if ch.is_empty() {
            return None;
        }
        let sum: u64 = ch.iter().map(|c| self.h(p, c)).sum();
        Some(Q::new(sum as i64, ch.len() as i64))
    }

    pub fn total_downstream(&self, p: &str) -> u64 {
        self.downstream(p).iter().map(|x| self.h_u(p, x)).sum()
    }

    pub fn hd(&self, p: &str) -> Option<Q> {
        let d = self.downstream(p);
        if d.is_empty() {
            return None;
        }
        Some(Q::new(self.total_downstream(p) as i64, d.len() as i64))
    }

    pub fn hid(&self, p: &str) -> Q {
        let ch: BTreeSet<String> = self.children(p).into_iter().collect();
        let ind: Vec<String> = self.downstream(p).into_iter().filter(|x| !ch.contains(x)).collect();
        if ind.is_empty() {
            return Q::from_integer(0);
        }
        let sum: u64 = ind.iter().map(|x| self.h_u(p, x)).sum();
        Q::new(sum as i64, ind.len() as i64)
    }

    /// Shortest-path distances from `a` along edge direction.
    pub fn bfs(&self, a: &str) -> BTreeMap<String, u32> {
        let mut dist = BTreeMap::new();
        dist.insert(a.to_string(), 0);
        let mut q = VecDeque::from([a.to_string()]);
        while let Some(v) = q.pop_front() {
            let d = dist[&v];
            for c in self.children(&v) {
                if !dist.contains_key(&c) {
                    dist.insert(c.clone(), d + 1);
                    q.push_back(c);
                }
            }
        }
        dist
    }

    pub fn depth(&self, p: &str) -> u32 {
        self.upstream(p).iter().map(|u| self.bfs(u)[p]).max().unwrap_or(0)
    }

    pub fn transmission_length(&self, p: &str) -> u32 {
        self.bfs(p).into_iter().filter(|(v, _)| self.children(v).is_empty()).map(|(_, d)| d).max().unwrap_or(0)
    }

    /// `(old, new, reduced)` for demoting `parents` of `p`.
    pub fn whatif(&self, p: &str, parents: &[&str]) -> (u64, u64, BTreeSet<String>) {
        let old = self.upstream(p).len() as u64;
        let red = self.reduced(p, parents);
        (old, old - red.len() as u64, red)
    }

    /// `(s, via_a, mhp_parent, via_b)`.
    pub fn source_score(&self, a: &str, p: &str) -> (i64, u64, Option<String>, u64) {
        let dp = self.downstream(p);
        let via = |x: &str| -> u64 {
            self.downstream(x).iter().filter(|k| *k != p && dp.contains(*k)).map(|k| self.h_u(x, k)).sum()
        };
        let va = via(a);
        let b = self.mhp(a).1.into_iter().next();
        let vb = b.as_deref().map_or(0, via);
        (va as i64 - vb as i64, va, b, vb)
    }

    /// Edge betweenness by enumerating every shortest path of every ordered
    /// pair, with fractional credit.
    pub fn brute_betweenness(&self) -> BTreeMap<Edge, f64> {
        let mut bt: BTreeMap<Edge, f64> = self.edges.iter().map(|e| (e.clone(), 0.0)).collect();
        for s in &self.nodes {
            let dist = self.bfs(s);
            for (t, &d) in &dist {
                if t == s {
                    continue;
                }
                let paths = self.shortest_paths(s, t, d, &dist);
                let share = 1.0 / paths.len() as f64;
                for path in &paths {
                    for w in path.windows(2) {
                        *bt.get_mut(&(w[0].clone(), w[1].clone())).unwrap() += share;
                    }
                }
            }
        }
        bt
    }

    fn shortest_paths(&self, s: &str, t: &str, d: u32, dist: &BTreeMap<String, u32>) -> Vec<Vec<String>> {
        let mut out = Vec::new();
        let mut stack = vec![vec![s.to_string()]];
        while let Some(path) = stack.pop() {
            let last = path.last().unwrap();
            if path.len() as u32 == d + 1 {
                if last == t {
                    out.push(path);
                }
                continue;
            }
            for c in self.children(last) {
                if dist.get(&c) == Some(&(path.len() as u32)) {
                    let mut next = path.clone();
                    next.push(c);
                    stack.push(next);
                }
            }
        }
        out
    }

    /// Σ over ordered reachable pairs of their distance.
    pub fn distance_sum(&self) -> u64 {
        self.nodes.iter().map(|s| self.bfs(s).values().map(|&d| u64::from(d)).sum::<u64>()).sum()
    }
}

/// The worked example: `A→P, B→P, C→A, D→A, C→B, E→C`.
pub const G1: [(&str, &str); 6] = [("A", "P"), ("B", "P"), ("C", "A"), ("D", "A"), ("C", "B"), ("E", "C")];

/// Upstream graph of `P` with nine strong dependencies, of which `A → P`
/// contributes three.
pub const CO_HEAVY_P: [(&str, &str); 11] = [
    ("A", "P"),
    ("B", "P"),
    ("X1", "A"),
    ("X2", "A"),
    ("S", "A"),
    ("S", "B"),
    ("Y1", "B"),
    ("Y3", "B"),
    ("Y2", "Y1"),
    ("Z", "Y3"),
    ("X2", "X1"),
];

pub fn g2() -> Vec<(&'static str, &'static str)> {
    let mut e = G1.to_vec();
    e.push(("P", "Q"));
    e
}
