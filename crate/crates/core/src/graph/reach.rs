use rayon::prelude::*;

use super::{Digraph, NodeId};

/// Square bit matrix stored row-major in 64-bit words.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitMatrix {
    rows: usize,
    words: usize,
    data: Vec<u64>,
}

impl BitMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        let words = cols.div_ceil(64);
        BitMatrix { rows, words, data: vec![0; rows * words] }
    }

    pub fn words_per_row(&self) -> usize {
        self.words
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[u64] {
        &self.data[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    fn row_mut(&mut self, i: usize) -> &mut [u64] {
        &mut self.data[i * self.words..(i + 1) * self.words]
    }

    #[inline]
    pub fn contains(&self, i: usize, j: usize) -> bool {
        self.data[i * self.words + j / 64] >> (j % 64) & 1 == 1
    }

    pub fn count_row(&self, i: usize) -> usize {
        self.row(i).iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn iter_row(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        iter_ones(self.row(i))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }
}

/// Indices of set bits in a word slice, ascending.
pub fn iter_ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            }
        })
    })
}

#[inline]
fn set_bit(words: &mut [u64], j: usize) {
    words[j / 64] |= 1 << (j % 64);
}

#[inline]
fn clear_bit(words: &mut [u64], j: usize) {
    words[j / 64] &= !(1 << (j % 64));
}

/// Strongly connected components, emitted so that every component comes
/// after all components reachable from it along edges.
pub(crate) fn strongly_connected_components(g: &Digraph) -> (Vec<u32>, Vec<Vec<NodeId>>) {
    const UNSEEN: u32 = u32::MAX;
    let n = g.node_count();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp_of = vec![UNSEEN; n];
    let mut stack: Vec<NodeId> = Vec::new();
    let mut comps: Vec<Vec<NodeId>> = Vec::new();
    let mut counter = 0u32;
    // (node, next child position)
    let mut call: Vec<(NodeId, usize)> = Vec::new();

    for root in g.nodes() {
        if index[root.index()] != UNSEEN {
            continue;
        }
        call.push((root, 0));
        index[root.index()] = counter;
        low[root.index()] = counter;
        counter += 1;
        stack.push(root);
        on_stack[root.index()] = true;

        while let Some(&mut (v, ref mut pos)) = call.last_mut() {
            let children = g.children(v);
            if *pos < children.len() {
                let w = children[*pos];
                *pos += 1;
                if index[w.index()] == UNSEEN {
                    index[w.index()] = counter;
                    low[w.index()] = counter;
                    counter += 1;
                    stack.push(w);
                    on_stack[w.index()] = true;
                    call.push((w, 0));
                } else if on_stack[w.index()] {
                    low[v.index()] = low[v.index()].min(index[w.index()]);
                }
                continue;
            }
            call.pop();
            if let Some(&(u, _)) = call.last() {
                low[u.index()] = low[u.index()].min(low[v.index()]);
            }
            if low[v.index()] == index[v.index()] {
                let id = comps.len() as u32;
                let mut members = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w.index()] = false;
                    comp_of[w.index()] = id;
                    members.push(w);
                    if w == v {
                        break;
                    }
                }
                members.sort_unstable();
                comps.push(members);
            }
        }
    }
    (comp_of, comps)
}

/// Per-node upstream and downstream closures over one edge relation.
///
/// Closures never contain the node itself, also for nodes on a cycle.
#[derive(Debug, Clone)]
pub struct ReachabilityIndex {
    up: BitMatrix,
    down: BitMatrix,
    on_cycle: Vec<bool>,
    cycles: Vec<Vec<NodeId>>,
}

#[derive(Clone, Copy)]
enum Direction {
    Up,
    Down,
}

impl ReachabilityIndex {
    pub fn build(g: &Digraph) -> Self {
        let (comp_of, comps) = strongly_connected_components(g);
        let up = closure(g, &comp_of, &comps, Direction::Up);
        let down = closure(g, &comp_of, &comps, Direction::Down);
        let mut on_cycle = vec![false; g.node_count()];
        let cycles: Vec<Vec<NodeId>> = comps.into_iter().filter(|c| c.len() > 1).collect();
        for c in &cycles {
            for v in c {
                on_cycle[v.index()] = true;
            }
        }
        ReachabilityIndex { up, down, on_cycle, cycles }
    }

    /// `q` reaches `p`.
    #[inline]
    pub fn is_upstream(&self, p: NodeId, q: NodeId) -> bool {
        self.up.contains(p.index(), q.index())
    }

    /// `p` reaches `q`.
    #[inline]
    pub fn is_downstream(&self, p: NodeId, q: NodeId) -> bool {
        self.down.contains(p.index(), q.index())
    }

    pub fn upstream_count(&self, p: NodeId) -> usize {
        self.up.count_row(p.index())
    }

    pub fn downstream_count(&self, p: NodeId) -> usize {
        self.down.count_row(p.index())
    }

    pub fn upstream(&self, p: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.up.iter_row(p.index()).map(|i| NodeId(i as u32))
    }

    pub fn downstream(&self, p: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.down.iter_row(p.index()).map(|i| NodeId(i as u32))
    }

    pub fn upstream_words(&self, p: NodeId) -> &[u64] {
        self.up.row(p.index())
    }

    pub fn downstream_words(&self, p: NodeId) -> &[u64] {
        self.down.row(p.index())
    }

    pub fn on_cycle(&self, p: NodeId) -> bool {
        self.on_cycle[p.index()]
    }

    /// Components of size > 1, each sorted.
    pub fn cycles(&self) -> &[Vec<NodeId>] {
        &self.cycles
    }

    pub fn words_per_row(&self) -> usize {
        self.up.words_per_row()
    }
}

fn closure(g: &Digraph, comp_of: &[u32], comps: &[Vec<NodeId>], dir: Direction) -> BitMatrix {
    let n = g.node_count();
    let mut m = BitMatrix::new(n, n);
    if n == 0 {
        return m;
    }
    let sources = |v: NodeId| match dir {
        Direction::Up => g.parents(v),
        Direction::Down => g.children(v),
    };

    // Emission order puts downstream components first; upstream closures
    // therefore need the reverse order.
    let order: Vec<usize> = match dir {
        Direction::Up => (0..comps.len()).rev().collect(),
        Direction::Down => (0..comps.len()).collect(),
    };
    let mut level = vec![0u32; comps.len()];
    for &c in &order {
        let mut l = 0;
        for &v in &comps[c] {
            for &s in sources(v) {
                let sc = comp_of[s.index()] as usize;
                if sc != c {
                    l = l.max(level[sc] + 1);
                }
            }
        }
        level[c] = l;
    }
    let max_level = level.iter().copied().max().unwrap_or(0) as usize;
    let mut by_level: Vec<Vec<usize>> = vec![Vec::new(); max_level + 1];
    for &c in &order {
        by_level[level[c] as usize].push(c);
    }

    let words = m.words_per_row();
    for comps_at_level in by_level {
        let rows: Vec<(usize, Vec<u64>)> = {
            let m = &m;
            comps_at_level
                .par_iter()
                .map(|&c| {
                    let mut row = vec![0u64; words];
                    for &v in &comps[c] {
                        for &s in sources(v) {
                            if comp_of[s.index()] as usize == c {
                                continue;
                            }
                            for (dst, src) in row.iter_mut().zip(m.row(s.index())) {
                                *dst |= *src;
                            }
                            set_bit(&mut row, s.index());
                        }
                    }
                    if comps[c].len() > 1 {
                        for &v in &comps[c] {
                            set_bit(&mut row, v.index());
                        }
                    }
                    (c, row)
                })
                .collect()
        };
        for (c, row) in rows {
            for &v in &comps[c] {
                let dst = m.row_mut(v.index());
                dst.copy_from_slice(&row);
                clear_bit(dst, v.index());
            }
        }
    }
    m
}
