use std::collections::VecDeque;

use rayon::prelude::*;
use serde::Serialize;

use crate::{Digraph, NodeId, Scalar};

const SOURCE_CHUNK: usize = 64;

/// Directed edge betweenness, indexed by edge id.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EdgeBetweenness<T> {
    pub values: Vec<T>,
}

impl<T: Scalar> EdgeBetweenness<T> {
    pub fn total(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &b| a + b)
    }

    pub fn max(&self) -> Option<T> {
        self.values.iter().copied().reduce(|a, b| if b > a { b } else { a })
    }
}

/// Brandes accumulation over unweighted shortest paths. Each ordered pair of
/// distinct connected nodes spreads one unit of credit over its shortest
/// paths in proportion to the number of paths through each edge.
pub fn edge_betweenness<T: Scalar>(g: &Digraph) -> EdgeBetweenness<T> {
    let n = g.node_count();
    let m = g.edge_count();
    let sources: Vec<u32> = (0..n as u32).collect();
    let partials: Vec<Vec<T>> = sources
        .par_chunks(SOURCE_CHUNK)
        .map(|chunk| {
            let mut acc = vec![T::zero(); m];
            let mut st = State::new(n);
            for &s in chunk {
                st.single_source(g, NodeId(s), &mut acc);
            }
            acc
        })
        .collect();
    // summing chunks in order keeps float results independent of scheduling
    let mut values = vec![T::zero(); m];
    for part in partials {
        for (v, p) in values.iter_mut().zip(part) {
            *v = *v + p;
        }
    }
    EdgeBetweenness { values }
}

struct State<T> {
    dist: Vec<u32>,
    sigma: Vec<T>,
    delta: Vec<T>,
    order: Vec<NodeId>,
    queue: VecDeque<NodeId>,
}

impl<T: Scalar> State<T> {
    fn new(n: usize) -> Self {
        State {
            dist: vec![u32::MAX; n],
            sigma: vec![T::zero(); n],
            delta: vec![T::zero(); n],
            order: Vec::with_capacity(n),
            queue: VecDeque::new(),
        }
    }

    fn single_source(&mut self, g: &Digraph, s: NodeId, acc: &mut [T]) {
        self.order.clear();
        self.dist[s.index()] = 0;
        self.sigma[s.index()] = T::one();
        self.queue.push_back(s);
        while let Some(v) = self.queue.pop_front() {
            self.order.push(v);
            let dv = self.dist[v.index()];
            for &w in g.children(v) {
                if self.dist[w.index()] == u32::MAX {
                    self.dist[w.index()] = dv + 1;
                    self.queue.push_back(w);
                }
                if self.dist[w.index()] == dv + 1 {
                    self.sigma[w.index()] = self.sigma[w.index()] + self.sigma[v.index()];
                }
            }
        }
        for &w in self.order.iter().rev() {
            let dw = self.dist[w.index()];
            let coeff = (T::one() + self.delta[w.index()]) / self.sigma[w.index()];
            for (e, v) in g.in_edges(w) {
                if self.dist[v.index()] != u32::MAX && self.dist[v.index()] + 1 == dw {
                    let c = self.sigma[v.index()] * coeff;
                    acc[e.index()] = acc[e.index()] + c;
                    self.delta[v.index()] = self.delta[v.index()] + c;
                }
            }
        }
        for &v in &self.order {
            self.dist[v.index()] = u32::MAX;
            self.sigma[v.index()] = T::zero();
            self.delta[v.index()] = T::zero();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{DepGraph, Exact};

    fn bt(edges: &[(&str, &str)]) -> (DepGraph, EdgeBetweenness<Exact>) {
        let g = DepGraph::from_named_edges(edges, &[], &[]);
        let b = edge_betweenness(g.strong());
        (g, b)
    }

    #[test]
    fn path_and_diamond() {
        let (_, b) = bt(&[("X", "Y"), ("Y", "Z")]);
        assert_eq!(b.values, [Exact::from_integer(2), Exact::from_integer(2)]);
        let (_, b) = bt(&[("X", "Y")]);
        assert_eq!(b.values, [Exact::from_integer(1)]);
        let (_, b) = bt(&[("X", "Y1"), ("X", "Y2"), ("Y1", "Z"), ("Y2", "Z")]);
        assert!(b.values.iter().all(|&v| v == Exact::new(3, 2)));
        assert_eq!(b.total(), Exact::from_integer(6));
    }
}
