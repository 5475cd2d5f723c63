//! Heaviness metrics.
//!
//! The functions here answer one query at a time by running a filtered BFS
//! over the immutable graph. [`compute_heaviness_table`] computes the same
//! quantities for every package at once and is what the reporting layer uses.

mod engine;

use serde::Serialize;

pub use engine::{compute_heaviness_table, upstream_heaviness_all, HeavinessTable, PackageHeaviness};

use crate::graph::{upstream_filtered, DepGraph, NodeId, NodeSet};
use crate::{Error, Result, Scalar};

/// Heaviness of one strong edge: `h = n1 - n2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct EdgeHeaviness {
    pub parent: NodeId,
    pub child: NodeId,
    /// Strong dependencies of the child.
    pub n1: u64,
    /// Strong dependencies of the child once the edge is demoted.
    pub n2: u64,
    pub h: u64,
}

/// Co-heaviness of a parent pair on a child.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CoHeaviness {
    pub parent_a: NodeId,
    pub parent_b: NodeId,
    pub child: NodeId,
    pub s_a_size: u64,
    pub s_b_size: u64,
    pub s_ab_size: u64,
    pub h_co: u64,
}

/// Averages of the heaviness a package puts on its downstream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DownstreamHeaviness<T> {
    /// Absent without downstream packages.
    pub hd: Option<T>,
    /// Zero without indirect downstream packages.
    pub hid: T,
    pub k_d: u64,
    pub k_id: u64,
}

/// Result of demoting a set of strong parents to weak ones.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WhatIf {
    pub old_count: u64,
    pub new_count: u64,
    /// Packages no longer required, sorted by name.
    pub reduced: Vec<NodeId>,
}

fn upstream_without_edges(g: &DepGraph, p: NodeId, demoted_parents: &[NodeId]) -> Vec<NodeId> {
    let s = g.strong();
    let skip: Vec<_> = demoted_parents.iter().filter_map(|&a| s.edge_id(a, p)).collect();
    upstream_filtered(s, p, |e| !skip.contains(&e))
}

pub fn edge_heaviness(g: &DepGraph, parent: NodeId, child: NodeId) -> Result<EdgeHeaviness> {
    g.strong_edge(parent, child)?;
    let n1 = g.reach().upstream_count(child) as u64;
    let n2 = upstream_without_edges(g, child, &[parent]).len() as u64;
    Ok(EdgeHeaviness { parent, child, n1, n2, h: n1 - n2 })
}

/// Packages a weak parent would add to `child`'s strong dependencies if it
/// were promoted to a strong parent.
pub fn weak_parent_heaviness(g: &DepGraph, weak_parent: NodeId, child: NodeId) -> Result<u64> {
    if !g.weak().has_edge(weak_parent, child) {
        return Err(Error::MissingWeakEdge {
            parent: g.name(weak_parent).to_string(),
            child: g.name(child).to_string(),
        });
    }
    let reach = g.reach();
    let n1 = reach.upstream_count(child) as u64;
    let mut promoted: NodeSet = reach.upstream(child).collect();
    promoted.insert(weak_parent);
    promoted.extend(reach.upstream(weak_parent));
    promoted.remove(&child);
    Ok(promoted.len() as u64 - n1)
}

/// Largest heaviness over the strong parents of `p`, with every parent that
/// attains it (sorted by name). `(0, [])` without parents.
pub fn max_heaviness_from_parents(g: &DepGraph, p: NodeId) -> (u64, Vec<NodeId>) {
    let mut best = 0;
    let mut argmax = Vec::new();
    for &a in g.strong().parents(p) {
        let h = edge_heaviness(g, a, p).expect("parent edge exists").h;
        if argmax.is_empty() || h > best {
            best = h;
            argmax = vec![a];
        } else if h == best {
            argmax.push(a);
        }
    }
    (best, argmax)
}

/// Heaviness of upstream package `c` on `p`: what `p` loses when every strong
/// edge leaving `c` is demoted.
pub fn heaviness_from_upstream(g: &DepGraph, c: NodeId, p: NodeId) -> Result<u64> {
    let reach = g.reach();
    if c == p || !reach.is_upstream(p, c) {
        return Err(Error::domain(format!("`{}` is not upstream of `{}`", g.name(c), g.name(p))));
    }
    let s = g.strong();
    let n1 = reach.upstream_count(p) as u64;
    let n2 = upstream_filtered(s, p, |e| s.edge(e).0 != c).len() as u64;
    Ok(n1 - n2)
}

/// Mean heaviness of `p` on its children; absent without children.
pub fn heaviness_on_children<T: Scalar>(g: &DepGraph, p: NodeId) -> Option<T> {
    let children = g.strong().children(p);
    if children.is_empty() {
        return None;
    }
    let sum: u64 = children.iter().map(|&c| edge_heaviness(g, p, c).expect("child edge exists").h).sum();
    Some(T::ratio(sum, children.len() as u64))
}

pub fn heaviness_on_downstream<T: Scalar>(g: &DepGraph, p: NodeId) -> DownstreamHeaviness<T> {
    let children = g.strong().children(p);
    let (mut sum, mut sum_indirect, mut k_d, mut k_id) = (0u64, 0u64, 0u64, 0u64);
    for b in g.reach().downstream(p) {
        let hu = heaviness_from_upstream(g, p, b).expect("downstream package");
        sum += hu;
        k_d += 1;
        if children.binary_search(&b).is_err() {
            sum_indirect += hu;
            k_id += 1;
        }
    }
    DownstreamHeaviness {
        hd: (k_d > 0).then(|| T::ratio(sum, k_d)),
        hid: if k_id > 0 { T::ratio(sum_indirect, k_id) } else { T::zero() },
        k_d,
        k_id,
    }
}

/// Dependencies the ecosystem would shed if `p` were removed:
/// the sum of `p`'s upstream heaviness over all its downstream packages.
pub fn total_downstream_heaviness(g: &DepGraph, p: NodeId) -> u64 {
    g.reach().downstream(p).map(|b| heaviness_from_upstream(g, p, b).expect("downstream package")).sum()
}

fn reduced_set(g: &DepGraph, p: NodeId, demoted: &[NodeId]) -> NodeSet {
    let kept: NodeSet = upstream_without_edges(g, p, demoted).into_iter().collect();
    g.reach().upstream(p).filter(|v| !kept.contains(v)).collect()
}

fn require_parents(g: &DepGraph, p: NodeId, parents: &[NodeId]) -> Result<()> {
    let offenders: Vec<&str> =
        parents.iter().filter(|&&a| !g.strong().has_edge(a, p)).map(|&a| g.name(a)).collect();
    if offenders.is_empty() {
        Ok(())
    } else {
        Err(Error::domain(format!("not strong parents of `{}`: {}", g.name(p), offenders.join(", "))))
    }
}

pub fn co_heaviness(g: &DepGraph, a: NodeId, b: NodeId, p: NodeId) -> Result<CoHeaviness> {
    if a == b {
        return Err(Error::domain(format!("co-heaviness needs two distinct parents, got `{}` twice", g.name(a))));
    }
    require_parents(g, p, &[a, b])?;
    let s_a = reduced_set(g, p, &[a]);
    let s_b = reduced_set(g, p, &[b]);
    let s_ab = reduced_set(g, p, &[a, b]);
    debug_assert!(s_a.is_disjoint(&s_b), "single-parent reductions overlap");
    let h_co = s_ab.iter().filter(|v| !s_a.contains(v) && !s_b.contains(v)).count() as u64;
    debug_assert_eq!(s_ab.len(), h_co as usize + s_a.len() + s_b.len());
    Ok(CoHeaviness {
        parent_a: a.min(b),
        parent_b: a.max(b),
        child: p,
        s_a_size: if a < b { s_a.len() } else { s_b.len() } as u64,
        s_b_size: if a < b { s_b.len() } else { s_a.len() } as u64,
        s_ab_size: s_ab.len() as u64,
        h_co,
    })
}

/// Largest co-heaviness over all parent pairs of `p`; ties go to the
/// lexicographically first pair. `(0, None)` with fewer than two parents.
pub fn max_co_heaviness(g: &DepGraph, p: NodeId) -> (u64, Option<(NodeId, NodeId)>) {
    let parents = g.strong().parents(p);
    let reach = g.reach();
    let mut best: Option<(u64, (NodeId, NodeId))> = None;
    for (i, &a) in parents.iter().enumerate() {
        for &b in &parents[i + 1..] {
            // no shared upstream, no co-action
            let shared = reach.is_upstream(a, b)
                || reach.is_upstream(b, a)
                || reach.upstream_words(a).iter().zip(reach.upstream_words(b)).any(|(x, y)| x & y != 0);
            let h = if shared { co_heaviness(g, a, b, p).expect("parent pair").h_co } else { 0 };
            if best.is_none_or(|(bh, _)| h > bh) {
                best = Some((h, (a, b)));
            }
        }
    }
    match best {
        Some((h, pair)) => (h, Some(pair)),
        None => (0, None),
    }
}

/// Gini index `Σᵢ Σⱼ |xᵢ − xⱼ| / (2 n² x̄)`; 0 when all values are zero.
pub fn gini<T: Scalar>(values: &[T]) -> Result<T> {
    if values.is_empty() {
        return Err(Error::domain("gini index of an empty sequence"));
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("comparable values"));
    let n = sorted.len() as u64;
    let total = sorted.iter().fold(T::zero(), |acc, &x| acc + x);
    if total == T::zero() {
        return Ok(T::zero());
    }
    // Σᵢ Σⱼ |xᵢ − xⱼ| = 2 Σᵢ (2i − n − 1) x₍ᵢ₎ over the ascending order, i from 1.
    let (mut pos, mut neg) = (T::zero(), T::zero());
    for (i, &x) in sorted.iter().enumerate() {
        let w = 2 * (i as u64 + 1);
        if w > n {
            pos = pos + T::from_count(w - n - 1) * x;
        } else {
            neg = neg + T::from_count(n + 1 - w) * x;
        }
    }
    Ok((pos - neg) / (T::from_count(n) * total))
}

/// Simulates demoting `parents` to weak parents of `p`.
pub fn whatif_demote(g: &DepGraph, p: NodeId, parents: &[NodeId]) -> Result<WhatIf> {
    require_parents(g, p, parents)?;
    let old_count = g.reach().upstream_count(p) as u64;
    let reduced: Vec<NodeId> = reduced_set(g, p, parents).into_iter().collect();
    Ok(WhatIf { old_count, new_count: old_count - reduced.len() as u64, reduced })
}
