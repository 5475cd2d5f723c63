use serde::Serialize;

use crate::heaviness::{co_heaviness, heaviness_from_upstream, max_heaviness_from_parents, upstream_heaviness_all};
use crate::{DepGraph, Error, NodeId, Result};

/// How the two parents of a co-heaviness pair relate to each other.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "category", content = "witness")]
pub enum PairRelation {
    ParentChild,
    UpstreamDownstream,
    CommonUpstream(NodeId),
    NoClearRelation,
}

impl PairRelation {
    pub fn label(&self) -> &'static str {
        match self {
            PairRelation::ParentChild => "parent-child",
            PairRelation::UpstreamDownstream => "upstream-downstream",
            PairRelation::CommonUpstream(_) => "common-upstream",
            PairRelation::NoClearRelation => "no-clear-relation",
        }
    }
}

/// Classifies parents `a` and `b` of `p`. A common upstream package counts as
/// the shared source when its heaviness on both parents exceeds three
/// quarters of the pair's co-heaviness; the first such package by name wins.
pub fn classify_parent_pair(g: &DepGraph, a: NodeId, b: NodeId, p: NodeId) -> Result<PairRelation> {
    let h_co = co_heaviness(g, a, b, p)?.h_co;
    let s = g.strong();
    if s.has_edge(a, b) || s.has_edge(b, a) {
        return Ok(PairRelation::ParentChild);
    }
    let reach = g.reach();
    if reach.is_upstream(a, b) || reach.is_upstream(b, a) {
        return Ok(PairRelation::UpstreamDownstream);
    }
    let hu_a = upstream_heaviness_all(g, a);
    let hu_b = upstream_heaviness_all(g, b);
    // both lists are sorted by id, and id order is name order
    let (mut i, mut j) = (0, 0);
    while i < hu_a.len() && j < hu_b.len() {
        let ((ca, ha), (cb, hb)) = (hu_a[i], hu_b[j]);
        match ca.cmp(&cb) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                if 4 * ha > 3 * h_co && 4 * hb > 3 * h_co {
                    return Ok(PairRelation::CommonUpstream(ca));
                }
                i += 1;
                j += 1;
            }
        }
    }
    Ok(PairRelation::NoClearRelation)
}

/// How much of the heaviness `a` passes on through `p` originates at `a`
/// rather than at `a`'s own heaviest parent.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SourceScore {
    pub s: i64,
    /// `Σ h_u(a → x)` over `x` downstream of both `a` and `p`.
    pub via_total: u64,
    pub mhp_parent: Option<NodeId>,
    /// The same sum for the heaviest parent of `a`; 0 without one.
    pub mhp_parent_via_total: u64,
}

fn via_total(g: &DepGraph, src: NodeId, p: NodeId) -> u64 {
    let reach = g.reach();
    reach
        .downstream(src)
        .filter(|&x| x != p && reach.is_downstream(p, x))
        .map(|x| heaviness_from_upstream(g, src, x).expect("downstream package"))
        .sum()
}

pub fn source_score(g: &DepGraph, a: NodeId, p: NodeId) -> Result<SourceScore> {
    if !g.strong().has_edge(a, p) {
        return Err(Error::domain(format!("`{}` is not a strong parent of `{}`", g.name(a), g.name(p))));
    }
    let via = via_total(g, a, p);
    let mhp_parent = max_heaviness_from_parents(g, a).1.first().copied();
    let parent_via = mhp_parent.map_or(0, |b| via_total(g, b, p));
    Ok(SourceScore { s: via as i64 - parent_via as i64, via_total: via, mhp_parent, mhp_parent_via_total: parent_via })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::fixtures::*;

    #[test]
    fn g1_pair_is_common_upstream() {
        let g = g1();
        let id = |n| g.id(n).unwrap();
        assert_eq!(classify_parent_pair(&g, id("A"), id("B"), id("P")).unwrap(), PairRelation::CommonUpstream(id("C")));
        assert_eq!(classify_parent_pair(&g, id("B"), id("A"), id("P")).unwrap(), PairRelation::CommonUpstream(id("C")));
        assert!(classify_parent_pair(&g, id("A"), id("C"), id("P")).is_err());
    }

    #[test]
    fn direct_pairs() {
        let g = DepGraph::from_named_edges(&[("A", "P"), ("B", "P"), ("B", "A"), ("X", "Y"), ("Y", "Z"), ("X", "P"), ("Z", "P")], &[], &[]);
        let id = |n| g.id(n).unwrap();
        assert_eq!(classify_parent_pair(&g, id("A"), id("B"), id("P")).unwrap(), PairRelation::ParentChild);
        assert_eq!(classify_parent_pair(&g, id("X"), id("Z"), id("P")).unwrap(), PairRelation::UpstreamDownstream);
        assert_eq!(classify_parent_pair(&g, id("A"), id("X"), id("P")).unwrap(), PairRelation::NoClearRelation);
    }

    #[test]
    fn g2_source_score() {
        let g = g2();
        let id = |n| g.id(n).unwrap();
        let s = source_score(&g, id("A"), id("P")).unwrap();
        assert_eq!(s, SourceScore { s: 0, via_total: 2, mhp_parent: Some(id("C")), mhp_parent_via_total: 2 });
        let s = source_score(&g, id("P"), id("Q")).unwrap();
        assert_eq!((s.s, s.via_total), (0, 0));
        let s = source_score(&g, id("E"), id("C")).unwrap();
        assert_eq!(s.mhp_parent, None);
        assert_eq!(s.s, s.via_total as i64);
        assert!(source_score(&g, id("E"), id("P")).is_err());
    }
}
