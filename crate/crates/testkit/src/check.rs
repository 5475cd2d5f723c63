//! Compares the library against the naive reference on one graph.

use std::collections::BTreeSet;

use depheavy::analytics::{source_score, transmission_length};
use depheavy::graph::depth;
use depheavy::heaviness::{
    co_heaviness, compute_heaviness_table, edge_heaviness, heaviness_from_upstream, heaviness_on_children,
    heaviness_on_downstream, max_co_heaviness, max_heaviness_from_parents, total_downstream_heaviness,
    upstream_heaviness_all, whatif_demote,
};
use depheavy::{DepGraph, Exact, NodeId};
use rand::Rng;

use crate::{rng, NaiveGraph};

pub fn dep_graph(ng: &NaiveGraph) -> DepGraph {
    let nodes: Vec<&str> = ng.nodes.iter().map(String::as_str).collect();
    DepGraph::from_named_edges(&ng.edge_list(), &[], &nodes)
}

/// Counts of the checks run, by quantity.
#[derive(Debug, Default, Clone, Copy)]
pub struct Tally {
    pub edges: usize,
    pub packages: usize,
    pub upstream_pairs: usize,
    pub parent_pairs: usize,
    pub whatifs: usize,
}

/// Every disagreement between the library and the reference, as readable
/// messages.
pub fn compare(ng: &NaiveGraph, seed: u64, tally: &mut Tally) -> Vec<String> {
    let g = dep_graph(ng);
    let table = compute_heaviness_table(&g);
    let mut bad = Vec::new();
    let id = |n: &str| g.id(n).expect("node present");
    let name = |v: NodeId| g.name(v).to_string();
    let names = |vs: &[NodeId]| vs.iter().map(|&v| name(v)).collect::<Vec<_>>();
    macro_rules! expect_eq {
        ($what:expr, $got:expr, $want:expr) => {{
            let (got, want) = ($got, $want);
            if got != want {
                bad.push(format!("{}: got {:?}, want {:?}", $what, got, want));
            }
        }};
    }

    for (a, p) in &ng.edges {
        tally.edges += 1;
        let want = ng.h(a, p);
        let e = g.strong().edge_id(id(a), id(p)).expect("edge present");
        expect_eq!(format!("h({a}→{p}) table"), table.edge_h[e.index()], want);
        expect_eq!(format!("h({a}→{p})"), edge_heaviness(&g, id(a), id(p)).unwrap().h, want);
        let ss = source_score(&g, id(a), id(p)).unwrap();
        let (s, va, b, vb) = ng.source_score(a, p);
        expect_eq!(format!("source_score({a}, {p})"), (ss.s, ss.via_total, ss.mhp_parent.map(name), ss.mhp_parent_via_total), (s, va, b, vb));
    }

    let mut r = rng(seed ^ 0x5eed);
    for p in &ng.nodes {
        tally.packages += 1;
        let v = id(p);
        let ph = table.package(v);
        let up = ng.upstream(p);
        let down = ng.downstream(p);
        let children = ng.children(p);
        let parents = ng.parents(p);
        expect_eq!(format!("n_strong({p})"), ph.n_strong, up.len() as u64);
        expect_eq!(format!("k_p({p})"), ph.k_p, parents.len() as u64);
        expect_eq!(format!("k_c({p})"), ph.k_c, children.len() as u64);
        expect_eq!(format!("k_d({p})"), ph.k_d, down.len() as u64);
        expect_eq!(format!("k_id({p})"), ph.k_id, (down.len() - children.iter().filter(|c| down.contains(*c)).count()) as u64);

        let (mhp, argmax) = ng.mhp(p);
        expect_eq!(format!("mhp({p}) table"), (ph.mhp, names(&ph.mhp_parents)), (mhp, argmax.clone()));
        let (op_mhp, op_arg) = max_heaviness_from_parents(&g, v);
        expect_eq!(format!("mhp({p})"), (op_mhp, names(&op_arg)), (mhp, argmax));

        let (mcohp, pair) = ng.mcohp(p);
        let table_pair = ph.mcohp_pair.map(|(a, b)| (name(a), name(b)));
        expect_eq!(format!("mcohp({p}) table"), (ph.mcohp, table_pair), (mcohp, pair.clone()));
        let (op_h, op_pair) = max_co_heaviness(&g, v);
        expect_eq!(format!("mcohp({p})"), (op_h, op_pair.map(|(a, b)| (name(a), name(b)))), (mcohp, pair));

        let hc = ng.hc(p);
        expect_eq!(format!("hc({p}) table"), ph.hc::<Exact>(), hc);
        expect_eq!(format!("hc({p})"), heaviness_on_children::<Exact>(&g, v), hc);
        let hd = ng.hd(p);
        let hid = ng.hid(p);
        expect_eq!(format!("hd/hid({p}) table"), (ph.hd::<Exact>(), ph.hid::<Exact>()), (hd, hid));
        let dh = heaviness_on_downstream::<Exact>(&g, v);
        expect_eq!(format!("hd/hid({p})"), (dh.hd, dh.hid), (hd, hid));
        let total = ng.total_downstream(p);
        expect_eq!(format!("total_downstream({p}) table"), ph.total_downstream(), total);
        expect_eq!(format!("total_downstream({p})"), total_downstream_heaviness(&g, v), total);
        let d = ng.depth(p);
        expect_eq!(format!("depth({p}) table"), ph.depth, d);
        expect_eq!(format!("depth({p})"), depth(g.strong(), v), d);
        expect_eq!(format!("transmission_length({p})"), transmission_length(g.strong(), v), ng.transmission_length(p));

        let all = upstream_heaviness_all(&g, v);
        expect_eq!(format!("upstream set({p})"), all.iter().map(|&(c, _)| name(c)).collect::<BTreeSet<_>>(), up.clone());
        for &(c, hu_all) in &all {
            tally.upstream_pairs += 1;
            let c_name = name(c);
            let want = ng.h_u(&c_name, p);
            expect_eq!(format!("h_u({c_name}→{p}) bulk"), hu_all, want);
            expect_eq!(format!("h_u({c_name}→{p})"), heaviness_from_upstream(&g, c, v).unwrap(), want);
        }

        for i in 0..parents.len() {
            for j in i + 1..parents.len() {
                tally.parent_pairs += 1;
                let (a, b) = (&parents[i], &parents[j]);
                let co = co_heaviness(&g, id(a), id(b), v).unwrap();
                expect_eq!(format!("h_co({a},{b}→{p})"), co.h_co, ng.h_co(a, b, p));
                let (ha, hb) = (ng.h(a, p), ng.h(b, p));
                expect_eq!(format!("|S_AB|({a},{b}→{p})"), co.s_ab_size, co.h_co + ha + hb);
            }
        }

        // all subsets for small parent sets, a few random ones otherwise
        let k = parents.len();
        let masks: Vec<u32> =
            if k <= 4 { (0..1u32 << k).collect() } else { (0..8).map(|_| r.gen_range(0..1u32 << k.min(20))).collect() };
        for mask in masks {
            tally.whatifs += 1;
            let chosen: Vec<&str> = (0..k).filter(|i| mask >> i & 1 == 1).map(|i| parents[i].as_str()).collect();
            let ids: Vec<NodeId> = chosen.iter().map(|n| id(n)).collect();
            let w = whatif_demote(&g, v, &ids).unwrap();
            let (old, new, red) = ng.whatif(p, &chosen);
            expect_eq!(format!("whatif({p}, {chosen:?})"), (w.old_count, w.new_count, names(&w.reduced).into_iter().collect::<BTreeSet<_>>()), (old, new, red));
        }
    }
    bad
}
