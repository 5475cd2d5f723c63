//! Ecosystem-wide stats table, summaries, top lists and their exports.

mod export;
mod summary;

use std::str::FromStr;

use rayon::prelude::*;
use serde::Serialize;

pub use export::{row_to_json, summary_to_json, write_rows_csv, write_rows_json, write_summary_csv, write_summary_json, write_top_lists_json, ExportOptions};
pub use summary::{ecosystem_summary, EcosystemSummary, SummaryGroup, SUMMARY_ROWS};

use crate::adjusted::{adjusted_mhp_with_offset, adjusted_penalized, Penalties};
use crate::heaviness::{compute_heaviness_table, HeavinessTable};
use crate::{DepGraph, Error, NodeId, Result, Scalar};

/// One package's metrics. Means are absent where they are undefined: `hc`
/// without children, `hd` and `hid` without downstream packages, Gini
/// indices without values.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PackageStatsRow<T> {
    pub name: String,
    pub repository: String,
    pub n_strong: u64,
    pub k_p: u64,
    pub mhp: u64,
    pub mhp_parents: Vec<String>,
    pub adjusted_mhp: T,
    pub mcohp: u64,
    pub mcohp_pair: Option<(String, String)>,
    pub k_c: u64,
    pub hc: Option<T>,
    pub adjusted_hc: Option<T>,
    pub k_d: u64,
    pub hd: Option<T>,
    pub k_id: u64,
    pub hid: Option<T>,
    pub adjusted_hid: Option<T>,
    pub total_downstream: u64,
    pub gini_from_parents: Option<T>,
    pub gini_on_children: Option<T>,
    pub depth: u32,
}

/// Largest parent count in the graph.
pub fn max_parent_count(g: &DepGraph) -> u64 {
    g.nodes().map(|v| g.strong().in_degree(v) as u64).max().unwrap_or(0)
}

/// Computes the table from scratch.
pub fn compute_all_stats<T: Scalar>(g: &DepGraph, penalties: &Penalties) -> Vec<PackageStatsRow<T>> {
    let table = compute_heaviness_table(g);
    stats_from_table(g, &table, penalties)
}

/// Builds rows from a precomputed heaviness table, sorted by name.
pub fn stats_from_table<T: Scalar>(g: &DepGraph, table: &HeavinessTable, penalties: &Penalties) -> Vec<PackageStatsRow<T>> {
    let n_max = max_parent_count(g);
    (0..g.node_count() as u32).into_par_iter().map(|i| row(g, table, penalties, n_max, NodeId(i))).collect()
}

fn row<T: Scalar>(g: &DepGraph, table: &HeavinessTable, pen: &Penalties, n_max: u64, v: NodeId) -> PackageStatsRow<T> {
    let ph = table.package(v);
    let hc = ph.hc::<T>();
    let hid = (ph.k_d > 0).then(|| ph.hid::<T>());
    let adjusted_mhp = if n_max == 0 {
        T::zero()
    } else {
        adjusted_mhp_with_offset(ph.mhp, ph.k_p, n_max, pen.mhp_offset).expect("n_max positive")
    };
    PackageStatsRow {
        name: g.name(v).to_string(),
        repository: g.repository(v).to_string(),
        n_strong: ph.n_strong,
        k_p: ph.k_p,
        mhp: ph.mhp,
        mhp_parents: ph.mhp_parents.iter().map(|&a| g.name(a).to_string()).collect(),
        adjusted_mhp,
        mcohp: ph.mcohp,
        mcohp_pair: ph.mcohp_pair.map(|(a, b)| (g.name(a).to_string(), g.name(b).to_string())),
        k_c: ph.k_c,
        hc,
        adjusted_hc: hc.map(|h| adjusted_penalized(h, ph.k_c, i64::from(pen.hc_a)).expect("positive penalty")),
        k_d: ph.k_d,
        hd: ph.hd::<T>(),
        k_id: ph.k_id,
        hid,
        adjusted_hid: hid.map(|h| adjusted_penalized(h, ph.k_id, i64::from(pen.hid_a)).expect("positive penalty")),
        total_downstream: ph.total_downstream(),
        gini_from_parents: table.gini_from_parents(g, v),
        gini_on_children: table.gini_on_children(g, v),
        depth: ph.depth,
    }
}

/// A numeric column of the stats table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    NStrong,
    KP,
    Mhp,
    AdjustedMhp,
    Mcohp,
    KC,
    Hc,
    AdjustedHc,
    KD,
    Hd,
    KId,
    Hid,
    AdjustedHid,
    TotalDownstream,
    GiniFromParents,
    GiniOnChildren,
    Depth,
}

impl Metric {
    pub const ALL: [Metric; 17] = [
        Metric::NStrong,
        Metric::KP,
        Metric::Mhp,
        Metric::AdjustedMhp,
        Metric::Mcohp,
        Metric::KC,
        Metric::Hc,
        Metric::AdjustedHc,
        Metric::KD,
        Metric::Hd,
        Metric::KId,
        Metric::Hid,
        Metric::AdjustedHid,
        Metric::TotalDownstream,
        Metric::GiniFromParents,
        Metric::GiniOnChildren,
        Metric::Depth,
    ];

    pub fn column(self) -> &'static str {
        match self {
            Metric::NStrong => "n_strong",
            Metric::KP => "k_p",
            Metric::Mhp => "mhp",
            Metric::AdjustedMhp => "adjusted_mhp",
            Metric::Mcohp => "mcohp",
            Metric::KC => "k_c",
            Metric::Hc => "hc",
            Metric::AdjustedHc => "adjusted_hc",
            Metric::KD => "k_d",
            Metric::Hd => "hd",
            Metric::KId => "k_id",
            Metric::Hid => "hid",
            Metric::AdjustedHid => "adjusted_hid",
            Metric::TotalDownstream => "total_downstream",
            Metric::GiniFromParents => "gini_from_parents",
            Metric::GiniOnChildren => "gini_on_children",
            Metric::Depth => "depth",
        }
    }

    pub fn value<T: Scalar>(self, r: &PackageStatsRow<T>) -> Option<T> {
        let c = |n: u64| Some(T::from_count(n));
        match self {
            Metric::NStrong => c(r.n_strong),
            Metric::KP => c(r.k_p),
            Metric::Mhp => c(r.mhp),
            Metric::AdjustedMhp => Some(r.adjusted_mhp),
            Metric::Mcohp => c(r.mcohp),
            Metric::KC => c(r.k_c),
            Metric::Hc => r.hc,
            Metric::AdjustedHc => r.adjusted_hc,
            Metric::KD => c(r.k_d),
            Metric::Hd => r.hd,
            Metric::KId => c(r.k_id),
            Metric::Hid => r.hid,
            Metric::AdjustedHid => r.adjusted_hid,
            Metric::TotalDownstream => c(r.total_downstream),
            Metric::GiniFromParents => r.gini_from_parents,
            Metric::GiniOnChildren => r.gini_on_children,
            Metric::Depth => c(u64::from(r.depth)),
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Metric::ALL
            .into_iter()
            .find(|m| m.column() == s)
            .ok_or_else(|| Error::domain(format!("unknown metric `{s}`")))
    }
}

/// Orders rows by `metric` descending, absent values last, ties by name.
pub fn sort_rows<T: Scalar>(rows: &mut [&PackageStatsRow<T>], metric: Metric) {
    rows.sort_by(|a, b| {
        let (va, vb) = (metric.value(a), metric.value(b));
        let ord = match (va, vb) {
            (Some(x), Some(y)) => y.partial_cmp(&x).unwrap_or(std::cmp::Ordering::Equal),
            (Some(_), None) => std::cmp::Ordering::Less,
            (None, Some(_)) => std::cmp::Ordering::Greater,
            (None, None) => std::cmp::Ordering::Equal,
        };
        ord.then_with(|| a.name.cmp(&b.name))
    });
}

/// A metric filter `metric ≥ threshold`; no threshold keeps nothing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TopListSpec<T> {
    pub metric: Metric,
    pub threshold: Option<T>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TopList<T> {
    pub metric: Metric,
    pub threshold: Option<T>,
    pub packages: Vec<PackageStatsRow<T>>,
}

/// The four default lists: adjusted MHP ≥ 60, adjusted HC ≥ 30, adjusted
/// HID ≥ 20 and total downstream heaviness ≥ 5000.
pub fn default_top_list_specs<T: Scalar>() -> Vec<TopListSpec<T>> {
    [(Metric::AdjustedMhp, 60), (Metric::AdjustedHc, 30), (Metric::AdjustedHid, 20), (Metric::TotalDownstream, 5000)]
        .into_iter()
        .map(|(metric, t)| TopListSpec { metric, threshold: Some(T::from_count(t)) })
        .collect()
}

pub fn top_list<T: Scalar>(rows: &[PackageStatsRow<T>], spec: &TopListSpec<T>) -> TopList<T> {
    let mut kept: Vec<&PackageStatsRow<T>> = match spec.threshold {
        Some(t) => rows.iter().filter(|r| spec.metric.value(r).is_some_and(|v| v >= t)).collect(),
        None => Vec::new(),
    };
    sort_rows(&mut kept, spec.metric);
    TopList { metric: spec.metric, threshold: spec.threshold, packages: kept.into_iter().cloned().collect() }
}

pub fn top_lists<T: Scalar>(rows: &[PackageStatsRow<T>], specs: &[TopListSpec<T>]) -> Vec<TopList<T>> {
    specs.iter().map(|s| top_list(rows, s)).collect()
}
