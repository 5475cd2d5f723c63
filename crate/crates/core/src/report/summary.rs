use std::collections::BTreeMap;

use serde::Serialize;

use super::PackageStatsRow;
use crate::{Error, Result, Scalar};

/// Row labels of the summary, in order.
pub const SUMMARY_ROWS: [&str; 10] = [
    "strong_dependencies",
    "parents",
    "mhp",
    "mcohp",
    "children",
    "children_nonzero",
    "hc_nonzero",
    "indirect_downstream",
    "indirect_downstream_nonzero",
    "hid_nonzero",
];

/// Means over one repository (or over everything, as `"all"`). Conditioned
/// means are absent when no package qualifies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryGroup<T> {
    pub repository: String,
    pub packages: u64,
    pub strong_dependencies: T,
    pub parents: T,
    pub mhp: T,
    pub mcohp: T,
    pub children: T,
    pub children_nonzero: Option<T>,
    pub hc_nonzero: Option<T>,
    pub indirect_downstream: T,
    pub indirect_downstream_nonzero: Option<T>,
    pub hid_nonzero: Option<T>,
}

impl<T: Scalar> SummaryGroup<T> {
    pub fn values(&self) -> [Option<T>; 10] {
        [
            Some(self.strong_dependencies),
            Some(self.parents),
            Some(self.mhp),
            Some(self.mcohp),
            Some(self.children),
            self.children_nonzero,
            self.hc_nonzero,
            Some(self.indirect_downstream),
            self.indirect_downstream_nonzero,
            self.hid_nonzero,
        ]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EcosystemSummary<T> {
    /// One group per repository, sorted by name, then `"all"`.
    pub groups: Vec<SummaryGroup<T>>,
}

impl<T: Scalar> EcosystemSummary<T> {
    pub fn group(&self, repository: &str) -> Option<&SummaryGroup<T>> {
        self.groups.iter().find(|g| g.repository == repository)
    }
}

fn mean<T: Scalar>(values: impl Iterator<Item = T>) -> Option<T> {
    let (sum, n) = values.fold((T::zero(), 0u64), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / T::from_count(n))
}

fn group<T: Scalar>(repository: &str, rows: &[&PackageStatsRow<T>]) -> SummaryGroup<T> {
    let all = |f: fn(&PackageStatsRow<T>) -> u64| mean(rows.iter().map(|r| T::from_count(f(r)))).unwrap_or(T::zero());
    SummaryGroup {
        repository: repository.to_string(),
        packages: rows.len() as u64,
        strong_dependencies: all(|r| r.n_strong),
        parents: all(|r| r.k_p),
        mhp: all(|r| r.mhp),
        mcohp: all(|r| r.mcohp),
        children: all(|r| r.k_c),
        children_nonzero: mean(rows.iter().filter(|r| r.k_c > 0).map(|r| T::from_count(r.k_c))),
        hc_nonzero: mean(rows.iter().filter(|r| r.k_c > 0).filter_map(|r| r.hc)),
        indirect_downstream: all(|r| r.k_id),
        indirect_downstream_nonzero: mean(rows.iter().filter(|r| r.k_id > 0).map(|r| T::from_count(r.k_id))),
        hid_nonzero: mean(rows.iter().filter(|r| r.k_id > 0).filter_map(|r| r.hid)),
    }
}

pub fn ecosystem_summary<T: Scalar>(rows: &[PackageStatsRow<T>]) -> Result<EcosystemSummary<T>> {
    if rows.is_empty() {
        return Err(Error::domain("summary of an empty table"));
    }
    let mut by_repo: BTreeMap<&str, Vec<&PackageStatsRow<T>>> = BTreeMap::new();
    for r in rows {
        by_repo.entry(r.repository.as_str()).or_default().push(r);
    }
    let mut groups: Vec<SummaryGroup<T>> = by_repo.iter().map(|(repo, rs)| group(repo, rs)).collect();
    let everything: Vec<&PackageStatsRow<T>> = rows.iter().collect();
    groups.push(group("all", &everything));
    Ok(EcosystemSummary { groups })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adjusted::Penalties;
    use crate::graph::fixtures::*;
    use crate::report::compute_all_stats;
    use crate::{DepGraph, Exact};

    #[test]
    fn g1_summary() {
        let rows = compute_all_stats::<Exact>(&g1(), &Penalties::default());
        let s = ecosystem_summary(&rows).unwrap();
        let all = s.group("all").unwrap();
        assert_eq!(all.children_nonzero, Some(Exact::new(6, 5)));
        assert_eq!(all.packages, 6);
        assert!(ecosystem_summary::<Exact>(&[]).is_err());
    }

    #[test]
    fn lone_package() {
        let g = DepGraph::from_named_edges(&[], &[], &["solo"]);
        let rows = compute_all_stats::<f64>(&g, &Penalties::default());
        let s = ecosystem_summary(&rows).unwrap();
        assert_eq!(s.group("all").unwrap().mhp, 0.0);
        assert_eq!(s.group("all").unwrap().hc_nonzero, None);
    }
}
