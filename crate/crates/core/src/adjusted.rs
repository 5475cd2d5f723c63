//! Adjusted heaviness metrics and the rank-stability procedure used to pick
//! their penalty terms.

use std::collections::BTreeMap;
use std::ops::RangeInclusive;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::Scalar;

pub const DEFAULT_MHP_OFFSET: u64 = 30;
pub const DEFAULT_HC_PENALTY: u32 = 10;
pub const DEFAULT_HID_PENALTY: u32 = 6;
pub const DEFAULT_RANK_WINDOW: usize = 50;

/// Penalty and offset configuration for the adjusted metrics.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Penalties {
    pub mhp_offset: u64,
    pub hc_a: u32,
    pub hid_a: u32,
}

impl Default for Penalties {
    fn default() -> Self {
        Penalties { mhp_offset: DEFAULT_MHP_OFFSET, hc_a: DEFAULT_HC_PENALTY, hid_a: DEFAULT_HID_PENALTY }
    }
}

/// Adjusted metrics of one package.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AdjustedStats<T> {
    pub adjusted_mhp: T,
    pub adjusted_hc: Option<T>,
    pub adjusted_hid: T,
    pub penalties_used: Penalties,
    pub n_max: u64,
}

/// `h_max · (n_k + 30) / n_max`.
pub fn adjusted_mhp<T: Scalar>(h_max: u64, n_k: u64, n_max: u64) -> Result<T> {
    adjusted_mhp_with_offset(h_max, n_k, n_max, DEFAULT_MHP_OFFSET)
}

pub fn adjusted_mhp_with_offset<T: Scalar>(h_max: u64, n_k: u64, n_max: u64, offset: u64) -> Result<T> {
    if n_max == 0 {
        return Err(Error::domain("n_max must be at least 1"));
    }
    Ok(T::from_count(h_max) * T::ratio(n_k + offset, n_max))
}

/// `h · k / (k + a)`, zero when `k = 0`.
pub fn adjusted_penalized<T: Scalar>(h: T, k: u64, a: i64) -> Result<T> {
    if a <= 0 {
        return Err(Error::domain(format!("penalty must be positive, got {a}")));
    }
    if k == 0 {
        return Ok(T::zero());
    }
    Ok(h * T::ratio(k, k + a as u64))
}

/// Stability of the adjusted ranking as the penalty grows.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StabilityCurve<T> {
    pub a_values: Vec<u32>,
    /// `None` for the first value, which has nothing to compare against.
    pub s_values: Vec<Option<T>>,
    pub rank_window: usize,
}

impl<T: Scalar> StabilityCurve<T> {
    pub fn points(&self) -> impl Iterator<Item = (u32, T)> + '_ {
        self.a_values.iter().zip(&self.s_values).filter_map(|(&a, s)| s.map(|s| (a, s)))
    }
}

/// Ranks (1-based) of each package under `h · k / (k + a)`, descending, ties
/// by name. Entries must be sorted by name.
fn ranks<T: Scalar>(entries: &[(&str, T, u64)], a: u32) -> Vec<usize> {
    let values: Vec<T> =
        entries.iter().map(|&(_, h, k)| adjusted_penalized(h, k, i64::from(a)).expect("positive penalty")).collect();
    let mut order: Vec<usize> = (0..entries.len()).collect();
    // entries are name-sorted, so index order is name order
    order.sort_by(|&i, &j| values[j].partial_cmp(&values[i]).unwrap_or(std::cmp::Ordering::Equal).then(i.cmp(&j)));
    let mut rank = vec![0; entries.len()];
    for (r, &i) in order.iter().enumerate() {
        rank[i] = r + 1;
    }
    rank
}

/// Computes `s_a` over `a_range`: the fraction of packages whose rank moved
/// by at most `window` between `a − 1` and `a`.
pub fn stability_curve<T: Scalar>(
    metric_by_package: &BTreeMap<String, T>,
    k_by_package: &BTreeMap<String, u64>,
    a_range: RangeInclusive<u32>,
    window: usize,
) -> Result<StabilityCurve<T>> {
    if metric_by_package.is_empty() {
        return Err(Error::domain("stability curve needs at least one package"));
    }
    if metric_by_package.len() != k_by_package.len() || metric_by_package.keys().ne(k_by_package.keys()) {
        return Err(Error::domain("metric and count maps must share keys"));
    }
    if *a_range.start() == 0 {
        return Err(Error::domain("penalty range must start at 1 or above"));
    }
    let entries: Vec<(&str, T, u64)> =
        metric_by_package.iter().zip(k_by_package.values()).map(|((name, &h), &k)| (name.as_str(), h, k)).collect();
    let a_values: Vec<u32> = a_range.collect();
    let all_ranks: Vec<Vec<usize>> = a_values.par_iter().map(|&a| ranks(&entries, a)).collect();
    let n = entries.len() as u64;
    let s_values = (0..a_values.len())
        .map(|i| {
            (i > 0).then(|| {
                let stable =
                    all_ranks[i].iter().zip(&all_ranks[i - 1]).filter(|(r, q)| r.abs_diff(**q) <= window).count();
                T::ratio(stable as u64, n)
            })
        })
        .collect();
    Ok(StabilityCurve { a_values, s_values, rank_window: window })
}

/// Outcome of [`select_penalty`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct PenaltySelection {
    pub a: u32,
    /// True when the curve never flattened and `a` is the supplied default.
    pub fallback: bool,
}

/// Picks the smallest `a` after which every step of the curve rises by less
/// than `epsilon`. Falls back to `default` when no such point exists.
pub fn select_penalty<T: Scalar>(curve: &StabilityCurve<T>, epsilon: T, default: u32) -> PenaltySelection {
    let points: Vec<(u32, T)> = curve.points().collect();
    if points.len() >= 2 {
        let mut onset = None;
        for i in (0..points.len() - 1).rev() {
            if points[i + 1].1 - points[i].1 < epsilon {
                onset = Some(points[i].0);
            } else {
                break;
            }
        }
        if let Some(a) = onset {
            return PenaltySelection { a, fallback: false };
        }
    }
    log::warn!("stability curve has no plateau; using default penalty {default}");
    PenaltySelection { a: default, fallback: true }
}

/// The plateau threshold used when none is given.
pub fn default_epsilon<T: Scalar>() -> T {
    T::ratio(2, 1000)
}
