//! Least-squares fits on the log scale: stretched exponential for the
//! heaviness distribution, power law for component sizes.

use std::collections::BTreeMap;
use std::io::Write;

use num_traits::Float;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::Scalar;

const BETA_MIN_CENTS: u32 = 5;
const BETA_MAX_CENTS: u32 = 150;
const GOLDEN_ITERATIONS: usize = 60;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum FitParams<T> {
    /// `p(h) = c · exp(−λ · h^β)`
    StretchedExponential { c: T, lambda: T, beta: T },
    /// `f(s) = scale · s^(−exponent)`
    PowerLaw { exponent: T, scale: T },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult<T> {
    pub params: FitParams<T>,
    pub r_squared: T,
    pub points_used: usize,
    pub points_dropped: usize,
}

impl<T: Float + Scalar> FitResult<T> {
    pub fn predict(&self, x: T) -> T {
        match self.params {
            FitParams::StretchedExponential { c, lambda, beta } => c * (-lambda * pow0(x, beta)).exp(),
            FitParams::PowerLaw { exponent, scale } => scale * x.powf(-exponent),
        }
    }

    /// Writes `value,observed,fitted` rows for plotting.
    pub fn write_observed_fitted<W: Write>(&self, points: &[(T, T)], w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["value", "observed", "fitted"])?;
        for &(x, y) in points {
            out.write_record([x.as_f64().to_string(), y.as_f64().to_string(), self.predict(x).as_f64().to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

fn pow0<T: Float>(x: T, beta: T) -> T {
    if x == T::zero() {
        T::zero()
    } else {
        x.powf(beta)
    }
}

/// Counts occurrences of each value.
pub fn histogram(values: impl IntoIterator<Item = u64>) -> BTreeMap<u64, u64> {
    let mut h = BTreeMap::new();
    for v in values {
        *h.entry(v).or_insert(0) += 1;
    }
    h
}

/// Normalizes counts to a probability mass function.
pub fn pmf_from_counts<T: Float + Scalar>(counts: &BTreeMap<u64, u64>) -> BTreeMap<u64, T> {
    let total: u64 = counts.values().sum();
    counts.iter().map(|(&k, &c)| (k, T::ratio(c, total))).collect()
}

struct Line<T> {
    intercept: T,
    slope: T,
    sse: T,
    sst: T,
}

fn regress<T: Float + Scalar>(xs: &[T], ys: &[T]) -> Line<T> {
    let n = T::from_count(xs.len() as u64);
    let mx = xs.iter().fold(T::zero(), |a, &b| a + b) / n;
    let my = ys.iter().fold(T::zero(), |a, &b| a + b) / n;
    let (mut sxx, mut sxy, mut syy) = (T::zero(), T::zero(), T::zero());
    for (&x, &y) in xs.iter().zip(ys) {
        sxx = sxx + (x - mx) * (x - mx);
        sxy = sxy + (x - mx) * (y - my);
        syy = syy + (y - my) * (y - my);
    }
    let slope = if sxx > T::zero() { sxy / sxx } else { T::zero() };
    let intercept = my - slope * mx;
    let sse = xs.iter().zip(ys).fold(T::zero(), |a, (&x, &y)| {
        let r = y - intercept - slope * x;
        a + r * r
    });
    Line { intercept, slope, sse, sst: syy }
}

fn r_squared<T: Float>(line: &Line<T>) -> T {
    if line.sst > T::zero() {
        T::one() - line.sse / line.sst
    } else {
        T::one()
    }
}

fn se_line<T: Float + Scalar>(hs: &[T], ys: &[T], beta: T, xs: &mut Vec<T>) -> Line<T> {
    xs.clear();
    xs.extend(hs.iter().map(|&h| pow0(h, beta)));
    regress(xs, ys)
}

/// Fits `log p(h) = log c − λ·h^β`. β is searched on a 0.01 grid over
/// [0.05, 1.5] with the linear part solved exactly at each step, then refined
/// by a golden-section search around the best grid point.
pub fn fit_stretched_exponential<T: Float + Scalar>(histogram: &BTreeMap<u64, T>) -> Result<FitResult<T>> {
    let mut hs = Vec::new();
    let mut ys = Vec::new();
    let mut dropped = 0;
    for (&h, &f) in histogram {
        if f > T::zero() {
            hs.push(T::from_count(h));
            ys.push(f.ln());
        } else {
            dropped += 1;
        }
    }
    if hs.len() < 3 {
        return Err(Error::domain(format!("stretched exponential fit needs 3 support points, got {}", hs.len())));
    }
    let hundred = T::from_count(100);
    let mut xs = Vec::with_capacity(hs.len());
    let mut best: Option<(T, Line<T>)> = None;
    for cents in BETA_MIN_CENTS..=BETA_MAX_CENTS {
        let beta = T::from_count(u64::from(cents)) / hundred;
        let line = se_line(&hs, &ys, beta, &mut xs);
        if best.as_ref().is_none_or(|(_, b)| line.sse < b.sse) {
            best = Some((beta, line));
        }
    }
    let (mut beta, mut line) = best.expect("non-empty grid");

    let step = T::one() / hundred;
    let lo_bound = T::from_count(u64::from(BETA_MIN_CENTS)) / hundred;
    let hi_bound = T::from_count(u64::from(BETA_MAX_CENTS)) / hundred;
    let (mut lo, mut hi) = ((beta - step).max(lo_bound), (beta + step).min(hi_bound));
    let inv_phi = (T::from_count(5).sqrt() - T::one()) / T::from_count(2);
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let mut f1 = se_line(&hs, &ys, x1, &mut xs).sse;
    let mut f2 = se_line(&hs, &ys, x2, &mut xs).sse;
    for _ in 0..GOLDEN_ITERATIONS {
        if f1 <= f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = se_line(&hs, &ys, x1, &mut xs).sse;
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = se_line(&hs, &ys, x2, &mut xs).sse;
        }
    }
    let refined = (lo + hi) / T::from_count(2);
    let refined_line = se_line(&hs, &ys, refined, &mut xs);
    if refined_line.sse <= line.sse {
        beta = refined;
        line = refined_line;
    }

    Ok(FitResult {
        params: FitParams::StretchedExponential { c: line.intercept.exp(), lambda: -line.slope, beta },
        r_squared: r_squared(&line),
        points_used: hs.len(),
        points_dropped: dropped,
    })
}

/// Power-law fit of the size-frequency histogram of `sizes`, dropping the
/// `drop_top` largest distinct sizes.
pub fn fit_power_law<T: Float + Scalar>(sizes: &[u64], drop_top: usize) -> Result<FitResult<T>> {
    let hist: Vec<(T, T)> =
        histogram(sizes.iter().copied()).into_iter().map(|(s, f)| (T::from_count(s), T::from_count(f))).collect();
    fit_power_law_histogram(&hist, drop_top)
}

/// Power-law fit of `(size, frequency)` points: regression of log frequency
/// on log size, with the `drop_top` largest sizes left out.
pub fn fit_power_law_histogram<T: Float + Scalar>(points: &[(T, T)], drop_top: usize) -> Result<FitResult<T>> {
    let mut pts: Vec<(T, T)> = points.to_vec();
    pts.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("comparable sizes"));
    pts.dedup_by(|a, b| {
        if a.0 == b.0 {
            b.1 = b.1 + a.1;
            true
        } else {
            false
        }
    });
    let total = pts.len();
    pts.truncate(total.saturating_sub(drop_top));
    pts.retain(|&(s, f)| s > T::zero() && f > T::zero());
    if pts.len() < 3 {
        return Err(Error::domain(format!("power-law fit needs 3 support points, got {}", pts.len())));
    }
    let xs: Vec<T> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<T> = pts.iter().map(|p| p.1.ln()).collect();
    let line = regress(&xs, &ys);
    Ok(FitResult {
        params: FitParams::PowerLaw { exponent: -line.slope, scale: line.intercept.exp() },
        r_squared: r_squared(&line),
        points_used: pts.len(),
        points_dropped: total - pts.len(),
    })
}
