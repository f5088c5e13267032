//! Box-counting regression and Moran-equation dimension estimates.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::intervals::IntervalSet;

/// Levels below this are dropped from default regressions.
pub const DEFAULT_MIN_LEVEL: usize = 3;

const MORAN_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Box,
    Moran,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DimensionEstimate {
    pub value: f64,
    pub slope_stderr: f64,
    /// Root-mean-square residual of the fit (zero for Moran).
    pub residual: f64,
    pub levels_used: Vec<usize>,
    pub method: Method,
    /// Regression with constant counts, or Moran with fewer than two pieces.
    pub degenerate: bool,
    /// Set when the input is only approximately self-similar.
    pub approximate: bool,
}

/// Number of cells `[jε, (j+1)ε)` meeting `s`.
pub fn box_count(s: &IntervalSet, eps: f64) -> Result<u64> {
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidArgument(format!("box size must be positive, got {eps}")));
    }
    if s.is_empty() {
        return Err(Error::InvalidArgument("box count of an empty set".into()));
    }
    let mut count: u64 = 0;
    let mut last: Option<i64> = None;
    for iv in s {
        let mut first = cell_index(iv.lo, eps);
        let end = cell_index(iv.hi, eps);
        if let Some(l) = last {
            first = first.max(l + 1);
        }
        if end >= first {
            count += (end - first + 1) as u64;
        }
        last = Some(last.map_or(end, |l| l.max(end)));
    }
    Ok(count)
}

/// Index of the cell holding `x`. Quotients within rounding distance of an
/// integer are snapped to it, so endpoints like `k/3` at `ε = 1/3` land on the
/// boundary they represent rather than on either side at random.
fn cell_index(x: f64, eps: f64) -> i64 {
    let q = x / eps;
    let r = q.round();
    if (q - r).abs() <= 256.0 * f64::EPSILON * r.abs().max(1.0) {
        r as i64
    } else {
        q.floor() as i64
    }
}

/// One regression sample: a cover at a given level, counted at scale `eps`.
#[derive(Clone, Copy, Debug)]
pub struct CoverAtScale<'a> {
    pub level: usize,
    pub cover: &'a IntervalSet,
    pub eps: f64,
}

/// Least-squares slope of `log N(ε)` against `log(1/ε)`.
pub fn box_dim_regression(samples: &[CoverAtScale<'_>]) -> Result<DimensionEstimate> {
    if samples.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "box regression needs at least 3 levels, got {}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1].eps < w[0].eps)) {
        return Err(Error::InvalidArgument(
            "box sizes must be strictly decreasing".into(),
        ));
    }
    let mut xs = Vec::with_capacity(samples.len());
    let mut counts = Vec::with_capacity(samples.len());
    for s in samples {
        counts.push(box_count(s.cover, s.eps)?);
        xs.push((1.0 / s.eps).ln());
    }
    let ys: Vec<f64> = counts.iter().map(|&c| (c as f64).ln()).collect();
    let degenerate = counts.iter().all(|&c| c == counts[0]);
    let (slope, intercept, sxx) = least_squares(&xs, &ys);
    let n = xs.len() as f64;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let slope_stderr = if xs.len() > 2 && sxx > 0.0 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Ok(DimensionEstimate {
        value: slope,
        slope_stderr,
        residual: (ssr / n).sqrt(),
        levels_used: samples.iter().map(|s| s.level).collect(),
        method: Method::Box,
        degenerate,
        approximate: false,
    })
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    (slope, my - slope * mx, sxx)
}

/// Root `s` of `Σ ℓ_i^s = 1` over the interval lengths of `bands`.
pub fn moran_dim(bands: &IntervalSet) -> Result<DimensionEstimate> {
    let lengths: Vec<f64> = bands.iter().map(|iv| iv.length()).collect();
    moran_from_lengths(&lengths)
}

pub fn moran_from_lengths(lengths: &[f64]) -> Result<DimensionEstimate> {
    if lengths.is_empty() {
        return Err(Error::InvalidArgument("Moran equation needs at least one band".into()));
    }
    if let Some(bad) = lengths.iter().find(|&&l| !(l > 0.0 && l < 1.0)) {
        return Err(Error::InvalidArgument(format!(
            "Moran band lengths must lie in (0, 1), got {bad}"
        )));
    }
    let estimate = |value: f64, degenerate: bool| DimensionEstimate {
        value,
        slope_stderr: 0.0,
        residual: 0.0,
        levels_used: Vec::new(),
        method: Method::Moran,
        degenerate,
        approximate: false,
    };
    if lengths.len() < 2 {
        return Ok(estimate(0.0, true));
    }
    let pressure = |s: f64| lengths.iter().map(|l| l.powf(s)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0f64, 2.0f64);
    if pressure(hi) > 0.0 {
        return Err(Error::InvalidArgument(
            "Moran root exceeds 2; bands too long for a subset of the line".into(),
        ));
    }
    while hi - lo > MORAN_TOL {
        let mid = 0.5 * (lo + hi);
        if pressure(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(estimate(0.5 * (lo + hi), false))
}
