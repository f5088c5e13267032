//! Linear iterated function systems on the line: attractor covers,
//! similarity dimensions, and resonance of contraction ratios.
//!
//! Sums of two such attractors have dimension `min{d1 + d2, 1}` when the
//! ratio `log r1 / log r2` is irrational. When it is rational the sum can
//! fall short, e.g. `C + C` for `C` generated by `{x/4, x/4 + 3/4}` is the
//! attractor of `{x/4, x/4 + 3/4, x/4 + 3/2}` with dimension `log 3 / log 4`.

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::intervals::{Interval, IntervalSet};

/// Cap on `maps^depth` for [`attractor_cover`].
pub const ATTRACTOR_CAP: u128 = 1_000_000;
/// Relative distance below which a log-ratio counts as exactly rational.
pub const RESONANCE_TOL: f64 = 1e-14;

/// `x ↦ ratio·x + translation`, orientation preserving.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearMap {
    pub ratio: f64,
    pub translation: f64,
}

impl LinearMap {
    pub fn new(ratio: f64, translation: f64) -> Result<Self> {
        ensure_finite(ratio, "contraction ratio")?;
        ensure_finite(translation, "translation")?;
        if !(ratio > 0.0 && ratio < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "contraction ratio must lie in (0, 1), got {ratio}"
            )));
        }
        Ok(LinearMap { ratio, translation })
    }

    pub fn apply(&self, x: f64) -> f64 {
        self.ratio * x + self.translation
    }

    pub fn image(&self, iv: &Interval) -> Interval {
        Interval {
            lo: self.apply(iv.lo),
            hi: self.apply(iv.hi),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearIfs {
    maps: Vec<LinearMap>,
    hull: Interval,
}

impl LinearIfs {
    /// Every map must send `hull` into itself.
    pub fn new(maps: Vec<LinearMap>, hull: Interval) -> Result<Self> {
        if maps.is_empty() {
            return Err(Error::InvalidArgument("an IFS needs at least one map".into()));
        }
        let hull = Interval::new(hull.lo, hull.hi)?;
        for (i, m) in maps.iter().enumerate() {
            if !hull.contains_interval(&m.image(&hull)) {
                return Err(Error::InvalidArgument(format!(
                    "map {i} does not send the hull {hull} into itself"
                )));
            }
        }
        Ok(LinearIfs { maps, hull })
    }

    /// `{x/3, x/3 + 2/3}` on `[0, 1]`.
    pub fn middle_thirds() -> Self {
        Self::uniform(1.0 / 3.0, &[0.0, 2.0 / 3.0])
    }

    /// `{x/4, x/4 + 3/4}` on `[0, 1]`.
    pub fn middle_halves() -> Self {
        Self::uniform(0.25, &[0.0, 0.75])
    }

    fn uniform(ratio: f64, translations: &[f64]) -> Self {
        let maps = translations
            .iter()
            .map(|&t| LinearMap::new(ratio, t).expect("valid preset"))
            .collect();
        LinearIfs::new(maps, Interval { lo: 0.0, hi: 1.0 }).expect("valid preset")
    }

    pub fn maps(&self) -> &[LinearMap] {
        &self.maps
    }

    pub fn hull(&self) -> Interval {
        self.hull
    }

    pub fn min_ratio(&self) -> f64 {
        self.maps.iter().map(|m| m.ratio).fold(1.0, f64::min)
    }
}

/// Union of the hull's images under all `depth`-fold compositions.
pub fn attractor_cover(ifs: &LinearIfs, depth: u32) -> Result<IntervalSet> {
    let requested = (ifs.maps.len() as u128).checked_pow(depth).unwrap_or(u128::MAX);
    if requested > ATTRACTOR_CAP {
        return Err(Error::SizeCap {
            what: "attractor cover pieces",
            requested,
            cap: ATTRACTOR_CAP,
        });
    }
    let mut cover = IntervalSet::from_sorted(vec![ifs.hull]);
    for _ in 0..depth {
        let images = ifs
            .maps
            .iter()
            .flat_map(|m| cover.iter().map(move |iv| m.image(iv)))
            .collect();
        cover = IntervalSet::from_unsorted(images);
    }
    Ok(cover)
}

/// Root of `Σ r_i^s = 1`; requires disjoint (possibly touching) first-level images.
pub fn similarity_dim(ifs: &LinearIfs) -> Result<f64> {
    let mut images: Vec<(usize, Interval)> = ifs
        .maps
        .iter()
        .map(|m| m.image(&ifs.hull))
        .enumerate()
        .collect();
    images.sort_by(|a, b| a.1.lo.total_cmp(&b.1.lo));
    for w in images.windows(2) {
        if w[1].1.lo < w[0].1.hi {
            return Err(Error::OverlappingMaps(w[0].0, w[1].0));
        }
    }
    if ifs.maps.len() == 1 {
        return Ok(0.0);
    }
    let pressure = |s: f64| ifs.maps.iter().map(|m| m.ratio.powf(s)).sum::<f64>() - 1.0;
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if pressure(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Outcome of the rationality test on `log r1 / log r2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum Resonance {
    /// The ratio equals `p/q` to within [`RESONANCE_TOL`].
    Resonant { p: u64, q: u64, ratio: f64 },
    /// No `p/q` with `q ≤ qmax` matches; the closest one is reported.
    NonResonant {
        best_p: u64,
        best_q: u64,
        ratio: f64,
        distance: f64,
    },
}

impl Resonance {
    pub fn is_resonant(&self) -> bool {
        matches!(self, Resonance::Resonant { .. })
    }
}

/// Partial quotients of the continued fraction of a positive double,
/// expanded exactly from its binary representation.
fn exact_partial_quotients(x: f64) -> Vec<u128> {
    let bits = x.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i32;
    let mantissa = bits & ((1u64 << 52) - 1);
    let (mut num, shift) = if exponent == 0 {
        (mantissa as u128, 1074)
    } else {
        ((mantissa | (1u64 << 52)) as u128, 1075 - exponent)
    };
    // x = num / 2^shift
    let mut den: u128 = if shift <= 0 {
        if -shift > 74 {
            return vec![x as u128];
        }
        num <<= (-shift) as u32;
        1
    } else if shift < 127 {
        1u128 << shift
    } else {
        // below ~1e-38: the ratio is effectively zero at any useful denominator
        return vec![0];
    };
    let mut quotients = Vec::new();
    while den != 0 {
        quotients.push(num / den);
        let r = num % den;
        num = den;
        den = r;
    }
    quotients
}

/// Closest rational `p/q` to `x > 0` with `1 ≤ q ≤ qmax` (ties to the smaller `q`).
pub fn best_rational(x: f64, qmax: u64) -> (u64, u64) {
    let qmax = qmax.max(1) as u128;
    let (mut p0, mut q0, mut p1, mut q1): (u128, u128, u128, u128) = (0, 1, 1, 0);
    let mut candidates: Vec<(u128, u128)> = Vec::new();
    for a in exact_partial_quotients(x) {
        let q2 = a.saturating_mul(q1).saturating_add(q0);
        if q2 > qmax {
            // largest semiconvergent that still fits
            if let Some(t) = (qmax - q0).checked_div(q1).filter(|&t| t > 0) {
                candidates.push((t * p1 + p0, t * q1 + q0));
            }
            break;
        }
        let p2 = a.saturating_mul(p1).saturating_add(p0);
        candidates.push((p2, q2));
        (p0, q0, p1, q1) = (p1, q1, p2, q2);
    }
    let dist = |&(p, q): &(u128, u128)| (x - p as f64 / q as f64).abs();
    let best = candidates
        .iter()
        .filter(|c| c.1 >= 1)
        .min_by(|a, b| dist(a).total_cmp(&dist(b)).then(a.1.cmp(&b.1)))
        .copied()
        .unwrap_or((x.round() as u128, 1));
    (best.0 as u64, best.1 as u64)
}

/// Whether `log r1 / log r2` is a rational with denominator at most `qmax`.
pub fn log_ratio_resonance(r1: f64, r2: f64, qmax: u64) -> Result<Resonance> {
    for r in [r1, r2] {
        if !(r > 0.0 && r < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "contraction ratios must lie in (0, 1), got {r}"
            )));
        }
    }
    if qmax < 1 {
        return Err(Error::InvalidArgument("qmax must be >= 1".into()));
    }
    let ratio = r1.ln() / r2.ln();
    let (p, q) = best_rational(ratio, qmax);
    let distance = (ratio - p as f64 / q as f64).abs();
    if distance <= RESONANCE_TOL * ratio.max(1.0) {
        Ok(Resonance::Resonant { p, q, ratio })
    } else {
        Ok(Resonance::NonResonant {
            best_p: p,
            best_q: q,
            ratio,
            distance,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dimension::{box_dim_regression, CoverAtScale};

    #[test]
    fn first_level_covers() {
        let c = attractor_cover(&LinearIfs::middle_thirds(), 1).unwrap();
        assert_eq!(c.len(), 2);
        assert_eq!(c.intervals()[0], Interval { lo: 0.0, hi: 1.0 / 3.0 });
        assert_eq!(c.intervals()[1].hi, 1.0);
        assert!((c.intervals()[1].lo - 2.0 / 3.0).abs() < 1e-16);

        let ifs = LinearIfs::new(
            vec![LinearMap::new(0.5, 0.1).unwrap()],
            Interval { lo: -1.0, hi: 3.0 },
        )
        .unwrap();
        assert_eq!(
            attractor_cover(&ifs, 0).unwrap(),
            IntervalSet::single(-1.0, 3.0).unwrap()
        );

        let c = attractor_cover(&LinearIfs::middle_halves(), 2).unwrap();
        assert_eq!(c.len(), 4);
        assert!(c.iter().all(|iv| iv.length() == 1.0 / 16.0));
    }

    #[test]
    fn rejects_bad_systems() {
        assert!(LinearMap::new(1.0, 0.0).is_err());
        assert!(LinearMap::new(0.0, 0.0).is_err());
        let unit = Interval { lo: 0.0, hi: 1.0 };
        assert!(LinearIfs::new(vec![LinearMap::new(0.5, 0.7).unwrap()], unit).is_err());
        assert!(LinearIfs::new(vec![], unit).is_err());
        let overlapping = LinearIfs::new(
            vec![LinearMap::new(0.6, 0.0).unwrap(), LinearMap::new(0.6, 0.4).unwrap()],
            unit,
        )
        .unwrap();
        assert!(matches!(similarity_dim(&overlapping), Err(Error::OverlappingMaps(0, 1))));
        let big = LinearIfs::middle_thirds();
        assert!(matches!(attractor_cover(&big, 20), Err(Error::SizeCap { .. })));
    }

    #[test]
    fn similarity_dimensions() {
        let d = similarity_dim(&LinearIfs::middle_thirds()).unwrap();
        assert!((d - 2f64.ln() / 3f64.ln()).abs() < 1e-12);
        assert!((similarity_dim(&LinearIfs::middle_halves()).unwrap() - 0.5).abs() < 1e-12);
        let halves = LinearIfs::uniform(0.5, &[0.0, 0.5]);
        assert!((similarity_dim(&halves).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn covers_nest_exactly() {
        for ifs in [LinearIfs::middle_thirds(), LinearIfs::middle_halves()] {
            let mut prev = attractor_cover(&ifs, 0).unwrap();
            for d in 1..=10 {
                let next = attractor_cover(&ifs, d).unwrap();
                assert!(next.is_subset_of(&prev), "depth {d}");
                prev = next;
            }
        }
    }

    #[test]
    fn box_dimension_reproduces_similarity_dimension() {
        for ifs in [LinearIfs::middle_thirds(), LinearIfs::middle_halves()] {
            let r = ifs.min_ratio();
            let covers: Vec<_> = (4..=10).map(|d| attractor_cover(&ifs, d).unwrap()).collect();
            let samples: Vec<_> = covers
                .iter()
                .zip(4..=10)
                .map(|(c, d)| CoverAtScale { level: d as usize, cover: c, eps: r.powi(d) })
                .collect();
            let est = box_dim_regression(&samples).unwrap().value;
            let sim = similarity_dim(&ifs).unwrap();
            assert!((est - sim).abs() <= 0.02, "{est} vs {sim}");
        }
    }

    #[test]
    fn resonance_examples() {
        assert_eq!(
            log_ratio_resonance(1.0 / 3.0, 1.0 / 3.0, 10).unwrap(),
            Resonance::Resonant { p: 1, q: 1, ratio: 1.0 }
        );
        match log_ratio_resonance(0.25, 0.5, 10).unwrap() {
            Resonance::Resonant { p, q, .. } => assert_eq!((p, q), (2, 1)),
            other => panic!("{other:?}"),
        }
        let r = log_ratio_resonance(1.0 / 3.0, 0.5, 1_000_000).unwrap();
        assert!(!r.is_resonant(), "{r:?}");
        // 301994/190537 is within 5e-13 of log 3 / log 2
        if let Resonance::NonResonant { best_p, best_q, distance, .. } = r {
            assert_eq!((best_p, best_q), (301_994, 190_537));
            assert!(distance > 1e-13 && distance < 1e-12);
        }
    }

    #[test]
    fn best_rational_brute_force() {
        for &x in &[0.7479781600683337, 2.0 / 3.0, 1.5849625007211563, 0.1, 3.14158] {
            for qmax in [1u64, 2, 7, 50, 300] {
                let (p, q) = best_rational(x, qmax);
                let d = (x - p as f64 / q as f64).abs();
                let brute = (1..=qmax)
                    .map(|q| (x - (x * q as f64).round() / q as f64).abs())
                    .fold(f64::INFINITY, f64::min);
                assert!(q <= qmax);
                assert!(d <= brute + 1e-15, "x={x} qmax={qmax}: {p}/{q}");
            }
        }
    }
}
