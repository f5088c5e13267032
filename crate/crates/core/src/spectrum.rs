//! Half-trace recursion, the escape test, and band covers `σ_k` of the
//! spectrum.
//!
//! Along the spectral line the trace-map orbit is carried by the scalar
//! recursion `x_{k+1} = 2 x_k x_{k-1} - x_{k-2}` with `x_{-1} = 1`,
//! `x_0 = E/2`, `x_1 = (E - λ)/2`; the triple `(x_{k+1}, x_k, x_{k-1})` is
//! `f^k((x_1, x_0, x_{-1}))`. `x_k(E)` is a polynomial of degree `F_k`
//! (`F_0 = F_1 = 1`) and `σ_k = {E : |x_k(E)| ≤ 1}` is a union of at most
//! `F_k` bands. For every `λ > 0`, `σ_k ∪ σ_{k+1}` covers the spectrum and
//! `σ_{k+2} ⊂ σ_{k+1} ∪ σ_k`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::intervals::{Interval, IntervalSet};
use crate::tracemap::{Coupling, Point3, OVERFLOW_GUARD};

/// Default horizon for [`escapes`].
pub const DEFAULT_ESCAPE_HORIZON: usize = 40;
/// Default band-edge tolerance.
pub const DEFAULT_EDGE_TOL: f64 = 1e-12;
/// Grid points per unit of polynomial degree over the full energy window.
pub const GRID_POINTS_PER_DEGREE: usize = 64;
/// Number of ×4 grid escalations before band isolation gives up.
pub const MAX_ESCALATIONS: u32 = 3;
/// Couplings at or above this value must produce exactly `F_k` bands.
pub const STRICT_COUNT_COUPLING: f64 = 5.0;

/// `F_k` with `F_0 = F_1 = 1`: the degree of `x_k` in `E`.
pub fn fibonacci_degree(k: usize) -> u64 {
    let (mut a, mut b) = (1u64, 1u64);
    for _ in 0..k {
        let next = a.saturating_add(b);
        a = b;
        b = next;
    }
    a
}

/// The sequence `x_{-1}, x_0, ..., x_K` at one energy.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HalfTraceSeq {
    pub lambda: f64,
    pub energy: f64,
    /// `values[k + 1] = x_k`.
    pub values: Vec<f64>,
    /// Smallest `k` with `|x_k| > 1` and `|x_{k+1}| > 1`.
    pub escaped_at: Option<usize>,
    /// True when the overflow guard cut the sequence short of `K`.
    pub truncated: bool,
}

impl HalfTraceSeq {
    /// `x_k` for `k ≥ -1`, if stored.
    pub fn get(&self, k: isize) -> Option<f64> {
        usize::try_from(k + 1)
            .ok()
            .and_then(|i| self.values.get(i).copied())
    }

    /// Highest stored index `k`.
    pub fn last_level(&self) -> isize {
        self.values.len() as isize - 2
    }

    /// `(x_{k+1}, x_k, x_{k-1})`, which equals `f^k(ℓ_λ(E))`.
    pub fn triple(&self, k: usize) -> Option<Point3> {
        let k = k as isize;
        Some(Point3 {
            x: self.get(k + 1)?,
            y: self.get(k)?,
            z: self.get(k - 1)?,
        })
    }
}

fn check_inputs(lambda: f64, energy: f64) -> Result<()> {
    ensure_finite(lambda, "coupling")?;
    ensure_finite(energy, "energy")?;
    if lambda < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "coupling must be non-negative, got {lambda}"
        )));
    }
    Ok(())
}

/// Runs the recursion up to `x_max_level`, stopping at the overflow guard.
pub fn half_traces(lambda: f64, energy: f64, max_level: usize) -> Result<HalfTraceSeq> {
    check_inputs(lambda, energy)?;
    if max_level < 1 {
        return Err(Error::InvalidArgument("half_traces needs K >= 1".into()));
    }
    let mut values = Vec::with_capacity(max_level + 2);
    values.extend_from_slice(&[1.0, energy / 2.0, (energy - lambda) / 2.0]);
    let mut truncated = false;
    while values.len() < max_level + 2 {
        let n = values.len();
        let next = 2.0 * values[n - 1] * values[n - 2] - values[n - 3];
        if !next.is_finite() || next.abs() > OVERFLOW_GUARD {
            truncated = true;
            break;
        }
        values.push(next);
    }
    // values[i] = x_{i-1}; the pair (x_k, x_{k+1}) sits at (k+1, k+2).
    let escaped_at = values
        .windows(2)
        .position(|w| w[0].abs() > 1.0 && w[1].abs() > 1.0)
        .and_then(|i| i.checked_sub(1));
    let escaped_at = escaped_at.or(if truncated {
        Some(values.len() - 2)
    } else {
        None
    });
    Ok(HalfTraceSeq {
        lambda,
        energy,
        values,
        escaped_at,
        truncated,
    })
}

/// Outcome of the escape test.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Escape {
    pub escaped: bool,
    pub index: Option<usize>,
}

/// Two consecutive half-traces beyond 1 in absolute value certify that `E`
/// is outside the spectrum. `escaped = false` only means "not within the
/// horizon".
pub fn escapes(lambda: f64, energy: f64, horizon: usize) -> Result<Escape> {
    check_inputs(lambda, energy)?;
    if horizon < 1 {
        return Err(Error::InvalidArgument("escape horizon must be >= 1".into()));
    }
    let (mut prev2, mut prev, mut cur) = (1.0, energy / 2.0, (energy - lambda) / 2.0);
    // Invariant: prev = x_{k}, cur = x_{k+1}.
    for k in 0..horizon {
        if prev.abs() > 1.0 && cur.abs() > 1.0 {
            return Ok(Escape {
                escaped: true,
                index: Some(k),
            });
        }
        let next = 2.0 * cur * prev - prev2;
        prev2 = prev;
        prev = cur;
        cur = next;
    }
    Ok(Escape {
        escaped: false,
        index: None,
    })
}

/// `x_k(E)`. Once the recursion passes the overflow guard the orbit has
/// escaped and only the sign is tracked; the result is then `±∞`.
pub fn half_trace(lambda: f64, energy: f64, k: usize) -> f64 {
    if k == 0 {
        return energy / 2.0;
    }
    let (mut a, mut b, mut c) = (1.0f64, energy / 2.0, (energy - lambda) / 2.0);
    for j in 1..k {
        let next = 2.0 * c * b - a;
        if !(next.abs() <= OVERFLOW_GUARD) {
            // After escape the product term dominates, so sign(x_{m+1}) = sign(x_m)·sign(x_{m-1}).
            let (mut s_prev, mut s_cur) = (b.signum(), c.signum());
            for _ in j..k {
                let s = s_cur * s_prev;
                s_prev = s_cur;
                s_cur = s;
            }
            return s_cur * f64::INFINITY;
        }
        a = b;
        b = c;
        c = next;
    }
    c
}

fn energy_window(lambda: f64) -> Interval {
    Interval {
        lo: -2.0 - lambda,
        hi: 2.0 + lambda,
    }
}

fn bisect_root(lambda: f64, k: usize, shift: f64, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let g = |e: f64| half_trace(lambda, e, k) - shift;
    let lo_negative = g(lo) < 0.0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let gm = g(mid);
        if gm == 0.0 {
            return mid;
        }
        if (gm < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// Roots of `x_k = ±1` inside `iv` detected by sign changes on a uniform grid.
fn scan_roots(lambda: f64, k: usize, iv: Interval, points: usize, tol: f64) -> Vec<f64> {
    let n = points.max(2);
    let width = iv.hi - iv.lo;
    let grid: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 == n {
                iv.hi
            } else {
                iv.lo + width * (i as f64) / ((n - 1) as f64)
            }
        })
        .collect();
    let values: Vec<f64> = grid.par_iter().map(|&e| half_trace(lambda, e, k)).collect();
    let mut roots = Vec::new();
    for shift in [1.0, -1.0] {
        for i in 0..n {
            let gi = values[i] - shift;
            if gi == 0.0 {
                roots.push(grid[i]);
                continue;
            }
            if i > 0 {
                let gp = values[i - 1] - shift;
                if gp != 0.0 && (gp < 0.0) != (gi < 0.0) {
                    roots.push(bisect_root(lambda, k, shift, grid[i - 1], grid[i], tol));
                }
            }
        }
    }
    roots
}

fn bands_from_roots(lambda: f64, k: usize, mut roots: Vec<f64>) -> IntervalSet {
    roots.sort_by(f64::total_cmp);
    roots.dedup();
    let bands = roots
        .windows(2)
        .filter(|w| half_trace(lambda, 0.5 * (w[0] + w[1]), k).abs() <= 1.0)
        .map(|w| Interval { lo: w[0], hi: w[1] })
        .collect();
    IntervalSet::from_sorted(bands)
}

fn search_domain(ladder: &[IntervalSet], k: usize, lambda: f64, tol: f64) -> Vec<Interval> {
    let parents = if k < 2 {
        IntervalSet::from_sorted(vec![energy_window(lambda)])
    } else {
        ladder[k - 1].union(&ladder[k - 2])
    };
    let widened = parents
        .iter()
        .map(|iv| {
            let margin = 1e-3 * iv.length() + 4.0 * tol;
            Interval {
                lo: iv.lo - margin,
                hi: iv.hi + margin,
            }
        })
        .collect();
    IntervalSet::from_sorted(widened).intervals().to_vec()
}

fn isolate_level(
    lambda: f64,
    k: usize,
    domain: &[Interval],
    tol: f64,
) -> Result<IntervalSet> {
    let degree = fibonacci_degree(k) as usize;
    let window = energy_window(lambda).length();
    let density = (GRID_POINTS_PER_DEGREE * degree) as f64 / window;
    let strict = lambda >= STRICT_COUNT_COUPLING;
    let (mut edges, mut found) = (0, 0);
    for attempt in 0..=MAX_ESCALATIONS {
        let factor = 4usize.pow(attempt);
        let roots: Vec<f64> = domain
            .par_iter()
            .flat_map_iter(|iv| {
                let base = ((density * iv.length()).ceil() as usize).max(GRID_POINTS_PER_DEGREE);
                scan_roots(lambda, k, *iv, base * factor, tol)
            })
            .collect();
        edges = roots.len();
        let bands = bands_from_roots(lambda, k, roots);
        found = bands.len();
        if !strict || (edges >= 2 * degree && found == degree) {
            return Ok(bands);
        }
    }
    Err(Error::BandIsolation {
        lambda,
        level: k,
        edges,
        bands: found,
        expected: degree,
    })
}

/// `σ_0, ..., σ_{k_max}`. Each level is searched only inside the previous
/// two levels, since `σ_k ⊂ σ_{k-1} ∪ σ_{k-2}`.
pub fn band_ladder(coupling: Coupling, k_max: usize, tol: f64) -> Result<Vec<IntervalSet>> {
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "edge tolerance must be positive, got {tol}"
        )));
    }
    let lambda = coupling.value();
    let mut ladder: Vec<IntervalSet> = Vec::with_capacity(k_max + 1);
    for k in 0..=k_max {
        let domain = search_domain(&ladder, k, lambda, tol);
        ladder.push(isolate_level(lambda, k, &domain, tol)?);
    }
    Ok(ladder)
}

/// `σ_k = {E : |x_k(E)| ≤ 1}` with band edges located to `tol`.
pub fn sigma_bands(coupling: Coupling, k: usize, tol: f64) -> Result<IntervalSet> {
    let mut ladder = band_ladder(coupling, k, tol)?;
    Ok(ladder.pop().expect("ladder holds k+1 levels"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCover {
    pub lambda: f64,
    pub level: usize,
    pub sigma_k: IntervalSet,
    pub sigma_k1: IntervalSet,
    /// `σ_k ∪ σ_{k+1}`, which contains the spectrum.
    pub cover: IntervalSet,
}

impl SpectrumCover {
    /// Longest single band of `σ_k` or `σ_{k+1}`. Unlike the longest cover
    /// piece this keeps shrinking when bands of the two levels overlap.
    pub fn band_scale(&self) -> f64 {
        self.sigma_k.max_length().max(self.sigma_k1.max_length())
    }

    fn from_pair(lambda: f64, level: usize, sigma_k: IntervalSet, sigma_k1: IntervalSet) -> Self {
        let cover = sigma_k.union(&sigma_k1);
        SpectrumCover {
            lambda,
            level,
            sigma_k,
            sigma_k1,
            cover,
        }
    }
}

pub fn spectrum_cover(coupling: Coupling, k: usize, tol: f64) -> Result<SpectrumCover> {
    let mut ladder = band_ladder(coupling, k + 1, tol)?;
    let sigma_k1 = ladder.pop().expect("level k+1");
    let sigma_k = ladder.pop().expect("level k");
    Ok(SpectrumCover::from_pair(coupling.value(), k, sigma_k, sigma_k1))
}

/// Covers at every level `0..=k_max`, sharing one band ladder.
pub fn cover_ladder(coupling: Coupling, k_max: usize, tol: f64) -> Result<Vec<SpectrumCover>> {
    let ladder = band_ladder(coupling, k_max + 1, tol)?;
    Ok(ladder
        .windows(2)
        .enumerate()
        .map(|(k, w)| SpectrumCover::from_pair(coupling.value(), k, w[0].clone(), w[1].clone()))
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tracemap::{orbit, spectral_line};
    use proptest::prelude::*;

    fn c(l: f64) -> Coupling {
        Coupling::new(l).unwrap()
    }

    #[test]
    fn fibonacci_degrees() {
        let d: Vec<u64> = (0..8).map(fibonacci_degree).collect();
        assert_eq!(d, vec![1, 1, 2, 3, 5, 8, 13, 21]);
    }

    #[test]
    fn fixed_point_sequence() {
        let s = half_traces(0.0, 2.0, 30).unwrap();
        assert!(s.values.iter().all(|&v| v == 1.0));
        assert_eq!(s.escaped_at, None);
        assert_eq!(s.last_level(), 30);
    }

    #[test]
    fn far_energy_escapes_immediately() {
        let s = half_traces(1.0, 100.0, 5).unwrap();
        assert_eq!(s.escaped_at, Some(0));
    }

    #[test]
    fn hand_iterated_sequence() {
        let s = half_traces(4.0, 0.0, 4).unwrap();
        let want = [1.0, 0.0, -2.0, -1.0, 4.0, -6.0];
        assert_eq!(s.values, want);
        assert_eq!(s.get(-1), Some(1.0));
        assert_eq!(s.get(4), Some(-6.0));
        assert_eq!(s.escaped_at, Some(3));
    }

    #[test]
    fn escape_examples() {
        assert!(escapes(1.0, 10.0, 40).unwrap().escaped);
        for k in [1, 5, 40, 400] {
            assert!(!escapes(0.0, 0.0, k).unwrap().escaped);
        }
        let e = escapes(4.0, 0.0, DEFAULT_ESCAPE_HORIZON).unwrap();
        assert_eq!(e, Escape { escaped: true, index: Some(3) });
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(half_traces(1.0, 0.0, 0).is_err());
        assert!(half_traces(-1.0, 0.0, 3).is_err());
        assert!(half_traces(1.0, f64::NAN, 3).is_err());
        assert!(sigma_bands(c(1.0), 3, 0.0).is_err());
    }

    #[test]
    fn overflow_truncates_with_escape() {
        let s = half_traces(1.0, 100.0, 60).unwrap();
        assert!(s.truncated);
        assert!(s.escaped_at.is_some());
        assert!(s.values.iter().all(|v| v.abs() <= OVERFLOW_GUARD));
    }

    #[test]
    fn half_trace_matches_sequence_and_keeps_sign_after_overflow() {
        let s = half_traces(1.5, 0.7, 12).unwrap();
        for k in 0..=12 {
            assert_eq!(half_trace(1.5, 0.7, k), s.get(k as isize).unwrap());
        }
        let far = half_traces(1.0, 9.0, 200).unwrap();
        let k = far.last_level() as usize;
        let last = far.get(k as isize).unwrap();
        assert_eq!(half_trace(1.0, 9.0, k + 5).signum(), {
            let mut sp = far.get(k as isize - 1).unwrap().signum();
            let mut sc = last.signum();
            for _ in 0..5 {
                let s = sp * sc;
                sp = sc;
                sc = s;
            }
            sc
        });
        assert!(half_trace(1.0, 9.0, 60).is_infinite());
    }

    #[test]
    fn trivial_levels() {
        let s0 = sigma_bands(c(2.0), 0, DEFAULT_EDGE_TOL).unwrap();
        assert_eq!(s0.len(), 1);
        assert!((s0.intervals()[0].lo + 2.0).abs() < 1e-10);
        assert!((s0.intervals()[0].hi - 2.0).abs() < 1e-10);
        let s1 = sigma_bands(c(3.0), 1, DEFAULT_EDGE_TOL).unwrap();
        assert!((s1.intervals()[0].lo - 1.0).abs() < 1e-10);
        assert!((s1.intervals()[0].hi - 5.0).abs() < 1e-10);
    }

    #[test]
    fn level_six_has_thirteen_bands() {
        let s = sigma_bands(c(5.0), 6, DEFAULT_EDGE_TOL).unwrap();
        assert_eq!(s.len(), 13);
        // independent count: sign changes of x_6² - 1 on a dense grid
        let n = 200_000;
        let mut changes = 0;
        let mut prev = half_trace(5.0, -7.0, 6).powi(2) - 1.0;
        for i in 1..=n {
            let e = -7.0 + 14.0 * i as f64 / n as f64;
            let v = half_trace(5.0, e, 6).powi(2) - 1.0;
            if (v < 0.0) != (prev < 0.0) {
                changes += 1;
            }
            prev = v;
        }
        assert_eq!(changes, 26);
    }

    #[test]
    fn cover_examples() {
        let cv = spectrum_cover(c(3.0), 0, DEFAULT_EDGE_TOL).unwrap();
        assert_eq!(cv.cover.len(), 1);
        assert!((cv.cover.intervals()[0].lo + 2.0).abs() < 1e-10);
        assert!((cv.cover.intervals()[0].hi - 5.0).abs() < 1e-10);

        let cv = spectrum_cover(c(5.0), 0, DEFAULT_EDGE_TOL).unwrap();
        assert_eq!(cv.cover.len(), 2);
        assert!((cv.cover.intervals()[1].lo - 3.0).abs() < 1e-10);
        assert!((cv.cover.intervals()[1].hi - 7.0).abs() < 1e-10);

        let ladder = cover_ladder(c(5.0), 10, DEFAULT_EDGE_TOL).unwrap();
        assert!(ladder[10].cover.total_length() < ladder[8].cover.total_length());
        assert!(ladder.iter().all(|l| l.cover.len() <= l.sigma_k.len() + l.sigma_k1.len()));
    }

    #[test]
    fn large_coupling_counts_are_exact() {
        let ladder = band_ladder(c(20.0), 12, DEFAULT_EDGE_TOL).unwrap();
        for (k, s) in ladder.iter().enumerate() {
            assert_eq!(s.len() as u64, fibonacci_degree(k), "level {k}");
        }
    }

    #[test]
    fn small_coupling_ladder_succeeds() {
        let ladder = band_ladder(c(0.2), 10, DEFAULT_EDGE_TOL).unwrap();
        assert!(ladder.iter().all(|s| !s.is_empty()));
    }

    #[test]
    fn bands_inside_operator_norm_window() {
        for lambda in [0.3, 2.0, 7.0] {
            let ladder = band_ladder(c(lambda), 9, DEFAULT_EDGE_TOL).unwrap();
            for s in &ladder {
                let h = s.hull().unwrap();
                assert!(h.lo >= -2.0 - lambda - 1e-10 && h.hi <= 2.0 + lambda + 1e-10);
            }
        }
    }

    proptest! {
        #[test]
        fn recursion_is_the_trace_map(lambda in 0.01f64..10.0, energy in -12.0f64..12.0) {
            let s = half_traces(lambda, energy, 25).unwrap();
            let o = orbit(spectral_line(lambda, energy), 25).unwrap();
            let usable = o.points.len().min((s.last_level()) as usize);
            for k in 0..usable {
                let t = s.triple(k).unwrap();
                let p = o.points[k];
                let scale = p.max_abs().max(1.0);
                prop_assert!(t.distance(&p) <= 1e-10 * scale);
            }
        }
    }
}
