//! Two explicit periodic orbits of the trace map and their unstable
//! multipliers.
//!
//! For `a ≥ 0` the points
//!
//! ```text
//! p_a = (-1/2, g_p(a), -1/2),  g_p(a) = (1 + √(9 + 16a)) / 4
//! q_a = (0, g_q(a), 0),        g_q(a) = √(a + 1)
//! ```
//!
//! lie on the level set `{I = a}` (coupling `λ = 2√a`) and have minimal
//! periods 4 and 6. Their unstable multipliers `μ` solve
//! `μ + 1/μ = 8 g_p (1 - 2 g_p) + 1` and `μ + 1/μ = 2 (8 g_q⁴ + 1)`. Both
//! closed forms are checked here against the numerically computed
//! return-map derivative restricted to the tangent plane of the surface.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};
use crate::ifs::best_rational;
use crate::tracemap::{step, Point3};

pub type Matrix3 = [[f64; 3]; 3];
pub type Matrix2 = [[f64; 2]; 2];

pub const PERIOD_TOL: f64 = 1e-10;
pub const DEFAULT_MAX_PERIOD: usize = 64;
/// Distance to a rational below which [`scan_exceptional`] flags a parameter.
pub const EXCEPTIONAL_TOL: f64 = 1e-9;

fn check_parameter(a: f64) -> Result<f64> {
    ensure_finite(a, "surface parameter")?;
    if a < 0.0 {
        return Err(Error::InvalidArgument(format!(
            "surface parameter must be non-negative, got {a}"
        )));
    }
    Ok(a)
}

pub fn g_p(a: f64) -> Result<f64> {
    let a = check_parameter(a)?;
    Ok((1.0 + (9.0 + 16.0 * a).sqrt()) / 4.0)
}

pub fn g_q(a: f64) -> Result<f64> {
    let a = check_parameter(a)?;
    Ok((a + 1.0).sqrt())
}

pub fn point_p(a: f64) -> Result<Point3> {
    Ok(Point3 {
        x: -0.5,
        y: g_p(a)?,
        z: -0.5,
    })
}

pub fn point_q(a: f64) -> Result<Point3> {
    Ok(Point3 {
        x: 0.0,
        y: g_q(a)?,
        z: 0.0,
    })
}

/// Coupling whose surface `{I = λ²/4}` carries `p_a` and `q_a`.
pub fn coupling_for(a: f64) -> f64 {
    2.0 * a.sqrt()
}

fn returns_to(p: Point3, image: Point3, tol: f64) -> bool {
    image.is_finite() && image.distance(&p) < tol * p.max_abs().max(1.0)
}

/// Smallest `n ≤ n_max` with `‖fⁿ(p) - p‖ < tol`.
pub fn minimal_period(p: Point3, n_max: usize, tol: f64) -> Result<usize> {
    let p = p.checked()?;
    if n_max < 1 {
        return Err(Error::InvalidArgument("n_max must be >= 1".into()));
    }
    let mut q = p;
    for n in 1..=n_max {
        q = step(q);
        if returns_to(p, q, tol) {
            return Ok(n);
        }
    }
    Err(Error::NotPeriodic { n_max, tol })
}

/// Derivative of `f` at `p`; its determinant is `-1` everywhere.
pub fn jacobian(p: Point3) -> Result<Matrix3> {
    let p = p.checked()?;
    Ok([
        [2.0 * p.y, 2.0 * p.x, -1.0],
        [1.0, 0.0, 0.0],
        [0.0, 1.0, 0.0],
    ])
}

pub fn det3(m: &Matrix3) -> f64 {
    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
        - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
}

fn matmul3(a: &Matrix3, b: &Matrix3) -> Matrix3 {
    let mut out = [[0.0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            out[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    out
}

fn matvec3(m: &Matrix3, v: &[f64; 3]) -> [f64; 3] {
    [0, 1, 2].map(|i| (0..3).map(|k| m[i][k] * v[k]).sum())
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn normalize(v: [f64; 3]) -> [f64; 3] {
    let n = dot(&v, &v).sqrt();
    v.map(|c| c / n)
}

/// `∇I = (2x - 2yz, 2y - 2xz, 2z - 2xy)`.
pub fn invariant_gradient(p: Point3) -> [f64; 3] {
    [
        2.0 * p.x - 2.0 * p.y * p.z,
        2.0 * p.y - 2.0 * p.x * p.z,
        2.0 * p.z - 2.0 * p.x * p.y,
    ]
}

/// Orthonormal basis of the plane orthogonal to `∇I(p)`, built by
/// Gram–Schmidt from the two coordinate axes least aligned with the normal.
pub fn tangent_frame(p: Point3) -> Result<[[f64; 3]; 2]> {
    let g = invariant_gradient(p);
    let norm = dot(&g, &g).sqrt();
    if !(norm > 1e-12 * p.max_abs().max(1.0).powi(2)) {
        return Err(Error::SingularPoint { x: p.x, y: p.y, z: p.z });
    }
    let n = g.map(|c| c / norm);
    let mut axes = [0usize, 1, 2];
    axes.sort_by(|&i, &j| n[i].abs().total_cmp(&n[j].abs()));
    let unit = |i: usize| {
        let mut e = [0.0; 3];
        e[i] = 1.0;
        e
    };
    let e1 = unit(axes[0]);
    let d1 = dot(&e1, &n);
    let t1 = normalize([0, 1, 2].map(|i| e1[i] - d1 * n[i]));
    let e2 = unit(axes[1]);
    let (dn, dt) = (dot(&e2, &n), dot(&e2, &t1));
    let t2 = normalize([0, 1, 2].map(|i| e2[i] - dn * n[i] - dt * t1[i]));
    Ok([t1, t2])
}

/// Return-map derivative along a periodic orbit, compressed to the
/// tangent plane of the invariant surface at the base point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RestrictedReturn {
    pub matrix: Matrix2,
    pub frame: [[f64; 3]; 2],
}

impl RestrictedReturn {
    pub fn determinant(&self) -> f64 {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.matrix[0][0] + self.matrix[1][1]
    }

    /// Largest eigenvalue magnitude.
    pub fn multiplier(&self) -> f64 {
        let (tr, det) = (self.trace(), self.determinant());
        let disc = tr * tr - 4.0 * det;
        if disc < 0.0 {
            return det.abs().sqrt();
        }
        // stable form of the larger root
        let big = 0.5 * (tr + tr.signum() * disc.sqrt());
        if big == 0.0 {
            0.0
        } else {
            big.abs().max((det / big).abs())
        }
    }
}

pub fn restricted_return(p: Point3, n: usize) -> Result<RestrictedReturn> {
    let p = p.checked()?;
    if n < 1 {
        return Err(Error::InvalidArgument("period must be >= 1".into()));
    }
    let mut product: Matrix3 = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    let mut q = p;
    for _ in 0..n {
        product = matmul3(&jacobian(q)?, &product);
        q = step(q);
    }
    if !returns_to(p, q, PERIOD_TOL) {
        return Err(Error::NotPeriodic { n_max: n, tol: PERIOD_TOL });
    }
    let frame = tangent_frame(p)?;
    let images = [matvec3(&product, &frame[0]), matvec3(&product, &frame[1])];
    let mut matrix = [[0.0; 2]; 2];
    for (i, t) in frame.iter().enumerate() {
        for (j, img) in images.iter().enumerate() {
            matrix[i][j] = dot(t, img);
        }
    }
    Ok(RestrictedReturn { matrix, frame })
}

/// Unstable multiplier `‖Dfⁿ_p(E^u_p)‖` of a period-`n` point.
pub fn restricted_multiplier(p: Point3, n: usize) -> Result<f64> {
    Ok(restricted_return(p, n)?.multiplier())
}

/// Larger-magnitude root of `μ + 1/μ = 8 g_p (1 - 2 g_p) + 1`, as a magnitude.
pub fn multiplier_p_closed(a: f64) -> Result<f64> {
    let g = g_p(a)?;
    let t = 8.0 * g * (1.0 - 2.0 * g) + 1.0;
    Ok(-(t - (t * t - 4.0).sqrt()) / 2.0)
}

/// Larger root of `μ + 1/μ = 2 (8 g_q⁴ + 1)`.
pub fn multiplier_q_closed(a: f64) -> Result<f64> {
    let g = g_q(a)?;
    let t = 8.0 * g.powi(4) + 1.0;
    Ok(t + (t * t - 1.0).sqrt())
}

/// `log μ_p(a) / log μ_q(a)`.
pub fn log_ratio(a: f64) -> Result<f64> {
    Ok(multiplier_p_closed(a)?.ln() / multiplier_q_closed(a)?.ln())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PeriodicPointInfo {
    pub a: f64,
    pub lambda: f64,
    pub point: Point3,
    pub period: usize,
    pub multiplier_closed: f64,
    pub multiplier_numeric: f64,
    /// Determinant of the restricted return map; magnitude 1 by area preservation.
    pub restricted_determinant: f64,
    pub tangent_frame: [[f64; 3]; 2],
}

fn analyze(a: f64, point: Point3, closed: f64) -> Result<PeriodicPointInfo> {
    let period = minimal_period(point, DEFAULT_MAX_PERIOD, PERIOD_TOL)?;
    let ret = restricted_return(point, period)?;
    Ok(PeriodicPointInfo {
        a,
        lambda: coupling_for(a),
        point,
        period,
        multiplier_closed: closed,
        multiplier_numeric: ret.multiplier(),
        restricted_determinant: ret.determinant(),
        tangent_frame: ret.frame,
    })
}

pub fn analyze_p(a: f64) -> Result<PeriodicPointInfo> {
    analyze(a, point_p(a)?, multiplier_p_closed(a)?)
}

pub fn analyze_q(a: f64) -> Result<PeriodicPointInfo> {
    analyze(a, point_q(a)?, multiplier_q_closed(a)?)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExceptionalCandidate {
    pub a: f64,
    pub lambda: f64,
    pub log_ratio: f64,
    pub p: u64,
    pub q: u64,
}

/// Grid points of `[a_min, a_max]` whose log-ratio lies within
/// [`EXCEPTIONAL_TOL`] of a rational with denominator at most `qmax`.
pub fn scan_exceptional(
    a_min: f64,
    a_max: f64,
    grid: usize,
    qmax: u64,
) -> Result<Vec<ExceptionalCandidate>> {
    check_parameter(a_min)?;
    check_parameter(a_max)?;
    if !(a_min < a_max) {
        return Err(Error::InvalidArgument(format!(
            "empty parameter range [{a_min}, {a_max}]"
        )));
    }
    if grid < 2 || qmax < 1 {
        return Err(Error::InvalidArgument("grid needs >= 2 points and qmax >= 1".into()));
    }
    let flagged: Vec<Option<ExceptionalCandidate>> = (0..grid)
        .into_par_iter()
        .map(|i| {
            let a = if i + 1 == grid {
                a_max
            } else {
                a_min + (a_max - a_min) * i as f64 / (grid - 1) as f64
            };
            let r = log_ratio(a)?;
            let (p, q) = best_rational(r, qmax);
            Ok(((r - p as f64 / q as f64).abs() <= EXCEPTIONAL_TOL).then_some(
                ExceptionalCandidate {
                    a,
                    lambda: coupling_for(a),
                    log_ratio: r,
                    p,
                    q,
                },
            ))
        })
        .collect::<Result<_>>()?;
    Ok(flagged.into_iter().flatten().collect())
}
