//! Finite Dirichlet truncations of the Fibonacci Hamiltonian and a Sturm
//! bisection eigensolver. Nothing here touches the trace map, so the
//! eigenvalues serve as an independent check on band covers.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Inverse golden mean `(√5 - 1)/2`.
pub const ALPHA: f64 = 0.618_033_988_749_894_9;

/// Cap on the number of pairwise sums in [`square_eigenvalue_sample`].
pub const SQUARE_SAMPLE_CAP: usize = 4_000_000;

const PIVOT_GUARD: f64 = 1e-300;

/// `ω_n = χ_{[1-α, 1)}(nα + ω_0 mod 1)`, scaled by `λ` on the diagonal.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct FibonacciPotential {
    pub lambda: f64,
    pub omega0: f64,
}

impl FibonacciPotential {
    pub fn new(lambda: f64, omega0: f64) -> Result<Self> {
        ensure_finite(lambda, "coupling")?;
        ensure_finite(omega0, "phase")?;
        if lambda < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "coupling must be non-negative, got {lambda}"
            )));
        }
        if !(0.0..1.0).contains(&omega0) {
            return Err(Error::InvalidArgument(format!(
                "phase omega0 must lie in [0, 1), got {omega0}"
            )));
        }
        Ok(FibonacciPotential { lambda, omega0 })
    }

    pub fn value(&self, n: i64) -> u8 {
        let phase = (n as f64 * ALPHA + self.omega0).rem_euclid(1.0);
        u8::from(phase >= 1.0 - ALPHA)
    }
}

/// `ω_n` for `n_from ..= n_to`.
pub fn potential_values(p: &FibonacciPotential, n_from: i64, n_to: i64) -> Result<Vec<u8>> {
    if n_from > n_to {
        return Err(Error::InvalidArgument(format!(
            "empty site range {n_from}..={n_to}"
        )));
    }
    Ok((n_from..=n_to).map(|n| p.value(n)).collect())
}

/// Symmetric tridiagonal matrix. Truncations of the Hamiltonian have unit
/// off-diagonal; the solver accepts any off-diagonal.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TridiagonalMatrix {
    pub diagonal: Vec<f64>,
    pub offdiagonal: Vec<f64>,
}

impl TridiagonalMatrix {
    pub fn new(diagonal: Vec<f64>, offdiagonal: Vec<f64>) -> Result<Self> {
        if diagonal.is_empty() {
            return Err(Error::InvalidArgument("matrix size must be >= 1".into()));
        }
        if offdiagonal.len() + 1 != diagonal.len() {
            return Err(Error::InvalidArgument(format!(
                "off-diagonal length {} does not match size {}",
                offdiagonal.len(),
                diagonal.len()
            )));
        }
        if diagonal.iter().chain(&offdiagonal).any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("matrix entry"));
        }
        Ok(TridiagonalMatrix {
            diagonal,
            offdiagonal,
        })
    }

    /// Unit off-diagonal with the given diagonal.
    pub fn with_unit_offdiagonal(diagonal: Vec<f64>) -> Result<Self> {
        let n = diagonal.len();
        Self::new(diagonal, vec![1.0; n.saturating_sub(1)])
    }

    /// Dirichlet truncation on sites `1..=n`.
    pub fn fibonacci(potential: &FibonacciPotential, n: usize) -> Result<Self> {
        let diagonal = (1..=n as i64)
            .map(|site| potential.lambda * f64::from(potential.value(site)))
            .collect();
        Self::with_unit_offdiagonal(diagonal)
    }

    pub fn size(&self) -> usize {
        self.diagonal.len()
    }

    /// Gershgorin enclosure of the spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.size();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.offdiagonal[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.offdiagonal[i].abs() } else { 0.0 };
            lo = lo.min(self.diagonal[i] - left - right);
            hi = hi.max(self.diagonal[i] + left + right);
        }
        (lo, hi)
    }

    /// Number of eigenvalues strictly below `t`, from the pivots of the
    /// LDLᵀ factorization of `T - tI`.
    pub fn count_below(&self, t: f64) -> usize {
        let mut count = 0;
        let mut d = 1.0;
        for i in 0..self.size() {
            let coupling = if i > 0 {
                self.offdiagonal[i - 1] * self.offdiagonal[i - 1] / d
            } else {
                0.0
            };
            d = (self.diagonal[i] - t) - coupling;
            if d == 0.0 {
                d = -PIVOT_GUARD;
            }
            if d < 0.0 {
                count += 1;
            }
        }
        count
    }
}

/// All eigenvalues in ascending order, each bracketed to width `tol`.
pub fn eigenvalues(m: &TridiagonalMatrix, tol: f64) -> Result<Vec<f64>> {
    if !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "eigenvalue tolerance must be positive, got {tol}"
        )));
    }
    let n = m.size();
    let (glo, ghi) = m.gershgorin();
    let pad = 1e-9 * (1.0 + glo.abs().max(ghi.abs()));
    let (lo, hi) = (glo - pad, ghi + pad);
    debug_assert_eq!(m.count_below(lo), 0);
    debug_assert_eq!(m.count_below(hi), n);
    (0..n)
        .into_par_iter()
        .map(|index| {
            // smallest t with count_below(t) > index
            let (mut a, mut b) = (lo, hi);
            while b - a > tol {
                let mid = 0.5 * (a + b);
                if mid <= a || mid >= b {
                    return Err(Error::EigenSeparation {
                        index,
                        lo: a,
                        hi: b,
                        tol,
                    });
                }
                if m.count_below(mid) > index {
                    b = mid;
                } else {
                    a = mid;
                }
            }
            Ok(0.5 * (a + b))
        })
        .collect()
}

/// Pairwise sums `e1[i] + e2[j]`, sorted. These are the eigenvalues of the
/// separable two-dimensional operator built from the two factors.
pub fn square_eigenvalue_sample(e1: &[f64], e2: &[f64]) -> Result<Vec<f64>> {
    if e1.is_empty() || e2.is_empty() {
        return Err(Error::InvalidArgument("eigenvalue lists must be non-empty".into()));
    }
    let requested = e1.len() as u128 * e2.len() as u128;
    if requested > SQUARE_SAMPLE_CAP as u128 {
        return Err(Error::SizeCap {
            what: "square eigenvalue sample",
            requested,
            cap: SQUARE_SAMPLE_CAP as u128,
        });
    }
    let mut sums: Vec<f64> = e1
        .par_iter()
        .flat_map_iter(|&a| e2.iter().map(move |&b| a + b))
        .collect();
    sums.par_sort_unstable_by(f64::total_cmp);
    Ok(sums)
}
