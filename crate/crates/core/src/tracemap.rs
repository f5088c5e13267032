//! The Fibonacci trace map, its inverse, the Fricke–Vogt invariant and the
//! spectral line of energies.
//!
//! Every function here is pure. Points entering an operation must be finite;
//! anything else is rejected with [`Error::NonFinite`].

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Orbit iteration stops once any coordinate exceeds this magnitude.
pub const OVERFLOW_GUARD: f64 = 1e150;

/// A point of the trace-map phase space.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Point3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Point3 {
    pub fn new(x: f64, y: f64, z: f64) -> Result<Self> {
        Point3 { x, y, z }.checked()
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn checked(self) -> Result<Self> {
        if self.is_finite() {
            Ok(self)
        } else {
            Err(Error::NonFinite("point coordinates"))
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.x.abs().max(self.y.abs()).max(self.z.abs())
    }

    pub fn distance(&self, other: &Point3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

/// Coupling constant `λ > 0` of the Fibonacci Hamiltonian.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Coupling(f64);

impl Coupling {
    pub fn new(lambda: f64) -> Result<Self> {
        ensure_finite(lambda, "coupling")?;
        if lambda <= 0.0 {
            return Err(Error::InvalidArgument(format!(
                "coupling must be positive, got {lambda}"
            )));
        }
        Ok(Coupling(lambda))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// `f(x, y, z) = (2xy - z, x, y)`.
pub fn apply_map(p: Point3) -> Result<Point3> {
    let p = p.checked()?;
    Ok(step(p))
}

/// `f⁻¹(x, y, z) = (y, z, 2yz - x)`.
pub fn apply_map_inverse(p: Point3) -> Result<Point3> {
    let p = p.checked()?;
    Ok(Point3 {
        x: p.y,
        y: p.z,
        z: 2.0 * p.y * p.z - p.x,
    })
}

#[inline]
pub(crate) fn step(p: Point3) -> Point3 {
    Point3 {
        x: 2.0 * p.x * p.y - p.z,
        y: p.x,
        z: p.y,
    }
}

/// Fricke–Vogt invariant `x² + y² + z² - 2xyz - 1`, preserved by the map.
pub fn invariant(p: Point3) -> Result<f64> {
    let p = p.checked()?;
    Ok(invariant_unchecked(p))
}

#[inline]
pub(crate) fn invariant_unchecked(p: Point3) -> f64 {
    p.x * p.x + p.y * p.y + p.z * p.z - 2.0 * p.x * p.y * p.z - 1.0
}

/// Line of initial conditions `((E - λ)/2, E/2, 1)`. It lies on the level
/// set `{I = λ²/4}`.
pub fn spectral_line(lambda: f64, energy: f64) -> Point3 {
    Point3 {
        x: (energy - lambda) / 2.0,
        y: energy / 2.0,
        z: 1.0,
    }
}

/// A forward orbit, possibly cut short by the overflow guard.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Orbit {
    pub points: Vec<Point3>,
    /// Set when an iterate crossed [`OVERFLOW_GUARD`]; that iterate is not stored.
    pub overflowed: bool,
}

impl Orbit {
    pub fn last(&self) -> Point3 {
        *self.points.last().expect("orbit always holds its initial point")
    }
}

/// `(p, f(p), ..., fⁿ(p))`, truncated at the first iterate beyond the guard.
pub fn orbit(p: Point3, n: usize) -> Result<Orbit> {
    let mut current = p.checked()?;
    let mut points = Vec::with_capacity(n + 1);
    points.push(current);
    for _ in 0..n {
        let next = step(current);
        if !next.is_finite() || next.max_abs() > OVERFLOW_GUARD {
            return Ok(Orbit {
                points,
                overflowed: true,
            });
        }
        points.push(next);
        current = next;
    }
    Ok(Orbit {
        points,
        overflowed: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64, z: f64) -> Point3 {
        Point3::new(x, y, z).unwrap()
    }

    #[test]
    fn map_examples() {
        assert_eq!(apply_map(pt(0.0, 1.0, 0.0)).unwrap(), pt(0.0, 0.0, 1.0));
        assert_eq!(apply_map(pt(1.0, 1.0, 1.0)).unwrap(), pt(1.0, 1.0, 1.0));
        assert_eq!(
            apply_map(pt(-0.5, 1.0, -0.5)).unwrap(),
            pt(-0.5, -0.5, 1.0)
        );
    }

    #[test]
    fn inverse_examples() {
        assert_eq!(
            apply_map_inverse(pt(0.0, 0.0, 1.0)).unwrap(),
            pt(0.0, 1.0, 0.0)
        );
        assert_eq!(
            apply_map_inverse(pt(1.0, 1.0, 1.0)).unwrap(),
            pt(1.0, 1.0, 1.0)
        );
        assert_eq!(
            apply_map_inverse(pt(2.0, 3.0, 4.0)).unwrap(),
            pt(3.0, 4.0, 22.0)
        );
    }

    #[test]
    fn invariant_examples() {
        assert_eq!(invariant(pt(1.0, 1.0, 1.0)).unwrap(), 0.0);
        assert_eq!(invariant(pt(0.0, 1.0, 0.0)).unwrap(), 0.0);
        let q1 = invariant(pt(0.0, 2f64.sqrt(), 0.0)).unwrap();
        assert!((q1 - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spectral_line_examples() {
        assert_eq!(spectral_line(2.0, 0.0), pt(-1.0, 0.0, 1.0));
        assert_eq!(spectral_line(0.0, 2.0), pt(1.0, 1.0, 1.0));
        let p = spectral_line(4.0, 4.0);
        assert_eq!(p, pt(0.0, 2.0, 1.0));
        assert_eq!(invariant(p).unwrap(), 4.0);
    }

    #[test]
    fn non_finite_rejected() {
        let bad = Point3 {
            x: f64::NAN,
            y: 0.0,
            z: 0.0,
        };
        assert!(matches!(apply_map(bad), Err(Error::NonFinite(_))));
        assert!(apply_map_inverse(bad).is_err());
        assert!(invariant(bad).is_err());
        assert!(orbit(bad, 3).is_err());
        assert!(Point3::new(0.0, f64::INFINITY, 0.0).is_err());
        assert!(Coupling::new(0.0).is_err());
        assert!(Coupling::new(-1.0).is_err());
    }

    #[test]
    fn period_six_orbit() {
        // (0,1,0) -> (0,0,1) -> (-1,0,0) -> (0,-1,0) -> (0,0,-1) -> (1,0,0) -> (0,1,0)
        let o = orbit(pt(0.0, 1.0, 0.0), 6).unwrap();
        assert!(!o.overflowed);
        assert_eq!(o.points.len(), 7);
        assert_eq!(o.points[2], pt(-1.0, 0.0, 0.0));
        assert_eq!(o.last(), pt(0.0, 1.0, 0.0));
    }

    #[test]
    fn fixed_point_orbit_is_constant() {
        let o = orbit(pt(1.0, 1.0, 1.0), 100).unwrap();
        assert_eq!(o.points.len(), 101);
        assert!(o.points.iter().all(|p| *p == pt(1.0, 1.0, 1.0)));
    }

    #[test]
    fn off_spectrum_orbit_overflows() {
        let o = orbit(spectral_line(1.0, 100.0), 10).unwrap();
        assert!(o.overflowed);
        assert!(o.points.len() < 11);
        assert!(o.points.iter().all(|p| p.max_abs() <= OVERFLOW_GUARD));
    }
}
