//! Numerical laboratory for the Fibonacci Hamiltonian and its square
//! (two-dimensional, separable) analogue.
//!
//! The spectrum of the one-dimensional operator is approached through the
//! trace map `f(x, y, z) = (2xy - z, x, y)`: an energy `E` lies in the
//! spectrum iff the forward orbit of `((E - λ)/2, E/2, 1)` stays bounded.
//! Band covers built from that recursion feed box-counting and Moran
//! dimension estimates, Minkowski sums give covers of the square operator's
//! spectrum, and a small linear IFS sandbox shows the resonance mechanism
//! that governs dimensions of sums of Cantor sets.

// `!(x > 0.0)` style guards are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dimension;
pub mod error;
pub mod ifs;
pub mod intervals;
pub mod json;
pub mod oracle;
pub mod periodic;
pub mod spectrum;
pub mod sumset;
pub mod tracemap;

pub use error::{Error, Result};
pub use intervals::{Interval, IntervalSet};
pub use tracemap::{Coupling, Point3};
