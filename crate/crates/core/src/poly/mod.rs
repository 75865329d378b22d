//! Univariate polynomials and piecewise polynomials with bounded support.

mod piecewise;
mod polynomial;
mod roots;

pub use piecewise::{AffineMap, CoeffsJson, Interval, PiecewiseJson, PiecewisePolynomial};
pub use polynomial::{Polynomial, MAX_DEGREE};
pub use roots::{sign_change_roots, SturmSequence};
