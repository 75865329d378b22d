//! Proper, agnostic learning of univariate mixtures.
//!
//! The pipeline estimates a piecewise-polynomial density from samples,
//! rescales it to `[-1, 1]`, and searches for mixture parameters whose
//! shape-restricted piecewise-polynomial approximant is closest to the
//! estimate in A_K distance. Gaussian mixtures are the primary family;
//! exponential and Laplace mixtures reuse the same machinery.

pub mod ak;
pub mod density;
pub mod error;
pub mod fit;
pub mod learner;
pub mod mixture;
pub mod numeric;
pub mod poly;
pub mod shape;

pub use error::{EstimateError, FitError, LearnError, MixtureError, PolyError};
pub use poly::{AffineMap, Interval, PiecewisePolynomial, Polynomial};
