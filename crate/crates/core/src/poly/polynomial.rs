//! Dense univariate polynomials with `f64` coefficients.

use serde::{Deserialize, Serialize};

use crate::error::PolyError;

/// Largest degree any operation in this crate accepts.
///
/// Monomial-basis arithmetic beyond this point is not trustworthy in `f64`
/// even on the normalized frame `[-1, 1]`.
pub const MAX_DEGREE: usize = 96;

/// A polynomial `c_0 + c_1 x + ... + c_m x^m`.
///
/// Coefficients are kept trimmed: the highest stored coefficient is nonzero
/// unless the polynomial is identically zero, in which case a single `0.0`
/// is stored.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polynomial {
    coeffs: Vec<f64>,
}

impl Polynomial {
    /// Builds a polynomial, rejecting non-finite coefficients and degrees
    /// above [`MAX_DEGREE`].
    pub fn new(coeffs: Vec<f64>) -> Result<Self, PolyError> {
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(PolyError::NonFinite(*c));
        }
        let p = Self::from_raw(coeffs);
        if p.degree() > MAX_DEGREE {
            return Err(PolyError::DegreeTooLarge {
                degree: p.degree(),
                max: MAX_DEGREE,
            });
        }
        Ok(p)
    }

    /// Internal constructor used by arithmetic that cannot leave the valid
    /// range on its own.
    pub(crate) fn from_raw(mut coeffs: Vec<f64>) -> Self {
        while coeffs.len() > 1 && coeffs[coeffs.len() - 1] == 0.0 {
            coeffs.pop();
        }
        if coeffs.is_empty() {
            coeffs.push(0.0);
        }
        Self { coeffs }
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![0.0] }
    }

    pub fn constant(c: f64) -> Self {
        Self::from_raw(vec![c])
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.len() == 1 && self.coeffs[0] == 0.0
    }

    /// Horner evaluation.
    #[inline]
    pub fn eval(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * x + c)
    }

    pub fn derivative(&self) -> Self {
        if self.coeffs.len() <= 1 {
            return Self::zero();
        }
        Self::from_raw(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(j, &c)| c * j as f64)
                .collect(),
        )
    }

    /// Antiderivative with zero constant term.
    pub fn antiderivative(&self) -> Self {
        let mut out = Vec::with_capacity(self.coeffs.len() + 1);
        out.push(0.0);
        out.extend(
            self.coeffs
                .iter()
                .enumerate()
                .map(|(j, &c)| c / (j as f64 + 1.0)),
        );
        Self::from_raw(out)
    }

    /// `∫_a^b p(x) dx`, evaluated from the antiderivative without
    /// materializing it.
    pub fn definite_integral(&self, a: f64, b: f64) -> f64 {
        let prim = |x: f64| {
            self.coeffs
                .iter()
                .enumerate()
                .rev()
                .fold(0.0, |acc, (j, &c)| acc * x + c / (j as f64 + 1.0))
                * x
        };
        prim(b) - prim(a)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self::from_raw(self.coeffs.iter().map(|c| c * s).collect())
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let mut out = vec![0.0; n];
        for (o, c) in out.iter_mut().zip(&self.coeffs) {
            *o += c;
        }
        for (o, c) in out.iter_mut().zip(&other.coeffs) {
            *o += c;
        }
        Self::from_raw(out)
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add(&other.scale(-1.0))
    }

    /// Adds `s * other` into `self` in place.
    pub fn add_scaled_assign(&mut self, other: &Self, s: f64) {
        if other.coeffs.len() > self.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), 0.0);
        }
        for (o, c) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *o += s * c;
        }
        let trimmed = Self::from_raw(std::mem::take(&mut self.coeffs));
        *self = trimmed;
    }

    pub fn mul(&self, other: &Self) -> Self {
        let mut out = vec![0.0; self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_raw(out)
    }

    /// Returns `q(x) = p(scale * x + shift)`.
    pub fn compose_affine(&self, scale: f64, shift: f64) -> Self {
        if scale == 1.0 && shift == 0.0 {
            return self.clone();
        }
        // Horner in polynomial arithmetic: r <- r * (scale x + shift) + c_j.
        let m = self.coeffs.len();
        let mut r = vec![0.0; m];
        let mut len = 0usize;
        for &c in self.coeffs.iter().rev() {
            // r(x) * (scale x + shift) + c, updated in place from the top.
            if len > 0 {
                r[len] = r[len - 1] * scale;
                for i in (1..len).rev() {
                    r[i] = r[i] * shift + r[i - 1] * scale;
                }
                r[0] *= shift;
            }
            r[0] += c;
            len += 1;
        }
        Self::from_raw(r)
    }

    /// Largest absolute coefficient.
    pub fn max_abs_coeff(&self) -> f64 {
        self.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs()))
    }

    /// Euclidean remainder of `self` divided by `divisor`.
    pub(crate) fn rem(&self, divisor: &Self) -> Self {
        let dn = divisor.degree();
        let lead = divisor.coeffs[dn];
        let mut r = self.coeffs.clone();
        if r.len() <= dn {
            return self.clone();
        }
        for i in (dn..r.len()).rev() {
            let q = r[i] / lead;
            if q != 0.0 {
                for j in 0..=dn {
                    r[i - dn + j] -= q * divisor.coeffs[j];
                }
            }
            r[i] = 0.0;
        }
        r.truncate(dn.max(1));
        Self::from_raw(r)
    }

    /// Sign of the function just to the right of `x`: the sign of the first
    /// nonvanishing derivative at `x`.
    pub fn sign_right_of(&self, x: f64) -> i8 {
        self.sign_near(x, 1.0)
    }

    /// Sign of the function just to the left of `x`.
    pub fn sign_left_of(&self, x: f64) -> i8 {
        self.sign_near(x, -1.0)
    }

    fn sign_near(&self, x: f64, dir: f64) -> i8 {
        let mut d = self.clone();
        let mut flip = 1.0;
        loop {
            let v = d.eval(x) * flip;
            if v > 0.0 {
                return 1;
            }
            if v < 0.0 {
                return -1;
            }
            if d.degree() == 0 {
                return 0;
            }
            d = d.derivative();
            flip *= dir;
        }
    }
}
