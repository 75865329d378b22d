//! Piecewise polynomials with bounded support.
//!
//! Every bounded piece stores its polynomial in local coordinates: the piece
//! `[b_i, b_{i+1})` is mapped affinely onto `[-1, 1]`. The two unbounded tails
//! are identically zero. Evaluation uses the half-open convention, so a
//! breakpoint belongs to the piece on its right.

use serde::{Deserialize, Serialize};

use super::polynomial::{Polynomial, MAX_DEGREE};
use super::roots::sign_change_roots;
use crate::error::PolyError;

/// Closed real interval `[lo, hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn new(lo: f64, hi: f64) -> Self {
        Self { lo, hi }
    }

    pub fn len(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    /// Length of the intersection with `other` (zero when disjoint).
    pub fn overlap(&self, other: &Interval) -> f64 {
        (self.hi.min(other.hi) - self.lo.max(other.lo)).max(0.0)
    }
}

/// The affine map `x ↦ scale * x + shift`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AffineMap {
    pub scale: f64,
    pub shift: f64,
}

impl AffineMap {
    pub const IDENTITY: AffineMap = AffineMap {
        scale: 1.0,
        shift: 0.0,
    };

    /// The map sending `from` onto `to` (orientation preserving).
    pub fn between(from: Interval, to: Interval) -> Self {
        let scale = to.len() / from.len();
        Self {
            scale,
            shift: to.lo - scale * from.lo,
        }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        self.scale * x + self.shift
    }

    pub fn inverse(&self) -> Self {
        Self {
            scale: 1.0 / self.scale,
            shift: -self.shift / self.scale,
        }
    }
}

/// A piecewise polynomial that vanishes outside `[b_1, b_r]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PiecewisePolynomial {
    breakpoints: Vec<f64>,
    /// One polynomial per bounded piece, in local `[-1, 1]` coordinates.
    pieces: Vec<Polynomial>,
}

impl PiecewisePolynomial {
    /// The zero function (no breakpoints).
    pub fn zero() -> Self {
        Self {
            breakpoints: Vec::new(),
            pieces: Vec::new(),
        }
    }

    /// Builds from breakpoints and local-coordinate pieces; `pieces.len()`
    /// must be `breakpoints.len() - 1`.
    pub fn new(breakpoints: Vec<f64>, pieces: Vec<Polynomial>) -> Result<Self, PolyError> {
        if breakpoints.is_empty() && pieces.is_empty() {
            return Ok(Self::zero());
        }
        if breakpoints.len() < 2 || pieces.len() + 1 != breakpoints.len() {
            return Err(PolyError::PieceCount {
                breakpoints: breakpoints.len(),
                pieces: pieces.len(),
            });
        }
        if let Some(b) = breakpoints.iter().find(|b| !b.is_finite()) {
            return Err(PolyError::NonFinite(*b));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PolyError::UnsortedBreakpoints);
        }
        if let Some(p) = pieces.iter().find(|p| p.degree() > MAX_DEGREE) {
            return Err(PolyError::DegreeTooLarge {
                degree: p.degree(),
                max: MAX_DEGREE,
            });
        }
        Ok(Self { breakpoints, pieces })
    }

    /// Builds from pieces given in global coordinates, re-expanding each into
    /// its local frame.
    pub fn from_global(breakpoints: Vec<f64>, global: Vec<Polynomial>) -> Result<Self, PolyError> {
        if breakpoints.len() < 2 || global.len() + 1 != breakpoints.len() {
            return Err(PolyError::PieceCount {
                breakpoints: breakpoints.len(),
                pieces: global.len(),
            });
        }
        let pieces = global
            .iter()
            .zip(breakpoints.windows(2))
            .map(|(p, w)| {
                let to_global = AffineMap::between(Interval::new(-1.0, 1.0), Interval::new(w[0], w[1]));
                p.compose_affine(to_global.scale, to_global.shift)
            })
            .collect();
        Self::new(breakpoints, pieces)
    }

    /// A single polynomial given in global coordinates, restricted to `[lo, hi]`.
    pub fn single_global(lo: f64, hi: f64, p: Polynomial) -> Result<Self, PolyError> {
        Self::from_global(vec![lo, hi], vec![p])
    }

    /// The constant `c` on `[lo, hi]`.
    pub fn constant(lo: f64, hi: f64, c: f64) -> Result<Self, PolyError> {
        Self::new(vec![lo, hi], vec![Polynomial::constant(c)])
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// Local-coordinate polynomials of the bounded pieces.
    pub fn pieces(&self) -> &[Polynomial] {
        &self.pieces
    }

    pub fn piece_count(&self) -> usize {
        self.pieces.len()
    }

    pub fn piece_interval(&self, i: usize) -> Interval {
        Interval::new(self.breakpoints[i], self.breakpoints[i + 1])
    }

    pub fn intervals(&self) -> Vec<Interval> {
        (0..self.pieces.len()).map(|i| self.piece_interval(i)).collect()
    }

    /// Map from global `x` to the local coordinate of piece `i`.
    pub fn local_map(&self, i: usize) -> AffineMap {
        AffineMap::between(self.piece_interval(i), Interval::new(-1.0, 1.0))
    }

    /// Piece `i` as a polynomial in the global coordinate `x`.
    pub fn global_piece(&self, i: usize) -> Polynomial {
        let m = self.local_map(i);
        self.pieces[i].compose_affine(m.scale, m.shift)
    }

    pub fn support(&self) -> Option<Interval> {
        match (self.breakpoints.first(), self.breakpoints.last()) {
            (Some(&a), Some(&b)) => Some(Interval::new(a, b)),
            _ => None,
        }
    }

    pub fn max_degree(&self) -> usize {
        self.pieces.iter().map(Polynomial::degree).max().unwrap_or(0)
    }

    pub fn is_zero(&self) -> bool {
        self.pieces.iter().all(Polynomial::is_zero)
    }

    /// Index of the bounded piece owning `x`, if any.
    pub fn locate(&self, x: f64) -> Option<usize> {
        let n = self.breakpoints.len();
        if n < 2 || x < self.breakpoints[0] || x >= self.breakpoints[n - 1] {
            return None;
        }
        // partition_point gives the count of breakpoints <= x.
        Some(self.breakpoints.partition_point(|&b| b <= x) - 1)
    }

    pub fn evaluate(&self, x: f64) -> f64 {
        match self.locate(x) {
            Some(i) => self.pieces[i].eval(self.local_map(i).apply(x)),
            None => 0.0,
        }
    }

    /// Exact `∫_a^b p(x) dx` from per-piece antiderivatives.
    pub fn integrate(&self, a: f64, b: f64) -> Result<f64, PolyError> {
        if !(a.is_finite() && b.is_finite()) {
            return Err(PolyError::NonFinite(if a.is_finite() { b } else { a }));
        }
        if a > b {
            return Err(PolyError::ReversedBounds { a, b });
        }
        Ok(self.integrate_unchecked(a, b))
    }

    pub(crate) fn integrate_unchecked(&self, a: f64, b: f64) -> f64 {
        let mut total = 0.0;
        for (i, p) in self.pieces.iter().enumerate() {
            let iv = self.piece_interval(i);
            let lo = a.max(iv.lo);
            let hi = b.min(iv.hi);
            if hi <= lo {
                continue;
            }
            let m = self.local_map(i);
            total += p.definite_integral(m.apply(lo), m.apply(hi)) * 0.5 * iv.len();
        }
        total
    }

    /// Integral over the whole support.
    pub fn total_integral(&self) -> f64 {
        self.pieces
            .iter()
            .enumerate()
            .map(|(i, p)| p.definite_integral(-1.0, 1.0) * 0.5 * self.piece_interval(i).len())
            .sum()
    }

    /// Re-expresses piece `i` on the sub-interval `[lo, hi]` in that
    /// sub-interval's own local coordinates.
    pub(crate) fn local_piece_on(&self, i: usize, lo: f64, hi: f64) -> Polynomial {
        let iv = self.piece_interval(i);
        if lo == iv.lo && hi == iv.hi {
            return self.pieces[i].clone();
        }
        // v in [-1,1] on [lo,hi]  ->  x  ->  u on piece i
        let to_x = AffineMap::between(Interval::new(-1.0, 1.0), Interval::new(lo, hi));
        let to_u = self.local_map(i);
        let scale = to_u.scale * to_x.scale;
        let shift = to_u.scale * to_x.shift + to_u.shift;
        self.pieces[i].compose_affine(scale, shift)
    }

    /// Pointwise linear combination `a * self + b * other` on the merged
    /// breakpoint set.
    pub fn linear_combination(&self, a: f64, other: &Self, b: f64) -> Self {
        Self::sum_scaled(&[(self, a), (other, b)])
    }

    /// `Σ c_j f_j` over the union of all breakpoints.
    pub fn sum_scaled(terms: &[(&Self, f64)]) -> Self {
        let mut bps: Vec<f64> = terms
            .iter()
            .flat_map(|(f, _)| f.breakpoints.iter().copied())
            .collect();
        bps.sort_by(f64::total_cmp);
        bps.dedup();
        if bps.len() < 2 {
            return Self::zero();
        }
        let mut pieces = Vec::with_capacity(bps.len() - 1);
        // Per-term cursor over its own pieces.
        let mut cursor = vec![0usize; terms.len()];
        for w in bps.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let mut acc = Polynomial::zero();
            for (t, (f, c)) in terms.iter().enumerate() {
                if *c == 0.0 || f.pieces.is_empty() {
                    continue;
                }
                let j = &mut cursor[t];
                while *j < f.pieces.len() && f.breakpoints[*j + 1] <= lo {
                    *j += 1;
                }
                if *j < f.pieces.len() && f.breakpoints[*j] <= lo && hi <= f.breakpoints[*j + 1] {
                    acc.add_scaled_assign(&f.local_piece_on(*j, lo, hi), *c);
                }
            }
            pieces.push(acc);
        }
        Self {
            breakpoints: bps,
            pieces,
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        self.linear_combination(1.0, other, 1.0)
    }

    /// `self - other` on the union of both breakpoint sets.
    pub fn subtract(&self, other: &Self) -> Self {
        self.linear_combination(1.0, other, -1.0)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            breakpoints: self.breakpoints.clone(),
            pieces: self.pieces.iter().map(|p| p.scale(s)).collect(),
        }
    }

    /// Absolute root tolerance used by [`Self::real_roots`].
    pub fn root_tolerance(&self) -> f64 {
        let width = self.support().map_or(1.0, |s| s.len());
        1e-12 * width
    }

    /// Points where the function changes sign, ascending.
    ///
    /// Interior sign changes of each piece are found by Sturm isolation and
    /// bisection; a jump across a breakpoint from one strict sign to the
    /// other is reported at the breakpoint. Stretches where the function
    /// vanishes identically are transparent.
    pub fn real_roots(&self) -> Vec<f64> {
        self.sign_structure().roots
    }

    pub(crate) fn sign_structure(&self) -> SignStructure {
        let tol = self.root_tolerance();
        let mut roots = Vec::new();
        let mut last_sign: i8 = 0;
        for (i, p) in self.pieces.iter().enumerate() {
            if p.is_zero() {
                continue;
            }
            let iv = self.piece_interval(i);
            let start = p.sign_right_of(-1.0);
            if last_sign != 0 && start != 0 && start != last_sign {
                roots.push(iv.lo);
            }
            let local_tol = 2.0 * tol / iv.len();
            let inner = sign_change_roots(p, -1.0, 1.0, local_tol);
            let to_x = AffineMap::between(Interval::new(-1.0, 1.0), iv);
            roots.extend(inner.iter().map(|&u| to_x.apply(u)));
            let end = p.sign_left_of(1.0);
            if end != 0 {
                last_sign = end;
            }
        }
        SignStructure { roots }
    }

    /// Signed integrals between consecutive sign changes over the support,
    /// as `(lo, hi, integral)`.
    pub fn signed_segments(&self) -> Vec<(f64, f64, f64)> {
        let Some(support) = self.support() else {
            return Vec::new();
        };
        let roots = self.real_roots();
        let mut cuts = Vec::with_capacity(roots.len() + 2);
        cuts.push(support.lo);
        cuts.extend(roots.into_iter().filter(|&r| r > support.lo && r < support.hi));
        cuts.push(support.hi);
        cuts.windows(2)
            .map(|w| (w[0], w[1], self.integrate_unchecked(w[0], w[1])))
            .collect()
    }

    /// Exact L1 norm: absolute integrals summed over sign-constant regions.
    pub fn l1_norm(&self) -> f64 {
        self.signed_segments().iter().map(|s| s.2.abs()).sum()
    }

    /// Maps the support affinely onto `target`; returns the new function
    /// `q(y) = p(m⁻¹(y))` together with the forward map `m` (support ↦
    /// target). Values are carried over unchanged, so mass scales with
    /// `target.len() / support.len()`.
    pub fn rescale_domain(&self, target: Interval) -> Result<(Self, AffineMap), PolyError> {
        let support = self.support().ok_or(PolyError::EmptySupport)?;
        if !(support.len() > 0.0) || !(target.len() > 0.0) {
            return Err(PolyError::EmptySupport);
        }
        let map = AffineMap::between(support, target);
        let mut breakpoints: Vec<f64> = self.breakpoints.iter().map(|&b| map.apply(b)).collect();
        // Pin the endpoints exactly.
        breakpoints[0] = target.lo;
        let n = breakpoints.len();
        breakpoints[n - 1] = target.hi;
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PolyError::UnsortedBreakpoints);
        }
        Ok((
            Self {
                breakpoints,
                pieces: self.pieces.clone(),
            },
            map,
        ))
    }

    /// Applies an orientation-preserving affine change of variable to the
    /// breakpoints: returns `q(y) = p(m⁻¹(y))`.
    pub fn push_forward(&self, map: AffineMap) -> Result<Self, PolyError> {
        if !(map.scale > 0.0) {
            return Err(PolyError::EmptySupport);
        }
        let breakpoints: Vec<f64> = self.breakpoints.iter().map(|&b| map.apply(b)).collect();
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(PolyError::UnsortedBreakpoints);
        }
        Ok(Self {
            breakpoints,
            pieces: self.pieces.clone(),
        })
    }

    /// Checks the coefficient bound for nonnegative polynomials on `[-1, 1]`:
    /// every local coefficient of a piece with local mass `β = ∫_{-1}^{1} p`
    /// satisfies `|c_i| ≤ β (m + 1)² (√2 + 1)^m`. Returns the indices of
    /// violating pieces.
    pub fn coefficient_bound_violations(&self) -> Vec<usize> {
        self.pieces
            .iter()
            .enumerate()
            .filter(|(_, p)| {
                let m = p.degree() as f64;
                let beta = p.definite_integral(-1.0, 1.0).max(0.0);
                let bound = beta * (m + 1.0).powi(2) * (std::f64::consts::SQRT_2 + 1.0).powf(m);
                p.max_abs_coeff() > bound * (1.0 + 1e-9) + 1e-300
            })
            .map(|(i, _)| i)
            .collect()
    }
}

pub(crate) struct SignStructure {
    pub roots: Vec<f64>,
}

/// Serialized form: `{"breakpoints":[...],"pieces":[{"coeffs":[...]}, ...]}`
/// where `pieces` includes the two zero tails, i.e. has
/// `breakpoints.len() + 1` entries.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PiecewiseJson {
    pub breakpoints: Vec<f64>,
    pub pieces: Vec<CoeffsJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoeffsJson {
    pub coeffs: Vec<f64>,
}

impl From<&PiecewisePolynomial> for PiecewiseJson {
    fn from(p: &PiecewisePolynomial) -> Self {
        let zero = CoeffsJson { coeffs: vec![0.0] };
        let mut pieces = Vec::with_capacity(p.pieces.len() + 2);
        pieces.push(zero.clone());
        pieces.extend(p.pieces.iter().map(|q| CoeffsJson {
            coeffs: q.coeffs().to_vec(),
        }));
        if !p.breakpoints.is_empty() {
            pieces.push(zero);
        }
        Self {
            breakpoints: p.breakpoints.clone(),
            pieces,
        }
    }
}

impl TryFrom<PiecewiseJson> for PiecewisePolynomial {
    type Error = PolyError;

    fn try_from(j: PiecewiseJson) -> Result<Self, PolyError> {
        if j.breakpoints.is_empty() {
            return match j.pieces.as_slice() {
                [] => Ok(Self::zero()),
                [only] if only.coeffs.iter().all(|&c| c == 0.0) => Ok(Self::zero()),
                _ => Err(PolyError::PieceCount {
                    breakpoints: 0,
                    pieces: j.pieces.len(),
                }),
            };
        }
        if j.pieces.len() != j.breakpoints.len() + 1 {
            return Err(PolyError::PieceCount {
                breakpoints: j.breakpoints.len(),
                pieces: j.pieces.len(),
            });
        }
        let n = j.pieces.len();
        for tail in [&j.pieces[0], &j.pieces[n - 1]] {
            if tail.coeffs.iter().any(|&c| c != 0.0) {
                return Err(PolyError::NonzeroTail);
            }
        }
        let pieces = j.pieces[1..n - 1]
            .iter()
            .map(|c| Polynomial::new(c.coeffs.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        Self::new(j.breakpoints, pieces)
    }
}

impl Serialize for PiecewisePolynomial {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        PiecewiseJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for PiecewisePolynomial {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = PiecewiseJson::deserialize(d)?;
        Self::try_from(j).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec()).unwrap()
    }

    fn unit_const(lo: f64, hi: f64, c: f64) -> PiecewisePolynomial {
        PiecewisePolynomial::constant(lo, hi, c).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(unit_const(0.0, 1.0, 1.0).evaluate(0.5), 1.0);
        let sq = PiecewisePolynomial::single_global(-1.0, 1.0, poly(&[0.0, 0.0, 1.0])).unwrap();
        assert!((sq.evaluate(0.5) - 0.25).abs() < 1e-15);
        assert_eq!(sq.evaluate(3.0), 0.0);
        assert_eq!(sq.evaluate(-1.5), 0.0);
        // half-open: right endpoint of the support is outside
        assert_eq!(unit_const(0.0, 1.0, 1.0).evaluate(1.0), 0.0);
        assert_eq!(unit_const(0.0, 1.0, 1.0).evaluate(0.0), 1.0);
    }

    #[test]
    fn breakpoint_belongs_to_right_piece() {
        let p = PiecewisePolynomial::new(
            vec![0.0, 1.0, 2.0],
            vec![Polynomial::constant(1.0), Polynomial::constant(-1.0)],
        )
        .unwrap();
        assert_eq!(p.evaluate(1.0), -1.0);
    }

    #[test]
    fn integrate_examples() {
        let sq = PiecewisePolynomial::single_global(0.0, 1.0, poly(&[0.0, 0.0, 1.0])).unwrap();
        assert!((sq.integrate(0.0, 1.0).unwrap() - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(PiecewisePolynomial::zero().integrate(-3.0, 5.0).unwrap(), 0.0);
        assert!((unit_const(0.0, 3.0, 2.0).integrate(1.0, 2.0).unwrap() - 2.0).abs() < 1e-15);
        assert!(sq.integrate(1.0, 0.0).is_err());
    }

    #[test]
    fn subtract_examples() {
        let p = unit_const(0.0, 2.0, 1.0);
        assert!(p.subtract(&p).is_zero());
        let q = unit_const(1.0, 3.0, 1.0);
        let d = p.subtract(&q);
        assert_eq!(d.breakpoints(), &[0.0, 1.0, 2.0, 3.0]);
        assert_eq!(d.evaluate(0.5), 1.0);
        assert_eq!(d.evaluate(1.5), 0.0);
        assert_eq!(d.evaluate(2.5), -1.0);
    }

    #[test]
    fn real_roots_examples() {
        let p = PiecewisePolynomial::single_global(-2.0, 2.0, poly(&[-1.0, 0.0, 1.0])).unwrap();
        let r = p.real_roots();
        assert_eq!(r.len(), 2);
        assert!((r[0] + 1.0).abs() < 1e-11 && (r[1] - 1.0).abs() < 1e-11);

        let pos = PiecewisePolynomial::single_global(-2.0, 2.0, poly(&[1.0, 0.0, 1.0])).unwrap();
        assert!(pos.real_roots().is_empty());

        let jump = PiecewisePolynomial::new(
            vec![0.0, 1.0, 2.0],
            vec![Polynomial::constant(1.0), Polynomial::constant(-1.0)],
        )
        .unwrap();
        assert_eq!(jump.real_roots(), vec![1.0]);
    }

    #[test]
    fn l1_examples() {
        let x = PiecewisePolynomial::single_global(-1.0, 1.0, poly(&[0.0, 1.0])).unwrap();
        assert!((x.l1_norm() - 1.0).abs() < 1e-14);
        let sq = PiecewisePolynomial::single_global(0.0, 2.0, poly(&[0.0, 0.0, 1.0])).unwrap();
        assert!((sq.l1_norm() - sq.integrate(0.0, 2.0).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn rescale_examples() {
        let p = PiecewisePolynomial::single_global(0.0, 2.0, poly(&[1.0, 0.5])).unwrap();
        let (q, m) = p.rescale_domain(Interval::new(-1.0, 1.0)).unwrap();
        assert_eq!(q.support(), Some(Interval::new(-1.0, 1.0)));
        assert_eq!(m.apply(0.0), -1.0);
        assert_eq!(m.apply(2.0), 1.0);
        assert!((q.evaluate(0.0) - p.evaluate(1.0)).abs() < 1e-15);

        let unit = PiecewisePolynomial::single_global(-1.0, 1.0, poly(&[1.0, 0.5])).unwrap();
        let (_, id) = unit.rescale_domain(Interval::new(-1.0, 1.0)).unwrap();
        assert_eq!(id, AffineMap::IDENTITY);

        assert!(PiecewisePolynomial::zero()
            .rescale_domain(Interval::new(-1.0, 1.0))
            .is_err());
    }

    #[test]
    fn json_shape() {
        let p = unit_const(0.0, 1.0, 2.0);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(
            s,
            r#"{"breakpoints":[0.0,1.0],"pieces":[{"coeffs":[0.0]},{"coeffs":[2.0]},{"coeffs":[0.0]}]}"#
        );
        let back: PiecewisePolynomial = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        let bad = r#"{"breakpoints":[0.0,1.0],"pieces":[{"coeffs":[1.0]},{"coeffs":[2.0]},{"coeffs":[0.0]}]}"#;
        assert!(serde_json::from_str::<PiecewisePolynomial>(bad).is_err());
    }

    #[test]
    fn coefficient_bound_on_nonnegative_piece() {
        // (1 - u^2) is nonnegative on [-1,1]
        let p = PiecewisePolynomial::new(vec![0.0, 1.0], vec![poly(&[1.0, 0.0, -1.0])]).unwrap();
        assert!(p.coefficient_bound_violations().is_empty());
    }
}
