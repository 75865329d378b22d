//! Piecewise-polynomial density estimation from samples.
//!
//! The estimator honors the contract "an O(k)-piecewise polynomial of degree
//! O(log 1/ε) close to the sample distribution":
//!
//! 1. equal-mass bins, `c · k · ⌈ln(1/ε)⌉` of them;
//! 2. greedy merging of adjacent bins, each step choosing the merge with the
//!    smallest increase in empirical A_K error (`K = 4k`), until at most
//!    `c·k` bounded pieces remain;
//! 3. per-piece L² projection of the empirical measure onto Legendre
//!    polynomials of degree `⌈2 ln(1/ε)⌉`;
//! 4. negative dips removed by blending the piece toward its mean, which keeps
//!    both the polynomial form and the piece mass.

use serde::{Deserialize, Serialize};

use crate::ak::ak_from_prefix;
use crate::error::EstimateError;
use crate::poly::{sign_change_roots, AffineMap, Interval, PiecewiseJson, PiecewisePolynomial, Polynomial};

/// Default piece-count constant `c`.
pub const PIECE_CONSTANT: usize = 4;

/// Estimator settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityConfig {
    pub k: usize,
    pub eps: f64,
    pub piece_constant: usize,
    /// Polynomial degree per piece; defaults to `⌈2 ln(1/ε)⌉`.
    pub degree: usize,
    /// A_K order used by the merge criterion; defaults to `4k`.
    pub ak_order: usize,
}

impl DensityConfig {
    pub fn new(k: usize, eps: f64) -> Result<Self, EstimateError> {
        if k == 0 {
            return Err(EstimateError::ZeroComponents);
        }
        if !(eps > 0.0 && eps < 1.0) {
            return Err(EstimateError::Accuracy(eps));
        }
        Ok(Self {
            k,
            eps,
            piece_constant: PIECE_CONSTANT,
            degree: ((2.0 * (1.0 / eps).ln()).ceil() as usize).max(1),
            ak_order: 4 * k,
        })
    }

    fn log_ceil(&self) -> usize {
        ((1.0 / self.eps).ln().ceil() as usize).max(1)
    }

    /// Number of initial equal-mass bins.
    pub fn initial_bins(&self) -> usize {
        self.piece_constant * self.k * self.log_ceil()
    }

    /// Largest number of bounded pieces `s = c·k` (the two zero tails are
    /// not counted).
    pub fn max_pieces(&self) -> usize {
        (self.piece_constant * self.k).max(1)
    }

    /// Smallest accepted sample count: `max(100, ⌈k/ε²⌉)`.
    pub fn min_samples(&self) -> usize {
        (self.k as f64 / (self.eps * self.eps)).ceil().max(100.0) as usize
    }
}

/// A density estimate together with the affine map to the original data
/// coordinates: a point `y` of the current frame is the data point
/// `α + (y + 1)(β − α)/2`. A freshly estimated density has `α = -1`, `β = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityEstimate {
    pp: PiecewisePolynomial,
    alpha: f64,
    beta: f64,
}

/// Fit diagnostics of an estimate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateDiagnostics {
    pub initial_bins: usize,
    pub pieces: usize,
    pub degree: usize,
    /// Empirical A_K distance between the estimate and the samples.
    pub empirical_ak: f64,
    /// Pieces whose projection dipped below zero and were blended.
    pub blended_pieces: usize,
}

impl DensityEstimate {
    /// Wraps a piecewise polynomial as an estimate in data coordinates.
    pub fn from_pp(pp: PiecewisePolynomial) -> Self {
        Self {
            pp,
            alpha: -1.0,
            beta: 1.0,
        }
    }

    pub fn with_map(pp: PiecewisePolynomial, alpha: f64, beta: f64) -> Self {
        Self { pp, alpha, beta }
    }

    pub fn pp(&self) -> &PiecewisePolynomial {
        &self.pp
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Map from the current frame to data coordinates.
    pub fn to_data(&self) -> AffineMap {
        AffineMap::between(Interval::new(-1.0, 1.0), Interval::new(self.alpha, self.beta))
    }

    /// The bounded intervals `I_1..I_s`.
    pub fn intervals(&self) -> Vec<Interval> {
        self.pp.intervals()
    }

    /// `s`, the number of bounded pieces.
    pub fn s(&self) -> usize {
        self.pp.piece_count()
    }

    /// Pieces including the two unbounded tails.
    pub fn piece_count(&self) -> usize {
        self.pp.piece_count() + 2
    }

    pub fn degree(&self) -> usize {
        self.pp.max_degree()
    }

    pub fn mass(&self) -> f64 {
        self.pp.total_integral()
    }

    /// Change of variable `y = m(x)` that keeps the estimate a density
    /// (values are divided by the Jacobian `m.scale`).
    pub fn push_forward(&self, m: AffineMap) -> Result<Self, EstimateError> {
        let pp = self.pp.push_forward(m)?.scale(1.0 / m.scale);
        // Data point of new-frame y is to_data(m⁻¹(y)).
        let back = m.inverse();
        let to_data = self.to_data();
        let alpha = to_data.apply(back.apply(-1.0));
        let beta = to_data.apply(back.apply(1.0));
        Ok(Self { pp, alpha, beta })
    }

    /// Rescales so the support is exactly `[-1, 1]`; afterwards `α` and `β`
    /// are the endpoints of the support in data coordinates.
    pub fn rescale_to_unit(&self) -> Result<Self, EstimateError> {
        let support = self.pp.support().ok_or(crate::error::PolyError::EmptySupport)?;
        let unit = Interval::new(-1.0, 1.0);
        let (pp, m) = self.pp.rescale_domain(unit)?;
        let to_data = self.to_data();
        let back = m.inverse();
        Ok(Self {
            pp: pp.scale(support.len() / 2.0),
            alpha: to_data.apply(back.apply(-1.0)),
            beta: to_data.apply(back.apply(1.0)),
        })
    }
}

#[derive(Serialize, Deserialize)]
struct DensityJson {
    #[serde(flatten)]
    pp: PiecewiseJson,
    alpha: f64,
    beta: f64,
}

impl Serialize for DensityEstimate {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        DensityJson {
            pp: PiecewiseJson::from(&self.pp),
            alpha: self.alpha,
            beta: self.beta,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for DensityEstimate {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = DensityJson::deserialize(d)?;
        if !(j.alpha.is_finite() && j.beta.is_finite() && j.alpha < j.beta) {
            return Err(serde::de::Error::custom("alpha and beta must be finite with alpha < beta"));
        }
        let pp = PiecewisePolynomial::try_from(j.pp).map_err(serde::de::Error::custom)?;
        Ok(Self {
            pp,
            alpha: j.alpha,
            beta: j.beta,
        })
    }
}

/// Parses one real per line; blank lines are skipped.
pub fn parse_samples(text: &str) -> Result<Vec<f64>, EstimateError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            l.trim().parse::<f64>().map_err(|_| EstimateError::Parse {
                line: i + 1,
                text: l.trim().to_string(),
            })
        })
        .collect()
}

/// One piece under construction: samples `sorted[start..end]` on `[lo, hi]`.
#[derive(Debug, Clone)]
struct Bin {
    lo: f64,
    hi: f64,
    start: usize,
    end: usize,
}

/// A fitted piece: local polynomial `g` on `[-1, 1]` with `∫ g du` equal to
/// the bin's sample fraction, and the bin's empirical A_K error.
struct Fitted {
    local: Polynomial,
    error: f64,
    blended: bool,
}

struct Estimator<'a> {
    sorted: &'a [f64],
    n: f64,
    degree: usize,
    ak_order: usize,
}

impl Estimator<'_> {
    fn fit(&self, bin: &Bin) -> Fitted {
        let m = self.degree;
        let half = 0.5 * (bin.hi - bin.lo);
        let mid = 0.5 * (bin.hi + bin.lo);
        let xs = &self.sorted[bin.start..bin.end];
        // Legendre moments of the empirical measure in local coordinates.
        let mut moments = vec![0.0; m + 1];
        let mut p = vec![0.0; m + 1];
        for &x in xs {
            let u = ((x - mid) / half).clamp(-1.0, 1.0);
            legendre_values(u, &mut p);
            for (acc, v) in moments.iter_mut().zip(&p) {
                *acc += v;
            }
        }
        let mut coeffs = vec![0.0; m + 1];
        let basis = legendre_monomials(m);
        for j in 0..=m {
            let a = (2.0 * j as f64 + 1.0) / 2.0 * moments[j] / self.n;
            for (c, b) in coeffs.iter_mut().zip(&basis[j]) {
                *c += a * b;
            }
        }
        let mut local = Polynomial::new(coeffs).expect("finite projection");
        let blended = make_nonnegative(&mut local);
        let error = self.empirical_error(&local, xs, mid, half);
        Fitted { local, error, blended }
    }

    /// Empirical A_K distance between the piece's measure and the samples it
    /// holds, restricted to the piece.
    fn empirical_error(&self, local: &Polynomial, xs: &[f64], mid: f64, half: f64) -> f64 {
        let prim = local.antiderivative();
        let base = prim.eval(-1.0);
        let mut s = Vec::with_capacity(2 * xs.len() + 2);
        s.push(0.0);
        for (i, &x) in xs.iter().enumerate() {
            let u = ((x - mid) / half).clamp(-1.0, 1.0);
            let f = prim.eval(u) - base;
            s.push(f - i as f64 / self.n);
            s.push(f - (i + 1) as f64 / self.n);
        }
        s.push(prim.eval(1.0) - base - xs.len() as f64 / self.n);
        ak_from_prefix(&s, self.ak_order).0
    }
}

/// `P_0(u)..P_m(u)` by the three-term recurrence.
fn legendre_values(u: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if out.len() > 1 {
        out[1] = u;
    }
    for j in 2..out.len() {
        let jf = j as f64;
        out[j] = ((2.0 * jf - 1.0) * u * out[j - 1] - (jf - 1.0) * out[j - 2]) / jf;
    }
}

/// Monomial coefficients of `P_0..P_m`.
fn legendre_monomials(m: usize) -> Vec<Vec<f64>> {
    let mut out: Vec<Vec<f64>> = Vec::with_capacity(m + 1);
    out.push(vec![1.0]);
    if m >= 1 {
        out.push(vec![0.0, 1.0]);
    }
    for j in 2..=m {
        let jf = j as f64;
        let mut c = vec![0.0; j + 1];
        for (i, v) in out[j - 1].iter().enumerate() {
            c[i + 1] += (2.0 * jf - 1.0) / jf * v;
        }
        for (i, v) in out[j - 2].iter().enumerate() {
            c[i] -= (jf - 1.0) / jf * v;
        }
        out.push(c);
    }
    out
}

/// Minimum of `p` over `[-1, 1]`, from the endpoints and the sign changes of
/// the derivative.
fn min_on_unit(p: &Polynomial) -> f64 {
    let mut m = p.eval(-1.0).min(p.eval(1.0));
    for r in sign_change_roots(&p.derivative(), -1.0, 1.0, 1e-14) {
        m = m.min(p.eval(r));
    }
    m
}

/// Blends `p` toward its mean `p̄` until it is nonnegative on `[-1, 1]`:
/// `(1 − t)p + t·p̄` keeps `∫ p`. Returns whether blending happened.
fn make_nonnegative(p: &mut Polynomial) -> bool {
    let min = min_on_unit(p);
    if min >= 0.0 {
        return false;
    }
    let mean = 0.5 * p.definite_integral(-1.0, 1.0);
    if mean <= 0.0 {
        *p = Polynomial::zero();
        return true;
    }
    let t = ((-min / (mean - min)) * (1.0 + 1e-9)).min(1.0);
    let mut q = p.scale(1.0 - t);
    q.add_scaled_assign(&Polynomial::constant(mean), t);
    *p = q;
    true
}

/// Estimates a density from samples with the default settings for `k`, `ε`.
pub fn estimate_density(samples: &[f64], k: usize, eps: f64) -> Result<DensityEstimate, EstimateError> {
    estimate_density_with(samples, &DensityConfig::new(k, eps)?).map(|(e, _)| e)
}

/// Estimates a density and reports diagnostics.
pub fn estimate_density_with(
    samples: &[f64],
    cfg: &DensityConfig,
) -> Result<(DensityEstimate, EstimateDiagnostics), EstimateError> {
    if let Some(index) = samples.iter().position(|x| !x.is_finite()) {
        return Err(EstimateError::NonFiniteSample { index });
    }
    if samples.len() < cfg.min_samples() {
        return Err(EstimateError::TooFewSamples {
            needed: cfg.min_samples(),
            got: samples.len(),
        });
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len();
    let (min, max) = (sorted[0], sorted[n - 1]);
    if !(max > min) {
        return Err(EstimateError::DegenerateSamples);
    }
    let iqr = sorted[(3 * n) / 4] - sorted[n / 4];
    let spread = if iqr > 0.0 { iqr } else { max - min };
    let margin = spread / n as f64;
    let (lo, hi) = (min - margin, max + margin);

    let mut bins = initial_bins(&sorted, lo, hi, cfg.initial_bins());
    let initial = bins.len();
    let est = Estimator {
        sorted: &sorted,
        n: n as f64,
        degree: cfg.degree,
        ak_order: cfg.ak_order,
    };
    let mut fits: Vec<Fitted> = bins.iter().map(|b| est.fit(b)).collect();
    let merge = |a: &Bin, b: &Bin| Bin {
        lo: a.lo,
        hi: b.hi,
        start: a.start,
        end: b.end,
    };
    let mut candidates: Vec<Fitted> = bins.windows(2).map(|w| est.fit(&merge(&w[0], &w[1]))).collect();
    while bins.len() > cfg.max_pieces() {
        let (best, _) = candidates
            .iter()
            .enumerate()
            .map(|(i, c)| (i, c.error - fits[i].error - fits[i + 1].error))
            .fold((0, f64::INFINITY), |(bi, bv), (i, v)| if v < bv { (i, v) } else { (bi, bv) });
        let merged = merge(&bins[best], &bins[best + 1]);
        bins.splice(best..best + 2, [merged]);
        let fitted = candidates.remove(best);
        fits.splice(best..best + 2, [fitted]);
        // Candidates touching the merged bin are stale.
        if best > 0 {
            candidates[best - 1] = est.fit(&merge(&bins[best - 1], &bins[best]));
        }
        if best + 1 < bins.len() {
            candidates[best] = est.fit(&merge(&bins[best], &bins[best + 1]));
        }
    }

    let mut breakpoints: Vec<f64> = bins.iter().map(|b| b.lo).collect();
    breakpoints.push(hi);
    // Local g integrates to the bin fraction over du; the density in x is
    // g / (|I|/2).
    let pieces: Vec<Polynomial> = bins
        .iter()
        .zip(&fits)
        .map(|(b, f)| f.local.scale(2.0 / (b.hi - b.lo)))
        .collect();
    let pp = PiecewisePolynomial::new(breakpoints, pieces)?;
    let mass = pp.total_integral();
    let pp = pp.scale(1.0 / mass);
    let empirical_ak = global_empirical_ak(&pp, &sorted, cfg.ak_order);
    let diagnostics = EstimateDiagnostics {
        initial_bins: initial,
        pieces: bins.len(),
        degree: cfg.degree,
        empirical_ak,
        blended_pieces: fits.iter().filter(|f| f.blended).count(),
    };
    Ok((DensityEstimate::from_pp(pp), diagnostics))
}

/// Empirical A_K distance between `pp` and the empirical distribution of
/// `sorted` over the whole line.
pub fn global_empirical_ak(pp: &PiecewisePolynomial, sorted: &[f64], k: usize) -> f64 {
    let n = sorted.len() as f64;
    let support = match pp.support() {
        Some(s) => s,
        None => return 1.0,
    };
    let mut s = Vec::with_capacity(2 * sorted.len() + 2);
    s.push(0.0);
    let mut cdf = 0.0;
    let mut last = support.lo;
    for (i, &x) in sorted.iter().enumerate() {
        let x = x.clamp(support.lo, support.hi);
        cdf += pp.integrate_unchecked(last, x);
        last = x;
        s.push(cdf - i as f64 / n);
        s.push(cdf - (i + 1) as f64 / n);
    }
    cdf += pp.integrate_unchecked(last, support.hi);
    s.push(cdf - 1.0);
    ak_from_prefix(&s, k).0
}

/// Equal-mass bins with edges at midpoints between order statistics; ties
/// never straddle an edge.
fn initial_bins(sorted: &[f64], lo: f64, hi: f64, count: usize) -> Vec<Bin> {
    let n = sorted.len();
    let count = count.clamp(1, n);
    let mut bins = Vec::with_capacity(count);
    let mut start = 0;
    let mut edge = lo;
    for i in 1..count {
        let mut j = (i * n) / count;
        while j < n && sorted[j - 1] == sorted[j] {
            j += 1;
        }
        if j >= n || j <= start {
            continue;
        }
        let next = 0.5 * (sorted[j - 1] + sorted[j]);
        if !(next > edge) || !(next < hi) {
            continue;
        }
        bins.push(Bin {
            lo: edge,
            hi: next,
            start,
            end: j,
        });
        start = j;
        edge = next;
    }
    bins.push(Bin {
        lo: edge,
        hi,
        start,
        end: n,
    });
    bins
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::MixtureParams;

    #[test]
    fn legendre_basis_matches_recurrence() {
        let basis = legendre_monomials(6);
        let mut vals = vec![0.0; 7];
        for u in [-0.9, -0.2, 0.3, 1.0] {
            legendre_values(u, &mut vals);
            for j in 0..=6 {
                let p = Polynomial::new(basis[j].clone()).unwrap();
                assert!((p.eval(u) - vals[j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn blending_keeps_mass_and_removes_dips() {
        let mut p = Polynomial::new(vec![0.2, 0.0, -0.5, 0.0, 0.1]).unwrap();
        let before = p.definite_integral(-1.0, 1.0);
        assert!(make_nonnegative(&mut p));
        assert!((p.definite_integral(-1.0, 1.0) - before).abs() < 1e-14);
        assert!(min_on_unit(&p) >= -1e-12);
    }

    #[test]
    fn all_equal_samples_are_rejected() {
        let xs = vec![1.5; 500];
        assert_eq!(estimate_density(&xs, 1, 0.1), Err(EstimateError::DegenerateSamples));
    }

    #[test]
    fn too_few_and_non_finite() {
        assert!(matches!(
            estimate_density(&[0.0, 1.0], 1, 0.1),
            Err(EstimateError::TooFewSamples { .. })
        ));
        let mut xs: Vec<f64> = (0..200).map(|i| i as f64).collect();
        xs[7] = f64::NAN;
        assert_eq!(estimate_density(&xs, 1, 0.1), Err(EstimateError::NonFiniteSample { index: 7 }));
    }

    #[test]
    fn estimate_is_a_density_with_bounded_pieces() {
        let xs = MixtureParams::single(0.0, 1.0).sample(20_000, 3);
        let cfg = DensityConfig::new(1, 0.1).unwrap();
        let (est, diag) = estimate_density_with(&xs, &cfg).unwrap();
        assert!((est.mass() - 1.0).abs() < 1e-12);
        assert!(est.s() <= cfg.piece_constant * cfg.k);
        assert_eq!(est.piece_count(), est.s() + 2);
        assert!(diag.empirical_ak < 0.1);
        assert!(est.pp().coefficient_bound_violations().is_empty());
    }

    #[test]
    fn rescale_to_unit_preserves_mass_and_records_support() {
        let xs = MixtureParams::single(3.0, 0.5).sample(5_000, 9);
        let est = estimate_density(&xs, 1, 0.1).unwrap();
        let support = est.pp().support().unwrap();
        let unit = est.rescale_to_unit().unwrap();
        assert_eq!(unit.pp().support(), Some(Interval::new(-1.0, 1.0)));
        assert!((unit.alpha() - support.lo).abs() < 1e-12);
        assert!((unit.beta() - support.hi).abs() < 1e-12);
        assert!((unit.mass() - est.mass()).abs() < 1e-12);
        let again = unit.rescale_to_unit().unwrap();
        assert_eq!(again.alpha(), unit.alpha());
        assert_eq!(again.beta(), unit.beta());
    }

    #[test]
    fn json_has_alpha_and_beta() {
        let pp = PiecewisePolynomial::constant(-1.0, 1.0, 0.5).unwrap();
        let est = DensityEstimate::with_map(pp, 2.0, 6.0);
        let s = serde_json::to_string(&est).unwrap();
        assert_eq!(
            s,
            r#"{"breakpoints":[-1.0,1.0],"pieces":[{"coeffs":[0.0]},{"coeffs":[0.5]},{"coeffs":[0.0]}],"alpha":2.0,"beta":6.0}"#
        );
        let back: DensityEstimate = serde_json::from_str(&s).unwrap();
        assert_eq!(back, est);
    }

    #[test]
    fn parse_samples_reports_line() {
        assert_eq!(parse_samples("1.0\n\n-2.5\n").unwrap(), vec![1.0, -2.5]);
        assert!(matches!(parse_samples("1.0\nfoo\n"), Err(EstimateError::Parse { line: 2, .. })));
    }
}
