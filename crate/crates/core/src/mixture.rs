//! Parametric mixture families: Gaussian (primary), shifted exponential and
//! Laplace.
//!
//! Every family is a location–scale family parametrized by a location `mean`
//! and an inverse scale `precision`:
//!
//! * Gaussian: `N_{μ,τ}(x) = τ/√(2π) · exp(-τ²(x-μ)²/2)`
//! * Exponential: `τ · exp(-τ(x-μ))` for `x ≥ μ`, zero below
//! * Laplace: `τ/2 · exp(-τ|x-μ|)` (scale `b = 1/τ`)

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::ak;
use crate::error::MixtureError;
use crate::numeric::{integrate_adaptive, std_normal_cdf, std_normal_mass, std_normal_pdf, std_normal_quantile};
use crate::poly::Interval;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    #[default]
    Gaussian,
    Exponential,
    Laplace,
}

impl std::fmt::Display for Family {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Family::Gaussian => "gaussian",
            Family::Exponential => "exponential",
            Family::Laplace => "laplace",
        })
    }
}

impl std::str::FromStr for Family {
    type Err = MixtureError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "gaussian" => Ok(Family::Gaussian),
            "exponential" => Ok(Family::Exponential),
            "laplace" => Ok(Family::Laplace),
            other => Err(MixtureError::Argument(format!("unknown family {other:?}"))),
        }
    }
}

impl Family {
    /// Density of the standard member (location 0, precision 1).
    #[inline]
    pub fn standard_pdf(self, y: f64) -> f64 {
        match self {
            Family::Gaussian => std_normal_pdf(y),
            Family::Exponential => {
                if y >= 0.0 {
                    (-y).exp()
                } else {
                    0.0
                }
            }
            Family::Laplace => 0.5 * (-y.abs()).exp(),
        }
    }

    /// CDF of the standard member.
    #[inline]
    pub fn standard_cdf(self, y: f64) -> f64 {
        match self {
            Family::Gaussian => std_normal_cdf(y),
            Family::Exponential => {
                if y <= 0.0 {
                    0.0
                } else {
                    -(-y).exp_m1()
                }
            }
            Family::Laplace => {
                if y < 0.0 {
                    0.5 * y.exp()
                } else {
                    1.0 - 0.5 * (-y).exp()
                }
            }
        }
    }

    /// Mass of the standard member on `[a, b]`, without tail cancellation.
    pub fn standard_mass(self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self {
            Family::Gaussian => std_normal_mass(a, b),
            _ => {
                if a >= 0.0 {
                    let s = |y: f64| 1.0 - self.standard_cdf(y);
                    s(a) - s(b)
                } else {
                    self.standard_cdf(b) - self.standard_cdf(a)
                }
            }
        }
    }

    /// Points (in standard units) where the standard density is not smooth.
    fn kinks(self) -> &'static [f64] {
        match self {
            Family::Gaussian => &[],
            Family::Exponential | Family::Laplace => &[0.0],
        }
    }

    /// Half-width, in standard units, beyond which the tail mass is
    /// negligible (below 1e-20 on each side).
    fn tail_extent(self) -> f64 {
        match self {
            Family::Gaussian => 9.5,
            Family::Exponential | Family::Laplace => 46.0,
        }
    }

    /// Standard-unit support window used for crossing isolation.
    fn window(self) -> (f64, f64) {
        let t = self.tail_extent();
        match self {
            Family::Exponential => (0.0, t),
            _ => (-t, t),
        }
    }
}

/// One mixture component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub weight: f64,
    pub mean: f64,
    pub precision: f64,
}

impl Component {
    pub fn new(weight: f64, mean: f64, precision: f64) -> Self {
        Self {
            weight,
            mean,
            precision,
        }
    }
}

/// Mixture parameters θ = (w, μ, τ) with a family tag.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MixtureParams {
    family: Family,
    components: Vec<Component>,
}

#[derive(Deserialize)]
struct MixtureJson {
    #[serde(default)]
    family: Family,
    components: Vec<Component>,
}

impl<'de> Deserialize<'de> for MixtureParams {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let j = MixtureJson::deserialize(d)?;
        MixtureParams::new(j.family, j.components).map_err(serde::de::Error::custom)
    }
}

/// Tolerance on `Σ w_i = 1`.
pub const WEIGHT_SUM_TOL: f64 = 1e-9;

impl MixtureParams {
    pub fn new(family: Family, components: Vec<Component>) -> Result<Self, MixtureError> {
        if components.is_empty() {
            return Err(MixtureError::Empty);
        }
        for (index, c) in components.iter().enumerate() {
            if !(c.weight.is_finite() && c.mean.is_finite() && c.precision.is_finite()) {
                return Err(MixtureError::Component {
                    index,
                    reason: "non-finite parameter".into(),
                });
            }
            if c.weight < 0.0 {
                return Err(MixtureError::Component {
                    index,
                    reason: format!("negative weight {}", c.weight),
                });
            }
            if c.precision <= 0.0 {
                return Err(MixtureError::Component {
                    index,
                    reason: format!("precision must be positive, got {}", c.precision),
                });
            }
        }
        let sum: f64 = components.iter().map(|c| c.weight).sum();
        if (sum - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(MixtureError::Weights(sum));
        }
        Ok(Self { family, components })
    }

    pub fn gaussian(components: Vec<Component>) -> Result<Self, MixtureError> {
        Self::new(Family::Gaussian, components)
    }

    /// Single Gaussian `N(mean, 1/precision²)`.
    pub fn single(mean: f64, precision: f64) -> Self {
        Self::gaussian(vec![Component::new(1.0, mean, precision)]).expect("valid single component")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// Mixture density `M_θ(x) = Σ w_i τ_i f(τ_i (x - μ_i))`.
    pub fn pdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * c.precision * self.family.standard_pdf(c.precision * (x - c.mean)))
            .sum()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        self.components
            .iter()
            .map(|c| c.weight * self.family.standard_cdf(c.precision * (x - c.mean)))
            .sum()
    }

    /// Mixture mass on `[a, b]`.
    pub fn mass(&self, a: f64, b: f64) -> f64 {
        self.components
            .iter()
            .map(|c| {
                c.weight
                    * self
                        .family
                        .standard_mass(c.precision * (a - c.mean), c.precision * (b - c.mean))
            })
            .sum()
    }

    /// Draws `n` samples: a component by weight, then a draw from it.
    /// Deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        self.sample_with(n, &mut rng)
    }

    pub fn sample_with<R: Rng>(&self, n: usize, rng: &mut R) -> Vec<f64> {
        let cumulative: Vec<f64> = self
            .components
            .iter()
            .scan(0.0, |acc, c| {
                *acc += c.weight;
                Some(*acc)
            })
            .collect();
        let total = *cumulative.last().expect("nonempty");
        let exp1 = Exp::new(1.0).expect("unit rate");
        (0..n)
            .map(|_| {
                let u: f64 = rng.gen::<f64>() * total;
                // Skip zero-weight components even when u lands on a boundary.
                let idx = cumulative
                    .iter()
                    .zip(&self.components)
                    .position(|(&cw, c)| u < cw && c.weight > 0.0)
                    .unwrap_or_else(|| {
                        self.components
                            .iter()
                            .rposition(|c| c.weight > 0.0)
                            .expect("some positive weight")
                    });
                let c = &self.components[idx];
                let y: f64 = match self.family {
                    Family::Gaussian => rng.sample(StandardNormal),
                    Family::Exponential => exp1.sample(rng),
                    Family::Laplace => {
                        let e: f64 = exp1.sample(rng);
                        if rng.gen::<bool>() {
                            e
                        } else {
                            -e
                        }
                    }
                };
                c.mean + y / c.precision
            })
            .collect()
    }

    /// Finite window outside of which every component has negligible mass.
    pub fn window(&self) -> Interval {
        let (lo, hi) = self.components.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), c| {
            let (a, b) = self.family.window();
            (lo.min(c.mean + a / c.precision), hi.max(c.mean + b / c.precision))
        });
        Interval::new(lo, hi)
    }

    /// Sample points at which every component is resolved, used to bracket
    /// sign changes of differences of mixtures.
    fn scan_grid(&self, per_component: usize, into: &mut Vec<f64>) {
        let (a, b) = self.family.window();
        for c in &self.components {
            for i in 0..=per_component {
                let y = a + (b - a) * i as f64 / per_component as f64;
                into.push(c.mean + y / c.precision);
            }
            for &kink in self.family.kinks() {
                into.push(c.mean + kink / c.precision);
            }
        }
    }

    /// Evaluates the difference `M_self - M_other`.
    pub fn diff_pdf(&self, other: &Self, x: f64) -> f64 {
        self.pdf(x) - other.pdf(x)
    }
}

/// Agnostic-sampling noise: a `fraction` of draws comes from the uniform
/// distribution on `[lo, hi]` instead of the mixture.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Contamination {
    pub fraction: f64,
    pub lo: f64,
    pub hi: f64,
}

impl Contamination {
    pub fn new(fraction: f64, lo: f64, hi: f64) -> Result<Self, MixtureError> {
        if !(0.0..1.0).contains(&fraction) {
            return Err(MixtureError::Argument(format!("contamination fraction {fraction} not in [0, 1)")));
        }
        if !(lo.is_finite() && hi.is_finite() && lo < hi) {
            return Err(MixtureError::Argument(format!("contaminant interval [{lo}, {hi}] is empty")));
        }
        Ok(Self { fraction, lo, hi })
    }

    /// Density of `(1 − f)·M + f·U[lo, hi]`.
    pub fn pdf(&self, model: &MixtureParams, x: f64) -> f64 {
        let u = if x >= self.lo && x <= self.hi { 1.0 / (self.hi - self.lo) } else { 0.0 };
        (1.0 - self.fraction) * model.pdf(x) + self.fraction * u
    }

    /// `n` draws from the contaminated density, deterministic in `seed`.
    /// Each draw first decides mixture versus contaminant.
    pub fn sample(&self, model: &MixtureParams, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        (0..n)
            .map(|_| {
                if rng.gen::<f64>() < self.fraction {
                    self.lo + (self.hi - self.lo) * rng.gen::<f64>()
                } else {
                    model.sample_with(1, &mut rng)[0]
                }
            })
            .collect()
    }
}

/// Points where `M_a - M_b` changes sign, ascending.
///
/// Only the union of the two [`MixtureParams::window`]s is searched; beyond
/// it both densities are below any representable mass and their sign pattern
/// carries no information.
///
/// Candidate brackets come from a grid that resolves every component at its
/// own scale (and includes the non-smooth points of the families); each
/// bracket is refined by bisection.
pub fn mixture_crossings(a: &MixtureParams, b: &MixtureParams) -> Vec<f64> {
    let mut grid = Vec::new();
    a.scan_grid(2000, &mut grid);
    b.scan_grid(2000, &mut grid);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let f = |x: f64| a.diff_pdf(b, x);
    let kinks: Vec<f64> = {
        let mut k = Vec::new();
        for m in [a, b] {
            for c in m.components() {
                for &kink in m.family().kinks() {
                    k.push(c.mean + kink / c.precision);
                }
            }
        }
        k
    };
    let mut roots = Vec::new();
    let mut last: Option<(f64, f64)> = None;
    for &x in &grid {
        let v = f(x);
        if v == 0.0 {
            continue;
        }
        if let Some((px, pv)) = last {
            if (pv > 0.0) != (v > 0.0) {
                // A jump discontinuity inside the bracket is a sign change at
                // the jump itself.
                let jump = kinks.iter().copied().find(|&k| k > px && k <= x);
                let r = match jump {
                    Some(k) if (f(k) > 0.0) == (v > 0.0) && (left_limit(&f, k) > 0.0) == (pv > 0.0) => k,
                    _ => bisect_sign(&f, px, x, pv > 0.0),
                };
                roots.push(r);
            }
        }
        last = Some((x, v));
    }
    roots
}

fn left_limit<F: Fn(f64) -> f64>(f: &F, x: f64) -> f64 {
    f(x - 1e-12 * (x.abs() + 1.0))
}

fn bisect_sign<F: Fn(f64) -> f64>(f: &F, mut lo: f64, mut hi: f64, lo_positive: bool) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == lo_positive {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn merged_window(a: &MixtureParams, b: &MixtureParams) -> Interval {
    let wa = a.window();
    let wb = b.window();
    Interval::new(wa.lo.min(wb.lo), wa.hi.max(wb.hi))
}

/// `‖M_a − M_b‖₁` by crossing isolation and adaptive quadrature on every
/// sign-constant region.
pub fn l1_distance(a: &MixtureParams, b: &MixtureParams) -> f64 {
    let w = merged_window(a, b);
    let mut cuts = vec![w.lo];
    cuts.extend(mixture_crossings(a, b).into_iter().filter(|&r| r > w.lo && r < w.hi));
    // Kinks keep the integrand smooth on every panel.
    for m in [a, b] {
        for c in m.components() {
            for &k in m.family().kinks() {
                let x = c.mean + k / c.precision;
                if x > w.lo && x < w.hi {
                    cuts.push(x);
                }
            }
            // Resolve each component's bulk explicitly.
            for s in [-8.0, -4.0, -2.0, -1.0, 0.0, 1.0, 2.0, 4.0, 8.0] {
                let x = c.mean + s / c.precision;
                if x > w.lo && x < w.hi {
                    cuts.push(x);
                }
            }
        }
    }
    cuts.push(w.hi);
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    cuts.windows(2)
        .map(|s| integrate_adaptive(|x| a.diff_pdf(b, x), s[0], s[1], 1e-12).abs())
        .sum()
}

/// Signed integrals of `M_a − M_b` over its sign-constant regions, computed
/// in closed form from the CDFs.
pub fn signed_run_integrals(a: &MixtureParams, b: &MixtureParams) -> Vec<f64> {
    let w = merged_window(a, b);
    let mut cuts = vec![f64::NEG_INFINITY];
    cuts.extend(mixture_crossings(a, b).into_iter().filter(|&r| r > w.lo && r < w.hi));
    cuts.push(f64::INFINITY);
    cuts.windows(2)
        .map(|s| a.mass(s[0], s[1]) - b.mass(s[0], s[1]))
        .collect()
}

/// A_K distance between two analytic mixtures: sign runs of the difference
/// are located by crossing isolation, run masses come from the CDFs.
pub fn ak_distance(a: &MixtureParams, b: &MixtureParams, k_intervals: usize) -> f64 {
    ak::ak_from_run_integrals(&signed_run_integrals(a, b), k_intervals)
}

/// Constants of the admissibility definition.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AdmissibilityConstants {
    /// Mass `W` of the central interval.
    pub weight: f64,
    /// Lower density constant `ω = N(z)`.
    pub omega: f64,
    /// Half-width `z` of the central interval of the standard normal.
    pub z: f64,
}

impl AdmissibilityConstants {
    /// Builds the constants for a central mass `weight ∈ (0, 1)`.
    pub fn with_weight(weight: f64) -> Result<Self, MixtureError> {
        if !(weight > 0.0 && weight < 1.0) {
            return Err(MixtureError::Argument(format!("W must lie in (0,1), got {weight}")));
        }
        let z = std_normal_quantile(0.5 * (1.0 + weight));
        Ok(Self {
            weight,
            omega: std_normal_pdf(z),
            z,
        })
    }
}

impl Default for AdmissibilityConstants {
    /// `W = 55/56`.
    fn default() -> Self {
        Self::with_weight(55.0 / 56.0).expect("55/56 lies in (0,1)")
    }
}

/// The interval centered at `mean` on which `N_{mean,precision}` has mass `W`.
pub fn central_interval(mean: f64, precision: f64, constants: &AdmissibilityConstants) -> Interval {
    let half = constants.z / precision;
    Interval::new(mean - half, mean + half)
}

/// `φ(ε, k) = 32k/(ωε) · m (m+1)² (√2+1)^m` for estimate degree `m`.
pub fn phi_bound(eps: f64, k: usize, m: usize, constants: &AdmissibilityConstants) -> f64 {
    let mf = m as f64;
    32.0 * k as f64 / (constants.omega * eps)
        * mf
        * (mf + 1.0).powi(2)
        * (std::f64::consts::SQRT_2 + 1.0).powf(mf)
}

/// Outcome of an admissibility check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Admissibility {
    pub admissible: bool,
    /// Index (into the interval list) of the witnessing interval.
    pub interval: Option<usize>,
}

/// Admissibility of the Gaussian `N_{mean,precision}` with respect to the
/// estimate intervals (the union of which is `[-1, 1]`): at least half its
/// mass lies in `[-1, 1]`, and some interval `J` has `|J ∩ L| ≥ 1/(8sτ)` and
/// `τ ≤ φ/|J|`. Ties between witnesses go to the largest `|J ∩ L|`.
pub fn gaussian_admissibility(
    mean: f64,
    precision: f64,
    intervals: &[Interval],
    eps: f64,
    k: usize,
    m: usize,
    constants: &AdmissibilityConstants,
) -> Admissibility {
    let not = Admissibility {
        admissible: false,
        interval: None,
    };
    if intervals.is_empty() {
        return not;
    }
    let mass = std_normal_mass(precision * (-1.0 - mean), precision * (1.0 - mean));
    if mass < 0.5 {
        return not;
    }
    let s = intervals.len() as f64;
    let phi = phi_bound(eps, k, m, constants);
    let l = central_interval(mean, precision, constants);
    let mut best: Option<(usize, f64)> = None;
    for (i, j) in intervals.iter().enumerate() {
        let ov = j.overlap(&l);
        if ov >= 1.0 / (8.0 * s * precision) && precision <= phi / j.len() {
            if best.map_or(true, |(_, b)| ov > b) {
                best = Some((i, ov));
            }
        }
    }
    match best {
        Some((i, _)) => Admissibility {
            admissible: true,
            interval: Some(i),
        },
        None => not,
    }
}

/// Admissibility of a mixture component: the Gaussian is admissible and the
/// weight is at least `ε/k`.
pub fn is_admissible(
    component: &Component,
    intervals: &[Interval],
    eps: f64,
    k: usize,
    m: usize,
    constants: &AdmissibilityConstants,
) -> Admissibility {
    if component.weight < eps / k as f64 {
        return Admissibility {
            admissible: false,
            interval: None,
        };
    }
    gaussian_admissibility(component.mean, component.precision, intervals, eps, k, m, constants)
}

/// Density of a single family member with location `mean` and inverse scale
/// `precision` (rate for the exponential, `1/b` for Laplace).
pub fn family_pdf(family: Family, mean: f64, precision: f64, x: f64) -> Result<f64, MixtureError> {
    if !(precision > 0.0 && precision.is_finite() && mean.is_finite()) {
        return Err(MixtureError::Argument(format!(
            "invalid {family} parameters: location {mean}, inverse scale {precision}"
        )));
    }
    Ok(precision * family.standard_pdf(precision * (x - mean)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numeric::INV_SQRT_2PI;

    #[test]
    fn pdf_examples() {
        let m = MixtureParams::single(0.0, 1.0);
        assert!((m.pdf(0.0) - INV_SQRT_2PI).abs() < 1e-15);
        let two = MixtureParams::gaussian(vec![Component::new(0.5, -1.0, 1.0), Component::new(0.5, 1.0, 1.0)]).unwrap();
        let c1 = MixtureParams::single(-1.0, 1.0).pdf(0.0);
        let c2 = MixtureParams::single(1.0, 1.0).pdf(0.0);
        assert!((two.pdf(0.0) - 0.5 * (c1 + c2)).abs() < 1e-15);
    }

    #[test]
    fn contamination_mass_matches_fraction() {
        let m = MixtureParams::single(0.0, 1.0);
        assert!(Contamination::new(1.0, 0.0, 1.0).is_err());
        let none = Contamination::new(0.0, 10.0, 20.0).unwrap();
        assert_eq!(none.sample(&m, 100, 3), {
            let mut rng = ChaCha8Rng::seed_from_u64(3);
            (0..100).map(|_| { let _: f64 = rng.gen(); m.sample_with(1, &mut rng)[0] }).collect::<Vec<_>>()
        });
        let c = Contamination::new(0.1, 10.0, 20.0).unwrap();
        let xs = c.sample(&m, 10_000, 7);
        let frac = xs.iter().filter(|&&x| x >= 10.0).count() as f64 / 1e4;
        // 3 sigma of Binomial(10^4, 0.1) is 0.009.
        assert!((frac - 0.1).abs() <= 0.02, "{frac}");
        assert!((integrate_adaptive(|x| c.pdf(&m, x), -12.0, 10.0, 1e-10) + 1.0 * c.fraction - 1.0).abs() < 1e-6);
    }

    #[test]
    fn validation() {
        assert_eq!(MixtureParams::gaussian(vec![]), Err(MixtureError::Empty));
        assert!(MixtureParams::gaussian(vec![Component::new(0.7, 0.0, 1.0)]).is_err());
        assert!(MixtureParams::gaussian(vec![Component::new(1.0, 0.0, 0.0)]).is_err());
        assert!(MixtureParams::gaussian(vec![Component::new(1.0, 0.0, -1.0)]).is_err());
        assert!(MixtureParams::gaussian(vec![Component::new(1.2, 0.0, 1.0), Component::new(-0.2, 0.0, 1.0)]).is_err());
    }

    #[test]
    fn json_round_trip_and_validation() {
        let s = r#"{"family":"gaussian","components":[{"weight":1.0,"mean":0.5,"precision":2.0}]}"#;
        let m: MixtureParams = serde_json::from_str(s).unwrap();
        assert_eq!(serde_json::to_string(&m).unwrap(), s);
        let bad = r#"{"family":"gaussian","components":[{"weight":0.5,"mean":0.5,"precision":2.0}]}"#;
        assert!(serde_json::from_str::<MixtureParams>(bad).is_err());
    }

    #[test]
    fn sampling_is_deterministic_and_respects_zero_weights() {
        let m = MixtureParams::gaussian(vec![Component::new(1.0, 0.0, 1.0), Component::new(0.0, 100.0, 1.0)]).unwrap();
        let a = m.sample(1000, 7);
        assert_eq!(a, m.sample(1000, 7));
        assert!(a.iter().all(|&x| x < 50.0));
    }

    #[test]
    fn sample_mean_of_narrow_gaussian() {
        let m = MixtureParams::single(5.0, 1000.0);
        let xs = m.sample(10_000, 1);
        let mean = xs.iter().sum::<f64>() / xs.len() as f64;
        // 3σ/√n = 3e-3/100
        assert!((mean - 5.0).abs() < 0.01);
    }

    #[test]
    fn central_interval_examples() {
        let c = AdmissibilityConstants::default();
        let iv = central_interval(0.0, 1.0, &c);
        // Oracle: bisection on the quadrature mass of the standard normal.
        let mass = |z: f64| integrate_adaptive(std_normal_pdf, -z, z, 1e-14);
        let (mut lo, mut hi) = (1.0, 4.0);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if mass(mid) < 55.0 / 56.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((iv.hi - lo).abs() < 1e-9, "z = {} vs {}", iv.hi, lo);
        assert!((std_normal_mass(iv.lo, iv.hi) - 55.0 / 56.0).abs() < 1e-9);
        let iv2 = central_interval(0.0, 2.0, &c);
        assert!((iv2.len() - 0.5 * iv.len()).abs() < 1e-15);
    }

    #[test]
    fn phi_examples() {
        let c = AdmissibilityConstants::default();
        let phi = phi_bound(0.1, 2, 10, &c);
        let expect = 640.0 / c.omega * 10.0 * 121.0 * (1.0 + std::f64::consts::SQRT_2).powi(10);
        assert!((phi / expect - 1.0).abs() < 1e-12);
        assert!((phi_bound(0.1, 4, 10, &c) / phi - 2.0).abs() < 1e-12);
        assert!(phi_bound(0.05, 2, 10, &c) > phi);
        assert!(phi_bound(0.1, 2, 11, &c) > phi);
    }

    #[test]
    fn admissibility_examples() {
        let c = AdmissibilityConstants::default();
        let unit = [Interval::new(-1.0, 1.0)];
        for eps in [0.01, 0.5, 1.0] {
            for k in 1..=3 {
                for m in 1..=20 {
                    let a = is_admissible(&Component::new(1.0, 0.0, 1.0), &unit, eps, k, m, &c);
                    assert!(a.admissible);
                    assert_eq!(a.interval, Some(0));
                }
            }
        }
        assert!(!is_admissible(&Component::new(1.0, 100.0, 1.0), &unit, 0.1, 1, 5, &c).admissible);
        let phi = phi_bound(0.1, 1, 3, &c);
        assert!(!is_admissible(&Component::new(1.0, 0.0, phi), &unit, 0.1, 1, 3, &c).admissible);
    }

    #[test]
    fn family_pdf_examples() {
        assert_eq!(family_pdf(Family::Exponential, 0.0, 1.0, 0.0).unwrap(), 1.0);
        assert_eq!(family_pdf(Family::Laplace, 0.0, 1.0, 0.0).unwrap(), 0.5);
        assert!(family_pdf(Family::Laplace, 0.0, 0.0, 0.0).is_err());
        assert!(family_pdf(Family::Exponential, 0.0, -1.0, 0.0).is_err());
    }

    #[test]
    fn l1_examples() {
        let a = MixtureParams::single(0.0, 1.0);
        assert!(l1_distance(&a, &a) < 1e-15);
        let far = MixtureParams::single(20.0, 1.0);
        assert!(l1_distance(&a, &far) >= 1.999);
        // N(0,1) vs N(0.1,1): 2(2Φ(0.05) - 1)
        let b = MixtureParams::single(0.1, 1.0);
        let exact = 2.0 * (2.0 * std_normal_cdf(0.05) - 1.0);
        assert!((l1_distance(&a, &b) - exact).abs() < 1e-9);
    }
}
