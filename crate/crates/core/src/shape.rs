//! Shape-restricted piecewise polynomials: truncated Taylor approximants of
//! the standard family densities and their affine copies.
//!
//! A [`FamilyShape`] is the approximant of the standard member (location 0,
//! inverse scale 1), stored as a piecewise polynomial in standard units. A
//! component `(w, μ, τ)` is the push-forward under `y ↦ μ + y/τ`, scaled by
//! `wτ`; because pieces are stored in local coordinates, the push-forward only
//! moves breakpoints.

use serde::{Deserialize, Serialize};

use crate::error::{MixtureError, PolyError};
use crate::mixture::{Family, MixtureParams};
use crate::numeric::{integrate_adaptive, std_normal_pdf, INV_SQRT_2PI};
use crate::poly::{AffineMap, Interval, PiecewisePolynomial, Polynomial, MAX_DEGREE};

/// Degree-`d` Maclaurin polynomial of the standard normal density:
/// `Σ_{j ≤ d/2} (1/√(2π)) (-1/2)^j / j! · x^{2j}`.
pub fn taylor_gaussian(d: usize) -> Result<Polynomial, PolyError> {
    if d > MAX_DEGREE {
        return Err(PolyError::DegreeTooLarge {
            degree: d,
            max: MAX_DEGREE,
        });
    }
    let mut coeffs = vec![0.0; d + 1];
    let mut term = INV_SQRT_2PI;
    for j in 0..=d / 2 {
        coeffs[2 * j] = term;
        term *= -0.5 / (j as f64 + 1.0);
    }
    Polynomial::new(coeffs)
}

/// Degree-`d` Maclaurin polynomial of `e^{-y}`.
pub fn taylor_exp_neg(d: usize) -> Result<Polynomial, PolyError> {
    if d > MAX_DEGREE {
        return Err(PolyError::DegreeTooLarge {
            degree: d,
            max: MAX_DEGREE,
        });
    }
    let mut coeffs = Vec::with_capacity(d + 1);
    let mut term = 1.0;
    for j in 0..=d {
        coeffs.push(term);
        term *= -1.0 / (j as f64 + 1.0);
    }
    Polynomial::new(coeffs)
}

/// `∫_{-h}^{h} |N(x) - T_d(x)| dx` by adaptive quadrature.
fn gaussian_taylor_error(t: &Polynomial, h: f64, tol: f64) -> f64 {
    // The error is even and changes sign only near the ends; split for
    // accuracy of the |·| kink.
    let f = |x: f64| (std_normal_pdf(x) - t.eval(x)).abs();
    let cuts = 16;
    (0..cuts)
        .map(|i| {
            let a = h * i as f64 / cuts as f64;
            let b = h * (i + 1) as f64 / cuts as f64;
            integrate_adaptive(f, a, b, tol / (2.0 * cuts as f64))
        })
        .sum::<f64>()
        * 2.0
}

/// Accuracy configuration of the Gaussian approximant `P̃_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShapePolyConfig {
    pub eps: f64,
    /// Multiplier in `d = 2 · quality · ⌈ln(1/ε)⌉`.
    pub taylor_quality: usize,
    pub degree: usize,
    /// Support half-width `h = 2√(ln(1/ε))`.
    pub half_width: f64,
    /// Measured `∫_{-h}^{h} |N - T_d|`.
    pub taylor_error: f64,
}

impl ShapePolyConfig {
    /// Smallest quality whose degree meets `∫_{-h}^{h} |N - T_d| < ε/4`.
    pub fn new(eps: f64) -> Result<Self, PolyError> {
        check_eps(eps)?;
        let mut quality = 1;
        loop {
            let degree = 2 * quality * log_ceil(eps);
            if degree > MAX_DEGREE {
                return Err(PolyError::DegreeTooLarge {
                    degree,
                    max: MAX_DEGREE,
                });
            }
            if let Some(cfg) = Self::try_quality(eps, quality)? {
                return Ok(cfg);
            }
            quality += 1;
        }
    }

    /// Configuration with an explicit quality; fails validation if the
    /// degree is too small.
    pub fn with_quality(eps: f64, quality: usize) -> Result<Self, PolyError> {
        check_eps(eps)?;
        Self::try_quality(eps, quality)?.ok_or(PolyError::DegreeTooLarge {
            degree: 2 * quality * log_ceil(eps),
            max: MAX_DEGREE,
        })
    }

    fn try_quality(eps: f64, quality: usize) -> Result<Option<Self>, PolyError> {
        let degree = 2 * quality * log_ceil(eps);
        let half_width = 2.0 * (1.0 / eps).ln().sqrt();
        let t = taylor_gaussian(degree)?;
        let err = gaussian_taylor_error(&t, half_width, 1e-3 * eps);
        Ok((err < eps / 4.0).then_some(Self {
            eps,
            taylor_quality: quality,
            degree,
            half_width,
            taylor_error: err,
        }))
    }
}

fn check_eps(eps: f64) -> Result<(), PolyError> {
    if eps > 0.0 && eps < 1.0 {
        Ok(())
    } else {
        Err(PolyError::NonFinite(eps))
    }
}

/// `⌈ln(1/ε)⌉`, at least 1.
fn log_ceil(eps: f64) -> usize {
    ((1.0 / eps).ln().ceil() as usize).max(1)
}

/// `P̃_ε`: the Taylor polynomial on `[-h, h]`, zero outside.
pub fn pw_gaussian_approx(cfg: &ShapePolyConfig) -> PiecewisePolynomial {
    let t = taylor_gaussian(cfg.degree).expect("validated degree");
    let h = cfg.half_width;
    PiecewisePolynomial::new(vec![-h, h], vec![t.compose_affine(h, 0.0)]).expect("valid single piece")
}

/// Approximant of a standard family member in standard units.
#[derive(Debug, Clone, PartialEq)]
pub struct FamilyShape {
    family: Family,
    eps: f64,
    degree: usize,
    standard: PiecewisePolynomial,
    /// Measured `‖f - approximant‖₁` for the standard member.
    l1_error: f64,
}

impl FamilyShape {
    pub fn gaussian(cfg: &ShapePolyConfig) -> Self {
        let tail = 2.0 * crate::numeric::std_normal_cdf(-cfg.half_width);
        Self {
            family: Family::Gaussian,
            eps: cfg.eps,
            degree: cfg.degree,
            standard: pw_gaussian_approx(cfg),
            l1_error: cfg.taylor_error + tail,
        }
    }

    /// Shape for `family` at accuracy `eps`, with the smallest admissible
    /// degree.
    pub fn for_family(family: Family, eps: f64) -> Result<Self, PolyError> {
        match family {
            Family::Gaussian => Ok(Self::gaussian(&ShapePolyConfig::new(eps)?)),
            Family::Exponential | Family::Laplace => Self::exponential_type(family, eps),
        }
    }

    /// Exponential and Laplace: Taylor series of `e^{-y}` on `[0, h]` with
    /// `h = ln(4/ε)` (tail mass `ε/4`), degree the smallest with
    /// `∫_0^h |e^{-y} - T_d| < ε/4`. Laplace mirrors it across zero with
    /// half the height.
    fn exponential_type(family: Family, eps: f64) -> Result<Self, PolyError> {
        check_eps(eps)?;
        let h = (4.0 / eps).ln();
        let mut degree = 1;
        let (t, err) = loop {
            let t = taylor_exp_neg(degree)?;
            let err = integrate_adaptive(|y| ((-y).exp() - t.eval(y)).abs(), 0.0, h, 1e-4 * eps);
            if err < eps / 4.0 {
                break (t, err);
            }
            degree += 1;
        };
        let right = t.compose_affine(0.5 * h, 0.5 * h);
        let standard = match family {
            Family::Exponential => PiecewisePolynomial::new(vec![0.0, h], vec![right])?,
            _ => {
                let left = t.compose_affine(-0.5 * h, 0.5 * h).scale(0.5);
                PiecewisePolynomial::new(vec![-h, 0.0, h], vec![left, right.scale(0.5)])?
            }
        };
        Ok(Self {
            family,
            eps,
            degree,
            standard,
            l1_error: err + (-h).exp(),
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// The standard-unit approximant.
    pub fn standard(&self) -> &PiecewisePolynomial {
        &self.standard
    }

    pub fn l1_error(&self) -> f64 {
        self.l1_error
    }

    /// Support of the standard approximant.
    pub fn support(&self) -> Interval {
        self.standard.support().expect("nonempty shape")
    }

    /// Breakpoints per component.
    pub fn breakpoints_per_component(&self) -> usize {
        self.standard.breakpoints().len()
    }

    /// Unweighted component approximant `τ · P̃(τ(x - μ))`.
    pub fn component(&self, mean: f64, precision: f64) -> PiecewisePolynomial {
        self.standard
            .push_forward(AffineMap {
                scale: 1.0 / precision,
                shift: mean,
            })
            .expect("positive precision")
            .scale(precision)
    }
}

fn check_params(theta: &MixtureParams, shape: &FamilyShape) -> Result<(), MixtureError> {
    if theta.family() != shape.family() {
        return Err(MixtureError::Argument(format!(
            "mixture family {} does not match approximant family {}",
            theta.family(),
            shape.family()
        )));
    }
    Ok(())
}

/// `P_{ε,θ}(x) = Σ w_i τ_i P̃(τ_i (x - μ_i))`. Zero-weight components
/// contribute no breakpoints.
pub fn mixture_approx(theta: &MixtureParams, shape: &FamilyShape) -> Result<PiecewisePolynomial, MixtureError> {
    check_params(theta, shape)?;
    let parts: Vec<(PiecewisePolynomial, f64)> = theta
        .components()
        .iter()
        .filter(|c| c.weight > 0.0)
        .map(|c| (shape.standard.push_forward(AffineMap { scale: 1.0 / c.precision, shift: c.mean }).expect("positive precision"), c.weight * c.precision))
        .collect();
    let terms: Vec<(&PiecewisePolynomial, f64)> = parts.iter().map(|(p, c)| (p, *c)).collect();
    Ok(PiecewisePolynomial::sum_scaled(&terms))
}

/// `target − P_{ε,θ}` computed in a single merge pass.
pub fn difference_from_target(
    target: &PiecewisePolynomial,
    components: &[(f64, f64, f64)],
    shape: &FamilyShape,
) -> PiecewisePolynomial {
    let parts: Vec<(PiecewisePolynomial, f64)> = components
        .iter()
        .filter(|(w, _, _)| *w > 0.0)
        .map(|&(w, mean, precision)| {
            (
                shape
                    .standard
                    .push_forward(AffineMap {
                        scale: 1.0 / precision,
                        shift: mean,
                    })
                    .expect("positive precision"),
                -w * precision,
            )
        })
        .collect();
    let mut terms: Vec<(&PiecewisePolynomial, f64)> = Vec::with_capacity(parts.len() + 1);
    terms.push((target, 1.0));
    terms.extend(parts.iter().map(|(p, c)| (p, *c)));
    PiecewisePolynomial::sum_scaled(&terms)
}

/// Raw parameters from interval-rescaled ones: `τ = 2τ̃/|J|`,
/// `μ = mid(J) + μ̃/τ`.
pub fn from_rescaled(mean_r: f64, precision_r: f64, j: Interval) -> (f64, f64) {
    let precision = 2.0 * precision_r / j.len();
    (j.mid() + mean_r / precision, precision)
}

/// Interval-rescaled parameters: `τ̃ = τ|J|/2`, `μ̃ = τ(μ - mid(J))`.
pub fn to_rescaled(mean: f64, precision: f64, j: Interval) -> (f64, f64) {
    (precision * (mean - j.mid()), 0.5 * precision * j.len())
}

/// Approximant of the Gaussian with rescaled parameters `(μ̃, τ̃)` relative
/// to `J` (unit weight).
pub fn rescaled_component(mean_r: f64, precision_r: f64, j: Interval, shape: &FamilyShape) -> Result<PiecewisePolynomial, MixtureError> {
    if !(precision_r > 0.0) || !(j.len() > 0.0) {
        return Err(MixtureError::Argument(format!(
            "rescaled precision {precision_r} and interval length {} must be positive",
            j.len()
        )));
    }
    let (mean, precision) = from_rescaled(mean_r, precision_r, j);
    Ok(shape.component(mean, precision))
}

/// One component in rescaled form.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RescaledComponent {
    pub weight: f64,
    pub mean: f64,
    pub precision: f64,
    /// Index of the associated interval.
    pub interval: usize,
}

/// Mixture parameters expressed relative to the estimate intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledParams {
    pub family: Family,
    pub intervals: Vec<Interval>,
    pub components: Vec<RescaledComponent>,
}

impl RescaledParams {
    /// Raw mixture parameters.
    pub fn to_raw(&self) -> Result<MixtureParams, MixtureError> {
        let comps = self
            .components
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let j = *self.intervals.get(c.interval).ok_or_else(|| MixtureError::Component {
                    index: i,
                    reason: format!("interval index {} out of range", c.interval),
                })?;
                let (mean, precision) = from_rescaled(c.mean, c.precision, j);
                Ok(crate::mixture::Component::new(c.weight, mean, precision))
            })
            .collect::<Result<Vec<_>, MixtureError>>()?;
        MixtureParams::new(self.family, comps)
    }

    /// Rescales `theta` with component `i` associated with `assignment[i]`.
    pub fn from_raw(theta: &MixtureParams, intervals: Vec<Interval>, assignment: &[usize]) -> Result<Self, MixtureError> {
        if assignment.len() != theta.k() || assignment.iter().any(|&a| a >= intervals.len()) {
            return Err(MixtureError::Argument("assignment does not match components and intervals".into()));
        }
        let components = theta
            .components()
            .iter()
            .zip(assignment)
            .map(|(c, &a)| {
                let (mean, precision) = to_rescaled(c.mean, c.precision, intervals[a]);
                RescaledComponent {
                    weight: c.weight,
                    mean,
                    precision,
                    interval: a,
                }
            })
            .collect();
        Ok(Self {
            family: theta.family(),
            intervals,
            components,
        })
    }

    /// Number of components associated with each interval.
    pub fn counts(&self) -> Vec<usize> {
        let mut v = vec![0; self.intervals.len()];
        for c in &self.components {
            if c.interval < v.len() {
                v[c.interval] += 1;
            }
        }
        v
    }
}

/// `P^r_{ε,θ^r,v} = Σ_ℓ Σ_{components on J_ℓ} w · P^r`. The per-interval
/// component counts of `params` must equal the allocation `v`.
pub fn rescaled_mixture_approx(
    params: &RescaledParams,
    allocation: &[usize],
    shape: &FamilyShape,
) -> Result<PiecewisePolynomial, MixtureError> {
    if allocation.len() != params.intervals.len() {
        return Err(MixtureError::Argument(format!(
            "allocation has {} entries for {} intervals",
            allocation.len(),
            params.intervals.len()
        )));
    }
    if params.counts() != allocation {
        return Err(MixtureError::Argument(format!(
            "component counts {:?} do not match allocation {:?}",
            params.counts(),
            allocation
        )));
    }
    mixture_approx(&params.to_raw()?, shape)
}

/// Piecewise-polynomial approximant of one family member with location
/// `mean` and inverse scale `precision`.
pub fn family_approximant(family: Family, mean: f64, precision: f64, eps: f64) -> Result<PiecewisePolynomial, MixtureError> {
    crate::mixture::family_pdf(family, mean, precision, mean)?;
    let shape = FamilyShape::for_family(family, eps).map_err(|e| MixtureError::Argument(e.to_string()))?;
    Ok(shape.component(mean, precision))
}
