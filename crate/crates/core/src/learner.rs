//! The two learning algorithms.
//!
//! [`learn_well_behaved`] fits all components directly on the rescaled
//! estimate with precisions bounded by `γ`. [`learn_gmm`] drops that bound:
//! every allocation of the `k` components to the estimate intervals is fitted
//! in the interval-rescaled parametrization, the allocation with the smallest
//! feasible threshold wins, and its weights are rounded back onto the simplex.
//! Both search `ν` by doubling from `ε` up to the cap `3`, at which the
//! problem is always feasible.

use serde::{Deserialize, Serialize};

use crate::density::{estimate_density, DensityEstimate};
use crate::error::LearnError;
use crate::fit::{ComponentDomain, FitProblem, SolveConfig, SolveSession, SolverStats};
use crate::mixture::{phi_bound, AdmissibilityConstants, Component, Family, MixtureParams};
use crate::numeric::integrate_adaptive;
use crate::poly::{Interval, PiecewisePolynomial};
use crate::shape::{mixture_approx, FamilyShape, RescaledParams};

/// Largest threshold tried; the problem is always feasible there.
pub const NU_CAP: f64 = 3.0;

/// Constant `C₁` in the solver precision.
pub const LAMBDA_CONSTANT: f64 = 1e-2;

/// Precision floor of the well-behaved domain.
pub const WELL_BEHAVED_PRECISION_FLOOR: f64 = 0.05;

/// Multi-starts per component by default.
pub const STARTS_PER_COMPONENT: usize = 50;

/// Learner settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LearnConfig {
    pub k: usize,
    pub eps: f64,
    /// Failure probability; recorded, not used.
    pub delta: f64,
    /// Precision bound of the well-behaved algorithm.
    pub gamma: Option<f64>,
    pub seed: u64,
    /// Multi-start count per solver session; defaults to `50k`.
    pub starts: usize,
    pub evals_per_start: usize,
}

impl LearnConfig {
    pub fn new(k: usize, eps: f64) -> Result<Self, LearnError> {
        let cfg = Self {
            k,
            eps,
            delta: 0.1,
            gamma: None,
            seed: 0,
            starts: STARTS_PER_COMPONENT * k.max(1),
            evals_per_start: crate::fit::solver::DEFAULT_EVALS_PER_START,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_gamma(mut self, gamma: f64) -> Self {
        self.gamma = Some(gamma);
        self
    }

    pub fn validate(&self) -> Result<(), LearnError> {
        if self.k == 0 {
            return Err(LearnError::Config("k must be at least 1".into()));
        }
        if !(self.eps > 0.0 && self.eps < 1.0) {
            return Err(LearnError::Config(format!("eps must lie in (0,1), got {}", self.eps)));
        }
        if !(self.delta > 0.0 && self.delta < 1.0) {
            return Err(LearnError::Config(format!("delta must lie in (0,1), got {}", self.delta)));
        }
        if let Some(g) = self.gamma {
            if !(g > WELL_BEHAVED_PRECISION_FLOOR && g.is_finite()) {
                return Err(LearnError::Config(format!(
                    "gamma must exceed {WELL_BEHAVED_PRECISION_FLOOR}, got {g}"
                )));
            }
        }
        if self.starts == 0 {
            return Err(LearnError::Config("starts must be at least 1".into()));
        }
        Ok(())
    }

    /// `K = 4k`.
    pub fn ak_order(&self) -> usize {
        4 * self.k
    }
}

/// Number of components on each estimate interval.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Allocation(pub Vec<usize>);

impl Allocation {
    pub fn new(counts: Vec<usize>, k: usize) -> Result<Self, LearnError> {
        if counts.iter().sum::<usize>() != k || counts.is_empty() {
            return Err(LearnError::Config(format!("allocation {counts:?} does not sum to {k}")));
        }
        Ok(Self(counts))
    }

    pub fn counts(&self) -> &[usize] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.iter().sum()
    }

    /// Interval index of each component, in allocation order.
    pub fn assignment(&self) -> Vec<usize> {
        self.0
            .iter()
            .enumerate()
            .flat_map(|(l, &c)| std::iter::repeat(l).take(c))
            .collect()
    }
}

/// All compositions of `k` into `s` nonnegative parts, lexicographically
/// descending (`(k, 0, …, 0)` first).
pub fn enumerate_allocations(k: usize, s: usize) -> Vec<Allocation> {
    fn rec(rest: usize, slots: usize, cur: &mut Vec<usize>, out: &mut Vec<Allocation>) {
        if slots == 1 {
            cur.push(rest);
            out.push(Allocation(cur.clone()));
            cur.pop();
            return;
        }
        for c in (0..=rest).rev() {
            cur.push(c);
            rec(rest - c, slots - 1, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    if s == 0 {
        return out;
    }
    rec(k, s, &mut Vec::with_capacity(s), &mut out);
    out
}

/// Solver precision and norm bound of the general algorithm:
/// `λ = min(C₁(ε/(φk))², 1/(16s), ε/(4k))`, `ψ = 6ksφ/ω + 3kφ/2 + 1`.
pub fn general_solver_bounds(eps: f64, k: usize, s: usize, phi: f64, omega: f64) -> (f64, f64) {
    let kf = k as f64;
    let sf = s as f64;
    let lambda = (LAMBDA_CONSTANT * (eps / (phi * kf)).powi(2))
        .min(1.0 / (16.0 * sf))
        .min(eps / (4.0 * kf));
    let psi = 6.0 * kf * sf * phi / omega + 1.5 * kf * phi + 1.0;
    (lambda, psi)
}

/// Solver precision and norm bound of the well-behaved algorithm:
/// `λ = C₁(ε/k)²/γ`, `ψ = 3kγ`.
pub fn well_behaved_solver_bounds(eps: f64, k: usize, gamma: f64) -> (f64, f64) {
    let kf = k as f64;
    (LAMBDA_CONSTANT * (eps / kf).powi(2) / gamma, 3.0 * kf * gamma)
}

/// Solver diagnostics of a run.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverReport {
    pub lambda: f64,
    pub psi: f64,
    pub slack: f64,
    /// Doublings of `ν` in the winning loop.
    pub doublings: usize,
    /// Largest number of doublings over all loops run.
    pub max_doublings: usize,
    pub allocations_total: usize,
    pub allocations_fitted: usize,
    pub starts_run: usize,
    pub evaluations: usize,
    /// Whether every weight was zeroed and a single component was refit.
    pub fallback: bool,
}

/// Result of a learning run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub model: MixtureParams,
    pub nu: f64,
    pub allocation: Vec<usize>,
    pub l1_to_estimate: f64,
    pub ak_to_estimate: f64,
    pub solver: SolverReport,
}

/// Result of a `ν`-doubling loop on one problem.
#[derive(Debug, Clone, PartialEq)]
pub struct DoublingFit {
    /// Parameters in the unit frame, as returned by the solver.
    pub theta: Vec<Component>,
    pub nu: f64,
    pub doublings: usize,
    pub stats: SolverStats,
}

/// Doubles `ν` from `ε` (capped at `3`) until the problem is feasible.
/// Thresholds `≥ limit` are not tried; `None` means none below `limit` was
/// feasible.
pub fn doubling_search(
    problem: &FitProblem,
    cfg: SolveConfig,
    eps: f64,
    limit: f64,
) -> Result<(Option<DoublingFit>, SolverStats, usize), LearnError> {
    let mut session = SolveSession::new(problem, cfg)?;
    let mut nu = eps;
    let mut doublings = 0;
    loop {
        if nu >= limit {
            return Ok((None, session.stats(), doublings));
        }
        if let Some(sol) = session.solve(nu)? {
            let stats = session.stats();
            return Ok((
                Some(DoublingFit {
                    theta: sol.theta,
                    nu,
                    doublings,
                    stats,
                }),
                stats,
                doublings,
            ));
        }
        if nu >= NU_CAP {
            return Err(LearnError::Infeasible);
        }
        nu = (2.0 * nu).min(NU_CAP);
        doublings += 1;
    }
}

/// Fit of one allocation in rescaled form.
#[derive(Debug, Clone, PartialEq)]
pub struct AllocationFit {
    pub params: RescaledParams,
    pub nu: f64,
    pub doublings: usize,
    pub stats: SolverStats,
    pub lambda: f64,
    pub psi: f64,
    pub slack: f64,
}

/// Everything `find_fit_given_allocation` needs besides the allocation.
#[derive(Debug, Clone)]
pub struct GeneralContext {
    pub estimate: DensityEstimate,
    pub intervals: Vec<Interval>,
    pub shape: FamilyShape,
    pub phi: f64,
    pub constants: AdmissibilityConstants,
    pub cfg: LearnConfig,
}

impl GeneralContext {
    /// `p_dens` must already live on `[-1, 1]`.
    pub fn new(estimate: DensityEstimate, family: Family, cfg: LearnConfig) -> Result<Self, LearnError> {
        cfg.validate()?;
        let constants = AdmissibilityConstants::default();
        let shape = FamilyShape::for_family(family, cfg.eps)?;
        let phi = phi_bound(cfg.eps, cfg.k, estimate.degree().max(1), &constants);
        let intervals = estimate.intervals();
        Ok(Self {
            estimate,
            intervals,
            shape,
            phi,
            constants,
            cfg,
        })
    }

    pub fn s(&self) -> usize {
        self.intervals.len()
    }

    /// Domain of the rescaled problem for `v`: per component
    /// `√(2π)ω/(16s) ≤ τ̃ ≤ φ/2`, `|μ̃| ≤ 2sφ/ω`; weights `≥ ε/(2k)`.
    pub fn problem(&self, v: &Allocation) -> Result<FitProblem, LearnError> {
        let s = self.s() as f64;
        let omega = self.constants.omega;
        let tr_lo = (2.0 * std::f64::consts::PI).sqrt() * omega / (16.0 * s);
        let tr_hi = self.phi / 2.0;
        let mr = 2.0 * s * self.phi / omega;
        let comps = v
            .assignment()
            .into_iter()
            .map(|l| ComponentDomain::rescaled(self.intervals[l], tr_lo, tr_hi, mr))
            .collect();
        Ok(FitProblem::new(
            self.estimate.pp().clone(),
            self.shape.clone(),
            self.cfg.ak_order(),
            comps,
            self.cfg.eps / (2.0 * self.cfg.k as f64),
        )?)
    }

    pub fn solver_config(&self, index: usize) -> Result<SolveConfig, LearnError> {
        let (lambda, psi) = general_solver_bounds(self.cfg.eps, self.cfg.k, self.s(), self.phi, self.constants.omega);
        let mut sc = SolveConfig::new(lambda, psi, self.cfg.starts, mix_seed(self.cfg.seed, index as u64))?;
        sc.evals_per_start = self.cfg.evals_per_start;
        Ok(sc)
    }
}

fn mix_seed(seed: u64, index: u64) -> u64 {
    seed ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Smallest doubling `ν` at which allocation `v` is feasible, with the
/// witness in rescaled form; only thresholds below `limit` are tried.
pub fn find_fit_given_allocation(
    ctx: &GeneralContext,
    v: &Allocation,
    index: usize,
    limit: f64,
) -> Result<(Option<AllocationFit>, SolverStats, usize), LearnError> {
    if v.counts().len() != ctx.s() || v.k() != ctx.cfg.k {
        return Err(LearnError::Config(format!(
            "allocation {:?} does not match {} intervals and k = {}",
            v.counts(),
            ctx.s(),
            ctx.cfg.k
        )));
    }
    let problem = ctx.problem(v)?;
    let sc = ctx.solver_config(index)?;
    let slack = problem.lipschitz() * sc.lambda;
    let (fit, stats, doublings) = doubling_search(&problem, sc, ctx.cfg.eps, limit)?;
    let Some(fit) = fit else {
        return Ok((None, stats, doublings));
    };
    let theta = MixtureParams::new(ctx.shape.family(), fit.theta.clone())?;
    let params = RescaledParams::from_raw(&theta, ctx.intervals.clone(), &v.assignment())?;
    Ok((
        Some(AllocationFit {
            params,
            nu: fit.nu,
            doublings: fit.doublings,
            stats: fit.stats,
            lambda: sc.lambda,
            psi: sc.psi,
            slack,
        }),
        stats,
        doublings,
    ))
}

/// Weight rounding of the general algorithm: `w_i ← w_i − ε/(2k)` for
/// `i < k` (clamped to `[0, 1]`), then `w_k ← 1 − Σ_{i<k} w_i`.
pub fn round_weights(weights: &[f64], eps: f64) -> Vec<f64> {
    let k = weights.len();
    let shift = eps / (2.0 * k as f64);
    let mut out: Vec<f64> = weights[..k - 1].iter().map(|w| (w - shift).clamp(0.0, 1.0)).collect();
    let head: f64 = out.iter().sum();
    if head > 1.0 {
        for w in &mut out {
            *w /= head;
        }
    }
    let head: f64 = out.iter().sum();
    out.push((1.0 - head).max(0.0));
    out
}

/// `μ' = α + (μ + 1)(β − α)/2`, `τ' = 2τ/(β − α)`.
pub fn descale(theta: &[Component], alpha: f64, beta: f64) -> Vec<Component> {
    let half = 0.5 * (beta - alpha);
    theta
        .iter()
        .map(|c| Component::new(c.weight, alpha + (c.mean + 1.0) * half, c.precision / half))
        .collect()
}

/// `‖M_θ − p‖₁` by adaptive quadrature between the breakpoints of `p` and
/// the characteristic points of `M_θ`.
pub fn l1_mixture_to_pp(theta: &MixtureParams, p: &PiecewisePolynomial) -> f64 {
    let mut cuts: Vec<f64> = p.breakpoints().to_vec();
    let w = theta.window();
    cuts.push(w.lo);
    cuts.push(w.hi);
    for c in theta.components() {
        for d in [0.0, 1.0, 2.0, 4.0, 8.0] {
            cuts.push(c.mean - d / c.precision);
            cuts.push(c.mean + d / c.precision);
        }
    }
    cuts.retain(|x| x.is_finite());
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();
    let f = |x: f64| (theta.pdf(x) - p.evaluate(x)).abs();
    let inner: f64 = cuts.windows(2).map(|c| integrate_adaptive(f, c[0], c[1], 1e-11)).sum();
    let lo = cuts[0];
    let hi = cuts[cuts.len() - 1];
    inner + theta.cdf(lo) + (1.0 - theta.cdf(hi))
}

fn validate_samples_for(cfg: &LearnConfig, family: Family) -> Result<(), LearnError> {
    cfg.validate()?;
    if cfg.gamma.is_some() && family != Family::Gaussian {
        return Err(LearnError::Config("the well-behaved algorithm is Gaussian only".into()));
    }
    Ok(())
}

/// Turns a unit-frame solver output into the final mixture: components with
/// nonpositive precision lose their weight, weights are renormalized, and
/// parameters are mapped back to data coordinates. `None` if every weight
/// vanished.
fn finish(theta: &[Component], unit: &DensityEstimate, family: Family) -> Result<Option<MixtureParams>, LearnError> {
    let fixed: Vec<Component> = theta
        .iter()
        .map(|c| {
            if c.precision <= 0.0 {
                Component::new(0.0, c.mean, 1.0)
            } else {
                *c
            }
        })
        .collect();
    let total: f64 = fixed.iter().map(|c| c.weight).sum();
    if !(total > 0.0) {
        return Ok(None);
    }
    let mut normalized: Vec<Component> = fixed
        .iter()
        .map(|c| Component::new(c.weight / total, c.mean, c.precision))
        .collect();
    let drift: f64 = 1.0 - normalized.iter().map(|c| c.weight).sum::<f64>();
    if let Some(c) = normalized.iter_mut().max_by(|a, b| a.weight.total_cmp(&b.weight)) {
        c.weight += drift;
    }
    let data = descale(&normalized, unit.alpha(), unit.beta());
    Ok(Some(MixtureParams::new(family, data)?))
}

fn unit_frame(theta: &MixtureParams, unit: &DensityEstimate) -> MixtureParams {
    let half = 0.5 * (unit.beta() - unit.alpha());
    let comps = theta
        .components()
        .iter()
        .map(|c| Component::new(c.weight, (c.mean - unit.alpha()) / half - 1.0, c.precision * half))
        .collect();
    MixtureParams::new(theta.family(), comps).expect("affine image of a valid mixture")
}

fn report(
    model: MixtureParams,
    nu: f64,
    allocation: Vec<usize>,
    unit: &DensityEstimate,
    shape: &FamilyShape,
    ak_order: usize,
    solver: SolverReport,
) -> Result<FitReport, LearnError> {
    let in_unit = unit_frame(&model, unit);
    let approx = mixture_approx(&in_unit, shape)?;
    let ak_to_estimate = crate::ak::ak_distance(unit.pp(), &approx, ak_order);
    let l1_to_estimate = l1_mixture_to_pp(&in_unit, unit.pp());
    Ok(FitReport {
        model,
        nu,
        allocation,
        l1_to_estimate,
        ak_to_estimate,
        solver,
    })
}

/// Best single component on the well-behaved domain; used when the solver
/// output loses all its weight.
fn single_refit(unit: &DensityEstimate, shape: &FamilyShape, cfg: &LearnConfig, gamma: f64) -> Result<(DoublingFit, SolveConfig), LearnError> {
    let problem = FitProblem::new(
        unit.pp().clone(),
        shape.clone(),
        cfg.ak_order(),
        vec![ComponentDomain::well_behaved(WELL_BEHAVED_PRECISION_FLOOR, gamma)],
        0.0,
    )?;
    let (lambda, psi) = well_behaved_solver_bounds(cfg.eps, 1, gamma);
    let mut sc = SolveConfig::new(lambda, psi, cfg.starts, mix_seed(cfg.seed, u64::MAX))?;
    sc.evals_per_start = cfg.evals_per_start;
    let (fit, _, _) = doubling_search(&problem, sc, cfg.eps, f64::INFINITY)?;
    Ok((fit.ok_or(LearnError::Infeasible)?, sc))
}

/// Learning with all precisions bounded by `γ` on the rescaled estimate.
pub fn learn_well_behaved(samples: &[f64], cfg: &LearnConfig) -> Result<FitReport, LearnError> {
    validate_samples_for(cfg, Family::Gaussian)?;
    let gamma = cfg
        .gamma
        .ok_or_else(|| LearnError::Config("the well-behaved algorithm needs gamma".into()))?;
    let unit = estimate_density(samples, cfg.k, cfg.eps)?.rescale_to_unit()?;
    let shape = FamilyShape::for_family(Family::Gaussian, cfg.eps)?;
    let problem = FitProblem::new(
        unit.pp().clone(),
        shape.clone(),
        cfg.ak_order(),
        vec![ComponentDomain::well_behaved(WELL_BEHAVED_PRECISION_FLOOR, gamma); cfg.k],
        0.0,
    )?;
    let (lambda, psi) = well_behaved_solver_bounds(cfg.eps, cfg.k, gamma);
    let mut sc = SolveConfig::new(lambda, psi, cfg.starts, cfg.seed)?;
    sc.evals_per_start = cfg.evals_per_start;
    let (fit, stats, _) = doubling_search(&problem, sc, cfg.eps, f64::INFINITY)?;
    let fit = fit.ok_or(LearnError::Infeasible)?;
    let mut solver = SolverReport {
        lambda,
        psi,
        slack: problem.lipschitz() * lambda,
        doublings: fit.doublings,
        max_doublings: fit.doublings,
        allocations_total: 1,
        allocations_fitted: 1,
        starts_run: stats.starts_run,
        evaluations: stats.evaluations,
        fallback: false,
    };
    let model = match finish(&fit.theta, &unit, Family::Gaussian)? {
        Some(m) => m,
        None => {
            let (single, _) = single_refit(&unit, &shape, cfg, gamma)?;
            solver.fallback = true;
            solver.evaluations += single.stats.evaluations;
            finish(&single.theta, &unit, Family::Gaussian)?.ok_or(LearnError::Infeasible)?
        }
    };
    report(model, fit.nu, Vec::new(), &unit, &shape, cfg.ak_order(), solver)
}

/// Proper agnostic learning of a `k`-mixture of `family`.
pub fn learn_family(samples: &[f64], cfg: &LearnConfig, family: Family) -> Result<FitReport, LearnError> {
    validate_samples_for(cfg, family)?;
    let unit = estimate_density(samples, cfg.k, cfg.eps)?.rescale_to_unit()?;
    learn_from_estimate(unit, cfg, family)
}

/// Proper agnostic learning of a `k`-GMM.
pub fn learn_gmm(samples: &[f64], cfg: &LearnConfig) -> Result<FitReport, LearnError> {
    learn_family(samples, cfg, Family::Gaussian)
}

/// The general algorithm on an estimate already rescaled to `[-1, 1]`.
pub fn learn_from_estimate(unit: DensityEstimate, cfg: &LearnConfig, family: Family) -> Result<FitReport, LearnError> {
    let ctx = GeneralContext::new(unit, family, *cfg)?;
    let allocations = enumerate_allocations(cfg.k, ctx.s());
    let mut best: Option<(usize, AllocationFit)> = None;
    let mut solver = SolverReport {
        allocations_total: allocations.len(),
        ..SolverReport::default()
    };
    for (i, v) in allocations.iter().enumerate() {
        // Ties go to the earlier allocation, so only strictly smaller
        // thresholds can change the winner.
        let limit = best.as_ref().map_or(f64::INFINITY, |(_, b)| b.nu);
        if limit <= cfg.eps {
            break;
        }
        let (fit, stats, doublings) = find_fit_given_allocation(&ctx, v, i, limit)?;
        solver.allocations_fitted += 1;
        solver.starts_run += stats.starts_run;
        solver.evaluations += stats.evaluations;
        solver.max_doublings = solver.max_doublings.max(doublings);
        if let Some(fit) = fit {
            best = Some((i, fit));
        }
    }
    let (index, fit) = best.ok_or(LearnError::Infeasible)?;
    solver.lambda = fit.lambda;
    solver.psi = fit.psi;
    solver.slack = fit.slack;
    solver.doublings = fit.doublings;
    let raw = fit.params.to_raw()?;
    let weights = round_weights(&raw.components().iter().map(|c| c.weight).collect::<Vec<_>>(), cfg.eps);
    let rounded: Vec<Component> = raw
        .components()
        .iter()
        .zip(&weights)
        .map(|(c, &w)| Component::new(w, c.mean, c.precision))
        .collect();
    let model = match finish(&rounded, &ctx.estimate, family)? {
        Some(m) => m,
        None => {
            let (single, _) = single_refit(&ctx.estimate, &ctx.shape, cfg, ctx.phi)?;
            solver.fallback = true;
            solver.evaluations += single.stats.evaluations;
            finish(&single.theta, &ctx.estimate, family)?.ok_or(LearnError::Infeasible)?
        }
    };
    report(
        model,
        fit.nu,
        allocations[index].counts().to_vec(),
        &ctx.estimate,
        &ctx.shape,
        cfg.ak_order(),
        solver,
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: usize, r: usize) -> usize {
        (0..r).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn allocation_counts() {
        assert_eq!(enumerate_allocations(3, 1).len(), 1);
        assert_eq!(enumerate_allocations(1, 3).len(), 3);
        assert_eq!(enumerate_allocations(3, 3).len(), 10);
        for k in 1..5 {
            for s in 1..6 {
                let all = enumerate_allocations(k, s);
                assert_eq!(all.len(), binomial(k + s - 1, s - 1));
                assert!(all.iter().all(|a| a.k() == k && a.counts().len() == s));
                let mut dedup = all.clone();
                dedup.dedup();
                assert_eq!(dedup.len(), all.len());
            }
        }
        assert_eq!(enumerate_allocations(2, 2)[0].counts(), &[2, 0]);
        assert_eq!(Allocation(vec![0, 2, 1]).assignment(), vec![1, 1, 2]);
    }

    #[test]
    fn lambda_is_min_of_three_terms() {
        let c = AdmissibilityConstants::default();
        let phi = phi_bound(0.1, 2, 5, &c);
        let (lambda, psi) = general_solver_bounds(0.1, 2, 2, phi, c.omega);
        let terms = [1e-2 * (0.1 / (phi * 2.0)).powi(2), 1.0 / 32.0, 0.1 / 8.0];
        assert_eq!(lambda, terms.iter().cloned().fold(f64::INFINITY, f64::min));
        assert_eq!(psi, 24.0 * phi / c.omega + 3.0 * phi + 1.0);
    }

    #[test]
    fn rounding_lands_on_the_simplex() {
        let w = round_weights(&[0.3, 0.5, 0.2], 0.1);
        assert_eq!(w.iter().sum::<f64>(), 1.0);
        assert!(w.iter().all(|&x| x >= 0.0));
        assert!((w[0] - (0.3 - 0.1 / 6.0)).abs() < 1e-15);
        assert_eq!(round_weights(&[1.0], 0.1), vec![1.0]);
    }

    #[test]
    fn descaling_inverts_the_unit_map() {
        let c = [Component::new(1.0, 0.0, 2.0)];
        let d = descale(&c, 2.0, 6.0);
        assert!((d[0].mean - 4.0).abs() < 1e-15);
        assert!((d[0].precision - 1.0).abs() < 1e-15);
    }

    #[test]
    fn config_validation() {
        assert!(LearnConfig::new(0, 0.1).is_err());
        assert!(LearnConfig::new(1, 1.0).is_err());
        assert!(LearnConfig::new(1, 0.1).unwrap().with_gamma(0.0).validate().is_err());
        assert_eq!(LearnConfig::new(2, 0.1).unwrap().starts, 100);
    }

    #[test]
    fn l1_to_pp_matches_closed_form() {
        let theta = MixtureParams::single(0.0, 1.0);
        let p = PiecewisePolynomial::zero();
        assert!((l1_mixture_to_pp(&theta, &p) - 1.0).abs() < 1e-9);
    }
}
