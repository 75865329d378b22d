//! Numerical backend for the A_K feasibility problem.
//!
//! The universally quantified block of the encoded system collapses to the
//! exactly computable objective `‖target − P_{ε,θ}‖_{A_K}`, so feasibility at
//! threshold `ν` is decided by minimizing that objective over the parameter
//! domain: Latin-hypercube multi-start, each start refined by Nelder–Mead in
//! an unconstrained chart that is projected back onto the domain.
//!
//! Starts are processed in fixed-size chunks and every start's result is
//! independent of `ν`. A [`SolveSession`] caches finished starts, so asking
//! for a larger `ν` never reruns work and a success at `ν` implies success
//! at every `ν' > ν`.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ak::ak_norm;
use crate::error::FitError;
use crate::mixture::Component;
use crate::poly::{Interval, PiecewisePolynomial};
use crate::shape::{difference_from_target, FamilyShape};

/// Starts per chunk; fixed so results do not depend on the thread count.
pub const CHUNK: usize = 8;

/// Default Nelder–Mead evaluation budget per start.
pub const DEFAULT_EVALS_PER_START: usize = 300;

/// Relative tolerance on `ν` in the acceptance test.
pub const NU_REL_TOL: f64 = 1e-6;

/// Admissible parameters of one component: `τ ∈ [lo, hi]` and
/// `|μ − center| ≤ radius + spread/τ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentDomain {
    pub precision_lo: f64,
    pub precision_hi: f64,
    pub center: f64,
    pub radius: f64,
    pub spread: f64,
    /// Where starting means are drawn from.
    pub start_window: Interval,
}

impl ComponentDomain {
    /// `0 < τ ≤ γ` (floored at `precision_lo`), `μ ∈ [-1, 1]`.
    pub fn well_behaved(precision_lo: f64, gamma: f64) -> Self {
        Self {
            precision_lo,
            precision_hi: gamma,
            center: 0.0,
            radius: 1.0,
            spread: 0.0,
            start_window: Interval::new(-1.0, 1.0),
        }
    }

    /// Rescaled box relative to `J`: `τ̃ ∈ [tr_lo, tr_hi]`, `|μ̃| ≤ mr`,
    /// i.e. `τ = 2τ̃/|J|` and `|μ − mid J| ≤ mr/τ`.
    pub fn rescaled(j: Interval, tr_lo: f64, tr_hi: f64, mr: f64) -> Self {
        let lo = (j.lo - 0.5 * j.len()).max(-1.0);
        let hi = (j.hi + 0.5 * j.len()).min(1.0);
        Self {
            precision_lo: 2.0 * tr_lo / j.len(),
            precision_hi: 2.0 * tr_hi / j.len(),
            center: j.mid(),
            radius: 0.0,
            spread: mr,
            start_window: if hi > lo { Interval::new(lo, hi) } else { j },
        }
    }

    fn clamp_precision(&self, tau: f64) -> f64 {
        tau.clamp(self.precision_lo, self.precision_hi)
    }

    fn clamp_mean(&self, mean: f64, tau: f64) -> f64 {
        let r = self.radius + self.spread / tau;
        mean.clamp(self.center - r, self.center + r)
    }

    /// Whether `(μ, τ)` lies in the domain (with relative slack `tol`).
    pub fn contains(&self, mean: f64, tau: f64, tol: f64) -> bool {
        let r = self.radius + self.spread / tau;
        tau >= self.precision_lo * (1.0 - tol)
            && tau <= self.precision_hi * (1.0 + tol)
            && (mean - self.center).abs() <= r * (1.0 + tol) + tol
    }
}

/// The feasibility problem `‖target − P_{ε,θ}‖_{A_K} ≤ ν` over a domain.
#[derive(Debug, Clone)]
pub struct FitProblem {
    pub target: PiecewisePolynomial,
    pub shape: FamilyShape,
    pub ak_order: usize,
    pub components: Vec<ComponentDomain>,
    /// Lower bound on every weight.
    pub min_weight: f64,
}

impl FitProblem {
    pub fn new(
        target: PiecewisePolynomial,
        shape: FamilyShape,
        ak_order: usize,
        components: Vec<ComponentDomain>,
        min_weight: f64,
    ) -> Result<Self, FitError> {
        if components.is_empty() {
            return Err(FitError::Problem("no components".into()));
        }
        if ak_order == 0 {
            return Err(FitError::Problem("A_K order must be at least 1".into()));
        }
        if !(min_weight >= 0.0 && min_weight * components.len() as f64 <= 1.0) {
            return Err(FitError::Problem(format!(
                "minimum weight {min_weight} infeasible for {} components",
                components.len()
            )));
        }
        for (i, c) in components.iter().enumerate() {
            if !(c.precision_lo > 0.0 && c.precision_lo <= c.precision_hi && c.precision_hi.is_finite()) {
                return Err(FitError::Problem(format!(
                    "component {i}: precision range [{}, {}] is invalid",
                    c.precision_lo, c.precision_hi
                )));
            }
        }
        Ok(Self {
            target,
            shape,
            ak_order,
            components,
            min_weight,
        })
    }

    pub fn k(&self) -> usize {
        self.components.len()
    }

    /// `‖target − P_{ε,θ}‖_{A_K}`.
    pub fn objective(&self, theta: &[Component]) -> f64 {
        let comps: Vec<(f64, f64, f64)> = theta.iter().map(|c| (c.weight, c.mean, c.precision)).collect();
        ak_norm(&difference_from_target(&self.target, &comps, &self.shape), self.ak_order)
    }

    /// Whether `theta` lies in the domain.
    pub fn contains(&self, theta: &[Component]) -> bool {
        let tol = 1e-9;
        theta.len() == self.k()
            && (theta.iter().map(|c| c.weight).sum::<f64>() - 1.0).abs() <= tol
            && theta
                .iter()
                .zip(&self.components)
                .all(|(c, d)| c.weight >= self.min_weight - tol && d.contains(c.mean, c.precision, tol))
    }

    /// Lipschitz bound of the objective in `(w, μ, τ)` over the domain: a
    /// weight moves the L1 mass by at most `|Δw|`, a mean by `τ|Δμ|` and a
    /// precision by `|Δτ|/τ` (times the approximant's mass).
    pub fn lipschitz(&self) -> f64 {
        let mass = 1.0 + self.shape.l1_error();
        let per = self
            .components
            .iter()
            .map(|d| 1.0f64.max(d.precision_hi).max(1.0 / d.precision_lo))
            .fold(1.0f64, f64::max);
        mass * per * ((3 * self.k()) as f64).sqrt()
    }

    fn weight_dims(&self) -> usize {
        if self.k() > 1 {
            self.k()
        } else {
            0
        }
    }

    fn dims(&self) -> usize {
        self.weight_dims() + 2 * self.k()
    }

    /// Maps a chart point to domain parameters; also returns the distance
    /// between the point and its projection (in chart units).
    fn project(&self, x: &[f64]) -> (Vec<Component>, f64) {
        let k = self.k();
        let wd = self.weight_dims();
        let mut dist2 = 0.0;
        let weights = if wd == 0 {
            vec![1.0]
        } else {
            let w = project_capped_simplex(&x[..wd], self.min_weight);
            dist2 += w.iter().zip(&x[..wd]).map(|(a, b)| (a - b).powi(2)).sum::<f64>();
            w
        };
        let mut out = Vec::with_capacity(k);
        for i in 0..k {
            let d = &self.components[i];
            let mean = x[wd + 2 * i];
            let ln_tau = x[wd + 2 * i + 1];
            let tau = d.clamp_precision(ln_tau.exp());
            dist2 += (tau.ln() - ln_tau).powi(2);
            let m = d.clamp_mean(mean, tau);
            dist2 += (m - mean).powi(2);
            out.push(Component::new(weights[i], m, tau));
        }
        (out, dist2.sqrt())
    }

    fn chart_objective(&self, x: &[f64]) -> f64 {
        let (theta, dist) = self.project(x);
        self.objective(&theta) + dist
    }

    /// Latin-hypercube starting points in chart coordinates.
    fn starts(&self, n: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.k();
        // Unit-cube coordinates: one weight, one mean, one precision per component.
        let unit_dims = 3 * k;
        let mut cube = vec![vec![0.0; unit_dims]; n];
        for d in 0..unit_dims {
            let mut strata: Vec<usize> = (0..n).collect();
            for i in (1..n).rev() {
                let j = rng.gen_range(0..=i);
                strata.swap(i, j);
            }
            for (row, &s) in cube.iter_mut().zip(&strata) {
                row[d] = (s as f64 + rng.gen::<f64>()) / n as f64;
            }
        }
        cube.into_iter()
            .enumerate()
            .map(|(idx, u)| {
                let mut x = Vec::with_capacity(self.dims());
                if self.weight_dims() > 0 {
                    let raw: Vec<f64> = (0..k).map(|i| 0.1 + u[i]).collect();
                    let total: f64 = raw.iter().sum();
                    x.extend(raw.iter().map(|w| w / total));
                }
                for (i, d) in self.components.iter().enumerate() {
                    // Alternate between the component's window and all of [-1, 1].
                    let window = if idx % 2 == 0 { d.start_window } else { Interval::new(-1.0, 1.0) };
                    let (lo, hi) = start_precision_range(d);
                    let ln_tau = lo.ln() + u[k + 2 * i + 1] * (hi.ln() - lo.ln());
                    let tau = ln_tau.exp();
                    let mean = d.clamp_mean(window.lo + u[k + 2 * i] * window.len(), tau);
                    x.push(mean);
                    x.push(ln_tau);
                }
                x
            })
            .collect()
    }

    fn initial_steps(&self) -> Vec<f64> {
        let mut steps = vec![0.15; self.weight_dims()];
        for d in &self.components {
            steps.push(0.25 * d.start_window.len().min(2.0));
            steps.push(0.4);
        }
        steps
    }
}

fn start_precision_range(d: &ComponentDomain) -> (f64, f64) {
    let lo = d.precision_lo.max(0.5);
    let hi = d.precision_hi.min(64.0);
    if lo <= hi {
        (lo, hi)
    } else {
        (d.precision_lo, d.precision_hi)
    }
}

/// Euclidean projection onto `{w : w_i ≥ floor, Σ w = 1}`.
pub fn project_capped_simplex(x: &[f64], floor: f64) -> Vec<f64> {
    let n = x.len();
    let budget = 1.0 - floor * n as f64;
    let mut v: Vec<f64> = x.iter().map(|a| a - floor).collect();
    let mut sorted = v.clone();
    sorted.sort_by(|a, b| b.total_cmp(a));
    let mut cum = 0.0;
    let mut theta = 0.0;
    for (i, s) in sorted.iter().enumerate() {
        cum += s;
        let t = (cum - budget) / (i + 1) as f64;
        if s - t > 0.0 {
            theta = t;
        }
    }
    for a in &mut v {
        *a = (*a - theta).max(0.0) + floor;
    }
    // Remove rounding drift so the weights sum to one.
    let total: f64 = v.iter().sum();
    if let Some(m) = v.iter().cloned().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).map(|(i, _)| i) {
        v[m] += 1.0 - total;
    }
    v
}

/// Solver settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveConfig {
    /// Approximation radius `λ`.
    pub lambda: f64,
    /// Solution norm bound `ψ`.
    pub psi: f64,
    pub starts: usize,
    pub seed: u64,
    pub evals_per_start: usize,
}

impl SolveConfig {
    pub fn new(lambda: f64, psi: f64, starts: usize, seed: u64) -> Result<Self, FitError> {
        let cfg = Self {
            lambda,
            psi,
            starts,
            seed,
            evals_per_start: DEFAULT_EVALS_PER_START,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<(), FitError> {
        if !(self.lambda > 0.0 && self.lambda < self.psi && self.psi.is_finite()) {
            return Err(FitError::Config(format!(
                "need 0 < lambda < psi, got lambda = {}, psi = {}",
                self.lambda, self.psi
            )));
        }
        if self.starts == 0 {
            return Err(FitError::Config("starts must be at least 1".into()));
        }
        if self.evals_per_start < 2 {
            return Err(FitError::Config("evals_per_start must be at least 2".into()));
        }
        Ok(())
    }
}

/// A finished start.
#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub theta: Vec<Component>,
    pub objective: f64,
    pub start: usize,
}

/// Solver statistics.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct SolverStats {
    pub starts_run: usize,
    pub evaluations: usize,
    pub best_objective: f64,
    pub slack: f64,
}

fn flatten(theta: &[Component]) -> impl Iterator<Item = f64> + '_ {
    theta.iter().flat_map(|c| [c.weight, c.mean, c.precision])
}

/// Lower objective wins, then the lexicographically smaller `θ`.
fn better(a: &Solution, b: &Solution) -> bool {
    match a.objective.total_cmp(&b.objective) {
        std::cmp::Ordering::Less => true,
        std::cmp::Ordering::Greater => false,
        std::cmp::Ordering::Equal => {
            for (x, y) in flatten(&a.theta).zip(flatten(&b.theta)) {
                match x.total_cmp(&y) {
                    std::cmp::Ordering::Less => return true,
                    std::cmp::Ordering::Greater => return false,
                    _ => {}
                }
            }
            false
        }
    }
}

/// Cached multi-start state for one problem.
pub struct SolveSession<'p> {
    problem: &'p FitProblem,
    cfg: SolveConfig,
    starts: Vec<Vec<f64>>,
    best: Option<Solution>,
    done: usize,
    evaluations: usize,
}

impl<'p> SolveSession<'p> {
    pub fn new(problem: &'p FitProblem, cfg: SolveConfig) -> Result<Self, FitError> {
        cfg.validate()?;
        Ok(Self {
            problem,
            cfg,
            starts: problem.starts(cfg.starts, cfg.seed),
            best: None,
            done: 0,
            evaluations: 0,
        })
    }

    /// Objective slack `L·λ`.
    pub fn slack(&self) -> f64 {
        self.problem.lipschitz() * self.cfg.lambda
    }

    /// Largest objective accepted at threshold `nu`.
    pub fn threshold(&self, nu: f64) -> f64 {
        nu * (1.0 + NU_REL_TOL) + self.slack()
    }

    fn accepts(&self, nu: f64) -> bool {
        self.best.as_ref().is_some_and(|b| b.objective <= self.threshold(nu))
    }

    /// Runs chunks until the best objective is within the threshold or the
    /// starts are exhausted; `None` means NO-SOLUTION.
    pub fn solve(&mut self, nu: f64) -> Result<Option<Solution>, FitError> {
        if !(nu >= 0.0) {
            return Err(FitError::Problem(format!("threshold {nu} must be nonnegative")));
        }
        while !self.accepts(nu) && self.done < self.starts.len() {
            self.run_chunk()?;
        }
        if !self.accepts(nu) {
            return Ok(None);
        }
        let best = self.best.clone().expect("accepted implies a best start");
        debug_assert!(self.problem.contains(&best.theta));
        assert!(best.objective <= self.threshold(nu), "solver soundness");
        Ok(Some(best))
    }

    fn run_chunk(&mut self) -> Result<(), FitError> {
        let end = (self.done + CHUNK).min(self.starts.len());
        let problem = self.problem;
        let steps = problem.initial_steps();
        let budget = self.cfg.evals_per_start;
        let results: Vec<(Solution, usize)> = self.starts[self.done..end]
            .par_iter()
            .enumerate()
            .map(|(i, x0)| {
                let (x, _, evals) = nelder_mead(|x| problem.chart_objective(x), x0, &steps, budget);
                let (theta, _) = problem.project(&x);
                let objective = problem.objective(&theta);
                (
                    Solution {
                        theta,
                        objective,
                        start: self.done + i,
                    },
                    evals + 1,
                )
            })
            .collect();
        for (sol, evals) in results {
            self.evaluations += evals;
            if !sol.objective.is_finite() {
                return Err(FitError::NonFiniteObjective);
            }
            if self.best.as_ref().map_or(true, |b| better(&sol, b)) {
                self.best = Some(sol);
            }
        }
        self.done = end;
        Ok(())
    }

    pub fn best(&self) -> Option<&Solution> {
        self.best.as_ref()
    }

    pub fn stats(&self) -> SolverStats {
        SolverStats {
            starts_run: self.done,
            evaluations: self.evaluations,
            best_objective: self.best.as_ref().map_or(f64::INFINITY, |b| b.objective),
            slack: self.slack(),
        }
    }
}

/// One-shot solve at threshold `nu`.
pub fn feasibility_solve(problem: &FitProblem, cfg: SolveConfig, nu: f64) -> Result<Option<Solution>, FitError> {
    SolveSession::new(problem, cfg)?.solve(nu)
}

/// Nelder–Mead minimization from `x0` with per-coordinate initial steps.
/// Returns the best point, its value and the number of evaluations.
pub fn nelder_mead<F: Fn(&[f64]) -> f64>(f: F, x0: &[f64], steps: &[f64], max_evals: usize) -> (Vec<f64>, f64, usize) {
    let n = x0.len();
    let mut evals = 0;
    let eval = |x: &[f64], evals: &mut usize| {
        *evals += 1;
        let v = f(x);
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    };
    let mut simplex: Vec<Vec<f64>> = Vec::with_capacity(n + 1);
    simplex.push(x0.to_vec());
    for i in 0..n {
        let mut x = x0.to_vec();
        x[i] += steps[i];
        simplex.push(x);
    }
    let mut values: Vec<f64> = simplex.iter().map(|x| eval(x, &mut evals)).collect();
    while evals < max_evals {
        let mut order: Vec<usize> = (0..=n).collect();
        order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
        simplex = order.iter().map(|&i| simplex[i].clone()).collect();
        values = order.iter().map(|&i| values[i]).collect();
        let spread = values[n] - values[0];
        let size = simplex[1..]
            .iter()
            .map(|x| x.iter().zip(&simplex[0]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if spread <= 1e-12 * (1.0 + values[0].abs()) && size <= 1e-9 {
            break;
        }
        let mut centroid = vec![0.0; n];
        for x in &simplex[..n] {
            for (c, v) in centroid.iter_mut().zip(x) {
                *c += v / n as f64;
            }
        }
        let along = |t: f64| -> Vec<f64> {
            centroid
                .iter()
                .zip(&simplex[n])
                .map(|(c, w)| c + t * (c - w))
                .collect()
        };
        let xr = along(1.0);
        let fr = eval(&xr, &mut evals);
        if fr < values[0] {
            let xe = along(2.0);
            let fe = eval(&xe, &mut evals);
            if fe < fr {
                simplex[n] = xe;
                values[n] = fe;
            } else {
                simplex[n] = xr;
                values[n] = fr;
            }
        } else if fr < values[n - 1] {
            simplex[n] = xr;
            values[n] = fr;
        } else {
            let (xc, fc) = if fr < values[n] {
                let xc = along(0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            } else {
                let xc = along(-0.5);
                let fc = eval(&xc, &mut evals);
                (xc, fc)
            };
            if fc < values[n].min(fr) {
                simplex[n] = xc;
                values[n] = fc;
            } else {
                for i in 1..=n {
                    let shrunk: Vec<f64> = simplex[i]
                        .iter()
                        .zip(&simplex[0])
                        .map(|(x, b)| b + 0.5 * (x - b))
                        .collect();
                    values[i] = eval(&shrunk, &mut evals);
                    simplex[i] = shrunk;
                }
            }
        }
    }
    let best = (0..=n).min_by(|&a, &b| values[a].total_cmp(&values[b])).expect("nonempty simplex");
    (simplex[best].clone(), values[best], evals)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mixture::MixtureParams;
    use crate::shape::mixture_approx;

    #[test]
    fn nelder_mead_finds_quadratic_minimum() {
        let (x, v, _) = nelder_mead(|x| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 0.5).powi(2), &[0.0, 0.0], &[0.5, 0.5], 2000);
        assert!(v < 1e-12);
        assert!((x[0] - 1.0).abs() < 1e-5 && (x[1] + 0.5).abs() < 1e-5);
    }

    #[test]
    fn capped_simplex_projection() {
        let w = project_capped_simplex(&[0.9, 0.9, -0.4], 0.05);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-15);
        assert!(w.iter().all(|&x| x >= 0.05 - 1e-15));
        assert!((w[0] - w[1]).abs() < 1e-15);
        let w = project_capped_simplex(&[0.3, 0.7], 0.0);
        assert!((w[0] - 0.3).abs() < 1e-15 && (w[1] - 0.7).abs() < 1e-15);
    }

    fn self_fit_problem() -> FitProblem {
        let shape = FamilyShape::for_family(crate::mixture::Family::Gaussian, 0.1).unwrap();
        let truth = MixtureParams::single(0.2, 3.0);
        let target = mixture_approx(&truth, &shape).unwrap();
        FitProblem::new(target, shape, 4, vec![ComponentDomain::well_behaved(0.05, 10.0)], 0.0).unwrap()
    }

    #[test]
    fn self_fit_reaches_eps_and_nu_three_is_trivial() {
        let problem = self_fit_problem();
        let cfg = SolveConfig::new(1e-5, 30.0, 16, 7).unwrap();
        let sol = feasibility_solve(&problem, cfg, 0.1).unwrap().expect("feasible by construction");
        assert!(sol.objective <= 0.1);
        assert!(feasibility_solve(&problem, cfg, 3.0).unwrap().is_some());
    }

    #[test]
    fn zero_threshold_against_non_mixture_has_no_solution() {
        let shape = FamilyShape::for_family(crate::mixture::Family::Gaussian, 0.1).unwrap();
        let target = PiecewisePolynomial::constant(-1.0, 1.0, 0.5).unwrap();
        let problem = FitProblem::new(target, shape, 4, vec![ComponentDomain::well_behaved(0.05, 10.0)], 0.0).unwrap();
        let cfg = SolveConfig::new(1e-6, 30.0, 8, 1).unwrap();
        assert!(feasibility_solve(&problem, cfg, 0.0).unwrap().is_none());
    }

    #[test]
    fn sessions_are_deterministic_and_monotone() {
        let problem = self_fit_problem();
        let cfg = SolveConfig::new(1e-5, 30.0, 16, 3).unwrap();
        let a = feasibility_solve(&problem, cfg, 0.05).unwrap();
        let b = feasibility_solve(&problem, cfg, 0.05).unwrap();
        assert_eq!(a, b);
        if a.is_some() {
            assert!(feasibility_solve(&problem, cfg, 0.1).unwrap().is_some());
        }
    }

    #[test]
    fn config_validation() {
        assert!(SolveConfig::new(1.0, 1.0, 1, 0).is_err());
        assert!(SolveConfig::new(0.1, 1.0, 0, 0).is_err());
        assert!(SolveConfig::new(0.0, 1.0, 1, 0).is_err());
    }
}
