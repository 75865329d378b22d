use gmmfit::fit::solver::{nelder_mead, project_capped_simplex};
use gmmfit::fit::{feasibility_solve, ComponentDomain, FitProblem, SolveConfig, SolveSession};
use gmmfit::mixture::{Component, Family, MixtureParams};
use gmmfit::shape::{mixture_approx, FamilyShape};
use proptest::prelude::*;

fn problem(k: usize) -> (FitProblem, MixtureParams) {
    let truth = MixtureParams::gaussian(vec![Component::new(0.45, -0.4, 4.0), Component::new(0.55, 0.5, 3.0)]).unwrap();
    let shape = FamilyShape::for_family(Family::Gaussian, 0.1).unwrap();
    let target = mixture_approx(&truth, &shape).unwrap();
    let p = FitProblem::new(target, shape, 4 * k, vec![ComponentDomain::well_behaved(0.05, 10.0); k], 0.0).unwrap();
    (p, truth)
}

fn config(seed: u64) -> SolveConfig {
    let mut c = SolveConfig::new(1e-5, 60.0, 40, seed).unwrap();
    c.evals_per_start = 200;
    c
}

#[test]
fn solves_are_deterministic_across_thread_counts() {
    let (p, _) = problem(2);
    let one = feasibility_solve(&p, config(9), 0.02).unwrap();
    let again = feasibility_solve(&p, config(9), 0.02).unwrap();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let threaded = pool.install(|| feasibility_solve(&p, config(9), 0.02).unwrap());
    assert!(one.is_some());
    assert_eq!(one, again);
    assert_eq!(one, threaded);
}

#[test]
fn feasibility_is_monotone_in_the_threshold() {
    let (p, _) = problem(1);
    let nus = [1e-4, 1e-3, 0.01, 0.05, 0.1, 0.2, 0.4, 0.8, 1.6, 3.0];
    let found: Vec<bool> = nus.iter().map(|&nu| feasibility_solve(&p, config(4), nu).unwrap().is_some()).collect();
    let first = found.iter().position(|&f| f).expect("feasible at nu = 3");
    assert!(found[first..].iter().all(|&f| f), "{found:?}");
    // A single session answers the same questions with the same verdicts.
    let mut session = SolveSession::new(&p, config(4)).unwrap();
    for (&nu, &want) in nus.iter().zip(&found).skip(first) {
        assert_eq!(session.solve(nu).unwrap().is_some(), want);
    }
}

#[test]
fn returned_points_are_sound_and_in_domain() {
    let (p, truth) = problem(2);
    let session_cfg = config(17);
    let mut session = SolveSession::new(&p, session_cfg).unwrap();
    let sol = session.solve(0.05).unwrap().expect("the truth is in the domain");
    assert!(p.contains(&sol.theta));
    assert!(sol.objective <= session.threshold(0.05));
    assert!((p.objective(&sol.theta) - sol.objective).abs() < 1e-12);
    assert!(p.objective(truth.components()) < 1e-9);
}

#[test]
fn invalid_configurations_are_rejected() {
    assert!(SolveConfig::new(0.0, 1.0, 4, 0).is_err());
    assert!(SolveConfig::new(2.0, 1.0, 4, 0).is_err());
    assert!(SolveConfig::new(0.1, 1.0, 0, 0).is_err());
    let (p, _) = problem(1);
    assert!(FitProblem::new(p.target.clone(), p.shape.clone(), 4, vec![], 0.0).is_err());
    assert!(FitProblem::new(p.target.clone(), p.shape.clone(), 0, p.components.clone(), 0.0).is_err());
    assert!(FitProblem::new(p.target.clone(), p.shape.clone(), 4, vec![ComponentDomain::well_behaved(0.05, 10.0); 2], 0.6).is_err());
    assert!(feasibility_solve(&p, config(0), -1.0).is_err());
}

#[test]
fn nelder_mead_finds_a_quadratic_minimum() {
    let f = |x: &[f64]| (x[0] - 1.0).powi(2) + 3.0 * (x[1] + 2.0).powi(2) + 0.5 * (x[2] - 0.25).powi(2);
    let (x, v, evals) = nelder_mead(f, &[0.0, 0.0, 0.0], &[0.5, 0.5, 0.5], 2000);
    assert!(evals <= 2000);
    assert!(v < 1e-10, "{v} at {x:?}");
}

proptest! {
    #[test]
    fn capped_simplex_projection_is_feasible_and_idempotent(x in prop::collection::vec(-2.0f64..2.0, 1..6), floor in 0.0f64..0.1) {
        prop_assume!(floor * x.len() as f64 <= 1.0);
        let p = project_capped_simplex(&x, floor);
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        prop_assert!(p.iter().all(|&v| v >= floor - 1e-12));
        let q = project_capped_simplex(&p, floor);
        for (a, b) in p.iter().zip(&q) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }
}
