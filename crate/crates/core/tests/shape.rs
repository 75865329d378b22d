mod common;

use common::{l1_mixture_pp, random_gmm};
use gmmfit::mixture::{Component, Family, MixtureParams};
use gmmfit::shape::{mixture_approx, FamilyShape};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn gaussian_shape(eps: f64) -> FamilyShape {
    FamilyShape::for_family(Family::Gaussian, eps).unwrap()
}

#[test]
fn gaussian_shape_is_even() {
    for eps in [0.2, 0.1, 0.01, 0.001] {
        let p = gaussian_shape(eps);
        let s = p.support();
        // Pieces are half-open, so the right endpoint itself is excluded.
        for i in 0..1000 {
            let x = s.hi * i as f64 / 1000.0;
            let (l, r) = (p.standard().evaluate(-x), p.standard().evaluate(x));
            assert!((l - r).abs() <= 1e-12 * (1.0 + r.abs()), "eps {eps}, x {x}: {l} vs {r}");
        }
    }
}

#[test]
fn approximants_hold_at_several_accuracies() {
    let mut rng = ChaCha8Rng::seed_from_u64(31);
    for eps in [0.1, 0.05, 0.01] {
        let shape = gaussian_shape(eps);
        for k in 1..=3 {
            for _ in 0..10 {
                let theta = random_gmm(&mut rng, k);
                let l1 = l1_mixture_pp(&theta, &mixture_approx(&theta, &shape).unwrap());
                assert!(l1 <= eps, "eps {eps}, k {k}: {l1}");
            }
        }
    }
}

#[test]
fn other_families_meet_their_accuracy() {
    for family in [Family::Exponential, Family::Laplace] {
        for eps in [0.1, 0.01] {
            let shape = FamilyShape::for_family(family, eps).unwrap();
            let theta = MixtureParams::new(family, vec![Component::new(0.4, -1.0, 2.0), Component::new(0.6, 1.0, 0.7)]).unwrap();
            let l1 = l1_mixture_pp(&theta, &mixture_approx(&theta, &shape).unwrap());
            assert!(l1 <= eps, "{family} eps {eps}: {l1}");
            assert!(shape.l1_error() <= eps / 2.0);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn approximant_is_linear_in_the_weights(seed in any::<u64>(), k in 1usize..=4, xs in prop::collection::vec(-8.0f64..8.0, 40)) {
        let shape = gaussian_shape(0.05);
        let theta = random_gmm(&mut ChaCha8Rng::seed_from_u64(seed), k);
        let p = mixture_approx(&theta, &shape).unwrap();
        let parts: Vec<_> = theta.components().iter().map(|c| (c.weight, shape.component(c.mean, c.precision))).collect();
        for x in xs {
            let sum: f64 = parts.iter().map(|(w, q)| w * q.evaluate(x)).sum();
            prop_assert!((p.evaluate(x) - sum).abs() <= 1e-9 * (1.0 + sum.abs()), "at {x}: {} vs {sum}", p.evaluate(x));
        }
    }

    #[test]
    fn breakpoints_are_two_per_component(seed in any::<u64>(), k in 1usize..=4) {
        let shape = gaussian_shape(0.05);
        let theta = random_gmm(&mut ChaCha8Rng::seed_from_u64(seed), k);
        let p = mixture_approx(&theta, &shape).unwrap();
        prop_assert!(p.breakpoints().len() <= 2 * k);
        prop_assert!(p.max_degree() <= shape.degree());
    }

    #[test]
    fn component_is_a_scaled_translate(mean in -3.0f64..3.0, precision in 0.2f64..5.0, y in -4.0f64..4.0) {
        let shape = gaussian_shape(0.05);
        let q = shape.component(mean, precision);
        let want = precision * shape.standard().evaluate(y);
        prop_assert!((q.evaluate(mean + y / precision) - want).abs() <= 1e-9 * (1.0 + want.abs()));
    }
}
