mod common;

use common::random_pp;
use gmmfit::{PiecewisePolynomial, Polynomial};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pp_from_seed(seed: u64) -> PiecewisePolynomial {
    random_pp(&mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn integration_is_additive(seed in any::<u64>(), t in prop::array::uniform3(0.0f64..1.0)) {
        let p = pp_from_seed(seed);
        let s = p.support().unwrap();
        let mut u = t;
        u.sort_by(f64::total_cmp);
        let [a, b, c] = u.map(|v| s.lo + v * s.len());
        let ab = p.integrate(a, b).unwrap();
        let bc = p.integrate(b, c).unwrap();
        let ac = p.integrate(a, c).unwrap();
        prop_assert!((ac - ab - bc).abs() <= 1e-12 * (1.0 + ab.abs() + bc.abs()), "{ac} vs {ab} + {bc}");
    }

    #[test]
    fn integral_matches_quadrature(seed in any::<u64>()) {
        let p = pp_from_seed(seed);
        let s = p.support().unwrap();
        let direct: f64 = p
            .breakpoints()
            .windows(2)
            .map(|w| common::simpson(|x| p.evaluate(x), w[0], w[1], 1e-13))
            .sum();
        prop_assert!((p.integrate(s.lo, s.hi).unwrap() - direct).abs() < 1e-9);
    }

    #[test]
    fn subtraction_is_pointwise(a in any::<u64>(), b in any::<u64>(), t in prop::collection::vec(-4.0f64..4.0, 50)) {
        let p = pp_from_seed(a);
        let q = pp_from_seed(b);
        let d = p.subtract(&q);
        for x in t {
            prop_assert!((d.evaluate(x) - (p.evaluate(x) - q.evaluate(x))).abs() <= 1e-10, "at {x}");
        }
    }

    #[test]
    fn sign_is_constant_between_roots(seed in any::<u64>()) {
        let p = pp_from_seed(seed);
        let s = p.support().unwrap();
        let mut cuts = vec![s.lo];
        cuts.extend(p.real_roots());
        cuts.push(s.hi);
        for w in cuts.windows(2) {
            let (lo, hi) = (w[0], w[1]);
            let margin = 1e-6 * (hi - lo);
            let mut sign = 0i8;
            for i in 0..1000 {
                let x = lo + margin + (hi - lo - 2.0 * margin) * i as f64 / 999.0;
                let v = p.evaluate(x);
                // Values this small are indistinguishable from a double root.
                if v.abs() < 1e-9 {
                    continue;
                }
                let here = if v > 0.0 { 1 } else { -1 };
                prop_assert!(sign == 0 || sign == here, "sign flips inside ({lo}, {hi}) at {x}");
                sign = here;
            }
        }
    }

    #[test]
    fn l1_norm_matches_quadrature(seed in any::<u64>()) {
        let p = pp_from_seed(seed);
        let direct = common::abs_integral(|x| p.evaluate(x), p.breakpoints(), 1e-12);
        prop_assert!((p.l1_norm() - direct).abs() < 1e-8, "{} vs {direct}", p.l1_norm());
    }
}

#[test]
fn roots_of_a_known_cubic() {
    // (x + 1)(x - 0.5)(x - 2) on [-3, 3] as a single global piece.
    let poly = Polynomial::new(vec![1.0, -1.5, -1.5, 1.0]).unwrap();
    let p = PiecewisePolynomial::single_global(-3.0, 3.0, poly).unwrap();
    let roots = p.real_roots();
    assert_eq!(roots.len(), 3);
    for (r, want) in roots.iter().zip([-1.0, 0.5, 2.0]) {
        assert!((r - want).abs() < 1e-10, "{r} vs {want}");
    }
}

#[test]
fn jump_across_breakpoint_is_a_root() {
    let p = PiecewisePolynomial::new(
        vec![0.0, 1.0, 2.0],
        vec![Polynomial::constant(1.0), Polynomial::constant(-2.0)],
    )
    .unwrap();
    assert_eq!(p.real_roots(), vec![1.0]);
    assert!((p.l1_norm() - 3.0).abs() < 1e-14);
}
