mod common;

use common::{abs_integral, l1_mixtures, random_gmm, random_pp, simpson};
use gmmfit::ak::{ak_brute_force, ak_distance, ak_norm, ak_witness};
use gmmfit::mixture;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn pp(seed: u64) -> gmmfit::PiecewisePolynomial {
    random_pp(&mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn monotone_in_k_and_bounded_by_l1(seed in any::<u64>()) {
        let p = pp(seed);
        let l1 = abs_integral(|x| p.evaluate(x), p.breakpoints(), 1e-12);
        let mut last = 0.0;
        for k in 1..=12 {
            let v = ak_norm(&p, k);
            prop_assert!(v + 1e-12 >= last, "k {k}: {v} < {last}");
            prop_assert!(v <= l1 + 1e-8, "k {k}: {v} > {l1}");
            last = v;
        }
    }

    #[test]
    fn triangle_inequality(a in any::<u64>(), b in any::<u64>(), c in any::<u64>(), k in 1usize..=6) {
        let (p, q, r) = (pp(a), pp(b), pp(c));
        let lhs = ak_distance(&p, &r, k);
        prop_assert!(lhs <= ak_distance(&p, &q, k) + ak_distance(&q, &r, k) + 1e-10);
        prop_assert!((ak_distance(&p, &q, k) - ak_distance(&q, &p, k)).abs() < 1e-10);
    }

    #[test]
    fn witness_intervals_achieve_the_value(seed in any::<u64>(), k in 1usize..=6) {
        let p = pp(seed);
        let (v, intervals) = ak_witness(&p, k);
        prop_assert!(intervals.len() <= k);
        for w in intervals.windows(2) {
            prop_assert!(w[0].1 <= w[1].0, "overlap {:?}", w);
        }
        let direct: f64 = intervals
            .iter()
            .map(|&(a, b)| {
                let mut cuts = vec![a, b];
                cuts.extend(p.breakpoints().iter().copied().filter(|&x| x > a && x < b));
                cuts.sort_by(f64::total_cmp);
                cuts.windows(2).map(|c| simpson(|x| p.evaluate(x), c[0], c[1], 1e-13)).sum::<f64>().abs()
            })
            .sum();
        prop_assert!((v - direct).abs() < 1e-8, "{v} vs {direct}");
        prop_assert!((v - ak_norm(&p, k)).abs() < 1e-14);
    }

    #[test]
    fn agrees_with_exhaustive_search(seed in any::<u64>(), k in 1usize..=3) {
        let p = pp(seed);
        let exact = ak_norm(&p, k);
        let brute = ak_brute_force(&p, k, 300);
        // The grid search only sees endpoints on its grid.
        prop_assert!(brute <= exact + 1e-9, "{brute} > {exact}");
        prop_assert!(exact - brute < 0.05 * (1.0 + exact), "{brute} vs {exact}");
    }
}

#[test]
fn mixture_distance_reaches_l1_at_4k() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for k in 1..=3 {
        for _ in 0..15 {
            let a = random_gmm(&mut rng, k);
            let b = random_gmm(&mut rng, k);
            let l1 = l1_mixtures(&a, &b);
            let ak = mixture::ak_distance(&a, &b, 4 * k);
            assert!((ak - l1).abs() < 1e-8, "k {k}: {ak} vs {l1}");
            for kk in 1..4 * k {
                assert!(mixture::ak_distance(&a, &b, kk) <= ak + 1e-12);
            }
        }
    }
}
