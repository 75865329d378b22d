//! Independent oracles shared by the integration tests. Nothing here calls
//! the library's quadrature, root finding or A_K code.

#![allow(dead_code)]

use gmmfit::mixture::{Component, Family, MixtureParams};
use gmmfit::{PiecewisePolynomial, Polynomial};
use rand::Rng;
use statrs::distribution::{Continuous, ContinuousCDF, Exp, Laplace, Normal};

/// Offsets (in units of `1/τ`) at which every component gets a cut.
const COMPONENT_OFFSETS: [f64; 17] = [
    -40.0, -16.0, -8.0, -4.0, -2.0, -1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0, 40.0,
];

fn simpson_step<F: Fn(f64) -> f64>(f: &F, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if depth == 0 || delta.abs() <= 15.0 * tol {
        return left + right + delta / 15.0;
    }
    simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)
        + simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)
}

/// Adaptive Simpson quadrature.
pub fn simpson<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    // Seed with 16 panels so narrow features are not skipped.
    let n = 16;
    let h = (b - a) / n as f64;
    (0..n)
        .map(|i| {
            let lo = a + h * i as f64;
            let hi = if i + 1 == n { b } else { lo + h };
            let m = 0.5 * (lo + hi);
            let (flo, fm, fhi) = (f(lo), f(m), f(hi));
            let whole = (hi - lo) / 6.0 * (flo + 4.0 * fm + fhi);
            simpson_step(&f, lo, flo, hi, fhi, m, fm, whole, tol / n as f64, 40)
        })
        .sum()
}

/// `∫ |f|` over `[cuts[0], cuts[last]]`, integrating piece by piece.
pub fn abs_integral<F: Fn(f64) -> f64>(f: F, cuts: &[f64], tol: f64) -> f64 {
    let mut c: Vec<f64> = cuts.iter().copied().filter(|x| x.is_finite()).collect();
    c.sort_by(f64::total_cmp);
    c.dedup();
    c.windows(2).map(|w| simpson(|x| f(x).abs(), w[0], w[1], tol)).sum()
}

/// Cut points resolving each component at its own scale.
pub fn component_cuts(comps: &[Component]) -> Vec<f64> {
    comps
        .iter()
        .flat_map(|c| COMPONENT_OFFSETS.iter().map(move |o| c.mean + o / c.precision))
        .collect()
}

pub fn family_pdf(family: Family, mean: f64, precision: f64, x: f64) -> f64 {
    match family {
        Family::Gaussian => Normal::new(mean, 1.0 / precision).unwrap().pdf(x),
        Family::Exponential => {
            if x < mean {
                0.0
            } else {
                Exp::new(precision).unwrap().pdf(x - mean)
            }
        }
        Family::Laplace => Laplace::new(mean, 1.0 / precision).unwrap().pdf(x),
    }
}

pub fn family_cdf(family: Family, mean: f64, precision: f64, x: f64) -> f64 {
    match family {
        Family::Gaussian => Normal::new(mean, 1.0 / precision).unwrap().cdf(x),
        Family::Exponential => {
            if x < mean {
                0.0
            } else {
                Exp::new(precision).unwrap().cdf(x - mean)
            }
        }
        Family::Laplace => Laplace::new(mean, 1.0 / precision).unwrap().cdf(x),
    }
}

/// `Σ w_i f(x; μ_i, τ_i)`; the weights need not sum to one.
pub fn components_pdf(family: Family, comps: &[Component], x: f64) -> f64 {
    comps
        .iter()
        .map(|c| c.weight * family_pdf(family, c.mean, c.precision, x))
        .sum()
}

pub fn mixture_pdf(m: &MixtureParams, x: f64) -> f64 {
    components_pdf(m.family(), m.components(), x)
}

/// `‖M_a − M_b‖₁` by quadrature.
pub fn l1_mixtures(a: &MixtureParams, b: &MixtureParams) -> f64 {
    let mut cuts = component_cuts(a.components());
    cuts.extend(component_cuts(b.components()));
    abs_integral(|x| mixture_pdf(a, x) - mixture_pdf(b, x), &cuts, 1e-11)
}

/// `‖Σ w_i f_i − p‖₁` for a piecewise polynomial `p`. Mass beyond the
/// outermost cuts (where `p` vanishes) is added from the CDFs.
pub fn l1_components_pp(family: Family, comps: &[Component], p: &PiecewisePolynomial) -> f64 {
    let mut cuts = component_cuts(comps);
    cuts.extend_from_slice(p.breakpoints());
    let lo = cuts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = cuts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let tails: f64 = comps
        .iter()
        .map(|c| c.weight * (family_cdf(family, c.mean, c.precision, lo) + 1.0 - family_cdf(family, c.mean, c.precision, hi)))
        .sum();
    abs_integral(|x| components_pdf(family, comps, x) - p.evaluate(x), &cuts, 1e-11) + tails
}

pub fn l1_mixture_pp(m: &MixtureParams, p: &PiecewisePolynomial) -> f64 {
    l1_components_pp(m.family(), m.components(), p)
}

/// Grid A_K oracle: the best `K` disjoint unions of consecutive grid cells,
/// by a signed dynamic program over cells. Returns the value and the grid
/// error bound `2K · max_cell ∫|p|`.
pub fn grid_ak(p: &PiecewisePolynomial, k: usize, cells: usize) -> (f64, f64) {
    let Some(support) = p.support() else {
        return (0.0, 0.0);
    };
    let (lo, hi) = (support.lo, support.hi);
    let h = (hi - lo) / cells as f64;
    let mut masses = Vec::with_capacity(cells);
    let mut max_abs: f64 = 0.0;
    for i in 0..cells {
        let a = lo + h * i as f64;
        let b = if i + 1 == cells { hi } else { a + h };
        // Cells never straddle more than a few breakpoints; cut there too.
        let mut cuts = vec![a, b];
        cuts.extend(p.breakpoints().iter().copied().filter(|&x| x > a && x < b));
        cuts.sort_by(f64::total_cmp);
        let mass: f64 = cuts.windows(2).map(|w| simpson(|x| p.evaluate(x), w[0], w[1], 1e-14)).sum();
        max_abs = max_abs.max(abs_integral(|x| p.evaluate(x), &cuts, 1e-14));
        masses.push(mass);
    }
    let neg = f64::NEG_INFINITY;
    let mut out = vec![neg; k + 1];
    out[0] = 0.0;
    let mut pos = vec![neg; k + 1];
    let mut negs = vec![neg; k + 1];
    for &m in &masses {
        for j in (1..=k).rev() {
            pos[j] = pos[j].max(out[j - 1]) + m;
            negs[j] = negs[j].max(out[j - 1]) - m;
            out[j] = out[j].max(pos[j]).max(negs[j]);
        }
    }
    let best = out.iter().copied().fold(0.0, f64::max);
    (best, 2.0 * k as f64 * max_abs)
}

/// Random piecewise polynomial on up to four pieces of `[-3, 3]`.
pub fn random_pp<R: Rng>(rng: &mut R) -> PiecewisePolynomial {
    let pieces = rng.gen_range(1..=4);
    let mut bps: Vec<f64> = (0..=pieces).map(|_| rng.gen_range(-3.0..3.0)).collect();
    bps.sort_by(f64::total_cmp);
    for i in 1..bps.len() {
        if bps[i] - bps[i - 1] < 0.05 {
            bps[i] = bps[i - 1] + 0.05;
        }
    }
    let polys = (0..pieces)
        .map(|_| {
            let deg = rng.gen_range(0..=4);
            Polynomial::new((0..=deg).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
        })
        .collect();
    PiecewisePolynomial::new(bps, polys).unwrap()
}

/// Random Gaussian mixture with weights at least `0.05`, means in `[-3, 3]`
/// and log-uniform precisions in `[0.3, 5]`.
pub fn random_gmm<R: Rng>(rng: &mut R, k: usize) -> MixtureParams {
    let raw: Vec<f64> = (0..k).map(|_| rng.gen_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    let comps = raw
        .iter()
        .map(|w| Component::new(w / total, rng.gen_range(-3.0..3.0), (rng.gen_range(0.3f64.ln()..5.0f64.ln())).exp()))
        .collect();
    MixtureParams::gaussian(comps).unwrap()
}

/// Number of sign changes of `f` on an `n`-point grid over `[a, b]`, skipping
/// exact zeros.
pub fn grid_sign_changes<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, n: usize) -> usize {
    let mut last = 0.0f64;
    let mut changes = 0;
    for i in 0..n {
        let x = a + (b - a) * i as f64 / (n - 1) as f64;
        let v = f(x);
        if v != 0.0 {
            if last != 0.0 && (v > 0.0) != (last > 0.0) {
                changes += 1;
            }
            last = v;
        }
    }
    changes
}
