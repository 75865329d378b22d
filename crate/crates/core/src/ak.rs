//! The A_K norm: the largest total `Σ |∫_I f|` over `K` disjoint intervals.
//!
//! For a piecewise polynomial the supremum is attained with endpoints at the
//! boundaries of maximal sign-constant runs: inside a run the running integral
//! is monotone, so moving an endpoint to the nearer run boundary never lowers
//! any `|∫_I f|`. Writing `S_j` for the running integral at the `j`-th run
//! boundary, the norm is
//!
//! ```text
//! max  Σ_i |S(b_i) - S(a_i)|   over  a_1 ≤ b_1 ≤ a_2 ≤ ... ≤ b_K,
//! ```
//!
//! which [`ak_from_run_integrals`] solves exactly by dynamic programming in
//! `O(runs · K)`. Note that this is not the sum of the `K` largest run
//! integrals: with runs `(+1, -0.1, +1)` and `K = 1`, the single interval
//! covering all three runs gives `1.9`.

use crate::numeric::gauss_legendre;
use crate::poly::PiecewisePolynomial;

/// Runs whose absolute integral is below this are absorbed into a neighbor.
pub const RUN_MERGE_TOL: f64 = 1e-14;

/// One maximal sign-constant region.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignRun {
    pub lo: f64,
    pub hi: f64,
    pub integral: f64,
}

/// Decomposes `p` into maximal sign-constant runs covering its support.
///
/// Adjacent runs have opposite signs; runs with negligible integral are merged
/// into their neighbors.
pub fn sign_runs(p: &PiecewisePolynomial) -> Vec<SignRun> {
    let segments: Vec<SignRun> = p
        .signed_segments()
        .into_iter()
        .map(|(lo, hi, integral)| SignRun { lo, hi, integral })
        .collect();
    normalize_runs(segments)
}

fn normalize_runs(segments: Vec<SignRun>) -> Vec<SignRun> {
    let mut out: Vec<SignRun> = Vec::with_capacity(segments.len());
    for seg in segments {
        match out.last_mut() {
            Some(last)
                if seg.integral.abs() < RUN_MERGE_TOL
                    || last.integral.abs() < RUN_MERGE_TOL
                    || (last.integral > 0.0) == (seg.integral > 0.0) =>
            {
                last.hi = seg.hi;
                last.integral += seg.integral;
            }
            _ => out.push(seg),
        }
    }
    // Absorbing a tiny run can make its two neighbors share a sign.
    let mut merged: Vec<SignRun> = Vec::with_capacity(out.len());
    for seg in out {
        match merged.last_mut() {
            Some(last) if (last.integral > 0.0) == (seg.integral > 0.0) || seg.integral.abs() < RUN_MERGE_TOL => {
                last.hi = seg.hi;
                last.integral += seg.integral;
            }
            _ => merged.push(seg),
        }
    }
    merged
}

/// Exact A_K value from a sequence of consecutive signed run integrals.
pub fn ak_from_run_integrals(runs: &[f64], k: usize) -> f64 {
    let mut prefix = Vec::with_capacity(runs.len() + 1);
    prefix.push(0.0);
    let mut acc = 0.0;
    for r in runs {
        acc += r;
        prefix.push(acc);
    }
    ak_from_prefix(&prefix, k).0
}

/// DP over boundary values `s` (a running integral sampled at candidate
/// endpoints). Returns the optimum and the chosen endpoint index pairs.
pub(crate) fn ak_from_prefix(s: &[f64], k: usize) -> (f64, Vec<(usize, usize)>) {
    if k == 0 || s.len() < 2 {
        return (0.0, Vec::new());
    }
    const NEG: f64 = f64::NEG_INFINITY;
    let n = s.len();
    // closed[c]: c intervals finished. open_pos/neg[c]: c-th interval open,
    // value stores acc ∓ S(a) so closing adds ±S(b).
    let mut closed = vec![NEG; k + 1];
    let mut open_pos = vec![NEG; k + 1];
    let mut open_neg = vec![NEG; k + 1];
    closed[0] = 0.0;
    // Back-pointers: for each (point, c) which transition produced the state.
    let mut closed_from = vec![vec![Back::Keep; k + 1]; n];
    let mut pos_from = vec![vec![Back::Keep; k + 1]; n];
    let mut neg_from = vec![vec![Back::Keep; k + 1]; n];
    for (j, &x) in s.iter().enumerate() {
        for c in 1..=k {
            let via_pos = open_pos[c] + x;
            let via_neg = open_neg[c] - x;
            if via_pos > closed[c] && via_pos >= via_neg {
                closed[c] = via_pos;
                closed_from[j][c] = Back::ClosePos;
            } else if via_neg > closed[c] {
                closed[c] = via_neg;
                closed_from[j][c] = Back::CloseNeg;
            }
        }
        for c in 1..=k {
            if closed[c - 1] == NEG {
                continue;
            }
            let p = closed[c - 1] - x;
            if p > open_pos[c] {
                open_pos[c] = p;
                pos_from[j][c] = Back::Open;
            }
            let q = closed[c - 1] + x;
            if q > open_neg[c] {
                open_neg[c] = q;
                neg_from[j][c] = Back::Open;
            }
        }
    }
    let (best_c, best) = closed
        .iter()
        .enumerate()
        .fold((0, 0.0), |(bc, bv), (c, &v)| if v > bv { (c, v) } else { (bc, bv) });
    // Walk the back-pointers to recover the intervals.
    let mut intervals = Vec::with_capacity(best_c);
    let mut c = best_c;
    let mut j = n - 1;
    let mut state = State::Closed;
    loop {
        match state {
            State::Closed => {
                if c == 0 {
                    break;
                }
                // The open state consumed at `j` was last written at or
                // before `j - 1`.
                match closed_from[j][c] {
                    Back::ClosePos => state = State::Pos(j),
                    Back::CloseNeg => state = State::Neg(j),
                    _ => {}
                }
                j -= 1;
            }
            State::Pos(end) | State::Neg(end) => {
                let from = if matches!(state, State::Pos(_)) { &pos_from } else { &neg_from };
                if from[j][c] == Back::Open {
                    intervals.push((j, end));
                    c -= 1;
                    state = State::Closed;
                    // The previous interval may close at this same point.
                    continue;
                }
                j -= 1;
            }
        }
    }
    intervals.reverse();
    (best, intervals)
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
enum Back {
    Keep,
    ClosePos,
    CloseNeg,
    Open,
}

#[derive(Clone, Copy)]
enum State {
    Closed,
    Pos(usize),
    Neg(usize),
}

/// A_K norm of a piecewise polynomial.
pub fn ak_norm(p: &PiecewisePolynomial, k: usize) -> f64 {
    let runs: Vec<f64> = sign_runs(p).iter().map(|r| r.integral).collect();
    ak_from_run_integrals(&runs, k)
}

/// A_K norm together with at most `k` maximizing intervals `(a, b)`.
pub fn ak_witness(p: &PiecewisePolynomial, k: usize) -> (f64, Vec<(f64, f64)>) {
    let runs = sign_runs(p);
    if runs.is_empty() {
        return (0.0, Vec::new());
    }
    let mut prefix = Vec::with_capacity(runs.len() + 1);
    let mut points = Vec::with_capacity(runs.len() + 1);
    prefix.push(0.0);
    points.push(runs[0].lo);
    let mut acc = 0.0;
    for r in &runs {
        acc += r.integral;
        prefix.push(acc);
        points.push(r.hi);
    }
    let (v, idx) = ak_from_prefix(&prefix, k);
    (v, idx.into_iter().map(|(a, b)| (points[a], points[b])).collect())
}

/// `‖p − q‖_{A_K}`.
pub fn ak_distance(p: &PiecewisePolynomial, q: &PiecewisePolynomial, k: usize) -> f64 {
    ak_norm(&p.subtract(q), k)
}

/// Test oracle: maximizes `Σ |∫_I p|` over `k` disjoint intervals whose
/// endpoints lie on a uniform grid of `grid` cells over the support (plus the
/// breakpoints). Cell integrals use Gauss–Legendre quadrature of pointwise
/// evaluation, and the search is the direct `O(k · n²)` recursion
/// `f_c(j) = max(f_c(j-1), max_{i ≤ j} f_{c-1}(i) + |F(j) - F(i)|)`.
pub fn ak_brute_force(p: &PiecewisePolynomial, k: usize, grid: usize) -> f64 {
    let Some(support) = p.support() else {
        return 0.0;
    };
    let mut pts: Vec<f64> = (0..=grid)
        .map(|i| support.lo + support.len() * i as f64 / grid as f64)
        .collect();
    pts.extend_from_slice(p.breakpoints());
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let (xs, ws) = gauss_legendre(16);
    let mut cum = Vec::with_capacity(pts.len());
    cum.push(0.0);
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let c = 0.5 * (a + b);
        let h = 0.5 * (b - a);
        let cell: f64 = xs.iter().zip(&ws).map(|(x, wt)| wt * p.evaluate(c + h * x)).sum::<f64>() * h;
        cum.push(cum.last().unwrap() + cell);
    }
    let n = cum.len();
    let mut prev = vec![0.0f64; n];
    for _ in 0..k {
        let mut cur = vec![0.0f64; n];
        for j in 0..n {
            let mut best = if j > 0 { cur[j - 1] } else { 0.0 };
            for i in 0..=j {
                best = best.max(prev[i] + (cum[j] - cum[i]).abs());
            }
            cur[j] = best;
        }
        prev = cur;
    }
    prev[n - 1]
}
