//! Sign-change root isolation for a single polynomial on a closed interval.
//!
//! Roots are isolated with Sturm-sequence counting and refined by bisection
//! on the sign of the polynomial itself. Only roots at which the polynomial
//! changes sign are reported; touching roots (even multiplicity) are not.

use super::polynomial::Polynomial;

/// Relative size below which a Sturm remainder is treated as the zero
/// polynomial (the sequence then ends at an approximate gcd).
const STURM_ZERO_REL: f64 = 1e-13;

const MAX_SPLIT_DEPTH: u32 = 80;

/// A Sturm chain `p, p', -rem(p, p'), ...`, each member scaled to unit
/// max-abs coefficient.
pub struct SturmSequence {
    chain: Vec<Polynomial>,
}

impl SturmSequence {
    pub fn new(p: &Polynomial) -> Self {
        let mut chain = Vec::with_capacity(p.degree() + 1);
        let normalize = |q: Polynomial| {
            let m = q.max_abs_coeff();
            if m > 0.0 {
                q.scale(1.0 / m)
            } else {
                q
            }
        };
        let p0 = normalize(p.clone());
        if p0.is_zero() {
            return Self { chain: vec![p0] };
        }
        let p1 = normalize(p0.derivative());
        chain.push(p0);
        if p1.is_zero() {
            return Self { chain };
        }
        chain.push(p1);
        loop {
            let n = chain.len();
            let r = chain[n - 2].rem(&chain[n - 1]);
            let scale = chain[n - 2].max_abs_coeff().max(chain[n - 1].max_abs_coeff());
            if r.max_abs_coeff() <= STURM_ZERO_REL * scale || chain[n - 1].degree() == 0 {
                break;
            }
            chain.push(normalize(r.scale(-1.0)));
        }
        Self { chain }
    }

    /// Number of sign variations of the chain evaluated at `x`.
    pub fn variations(&self, x: f64) -> usize {
        let mut count = 0;
        let mut last = 0.0f64;
        for q in &self.chain {
            let v = q.eval(x);
            if v != 0.0 {
                if last != 0.0 && (v > 0.0) != (last > 0.0) {
                    count += 1;
                }
                last = v;
            }
        }
        count
    }

    /// Number of distinct real roots in `(a, b]` according to the chain.
    pub fn count(&self, a: f64, b: f64) -> usize {
        self.variations(a).saturating_sub(self.variations(b))
    }
}

/// All points in the open interval `(lo, hi)` where `p` changes sign,
/// ascending, each located to within `tol`.
pub fn sign_change_roots(p: &Polynomial, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if p.degree() == 0 || hi <= lo {
        return out;
    }
    if p.degree() == 1 {
        let c = p.coeffs();
        let r = -c[0] / c[1];
        if r > lo && r < hi {
            out.push(r);
        }
        return out;
    }
    let sturm = SturmSequence::new(p);
    let tol = tol.max(f64::EPSILON * (lo.abs().max(hi.abs()) + 1.0));
    isolate(p, &sturm, lo, hi, tol, 0, &mut out);
    out.sort_by(f64::total_cmp);
    out.dedup_by(|a, b| (*a - *b).abs() <= tol);
    drop_noise_clusters(p, lo, hi, out)
}

/// Bound on the rounding error of evaluating `p` at `x` by Horner's rule.
fn eval_noise(p: &Polynomial, x: f64) -> f64 {
    let ax = x.abs();
    let mut acc = 0.0;
    for c in p.coeffs().iter().rev() {
        acc = acc * ax + c.abs();
    }
    4.0 * (p.degree() as f64 + 1.0) * f64::EPSILON * acc
}

/// Sign of `p` at the first point left (`dir = -1`) or right (`dir = 1`) of
/// `x`, no further than `limit`, where `|p|` exceeds the rounding noise.
fn resolved_sign(p: &Polynomial, x: f64, limit: f64, dir: f64) -> i8 {
    let span = (limit - x).abs();
    let mut d = f64::EPSILON * (x.abs() + 1.0);
    while d < span {
        let y = x + dir * d;
        let v = p.eval(y);
        if v.abs() > eval_noise(p, y) {
            return if v > 0.0 { 1 } else { -1 };
        }
        d *= 2.0;
    }
    let v = p.eval(limit);
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Roots separated only by values within rounding noise are grouped; each
/// group yields one root if the sign across it really changes, none
/// otherwise.
fn drop_noise_clusters(p: &Polynomial, lo: f64, hi: f64, roots: Vec<f64>) -> Vec<f64> {
    if roots.len() < 2 {
        return roots;
    }
    let mut groups: Vec<Vec<f64>> = Vec::new();
    for r in roots {
        if let Some(g) = groups.last_mut() {
            let prev = *g.last().expect("non-empty group");
            let mid = 0.5 * (prev + r);
            if p.eval(mid).abs() <= eval_noise(p, mid) {
                g.push(r);
                continue;
            }
        }
        groups.push(vec![r]);
    }
    let mut out = Vec::with_capacity(groups.len());
    for (i, g) in groups.iter().enumerate() {
        if g.len() == 1 {
            out.push(g[0]);
            continue;
        }
        let first = g[0];
        let last = g[g.len() - 1];
        let left_limit = if i == 0 { lo } else { 0.5 * (groups[i - 1][groups[i - 1].len() - 1] + first) };
        let right_limit = if i + 1 == groups.len() { hi } else { 0.5 * (last + groups[i + 1][0]) };
        let sl = resolved_sign(p, first, left_limit, -1.0);
        let sr = resolved_sign(p, last, right_limit, 1.0);
        if sl != 0 && sr != 0 && sl != sr {
            out.push(0.5 * (first + last));
        }
    }
    out
}

fn isolate(
    p: &Polynomial,
    sturm: &SturmSequence,
    lo: f64,
    hi: f64,
    tol: f64,
    depth: u32,
    out: &mut Vec<f64>,
) {
    let slo = p.sign_right_of(lo);
    let shi = p.sign_left_of(hi);
    let sign_change = slo != 0 && shi != 0 && slo != shi;
    let count = sturm.count(lo, hi);
    // A root sitting exactly on `hi` is counted in (lo, hi] but is not
    // interior; the one-sided signs above already account for it.
    if count == 0 && !sign_change {
        return;
    }
    if (count <= 1 && sign_change) || hi - lo <= tol || depth >= MAX_SPLIT_DEPTH {
        if sign_change {
            out.push(bisect(p, lo, hi, slo, tol));
        }
        return;
    }
    let mid = 0.5 * (lo + hi);
    if p.eval(mid) == 0.0 && p.sign_left_of(mid) * p.sign_right_of(mid) < 0 {
        out.push(mid);
    }
    isolate(p, sturm, lo, mid, tol, depth + 1, out);
    isolate(p, sturm, mid, hi, tol, depth + 1, out);
}

fn bisect(p: &Polynomial, mut lo: f64, mut hi: f64, sign_lo: i8, tol: f64) -> f64 {
    for _ in 0..200 {
        if hi - lo <= tol {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let v = p.eval(mid);
        if v == 0.0 {
            return mid;
        }
        if (v > 0.0) == (sign_lo > 0) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn poly(c: &[f64]) -> Polynomial {
        Polynomial::new(c.to_vec()).unwrap()
    }

    #[test]
    fn sturm_counts_distinct_roots() {
        // (x-1)(x+1)(x-0.5) = x^3 - 0.5x^2 - x + 0.5
        let p = poly(&[0.5, -1.0, -0.5, 1.0]);
        let s = SturmSequence::new(&p);
        assert_eq!(s.count(-2.0, 2.0), 3);
        assert_eq!(s.count(0.0, 2.0), 2);
        assert_eq!(s.count(1.5, 2.0), 0);
    }

    #[test]
    fn cubic_roots() {
        let p = poly(&[0.0, -1.0, 0.0, 1.0]);
        let r = sign_change_roots(&p, -2.0, 2.0, 1e-13);
        assert_eq!(r.len(), 3);
        for (got, want) in r.iter().zip([-1.0, 0.0, 1.0]) {
            assert!((got - want).abs() < 1e-12, "{got} vs {want}");
        }
    }

    #[test]
    fn double_root_is_not_reported() {
        // (x - 0.5)^2 (x + 0.25), exactly representable
        let p = poly(&[0.25, -1.0, 1.0]).mul(&poly(&[0.25, 1.0]));
        let r = sign_change_roots(&p, -1.0, 1.0, 1e-12);
        assert_eq!(r.len(), 1, "{r:?}");
        assert!((r[0] + 0.25).abs() < 1e-11);
    }

    #[test]
    fn clustered_roots() {
        // roots at 0.1, 0.1001, 0.9
        let p = poly(&[-0.1, 1.0])
            .mul(&poly(&[-0.1001, 1.0]))
            .mul(&poly(&[-0.9, 1.0]));
        let r = sign_change_roots(&p, -1.0, 1.0, 1e-13);
        assert_eq!(r.len(), 3, "{r:?}");
    }
}
