//! The A_K feasibility problem as a quantified system of polynomial
//! inequalities, with a byte-stable text form.
//!
//! ```text
//! ∀ a_1..a_K, b_1..b_K : ∃ d_1..d_s, ξ_1..ξ_K :
//!   valid(θ) ∧ breakpoints(θ, d) ∧ (¬guard(a, b) ∨ (bound(ξ) ∧ ⋁_{φ∈Φ} clause_φ))
//! ```
//!
//! * `guard` is `a_1 ≤ b_1 ≤ a_2 ≤ … ≤ b_K`: only disjoint, ordered interval
//!   families are quantified over.
//! * `Φ` holds the orderings of `{a, b, c, d}` in which the `a_j` are in
//!   order, the `b_j` are in order, `a_j` precedes `b_j` and the density
//!   breakpoints `c_i` are in order. `t = 2K + r + s`.
//! * `clause_φ` is `ordered(φ)` plus, for every interval `j`,
//!   `−ξ_j ≤ H(b_j) − H(a_j) ≤ ξ_j`, where `H` is the cumulative
//!   antiderivative of `p_dens − P_{ε,θ}`. Under a fixed `φ` the piece of `H`
//!   used at each point is fixed, so `H(b_j) − H(a_j)` is a polynomial in the
//!   variables: the sum of the piecewise integrals over `[a_j, b_j]`.
//! * `bound` is `Σ ξ_j ≤ ν ∧ ξ_j ≥ 0`.
//!
//! With these choices the ∃-block holds for given `(a, b)` exactly when
//! `Σ_j |∫_{a_j}^{b_j} (p_dens − P_{ε,θ})| ≤ ν`, so the system holds exactly
//! when `‖p_dens − P_{ε,θ}‖_{A_K} ≤ ν` and `θ` is in the domain.
//!
//! The text grammar is documented in `docs/formats.md`.

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use crate::ak::ak_witness;
use crate::error::FitError;
use crate::fit::solver::FitProblem;
use crate::mixture::Component;
use crate::poly::{PiecewisePolynomial, Polynomial};
use crate::shape::difference_from_target;

/// Default cap on `t` for materializing `Φ`.
pub const DEFAULT_T_CAP: usize = 14;

/// Absolute tolerance when evaluating `=` and `!=`.
pub const EQ_TOL: f64 = 1e-9;

const HEADER: &str = "gmmfit-system 1";

/// Comparison of an expression against zero.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Rel {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl Rel {
    fn symbol(self) -> &'static str {
        match self {
            Rel::Lt => "<",
            Rel::Le => "<=",
            Rel::Eq => "=",
            Rel::Ne => "!=",
            Rel::Ge => ">=",
            Rel::Gt => ">",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "<" => Rel::Lt,
            "<=" => Rel::Le,
            "=" => Rel::Eq,
            "!=" => Rel::Ne,
            ">=" => Rel::Ge,
            ">" => Rel::Gt,
            _ => return None,
        })
    }

    pub fn holds(self, v: f64) -> bool {
        match self {
            Rel::Lt => v < 0.0,
            Rel::Le => v <= 0.0,
            Rel::Eq => v.abs() <= EQ_TOL,
            Rel::Ne => v.abs() > EQ_TOL,
            Rel::Ge => v >= 0.0,
            Rel::Gt => v > 0.0,
        }
    }
}

/// Polynomial expression over the system variables.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Add(Vec<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Vec<Expr>),
    /// A named univariate polynomial applied to an expression.
    Call(usize, Box<Expr>),
}

impl Expr {
    fn sub(a: Expr, b: Expr) -> Expr {
        Expr::Sub(Box::new(a), Box::new(b))
    }

    pub fn eval(&self, env: &[f64], polys: &[NamedPoly]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => env[*i],
            Expr::Add(xs) => xs.iter().map(|e| e.eval(env, polys)).sum(),
            Expr::Sub(a, b) => a.eval(env, polys) - b.eval(env, polys),
            Expr::Mul(xs) => xs.iter().map(|e| e.eval(env, polys)).product(),
            Expr::Call(p, a) => polys[*p].poly.eval(a.eval(env, polys)),
        }
    }

    pub fn degree(&self, polys: &[NamedPoly]) -> usize {
        match self {
            Expr::Num(_) => 0,
            Expr::Var(_) => 1,
            Expr::Add(xs) => xs.iter().map(|e| e.degree(polys)).max().unwrap_or(0),
            Expr::Sub(a, b) => a.degree(polys).max(b.degree(polys)),
            Expr::Mul(xs) => xs.iter().map(|e| e.degree(polys)).sum(),
            Expr::Call(p, a) => polys[*p].poly.degree() * a.degree(polys),
        }
    }

    fn write(&self, out: &mut String, sys: &PolySystem) {
        match self {
            Expr::Num(v) => {
                let _ = write!(out, "{v:?}");
            }
            Expr::Var(i) => out.push_str(&sys.vars[*i].name),
            Expr::Add(xs) | Expr::Mul(xs) => {
                out.push_str(if matches!(self, Expr::Add(_)) { "(+" } else { "(*" });
                for e in xs {
                    out.push(' ');
                    e.write(out, sys);
                }
                out.push(')');
            }
            Expr::Sub(a, b) => {
                out.push_str("(- ");
                a.write(out, sys);
                out.push(' ');
                b.write(out, sys);
                out.push(')');
            }
            Expr::Call(p, a) => {
                out.push_str("(call ");
                out.push_str(&sys.polys[*p].name);
                out.push(' ');
                a.write(out, sys);
                out.push(')');
            }
        }
    }
}

/// `expr rel 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Predicate {
    pub rel: Rel,
    pub expr: Expr,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    Free,
    ForAll,
    Exists,
    Const,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub kind: VarKind,
    /// Value of a constant.
    pub value: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NamedPoly {
    pub name: String,
    pub poly: Polynomial,
}

/// One disjunct: an ordering `φ` and the predicates that must hold under it.
#[derive(Debug, Clone, PartialEq)]
pub struct Clause {
    /// Variable indices in `φ` order.
    pub order: Vec<usize>,
    pub preds: Vec<u32>,
}

/// Sizes of the system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemCounts {
    pub k: usize,
    pub ak_order: usize,
    /// Density breakpoints.
    pub r: usize,
    /// Approximant breakpoints.
    pub s: usize,
    pub t: usize,
    /// `|Φ|` (as a float; it can be astronomically large).
    pub clauses: f64,
    /// `R + s + 6 t^{t+1}`.
    pub predicate_bound: f64,
    /// Configured degree cap `D`.
    pub degree_cap: usize,
}

/// A quantified system of polynomial inequalities.
#[derive(Debug, Clone, PartialEq)]
pub struct PolySystem {
    pub counts: SystemCounts,
    pub nu: f64,
    pub vars: Vec<Variable>,
    pub polys: Vec<NamedPoly>,
    pub predicates: Vec<Predicate>,
    pub valid: Vec<u32>,
    pub breakpoints: Vec<u32>,
    pub guard: Vec<u32>,
    pub bound: Vec<u32>,
    /// `None` when `t` exceeded the cap and `Φ` was not materialized.
    pub clauses: Option<Vec<Clause>>,
}

/// `C(n, r)` as a float.
fn choose(n: usize, r: usize) -> f64 {
    (0..r).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Orderings of `K` a's and `K` b's with both in order and `a_j` before
/// `b_j`: the Catalan number.
fn catalan(k: usize) -> f64 {
    choose(2 * k, k) / (k as f64 + 1.0)
}

/// Interning key of a clause predicate.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
enum PredKey {
    Order(usize, usize),
    /// Interval, region and packed component context at `a`, then at `b`.
    Upper(usize, usize, u64, usize, u64),
    Lower(usize, usize, u64, usize, u64),
}

struct Builder {
    vars: Vec<Variable>,
    polys: Vec<NamedPoly>,
    predicates: Vec<Predicate>,
    interned: HashMap<PredKey, u32>,
}

impl Builder {
    fn var(&mut self, name: String, kind: VarKind, value: Option<f64>) -> usize {
        self.vars.push(Variable { name, kind, value });
        self.vars.len() - 1
    }

    fn poly(&mut self, name: String, poly: Polynomial) -> usize {
        self.polys.push(NamedPoly { name, poly });
        self.polys.len() - 1
    }

    fn pred_keyed(&mut self, key: PredKey, make: impl FnOnce() -> Predicate) -> u32 {
        if let Some(&id) = self.interned.get(&key) {
            return id;
        }
        let id = self.predicates.len() as u32;
        self.predicates.push(make());
        self.interned.insert(key, id);
        id
    }

    fn pred(&mut self, rel: Rel, expr: Expr) -> u32 {
        let id = self.predicates.len() as u32;
        self.predicates.push(Predicate { rel, expr });
        id
    }
}

/// Token classes of a permutation element.
#[derive(Clone, Copy)]
enum Token {
    A(usize),
    B(usize),
    C(usize),
    D(usize),
}

/// Encodes `‖target − P_{ε,θ}‖_{A_K} ≤ ν` over the problem's domain.
pub fn encode_system(problem: &FitProblem, nu: f64, t_cap: usize) -> Result<PolySystem, FitError> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(FitError::Problem(format!("threshold {nu} must be positive")));
    }
    let k = problem.k();
    let kk = problem.ak_order;
    let target = &problem.target;
    let cs: Vec<f64> = target.breakpoints().to_vec();
    let r = cs.len();
    let standard = problem.shape.standard();
    let betas: Vec<f64> = standard.breakpoints().to_vec();
    let nb = betas.len();
    let s = k * nb;
    let t = 2 * kk + r + s;

    let mut b = Builder {
        vars: Vec::new(),
        polys: Vec::new(),
        predicates: Vec::new(),
        interned: HashMap::new(),
    };
    let w: Vec<usize> = (1..=k).map(|i| b.var(format!("w_{i}"), VarKind::Free, None)).collect();
    let mu: Vec<usize> = (1..=k).map(|i| b.var(format!("mu_{i}"), VarKind::Free, None)).collect();
    let tau: Vec<usize> = (1..=k).map(|i| b.var(format!("tau_{i}"), VarKind::Free, None)).collect();
    let a: Vec<usize> = (1..=kk).map(|j| b.var(format!("a_{j}"), VarKind::ForAll, None)).collect();
    let bb: Vec<usize> = (1..=kk).map(|j| b.var(format!("b_{j}"), VarKind::ForAll, None)).collect();
    let d: Vec<usize> = (1..=s).map(|i| b.var(format!("d_{i}"), VarKind::Exists, None)).collect();
    let xi: Vec<usize> = (1..=kk).map(|j| b.var(format!("xi_{j}"), VarKind::Exists, None)).collect();
    let c: Vec<usize> = cs
        .iter()
        .enumerate()
        .map(|(i, &v)| b.var(format!("c_{}", i + 1), VarKind::Const, Some(v)))
        .collect();

    // Cumulative antiderivative of the density: F_0 on the left tail, F_i on
    // piece i, F_r on the right tail.
    let mut f_ids = Vec::with_capacity(r.max(1));
    let mut cum = 0.0;
    f_ids.push(b.poly("F_0".into(), Polynomial::zero()));
    for i in 0..target.piece_count() {
        let anti = target.global_piece(i).antiderivative();
        let shift = cum - anti.eval(cs[i]);
        let f = anti.add(&Polynomial::constant(shift));
        cum += target.integrate_unchecked(cs[i], cs[i + 1]);
        f_ids.push(b.poly(format!("F_{}", i + 1), f));
    }
    if r > 0 {
        f_ids.push(b.poly(format!("F_{r}"), Polynomial::constant(cum)));
    }
    // Cumulative antiderivative of the standard approximant.
    let mut s_ids = Vec::with_capacity(nb + 1);
    let mut scum = 0.0;
    s_ids.push(b.poly("S_0".into(), Polynomial::zero()));
    for q in 0..standard.piece_count() {
        let anti = standard.global_piece(q).antiderivative();
        let shift = scum - anti.eval(betas[q]);
        scum += standard.integrate_unchecked(betas[q], betas[q + 1]);
        s_ids.push(b.poly(format!("S_{}", q + 1), anti.add(&Polynomial::constant(shift))));
    }
    s_ids.push(b.poly(format!("S_{nb}"), Polynomial::constant(scum)));

    // valid-parameters
    let mut valid = Vec::new();
    for i in 0..k {
        let dom = &problem.components[i];
        valid.push(b.pred(Rel::Ge, Expr::sub(Expr::Var(w[i]), Expr::Num(problem.min_weight))));
        valid.push(b.pred(Rel::Ge, Expr::sub(Expr::Var(tau[i]), Expr::Num(dom.precision_lo))));
        valid.push(b.pred(Rel::Le, Expr::sub(Expr::Var(tau[i]), Expr::Num(dom.precision_hi))));
        // |μ − center| ≤ radius + spread/τ, multiplied through by τ > 0.
        let reach = Expr::Add(vec![Expr::Mul(vec![Expr::Num(dom.radius), Expr::Var(tau[i])]), Expr::Num(dom.spread)]);
        let offset = Expr::Mul(vec![Expr::Var(tau[i]), Expr::sub(Expr::Var(mu[i]), Expr::Num(dom.center))]);
        valid.push(b.pred(Rel::Le, Expr::sub(offset.clone(), reach.clone())));
        valid.push(b.pred(Rel::Ge, Expr::Add(vec![offset, reach])));
    }
    valid.push(b.pred(
        Rel::Eq,
        Expr::sub(Expr::Add(w.iter().map(|&i| Expr::Var(i)).collect()), Expr::Num(1.0)),
    ));

    // correct-breakpoints: τ d − τ μ − β = 0.
    let mut breakpoints = Vec::with_capacity(s);
    for i in 0..k {
        for (q, &beta) in betas.iter().enumerate() {
            let dv = d[i * nb + q];
            let e = Expr::sub(
                Expr::Mul(vec![Expr::Var(tau[i]), Expr::sub(Expr::Var(dv), Expr::Var(mu[i]))]),
                Expr::Num(beta),
            );
            breakpoints.push(b.pred(Rel::Eq, e));
        }
    }

    // guard: a_1 ≤ b_1 ≤ a_2 ≤ … ≤ b_K.
    let mut chain = Vec::with_capacity(2 * kk);
    for j in 0..kk {
        chain.push(a[j]);
        chain.push(bb[j]);
    }
    let guard: Vec<u32> = chain
        .windows(2)
        .map(|p| b.pred(Rel::Le, Expr::sub(Expr::Var(p[0]), Expr::Var(p[1]))))
        .collect();

    // bound: Σ ξ ≤ ν, ξ ≥ 0.
    let mut bound = vec![b.pred(
        Rel::Le,
        Expr::sub(Expr::Add(xi.iter().map(|&x| Expr::Var(x)).collect()), Expr::Num(nu)),
    )];
    bound.extend(xi.iter().map(|&x| b.pred(Rel::Ge, Expr::Var(x))));

    let clause_count = catalan(kk) * choose(t, 2 * kk) * choose(t - 2 * kk, r) * (1..=s).map(|x| x as f64).product::<f64>();
    let degree_cap = (target.max_degree() + 1).max(2 * (standard.max_degree() + 1) + 1);
    let counts = SystemCounts {
        k,
        ak_order: kk,
        r,
        s,
        t,
        clauses: clause_count,
        predicate_bound: (valid.len() + s) as f64 + 6.0 * (t as f64).powi(t as i32 + 1),
        degree_cap,
    };

    let clauses = if t > t_cap {
        None
    } else {
        let vars = ClauseVars {
            a: &a,
            b: &bb,
            c: &c,
            d: &d,
            w: &w,
            mu: &mu,
            tau: &tau,
            xi: &xi,
            f_ids: &f_ids,
            s_ids: &s_ids,
            nb,
        };
        let mut out = Vec::new();
        let mut seq = Vec::with_capacity(t);
        let mut used_d = vec![false; s];
        enumerate_orders(&mut seq, (0, 0, 0), &mut used_d, kk, r, s, &mut |order| {
            out.push(build_clause(&mut b, &vars, order));
        });
        debug_assert_eq!(out.len() as f64, clause_count);
        Some(out)
    };

    let sys = PolySystem {
        counts,
        nu,
        vars: b.vars,
        polys: b.polys,
        predicates: b.predicates,
        valid,
        breakpoints,
        guard,
        bound,
        clauses,
    };
    assert!((sys.predicates.len() as f64) < sys.counts.predicate_bound, "predicate count bound");
    assert!(sys.max_degree() <= sys.counts.degree_cap, "predicate degree bound");
    Ok(sys)
}

struct ClauseVars<'a> {
    a: &'a [usize],
    b: &'a [usize],
    c: &'a [usize],
    d: &'a [usize],
    w: &'a [usize],
    mu: &'a [usize],
    tau: &'a [usize],
    xi: &'a [usize],
    f_ids: &'a [usize],
    s_ids: &'a [usize],
    nb: usize,
}

/// Enumerates `Φ` in a fixed order: at each position try the next `a`, the
/// next `b` (if its `a` is placed), the next `c`, then each unused `d`.
fn enumerate_orders(
    seq: &mut Vec<Token>,
    placed: (usize, usize, usize),
    used_d: &mut [bool],
    kk: usize,
    r: usize,
    s: usize,
    emit: &mut dyn FnMut(&[Token]),
) {
    let (na, nbb, nc) = placed;
    if seq.len() == 2 * kk + r + s {
        emit(seq);
        return;
    }
    if na < kk {
        seq.push(Token::A(na));
        enumerate_orders(seq, (na + 1, nbb, nc), used_d, kk, r, s, emit);
        seq.pop();
    }
    if nbb < na {
        seq.push(Token::B(nbb));
        enumerate_orders(seq, (na, nbb + 1, nc), used_d, kk, r, s, emit);
        seq.pop();
    }
    if nc < r {
        seq.push(Token::C(nc));
        enumerate_orders(seq, (na, nbb, nc + 1), used_d, kk, r, s, emit);
        seq.pop();
    }
    for i in 0..s {
        if !used_d[i] {
            used_d[i] = true;
            seq.push(Token::D(i));
            enumerate_orders(seq, placed, used_d, kk, r, s, emit);
            seq.pop();
            used_d[i] = false;
        }
    }
}

fn build_clause(b: &mut Builder, v: &ClauseVars, order: &[Token]) -> Clause {
    let k = v.w.len();
    let vars: Vec<usize> = order
        .iter()
        .map(|tok| match *tok {
            Token::A(j) => v.a[j],
            Token::B(j) => v.b[j],
            Token::C(i) => v.c[i],
            Token::D(i) => v.d[i],
        })
        .collect();
    let mut preds = Vec::with_capacity(order.len() - 1 + 2 * v.xi.len());
    for p in vars.windows(2) {
        let (x, y) = (p[0], p[1]);
        preds.push(b.pred_keyed(PredKey::Order(x, y), || Predicate {
            rel: Rel::Le,
            expr: Expr::sub(Expr::Var(x), Expr::Var(y)),
        }));
    }
    // Context of each interval endpoint: density region and, per component,
    // the number of its breakpoints placed before it (packed base nb + 1).
    let nkk = v.xi.len();
    let mut ctx_a = vec![(0usize, 0u64); nkk];
    let mut ctx_b = vec![(0usize, 0u64); nkk];
    let mut region = 0;
    let mut comp = vec![0usize; k];
    let pack = |c: &[usize]| c.iter().fold(0u64, |acc, &n| acc * (v.nb as u64 + 1) + n as u64);
    for tok in order {
        match *tok {
            Token::A(j) => ctx_a[j] = (region, pack(&comp)),
            Token::B(j) => ctx_b[j] = (region, pack(&comp)),
            Token::C(_) => region += 1,
            Token::D(i) => comp[i / v.nb] += 1,
        }
    }
    let unpack = |mut p: u64| {
        let mut c = vec![0usize; k];
        for slot in c.iter_mut().rev() {
            *slot = (p % (v.nb as u64 + 1)) as usize;
            p /= v.nb as u64 + 1;
        }
        c
    };
    let h = |x: usize, reg: usize, packed: u64| -> Expr {
        let density = Expr::Call(v.f_ids[reg], Box::new(Expr::Var(x)));
        let comps: Vec<Expr> = unpack(packed)
            .iter()
            .enumerate()
            .filter(|(_, &n)| n > 0)
            .map(|(i, &n)| {
                let arg = Expr::Mul(vec![Expr::Var(v.tau[i]), Expr::sub(Expr::Var(x), Expr::Var(v.mu[i]))]);
                Expr::Mul(vec![Expr::Var(v.w[i]), Expr::Call(v.s_ids[n], Box::new(arg))])
            })
            .collect();
        if comps.is_empty() {
            density
        } else {
            Expr::sub(density, Expr::Add(comps))
        }
    };
    for j in 0..nkk {
        let (ra, ca) = ctx_a[j];
        let (rb, cb) = ctx_b[j];
        let xj = v.xi[j];
        let integral = || Expr::sub(h(v.b[j], rb, cb), h(v.a[j], ra, ca));
        preds.push(b.pred_keyed(PredKey::Upper(j, ra, ca, rb, cb), || Predicate {
            rel: Rel::Le,
            expr: Expr::sub(integral(), Expr::Var(xj)),
        }));
        preds.push(b.pred_keyed(PredKey::Lower(j, ra, ca, rb, cb), || Predicate {
            rel: Rel::Ge,
            expr: Expr::Add(vec![integral(), Expr::Var(xj)]),
        }));
    }
    Clause { order: vars, preds }
}

impl PolySystem {
    pub fn max_degree(&self) -> usize {
        self.predicates.iter().map(|p| p.expr.degree(&self.polys)).max().unwrap_or(0)
    }

    pub fn predicate_count(&self) -> usize {
        self.predicates.len()
    }

    fn var_index(&self, name: &str) -> Option<usize> {
        self.vars.iter().position(|v| v.name == name)
    }

    /// Deterministic text form.
    pub fn export(&self) -> String {
        let mut out = String::new();
        let c = &self.counts;
        let _ = writeln!(out, "{HEADER}");
        let _ = writeln!(
            out,
            "counts k={} K={} r={} s={} t={} clauses={:?} predicate_bound={:?} degree_cap={}",
            c.k, c.ak_order, c.r, c.s, c.t, c.clauses, c.predicate_bound, c.degree_cap
        );
        let _ = writeln!(out, "nu {:?}", self.nu);
        for (kind, label) in [
            (VarKind::Free, "free"),
            (VarKind::ForAll, "forall"),
            (VarKind::Exists, "exists"),
        ] {
            out.push_str(label);
            for v in self.vars.iter().filter(|v| v.kind == kind) {
                out.push(' ');
                out.push_str(&v.name);
            }
            out.push('\n');
        }
        for v in self.vars.iter().filter(|v| v.kind == VarKind::Const) {
            let _ = writeln!(out, "const {} {:?}", v.name, v.value.expect("constant value"));
        }
        for p in &self.polys {
            let _ = write!(out, "poly {}", p.name);
            for c in p.poly.coeffs() {
                let _ = write!(out, " {c:?}");
            }
            out.push('\n');
        }
        for (i, p) in self.predicates.iter().enumerate() {
            let _ = write!(out, "pred {i} {} ", p.rel.symbol());
            p.expr.write(&mut out, self);
            out.push('\n');
        }
        for (label, ids) in [
            ("valid", &self.valid),
            ("breakpoints", &self.breakpoints),
            ("guard", &self.guard),
            ("bound", &self.bound),
        ] {
            out.push_str(label);
            for id in ids.iter() {
                let _ = write!(out, " {id}");
            }
            out.push('\n');
        }
        out.push_str("tree (and (all valid) (all breakpoints) (or (not (all guard)) (and (all bound) (any clauses))))\n");
        match &self.clauses {
            None => out.push_str("clauses unmaterialized\n"),
            Some(cl) => {
                let _ = writeln!(out, "clauses {}", cl.len());
                for c in cl {
                    out.push_str("clause");
                    for &v in &c.order {
                        out.push(' ');
                        out.push_str(&self.vars[v].name);
                    }
                    out.push_str(" :");
                    for id in &c.preds {
                        let _ = write!(out, " {id}");
                    }
                    out.push('\n');
                }
            }
        }
        out.push_str("end\n");
        out
    }

    /// Parses the text form produced by [`PolySystem::export`].
    pub fn parse(text: &str) -> Result<Self, FitError> {
        Parser::new(text).run()
    }

    fn env_with_theta(&self, theta: &[Component]) -> Result<Vec<f64>, FitError> {
        let k = self.counts.k;
        if theta.len() != k {
            return Err(FitError::Problem(format!("expected {k} components, got {}", theta.len())));
        }
        let mut env: Vec<f64> = self.vars.iter().map(|v| v.value.unwrap_or(0.0)).collect();
        for (i, c) in theta.iter().enumerate() {
            for (name, val) in [("w", c.weight), ("mu", c.mean), ("tau", c.precision)] {
                let idx = self
                    .var_index(&format!("{name}_{}", i + 1))
                    .ok_or_else(|| FitError::Problem(format!("missing variable {name}_{}", i + 1)))?;
                env[idx] = val;
            }
        }
        Ok(env)
    }

    fn holds(&self, ids: &[u32], env: &[f64]) -> bool {
        ids.iter().all(|&i| {
            let p = &self.predicates[i as usize];
            p.rel.holds(p.expr.eval(env, &self.polys))
        })
    }

    /// The single variable of `kind` in `expr` that `pred` is linear in,
    /// solved from evaluations at 0 and 1 (other variables fixed by `env`):
    /// returns `(value at 0, slope)`.
    fn linear_in(&self, id: u32, var: usize, env: &mut [f64]) -> (f64, f64) {
        let e = &self.predicates[id as usize].expr;
        let saved = env[var];
        env[var] = 0.0;
        let g0 = e.eval(env, &self.polys);
        env[var] = 1.0;
        let g1 = e.eval(env, &self.polys);
        env[var] = saved;
        (g0, g1 - g0)
    }

    fn exists_vars(&self, prefix: &str) -> Vec<usize> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(_, v)| v.kind == VarKind::Exists && v.name.starts_with(prefix))
            .map(|(i, _)| i)
            .collect()
    }

    /// Evaluates the formula at free variables `theta` and universal
    /// variables `intervals` (`K` ordered disjoint intervals), choosing the
    /// existential variables: each `d_i` solves its breakpoint equation and
    /// each `ξ_j` is the smallest value its clause predicates allow.
    pub fn holds_at(&self, theta: &[Component], intervals: &[(f64, f64)]) -> Result<bool, FitError> {
        let clauses = self.clauses.as_ref().ok_or(FitError::TooLarge {
            t: self.counts.t,
            cap: self.counts.t.saturating_sub(1),
        })?;
        let kk = self.counts.ak_order;
        if intervals.len() != kk {
            return Err(FitError::Problem(format!("need {kk} intervals, got {}", intervals.len())));
        }
        let mut env = self.env_with_theta(theta)?;
        if !self.holds(&self.valid, &env) {
            return Ok(false);
        }
        for j in 0..kk {
            let a = self.var_index(&format!("a_{}", j + 1)).expect("a variable");
            let b = self.var_index(&format!("b_{}", j + 1)).expect("b variable");
            env[a] = intervals[j].0;
            env[b] = intervals[j].1;
        }
        let d_vars = self.exists_vars("d_");
        for (&id, &dv) in self.breakpoints.iter().zip(&d_vars) {
            let (g0, slope) = self.linear_in(id, dv, &mut env);
            if slope == 0.0 {
                return Ok(false);
            }
            env[dv] = -g0 / slope;
        }
        if !self.holds(&self.breakpoints, &env) {
            return Ok(false);
        }
        if !self.holds(&self.guard, &env) {
            return Ok(true);
        }
        let xi_vars = self.exists_vars("xi_");
        for idx in self.matching_clauses(clauses, &env) {
            let clause = &clauses[idx];
            let mut trial = env.clone();
            for &x in &xi_vars {
                trial[x] = 0.0;
            }
            for &id in &clause.preds {
                for &x in &xi_vars {
                    let (g0, slope) = self.linear_in(id, x, &mut trial);
                    if slope == 0.0 {
                        continue;
                    }
                    // g(ξ) = g0 + slope·ξ must satisfy the relation.
                    let need = -g0 / slope;
                    let rel = self.predicates[id as usize].rel;
                    let lower = matches!((rel, slope > 0.0), (Rel::Ge | Rel::Gt, true) | (Rel::Le | Rel::Lt, false));
                    if lower {
                        trial[x] = trial[x].max(need);
                    }
                }
            }
            if self.holds(&self.bound, &trial) && self.holds(&clause.preds, &trial) {
                return Ok(true);
            }
        }
        Ok(false)
    }

    /// Clauses whose ordering is consistent with the current values; ties
    /// admit several.
    fn matching_clauses(&self, clauses: &[Clause], env: &[f64]) -> Vec<usize> {
        let mut out = Vec::new();
        let Some(first) = clauses.first() else {
            return out;
        };
        let mut items: Vec<usize> = first.order.clone();
        items.sort_by(|&x, &y| env[x].total_cmp(&env[y]).then(x.cmp(&y)));
        let index: HashMap<&[usize], usize> = self.clause_index(clauses);
        // Enumerate orderings within groups of equal values.
        let mut groups: Vec<Vec<usize>> = Vec::new();
        for v in items {
            match groups.last_mut() {
                Some(g) if env[g[0]] == env[v] => g.push(v),
                _ => groups.push(vec![v]),
            }
        }
        let mut seq = Vec::with_capacity(first.order.len());
        tie_orders(&groups, 0, &mut seq, &mut |s| {
            if let Some(&i) = index.get(s) {
                out.push(i);
            }
        });
        out.sort_unstable();
        out
    }

    fn clause_index<'c>(&self, clauses: &'c [Clause]) -> HashMap<&'c [usize], usize> {
        clauses.iter().enumerate().map(|(i, c)| (c.order.as_slice(), i)).collect()
    }

    /// Semantic check of the whole system at `theta`: the universal block is
    /// instantiated at the maximizing A_K intervals of the difference (padded
    /// with empty intervals beyond every breakpoint), which is the worst case
    /// for every clause.
    pub fn satisfied_by(&self, theta: &[Component], problem: &FitProblem) -> Result<bool, FitError> {
        // The witness is only needed past the parameter constraints.
        if !self.holds(&self.valid, &self.env_with_theta(theta)?) {
            return Ok(false);
        }
        let comps: Vec<(f64, f64, f64)> = theta.iter().map(|c| (c.weight, c.mean, c.precision)).collect();
        let diff: PiecewisePolynomial = difference_from_target(&problem.target, &comps, &problem.shape);
        let (_, mut witness) = ak_witness(&diff, self.counts.ak_order);
        witness.sort_by(|x, y| x.0.total_cmp(&y.0));
        let far = diff.support().map_or(0.0, |s| s.hi).max(
            self.vars
                .iter()
                .filter_map(|v| v.value)
                .fold(0.0, f64::max),
        ) + 1.0;
        while witness.len() < self.counts.ak_order {
            let x = far + witness.len() as f64;
            witness.push((x, x));
        }
        self.holds_at(theta, &witness)
    }
}

fn tie_orders(groups: &[Vec<usize>], g: usize, seq: &mut Vec<usize>, emit: &mut dyn FnMut(&[usize])) {
    if g == groups.len() {
        emit(seq);
        return;
    }
    let group = &groups[g];
    if group.len() == 1 {
        seq.push(group[0]);
        tie_orders(groups, g + 1, seq, emit);
        seq.pop();
        return;
    }
    let mut perm = group.clone();
    permute(&mut perm, 0, &mut |p| {
        let n = seq.len();
        seq.extend_from_slice(p);
        tie_orders(groups, g + 1, seq, emit);
        seq.truncate(n);
    });
}

fn permute(items: &mut [usize], i: usize, emit: &mut dyn FnMut(&[usize])) {
    if i == items.len() {
        emit(items);
        return;
    }
    for j in i..items.len() {
        items.swap(i, j);
        permute(items, i + 1, emit);
        items.swap(i, j);
    }
}

impl fmt::Display for PolySystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.export())
    }
}

struct Parser<'t> {
    lines: std::iter::Enumerate<std::str::Lines<'t>>,
    line: usize,
}

impl<'t> Parser<'t> {
    fn new(text: &'t str) -> Self {
        Self {
            lines: text.lines().enumerate(),
            line: 0,
        }
    }

    fn err(&self, msg: impl Into<String>) -> FitError {
        FitError::Parse {
            line: self.line,
            msg: msg.into(),
        }
    }

    fn next(&mut self) -> Result<&'t str, FitError> {
        match self.lines.next() {
            Some((i, l)) => {
                self.line = i + 1;
                Ok(l)
            }
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn keyword<'a>(&self, line: &'a str, kw: &str) -> Result<std::str::SplitWhitespace<'a>, FitError> {
        let mut it = line.split_whitespace();
        if it.next() != Some(kw) {
            return Err(self.err(format!("expected `{kw}`")));
        }
        Ok(it)
    }

    fn num<T: std::str::FromStr>(&self, s: Option<&str>) -> Result<T, FitError> {
        s.and_then(|x| x.parse().ok()).ok_or_else(|| self.err(format!("bad number {s:?}")))
    }

    fn ids(&self, it: std::str::SplitWhitespace<'_>) -> Result<Vec<u32>, FitError> {
        it.map(|x| self.num(Some(x))).collect()
    }

    fn run(mut self) -> Result<PolySystem, FitError> {
        if self.next()? != HEADER {
            return Err(self.err("missing header"));
        }
        let line = self.next()?;
        let mut kv = HashMap::new();
        for tok in self.keyword(line, "counts")? {
            let (key, val) = tok.split_once('=').ok_or_else(|| self.err("expected key=value"))?;
            kv.insert(key, val);
        }
        let counts = SystemCounts {
            k: self.num(kv.get("k").copied())?,
            ak_order: self.num(kv.get("K").copied())?,
            r: self.num(kv.get("r").copied())?,
            s: self.num(kv.get("s").copied())?,
            t: self.num(kv.get("t").copied())?,
            clauses: self.num(kv.get("clauses").copied())?,
            predicate_bound: self.num(kv.get("predicate_bound").copied())?,
            degree_cap: self.num(kv.get("degree_cap").copied())?,
        };
        let line = self.next()?;
        let nu: f64 = self.num(self.keyword(line, "nu")?.next())?;
        let mut vars = Vec::new();
        for (kind, label) in [
            (VarKind::Free, "free"),
            (VarKind::ForAll, "forall"),
            (VarKind::Exists, "exists"),
        ] {
            let line = self.next()?;
            for name in self.keyword(line, label)? {
                vars.push(Variable {
                    name: name.to_string(),
                    kind,
                    value: None,
                });
            }
        }
        let mut polys = Vec::new();
        let mut predicates = Vec::new();
        let mut line = self.next()?;
        while line.starts_with("const ") {
            let mut it = self.keyword(line, "const")?;
            let name = it.next().ok_or_else(|| self.err("missing constant name"))?.to_string();
            let value: f64 = self.num(it.next())?;
            vars.push(Variable {
                name,
                kind: VarKind::Const,
                value: Some(value),
            });
            line = self.next()?;
        }
        let var_ids: HashMap<String, usize> = vars.iter().enumerate().map(|(i, v)| (v.name.clone(), i)).collect();
        while line.starts_with("poly ") {
            let mut it = self.keyword(line, "poly")?;
            let name = it.next().ok_or_else(|| self.err("missing polynomial name"))?.to_string();
            let coeffs: Vec<f64> = it.map(|x| self.num(Some(x))).collect::<Result<_, _>>()?;
            let poly = Polynomial::new(coeffs).map_err(|e| self.err(e.to_string()))?;
            polys.push(NamedPoly { name, poly });
            line = self.next()?;
        }
        let poly_ids: HashMap<String, usize> = polys.iter().enumerate().map(|(i, p)| (p.name.clone(), i)).collect();
        while line.starts_with("pred ") {
            let rest = &line[5..];
            let (id, rest) = rest.split_once(' ').ok_or_else(|| self.err("bad predicate"))?;
            if self.num::<usize>(Some(id))? != predicates.len() {
                return Err(self.err("predicates out of order"));
            }
            let (rel, expr) = rest.split_once(' ').ok_or_else(|| self.err("bad predicate"))?;
            let rel = Rel::parse(rel).ok_or_else(|| self.err(format!("unknown relation {rel}")))?;
            let expr = ExprParser {
                toks: tokenize(expr),
                pos: 0,
                vars: &var_ids,
                polys: &poly_ids,
            }
            .parse_all()
            .map_err(|m| self.err(m))?;
            predicates.push(Predicate { rel, expr });
            line = self.next()?;
        }
        let mut sections = Vec::new();
        for label in ["valid", "breakpoints", "guard", "bound"] {
            if sections.len() > 0 {
                line = self.next()?;
            }
            sections.push(self.ids(self.keyword(line, label)?)?);
        }
        let line = self.next()?;
        if !line.starts_with("tree ") {
            return Err(self.err("expected `tree`"));
        }
        let line = self.next()?;
        let mut it = self.keyword(line, "clauses")?;
        let clauses = match it.next() {
            Some("unmaterialized") => None,
            n => {
                let n: usize = self.num(n)?;
                let mut out = Vec::with_capacity(n);
                for _ in 0..n {
                    let line = self.next()?;
                    let (order, preds) = line.split_once(" : ").ok_or_else(|| self.err("bad clause"))?;
                    let order = self
                        .keyword(order, "clause")?
                        .map(|name| var_ids.get(name).copied().ok_or_else(|| self.err(format!("unknown variable {name}"))))
                        .collect::<Result<Vec<_>, _>>()?;
                    let preds = self.ids(preds.split_whitespace())?;
                    out.push(Clause { order, preds });
                }
                Some(out)
            }
        };
        if self.next()? != "end" {
            return Err(self.err("expected `end`"));
        }
        let mut it = sections.into_iter();
        let sys = PolySystem {
            counts,
            nu,
            vars,
            polys,
            predicates,
            valid: it.next().expect("valid"),
            breakpoints: it.next().expect("breakpoints"),
            guard: it.next().expect("guard"),
            bound: it.next().expect("bound"),
            clauses,
        };
        let n = sys.predicates.len() as u32;
        let all_ids = sys
            .valid
            .iter()
            .chain(&sys.breakpoints)
            .chain(&sys.guard)
            .chain(&sys.bound)
            .chain(sys.clauses.iter().flatten().flat_map(|c| c.preds.iter()));
        if all_ids.clone().any(|&i| i >= n) {
            return Err(FitError::Parse {
                line: 0,
                msg: "predicate id out of range".into(),
            });
        }
        Ok(sys)
    }
}

fn tokenize(s: &str) -> Vec<&str> {
    let mut out = Vec::new();
    let mut start = None;
    for (i, ch) in s.char_indices() {
        match ch {
            '(' | ')' => {
                if let Some(st) = start.take() {
                    out.push(&s[st..i]);
                }
                out.push(&s[i..i + 1]);
            }
            c if c.is_whitespace() => {
                if let Some(st) = start.take() {
                    out.push(&s[st..i]);
                }
            }
            _ => {
                if start.is_none() {
                    start = Some(i);
                }
            }
        }
    }
    if let Some(st) = start {
        out.push(&s[st..]);
    }
    out
}

struct ExprParser<'a> {
    toks: Vec<&'a str>,
    pos: usize,
    vars: &'a HashMap<String, usize>,
    polys: &'a HashMap<String, usize>,
}

impl<'a> ExprParser<'a> {
    fn parse_all(mut self) -> Result<Expr, String> {
        let e = self.expr()?;
        if self.pos != self.toks.len() {
            return Err("trailing tokens in expression".into());
        }
        Ok(e)
    }

    fn bump(&mut self) -> Result<&'a str, String> {
        let t = self.toks.get(self.pos).copied().ok_or("unexpected end of expression")?;
        self.pos += 1;
        Ok(t)
    }

    fn expr(&mut self) -> Result<Expr, String> {
        let t = self.bump()?;
        if t != "(" {
            if let Some(&i) = self.vars.get(t) {
                return Ok(Expr::Var(i));
            }
            return t.parse::<f64>().map(Expr::Num).map_err(|_| format!("unknown atom {t}"));
        }
        let op = self.bump()?;
        let e = match op {
            "call" => {
                let name = self.bump()?;
                let p = *self.polys.get(name).ok_or_else(|| format!("unknown polynomial {name}"))?;
                Expr::Call(p, Box::new(self.expr()?))
            }
            "-" => {
                let a = self.expr()?;
                let b = self.expr()?;
                Expr::sub(a, b)
            }
            "+" | "*" => {
                let mut args = Vec::new();
                while self.toks.get(self.pos) != Some(&")") {
                    args.push(self.expr()?);
                }
                if op == "+" {
                    Expr::Add(args)
                } else {
                    Expr::Mul(args)
                }
            }
            _ => return Err(format!("unknown operator {op}")),
        };
        if self.bump()? != ")" {
            return Err("expected `)`".into());
        }
        Ok(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::solver::ComponentDomain;
    use crate::mixture::Family;
    use crate::shape::FamilyShape;

    fn problem(pieces: usize) -> FitProblem {
        let shape = FamilyShape::for_family(Family::Gaussian, 0.1).unwrap();
        let bps: Vec<f64> = (0..=pieces).map(|i| -1.0 + 2.0 * i as f64 / pieces as f64).collect();
        let polys = (0..pieces).map(|_| Polynomial::new(vec![0.5, -0.1, 0.05]).unwrap()).collect();
        let target = PiecewisePolynomial::new(bps, polys).unwrap();
        FitProblem::new(target, shape, 4, vec![ComponentDomain::well_behaved(0.05, 20.0)], 0.0).unwrap()
    }

    #[test]
    fn counts_match_the_construction() {
        let sys = encode_system(&problem(1), 0.3, DEFAULT_T_CAP).unwrap();
        assert_eq!(sys.counts.t, 2 * 4 + 2 + 2);
        let clauses = sys.clauses.as_ref().unwrap();
        assert_eq!(clauses.len(), 83_160);
        assert_eq!(sys.counts.clauses, 83_160.0);
        assert!((sys.predicate_count() as f64) < sys.counts.predicate_bound);
        let big = encode_system(&problem(3), 0.3, DEFAULT_T_CAP).unwrap();
        assert_eq!(big.counts.t, 14);
        assert!(encode_system(&problem(4), 0.3, DEFAULT_T_CAP).unwrap().clauses.is_none());
    }

    #[test]
    fn export_is_stable_and_round_trips() {
        let sys = encode_system(&problem(1), 0.3, DEFAULT_T_CAP).unwrap();
        let text = sys.export();
        assert_eq!(text, encode_system(&problem(1), 0.3, DEFAULT_T_CAP).unwrap().export());
        let back = PolySystem::parse(&text).unwrap();
        assert_eq!(back, sys);
        assert_eq!(back.predicate_count(), text.lines().filter(|l| l.starts_with("pred ")).count());
    }

    #[test]
    fn semantics_agree_with_direct_ak() {
        let p = problem(1);
        let sys = encode_system(&p, 0.3, DEFAULT_T_CAP).unwrap();
        for (mean, tau) in [(0.0, 1.0), (0.3, 2.5), (-0.8, 6.0), (0.9, 0.4)] {
            let theta = [Component::new(1.0, mean, tau)];
            let direct = p.objective(&theta) <= 0.3;
            assert_eq!(sys.satisfied_by(&theta, &p).unwrap(), direct, "mean {mean} tau {tau}");
        }
    }

    #[test]
    fn threshold_straddles_the_ak_distance() {
        let p = problem(1);
        let theta = [Component::new(1.0, 0.2, 1.7)];
        let ak = p.objective(&theta);
        let above = encode_system(&p, ak + 0.01, DEFAULT_T_CAP).unwrap();
        let below = encode_system(&p, ak - 0.01, DEFAULT_T_CAP).unwrap();
        assert!(above.satisfied_by(&theta, &p).unwrap());
        assert!(!below.satisfied_by(&theta, &p).unwrap());
    }

    #[test]
    fn unmaterialized_export_parses() {
        let sys = encode_system(&problem(4), 0.3, DEFAULT_T_CAP).unwrap();
        let back = PolySystem::parse(&sys.export()).unwrap();
        assert!(back.clauses.is_none());
        assert!(back.holds_at(&[Component::new(1.0, 0.0, 1.0)], &[(0.0, 0.0); 4]).is_err());
    }
}
