//! Fibonacci vector sequences, reflection closures of root pairs, depth, and
//! the properly situated pair generating a given dihedral reflection closure.

use std::collections::{BTreeMap, HashSet, VecDeque};
use std::f64::consts::PI;

use nalgebra::{Matrix2, Vector2};
use thiserror::Error;

use crate::coxeter::{CoxeterError, CoxeterSystem, Order, RootVec, Sign, DEFAULT_MAX_ORDER};

/// Default bound for every bounded search in this module.
pub const DEFAULT_BOUND: usize = 64;

/// Tolerance used when recognizing `arccos (λ|μ)` as a rational multiple of π.
pub const ANGLE_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RootError {
    #[error("roots are proportional")]
    Proportional,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no witness found within bound {0}")]
    BoundExceeded(usize),
    #[error("numeric failure: {0}")]
    NumericFailure(String),
    #[error(transparent)]
    Coxeter(#[from] CoxeterError),
}

/// The value `{αβ}^ξ_n` of the two-sided sequence with seeds `α, β` and
/// recurrence `x_{n-1} + x_{n+1} = 2ξ x_n`.
pub fn fibonacci(alpha: &RootVec, beta: &RootVec, xi: f64, n: i64) -> RootVec {
    let (mut prev, mut cur) = if n >= 0 { (alpha.clone(), beta.clone()) } else { (beta.clone(), alpha.clone()) };
    // Walking forward from (x_0, x_1) reaches x_n after n-1 steps; walking
    // backward from (x_1, x_0) reaches x_n after -n steps.
    let steps = if n >= 0 { n - 1 } else { -n };
    if n == 0 {
        return alpha.clone();
    }
    for _ in 0..steps {
        let next = &cur.scale(2.0 * xi) - &prev;
        prev = cur;
        cur = next;
    }
    cur
}

/// Closed form of `{αβ}^ξ_n` for `|ξ| ≥ 1`; `None` when `|ξ| < 1`.
pub fn fibonacci_closed(alpha: &RootVec, beta: &RootVec, xi: f64, n: i64) -> Option<RootVec> {
    if (xi.abs() - 1.0).abs() < 1e-12 {
        let s = xi.signum();
        let nf = n as f64;
        let ca = s.powi(n as i32) * (1.0 - nf);
        let cb = s.powi((n - 1) as i32) * nf;
        return Some(&alpha.scale(ca) + &beta.scale(cb));
    }
    if xi.abs() < 1.0 {
        return None;
    }
    let root = (xi * xi - 1.0).sqrt();
    let (xp, xm) = (xi + root, xi - root);
    let denom = 2.0 * (xi * xi - 1.0);
    let plus = (&alpha.scale(xp) - beta).scale((xi * xp - 1.0) / denom);
    let minus = (&alpha.scale(xm) - beta).scale((xi * xm - 1.0) / denom);
    let k = (n + 1) as i32;
    Some(&plus.scale(xp.powi(-k)) + &minus.scale(xm.powi(-k)))
}

/// A window `lo..=hi` of a Fibonacci sequence.
#[derive(Clone, Debug)]
pub struct FibonacciSeq {
    pub alpha: RootVec,
    pub beta: RootVec,
    pub xi: f64,
    lo: i64,
    values: Vec<RootVec>,
}

impl FibonacciSeq {
    pub fn new(alpha: &RootVec, beta: &RootVec, xi: f64, lo: i64, hi: i64) -> Self {
        assert!(lo <= 0 && hi >= 1, "window must contain the seeds");
        let mut fwd = vec![alpha.clone(), beta.clone()];
        for k in 2..=hi as usize {
            let next = &fwd[k - 1].scale(2.0 * xi) - &fwd[k - 2];
            fwd.push(next);
        }
        let mut back = Vec::new();
        let (mut a, mut b) = (alpha.clone(), beta.clone());
        for _ in lo..0 {
            let prev = &a.scale(2.0 * xi) - &b;
            b = a;
            a = prev.clone();
            back.push(prev);
        }
        back.reverse();
        back.extend(fwd);
        FibonacciSeq { alpha: alpha.clone(), beta: beta.clone(), xi, lo, values: back }
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.values.len() as i64 - 1
    }

    pub fn get(&self, n: i64) -> &RootVec {
        &self.values[(n - self.lo) as usize]
    }
}

/// Positive representatives of the roots `±{αβ}_n`.
#[derive(Clone, Debug)]
pub struct ReflectionClosure {
    pub generators: (RootVec, RootVec),
    pub roots: Vec<RootVec>,
    /// `false` when the sequence did not close up within the bound; `roots`
    /// is then a prefix.
    pub finite: bool,
}

impl ReflectionClosure {
    pub fn contains_up_to_sign(&self, sys: &CoxeterSystem, v: &RootVec) -> bool {
        self.roots.iter().any(|r| sys.roots_equal_up_to_sign(r, v))
    }
}

fn canonical(sys: &CoxeterSystem, v: &RootVec) -> RootVec {
    match sys.root_sign(v) {
        Ok(Sign::Negative) => -v,
        Ok(Sign::Positive) => v.clone(),
        Err(_) => {
            let first = v.coeffs().iter().find(|c| c.abs() > sys.eps()).copied().unwrap_or(0.0);
            if first < 0.0 { -v } else { v.clone() }
        }
    }
}

fn push_unique(sys: &CoxeterSystem, roots: &mut Vec<RootVec>, v: RootVec) {
    let v = canonical(sys, &v);
    if !roots.iter().any(|r| sys.roots_equal_up_to_sign(r, &v)) {
        roots.push(v);
    }
}

/// The reflection closure of `{α, β}`, read off the sequence `{αβ}_n` with
/// `ξ = (α|β)` for `|n| ≤ depth_bound`.
pub fn reflection_closure(sys: &CoxeterSystem, alpha: &RootVec, beta: &RootVec, depth_bound: usize) -> ReflectionClosure {
    let b = depth_bound.max(1) as i64;
    let xi = sys.form(alpha, beta);
    let seq = FibonacciSeq::new(alpha, beta, xi, -b, b + 1);
    let eps = sys.eps();
    let period = (1..=b).find(|&n| {
        let (x, y) = (seq.get(n), seq.get(n + 1));
        (x.approx_eq(alpha, eps) && y.approx_eq(beta, eps)) || (x.approx_eq(&-alpha, eps) && y.approx_eq(&-beta, eps))
    });
    let mut roots = Vec::new();
    match period {
        Some(p) => {
            for n in 0..p {
                push_unique(sys, &mut roots, seq.get(n).clone());
            }
        }
        None => {
            for n in 0..=b {
                push_unique(sys, &mut roots, seq.get(n).clone());
            }
            for n in 1..=b {
                push_unique(sys, &mut roots, seq.get(-n).clone());
            }
        }
    }
    ReflectionClosure { generators: (alpha.clone(), beta.clone()), roots, finite: period.is_some() }
}

fn key(v: &RootVec) -> Vec<i64> {
    v.coeffs().iter().map(|c| (c * 1e6).round() as i64).collect()
}

/// Least `k` such that some element of length `k` sends `α` to a negative root.
pub fn depth(sys: &CoxeterSystem, alpha: &RootVec, bound: usize) -> Result<usize, RootError> {
    if sys.root_sign(alpha)? != Sign::Positive {
        return Err(RootError::Precondition("depth is defined for positive roots".into()));
    }
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    seen.insert(key(alpha));
    let mut frontier = VecDeque::from([alpha.clone()]);
    for k in 1..=bound {
        let mut next = VecDeque::new();
        for v in &frontier {
            for s in 0..sys.rank() {
                let w = sys.reflect_unchecked(v, &sys.simple_root(s));
                if sys.root_sign(&w)? == Sign::Negative {
                    return Ok(k);
                }
                if seen.insert(key(&w)) {
                    next.push_back(w);
                }
            }
        }
        frontier = next;
    }
    Err(RootError::BoundExceeded(bound))
}

/// An index `n` with `|n| ≤ bound` such that `{αβ}_n` (with `ξ = (α|β)`) is negative.
/// Indices are tried in the order `2, -1, 3, -2, …`.
pub fn find_negative_index(sys: &CoxeterSystem, alpha: &RootVec, beta: &RootVec, bound: usize) -> Result<i64, RootError> {
    if sys.roots_equal_up_to_sign(alpha, beta) {
        return Err(RootError::Proportional);
    }
    if !sys.is_positive(alpha)? || !sys.is_positive(beta)? {
        return Err(RootError::Precondition("roots must be positive".into()));
    }
    let xi = sys.form(alpha, beta);
    if xi < 1.0 - sys.eps() {
        return Err(RootError::Precondition(format!("(α|β) = {xi} < 1")));
    }
    let b = bound as i64;
    let seq = FibonacciSeq::new(alpha, beta, xi, -b, b);
    for k in 1..b {
        for n in [k + 1, -k] {
            if sys.root_sign(seq.get(n))? == Sign::Negative {
                return Ok(n);
            }
        }
    }
    Err(RootError::BoundExceeded(bound))
}

/// The three mutual positions of a properly situated pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Position {
    /// `(α|β) = -cos(π/n)`.
    Elliptic(u32),
    /// `(α|β) = -1`.
    Degenerate,
    /// `(α|β) < -1`.
    Hyperbolic,
}

impl Position {
    pub fn order(self) -> Order {
        match self {
            Position::Elliptic(n) => Order::Finite(n),
            _ => Order::Unbounded,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ProperPair {
    pub alpha: RootVec,
    pub beta: RootVec,
    pub position: Position,
}

/// Coordinates `(a, b)` with `v = aα + bβ`, by least squares on coefficient
/// vectors; `None` if `v` is not in the span.
pub fn plane_coords(sys: &CoxeterSystem, alpha: &RootVec, beta: &RootVec, v: &RootVec) -> Option<(f64, f64)> {
    let (a, b, x) = (alpha.vector(), beta.vector(), v.vector());
    let m = Matrix2::new(a.dot(a), a.dot(b), b.dot(a), b.dot(b));
    let rhs = Vector2::new(a.dot(x), b.dot(x));
    let sol = m.try_inverse()? * rhs;
    let back = &alpha.scale(sol[0]) + &beta.scale(sol[1]);
    let scale = 1.0f64.max(v.max_abs());
    (back.dist(v) < sys.eps() * scale).then_some((sol[0], sol[1]))
}

fn nonneg_combination(sys: &CoxeterSystem, alpha: &RootVec, beta: &RootVec, v: &RootVec) -> bool {
    let tol = sys.eps() * 1.0f64.max(v.max_abs());
    matches!(plane_coords(sys, alpha, beta, v), Some((a, b)) if a >= -tol && b >= -tol)
}

/// Recognizes `arccos c` as `kπ/n` with `n ≤ max_order`, returning the least such `n`.
fn recognize_angle(c: f64, max_order: u32) -> Option<u32> {
    let theta = c.clamp(-1.0, 1.0).acos();
    (2..=max_order).find(|&n| {
        let k = (theta * n as f64 / PI).round();
        (theta - k * PI / n as f64).abs() < ANGLE_TOL
    })
}

/// The properly situated pair `(α, β)` with `Rcl(α, β) = Rcl(λ, μ)`.
pub fn properly_situated_pair(sys: &CoxeterSystem, lambda: &RootVec, mu: &RootVec) -> Result<ProperPair, RootError> {
    if sys.roots_equal_up_to_sign(lambda, mu) {
        return Err(RootError::Proportional);
    }
    let eps = sys.eps();
    let lambda = sys.positive_rep(lambda)?;
    let mu = sys.positive_rep(mu)?;
    let c = sys.form(&lambda, &mu);
    let pair = if c.abs() < 1.0 - eps {
        elliptic_pair(sys, &lambda, &mu, c)?
    } else if c <= -1.0 + eps {
        let position = if (c + 1.0).abs() < eps { Position::Degenerate } else { Position::Hyperbolic };
        ProperPair { alpha: lambda, beta: mu, position }
    } else {
        let (alpha, beta) = match first_sign_change(sys, &lambda, &mu, c)? {
            Some(p) => p,
            None => first_sign_change(sys, &mu, &lambda, c)?.ok_or(RootError::BoundExceeded(DEFAULT_BOUND))?,
        };
        let d = sys.form(&alpha, &beta);
        if d > -1.0 + eps {
            return Err(RootError::NumericFailure(format!("sign-change scan produced (α|β) = {d}")));
        }
        let position = if (d + 1.0).abs() < eps { Position::Degenerate } else { Position::Hyperbolic };
        ProperPair { alpha, beta, position }
    };
    if !sys.is_positive(&pair.alpha)? || !sys.is_positive(&pair.beta)? || sys.roots_equal(&pair.alpha, &pair.beta) {
        return Err(RootError::NumericFailure("pair is not a pair of distinct positive roots".into()));
    }
    let closure = reflection_closure(sys, &pair.alpha, &pair.beta, if pair.position == Position::Degenerate || pair.position == Position::Hyperbolic { 8 } else { DEFAULT_BOUND });
    for r in &closure.roots {
        if !nonneg_combination(sys, &pair.alpha, &pair.beta, r) {
            return Err(RootError::NumericFailure(format!("closure root {r} is not a nonnegative combination")));
        }
    }
    Ok(pair)
}

/// Minimal `n ≥ 2` with `{λμ}_n < 0`, returned as `({λμ}_{n-1}, -{λμ}_n)`.
fn first_sign_change(sys: &CoxeterSystem, lambda: &RootVec, mu: &RootVec, xi: f64) -> Result<Option<(RootVec, RootVec)>, RootError> {
    let seq = FibonacciSeq::new(lambda, mu, xi, 0, DEFAULT_BOUND as i64);
    for n in 2..=DEFAULT_BOUND as i64 {
        if sys.root_sign(seq.get(n))? == Sign::Negative {
            return Ok(Some((seq.get(n - 1).clone(), -seq.get(n))));
        }
    }
    Ok(None)
}

fn elliptic_pair(sys: &CoxeterSystem, lambda: &RootVec, mu: &RootVec, c: f64) -> Result<ProperPair, RootError> {
    let n = recognize_angle(c, DEFAULT_MAX_ORDER)
        .ok_or_else(|| RootError::NumericFailure(format!("angle arccos({c}) is not a rational multiple of π")))?;
    let v1 = lambda.clone();
    let v2 = (mu - &lambda.scale(c)).scale(1.0 / (1.0 - c * c).sqrt());
    let ring: Vec<RootVec> = (0..2 * n)
        .map(|j| {
            let t = j as f64 * PI / n as f64;
            &v1.scale(t.cos()) + &v2.scale(t.sin())
        })
        .collect();
    let signs = ring.iter().map(|r| sys.root_sign(r)).collect::<Result<Vec<_>, _>>()?;
    let m = 2 * n as usize;
    let start = (0..m)
        .find(|&j| signs[j] == Sign::Positive && signs[(j + m - 1) % m] == Sign::Negative)
        .ok_or_else(|| RootError::NumericFailure("no sign change around the circle".into()))?;
    let alpha = ring[start].clone();
    let beta = ring[(start + n as usize - 1) % m].clone();
    let d = sys.form(&alpha, &beta);
    if (d + (PI / n as f64).cos()).abs() > 1e-7 {
        return Err(RootError::NumericFailure(format!("(α|β) = {d} for order {n}")));
    }
    let ord = sys.reflection_order(&sys.reflection(&alpha), &sys.reflection(&beta), DEFAULT_MAX_ORDER);
    if ord != Order::Finite(n) {
        return Err(RootError::NumericFailure(format!("reflection order {ord:?} differs from recognized {n}")));
    }
    Ok(ProperPair { alpha, beta, position: Position::Elliptic(n) })
}

/// Positive roots in layers: layer 1 holds the simple roots and layer `d`
/// the new positive roots obtained from layer `d - 1` by one simple
/// reflection. Finite systems give all positive roots for enough layers.
pub fn positive_root_layers(sys: &CoxeterSystem, max_layer: usize) -> BTreeMap<usize, Vec<RootVec>> {
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    let mut out: BTreeMap<usize, Vec<RootVec>> = BTreeMap::new();
    let mut frontier: Vec<RootVec> = (0..sys.rank()).map(|s| sys.simple_root(s)).collect();
    for r in &frontier {
        seen.insert(key(r));
    }
    out.insert(1, frontier.clone());
    for d in 2..=max_layer {
        let mut next = Vec::new();
        for v in &frontier {
            for s in 0..sys.rank() {
                let w = sys.reflect_unchecked(v, &sys.simple_root(s));
                if sys.root_sign(&w) == Ok(Sign::Positive) && seen.insert(key(&w)) {
                    next.push(w);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        out.insert(d, next.clone());
        frontier = next;
    }
    out
}
