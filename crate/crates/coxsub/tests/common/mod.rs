//! Exact oracles shared by the integration tests. Crystallographic groups
//! act on the root lattice through their integer Cartan matrices, which is a
//! diagonal rescaling of the geometric representation, so products, equality
//! and root signs are computed without floating point.

#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, VecDeque};

use std::sync::Arc;

use coxsub::coxeter::{CartanType, CoxeterSystem, RootVec, Sign};
use coxsub::cycles::{certificate, check_certificate, decompose, fundamental_cycles, CycleError, EdgeSet};
use coxsub::dihedral::{dual_action, make_dihedral, tits_big_omega, tits_jacobian, tits_omega, DihedralContext, Letter};
use coxsub::roots::{
    depth, fibonacci, fibonacci_closed, FibonacciSeq, plane_coords, positive_root_layers, properly_situated_pair, reflection_closure, Position,
};
use coxsub::subexpr::{build_all_graphs, Expression, SubexprGraph, DEFAULT_LIMIT};
use nalgebra::Matrix2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub type Mat = Vec<i64>;

/// Integer Cartan matrices matching the generator order of `CartanType`.
pub fn cartan(name: &str) -> Vec<Vec<i64>> {
    let (affine, rest) = match name.strip_prefix('~') {
        Some(r) => (true, r),
        None => (false, name),
    };
    let n: usize = rest[1..].parse().unwrap();
    let r = if affine { n + 1 } else { n };
    let mut a = vec![vec![0i64; r]; r];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut link = |i: usize, j: usize, aij: i64, aji: i64| {
        a[i][j] = aij;
        a[j][i] = aji;
    };
    match (&rest[..1], affine) {
        ("A", false) => (1..n).for_each(|i| link(i - 1, i, -1, -1)),
        ("A", true) if n == 1 => link(0, 1, -2, -2),
        ("A", true) => (0..=n).for_each(|i| link(i, (i + 1) % (n + 1), -1, -1)),
        ("B", false) => {
            (1..n - 1).for_each(|i| link(i - 1, i, -1, -1));
            link(n - 2, n - 1, -2, -1);
        }
        ("G", false) => link(0, 1, -3, -1),
        _ => panic!("no Cartan matrix for {name}"),
    }
    a
}

/// A Coxeter group acting on the root lattice.
#[derive(Clone, Debug)]
pub struct IntGroup {
    pub rank: usize,
    pub gens: Vec<Mat>,
}

impl IntGroup {
    pub fn new(name: &str) -> IntGroup {
        let a = cartan(name);
        let r = a.len();
        // s_i(α_j) = α_j - a_ij α_i, stored column by column
        let gens = (0..r)
            .map(|i| {
                let mut m = vec![0i64; r * r];
                for j in 0..r {
                    m[j * r + j] += 1;
                    m[i * r + j] -= a[i][j];
                }
                m
            })
            .collect();
        IntGroup { rank: r, gens }
    }

    pub fn identity(&self) -> Mat {
        let r = self.rank;
        (0..r * r).map(|k| i64::from(k / r == k % r)).collect()
    }

    pub fn mul(&self, x: &Mat, y: &Mat) -> Mat {
        let r = self.rank;
        let mut out = vec![0i64; r * r];
        for i in 0..r {
            for k in 0..r {
                let a = x[i * r + k];
                if a != 0 {
                    for j in 0..r {
                        out[i * r + j] += a * y[k * r + j];
                    }
                }
            }
        }
        out
    }

    pub fn word(&self, letters: &[usize]) -> Mat {
        letters.iter().fold(self.identity(), |w, &s| self.mul(&w, &self.gens[s]))
    }

    pub fn subword(&self, letters: &[usize], mask: u64) -> Mat {
        let mut w = self.identity();
        for (k, &s) in letters.iter().enumerate() {
            if mask >> k & 1 == 1 {
                w = self.mul(&w, &self.gens[s]);
            }
        }
        w
    }

    /// Image of the simple root `α_s`.
    pub fn root(&self, w: &Mat, s: usize) -> Vec<i64> {
        (0..self.rank).map(|i| w[i * self.rank + s]).collect()
    }

    /// Lengths of all elements up to `max_len`, by breadth-first search on
    /// the Cayley graph.
    pub fn lengths(&self, max_len: usize) -> HashMap<Mat, usize> {
        let mut len = HashMap::from([(self.identity(), 0usize)]);
        let mut queue = VecDeque::from([self.identity()]);
        while let Some(w) = queue.pop_front() {
            let l = len[&w];
            if l == max_len {
                continue;
            }
            for g in &self.gens {
                let x = self.mul(&w, g);
                if !len.contains_key(&x) {
                    len.insert(x.clone(), l + 1);
                    queue.push_back(x);
                }
            }
        }
        len
    }

    /// Subexpressions of `letters` grouped by target.
    pub fn classes(&self, letters: &[usize]) -> BTreeMap<Mat, Vec<u64>> {
        let mut out: BTreeMap<Mat, Vec<u64>> = BTreeMap::new();
        for mask in 0..1u64 << letters.len() {
            out.entry(self.subword(letters, mask)).or_default().push(mask);
        }
        out
    }
}

/// Number of Hamming-distance-2 pairs in a set of masks.
pub fn hamming2_pairs(masks: &[u64]) -> usize {
    let mut n = 0;
    for (a, x) in masks.iter().enumerate() {
        for y in &masks[a + 1..] {
            if (x ^ y).count_ones() == 2 {
                n += 1;
            }
        }
    }
    n
}

/// The dihedral group of order `2n` acting on `Z/n`: `a(x) = -x`,
/// `b(x) = 1 - x`. An element `x ↦ εx + k` is stored as `(ε, k)`.
pub fn dihedral_word(n: i64, letters: &[usize], mask: u64) -> (i64, i64) {
    let mut w = (1i64, 0i64);
    for (k, &s) in letters.iter().enumerate() {
        if mask >> k & 1 == 1 {
            // w ∘ g with g(x) = -x + s
            w = (-w.0, (w.0 * s as i64 + w.1).rem_euclid(n));
        }
    }
    w
}

/// Every word of length `len` over `rank` letters.
pub fn all_words(rank: usize, len: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0..rank).map(move |s| {
                    let mut v = w.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
    }
    out
}

/// Roots reachable from `{λ, μ}` by reflecting them in each other, with
/// positive representatives.
pub fn brute_closure(sys: &CoxeterSystem, lambda: &RootVec, mu: &RootVec) -> Vec<RootVec> {
    let mut set = vec![sys.positive_rep(lambda).unwrap(), sys.positive_rep(mu).unwrap()];
    let mut k = 0;
    while k < set.len() {
        for j in 0..=k {
            for (x, y) in [(k, j), (j, k)] {
                let r = sys.positive_rep(&sys.reflect(&set[y], &set[x]).unwrap()).unwrap();
                if !set.iter().any(|v| sys.roots_equal(v, &r)) {
                    set.push(r);
                }
            }
        }
        k += 1;
        assert!(set.len() < 100, "closure does not close");
    }
    set
}

fn same_set(sys: &CoxeterSystem, a: &[RootVec], b: &[RootVec]) -> bool {
    a.len() == b.len() && a.iter().all(|x| b.iter().any(|y| sys.roots_equal(x, y)))
}

/// Properly situated pairs for random non-proportional pairs of roots of
/// depth at most four: the position matches the pairing, the closure is the
/// brute-force closure of the input, every closure root is a nonnegative
/// combination of the pair, and the construction is idempotent.
pub fn check_proper_pairs(sys: &CoxeterSystem, rng: &mut ChaCha8Rng, samples: usize) {
    let pool: Vec<RootVec> = positive_root_layers(sys, 32)
        .into_values()
        .flatten()
        .filter(|r| depth(sys, r, 16).unwrap() <= 4)
        .collect();
    let mut done = 0;
    while done < samples {
        let sign = |rng: &mut ChaCha8Rng, r: &RootVec| if rng.random_bool(0.5) { r.clone() } else { -r };
        let (i, j) = (rng.random_range(0..pool.len()), rng.random_range(0..pool.len()));
        let l = sign(rng, &pool[i]);
        let m = sign(rng, &pool[j]);
        if sys.roots_equal_up_to_sign(&l, &m) {
            continue;
        }
        done += 1;
        let p = properly_situated_pair(sys, &l, &m).unwrap();
        let c = sys.form(&p.alpha, &p.beta);
        match p.position {
            Position::Elliptic(n) => assert!((c + (std::f64::consts::PI / n as f64).cos()).abs() < 1e-9),
            Position::Degenerate => assert!((c + 1.0).abs() < 1e-9),
            Position::Hyperbolic => assert!(c < -1.0),
        }
        assert!(sys.is_positive(&p.alpha).unwrap() && sys.is_positive(&p.beta).unwrap());
        let closure = brute_closure(sys, &l, &m);
        assert!(same_set(sys, &closure, &brute_closure(sys, &p.alpha, &p.beta)));
        assert!(same_set(sys, &closure, &reflection_closure(sys, &p.alpha, &p.beta, 64).roots));
        for r in &closure {
            let (a, b) = plane_coords(sys, &p.alpha, &p.beta, r).unwrap();
            assert!(a >= -1e-9 && b >= -1e-9, "{r} = {a} α + {b} β");
        }
        let q = properly_situated_pair(sys, &p.alpha, &p.beta).unwrap();
        assert_eq!(q.position, p.position);
        let same = (sys.roots_equal(&q.alpha, &p.alpha) && sys.roots_equal(&q.beta, &p.beta))
            || (sys.roots_equal(&q.alpha, &p.beta) && sys.roots_equal(&q.beta, &p.alpha));
        assert!(same, "not idempotent on {} {}", p.alpha, p.beta);
    }
}

/// Hyperbolic pairs from the rank-3 system with all entries infinite.
pub fn hyperbolic_contexts(count: usize, rng: &mut ChaCha8Rng) -> Vec<DihedralContext> {
    let sys = Arc::new(CoxeterSystem::from_rows(&[&[1, 0, 0], &[0, 1, 0], &[0, 0, 1]]).unwrap());
    let pool: Vec<RootVec> = positive_root_layers(&sys, 3).into_values().flatten().collect();
    let mut out = Vec::new();
    while out.len() < count {
        let (l, m) = (&pool[rng.random_range(0..pool.len())], &pool[rng.random_range(0..pool.len())]);
        if sys.roots_equal_up_to_sign(l, m) {
            continue;
        }
        let ctx = make_dihedral(&sys, l, m).unwrap();
        if ctx.pair().position == Position::Hyperbolic && out.iter().all(|c: &DihedralContext| (c.xi() - ctx.xi()).abs() > 1e-6) {
            out.push(ctx);
        }
    }
    out
}

pub fn mag(p: [f64; 2]) -> f64 {
    p[0].abs().max(p[1].abs()).max(1.0)
}

pub fn close2(a: [f64; 2], b: [f64; 2], tol: f64) -> bool {
    (a[0] - b[0]).abs() <= tol && (a[1] - b[1]).abs() <= tol
}

/// `A ω(t) = ω(2 - t)` and `B ω(t) = ω(-t)` on sampled `t`, and the Jacobian
/// determinant of `Ω°` by central differences.
pub fn check_tits(ctx: &DihedralContext, rng: &mut ChaCha8Rng) {
    let xi = ctx.xi();
    assert!(xi > 1.0);
    for _ in 0..50 {
        let t: f64 = rng.random_range(-2.0..3.0);
        let w = tits_omega(ctx, t).unwrap();
        // tolerance relative to the size of the values, which grow like ξ₊^|t|
        let (a, wa) = (dual_action(Letter::A, xi, w), tits_omega(ctx, 2.0 - t).unwrap());
        assert!(close2(a, wa, 1e-9 * mag(wa)), "t={t} xi={xi}: {a:?} vs {wa:?}");
        let (b, wb) = (dual_action(Letter::B, xi, w), tits_omega(ctx, -t).unwrap());
        assert!(close2(b, wb, 1e-9 * mag(wb)), "t={t} xi={xi}: {b:?} vs {wb:?}");
    }
    assert!(close2(tits_omega(ctx, 0.0).unwrap(), [1.0, 0.0], 1e-12));
    assert!(close2(tits_omega(ctx, 1.0).unwrap(), [0.0, 1.0], 1e-12));
    let jac = tits_jacobian(ctx).unwrap();
    let root = (xi * xi - 1.0).sqrt();
    assert!((jac - (xi + root).ln() / root).abs() < 1e-12);
    let h = 1e-5;
    for _ in 0..5 {
        let (x, y): (f64, f64) = (rng.random_range(0.2..2.0), rng.random_range(0.2..2.0));
        let f = |x: f64, y: f64| tits_big_omega(ctx, x, y).unwrap();
        let (fx1, fx0) = (f(x + h, y), f(x - h, y));
        let (fy1, fy0) = (f(x, y + h), f(x, y - h));
        let dx = [(fx1[0] - fx0[0]) / (2.0 * h), (fx1[1] - fx0[1]) / (2.0 * h)];
        let dy = [(fy1[0] - fy0[0]) / (2.0 * h), (fy1[1] - fy0[1]) / (2.0 * h)];
        let det = dx[0] * dy[1] - dx[1] * dy[0];
        assert!((det - jac).abs() < 1e-5, "det {det} vs {jac}");
    }
}

pub fn graphs(t: CartanType, letters: &[usize]) -> Vec<SubexprGraph> {
    let expr = Arc::new(Expression::new(Arc::new(t.system()), letters.to_vec()).unwrap());
    build_all_graphs(&expr, DEFAULT_LIMIT).unwrap()
}

pub fn sweep(t: CartanType, max_len: usize) -> impl Iterator<Item = SubexprGraph> {
    let rank = t.rank();
    (0..=max_len).flat_map(move |len| all_words(rank, len)).flat_map(move |w| graphs(t, &w))
}

pub fn random_even(g: &SubexprGraph, rng: &mut ChaCha8Rng) -> EdgeSet {
    let mut s = EdgeSet::new(g.edge_count());
    for c in fundamental_cycles(g) {
        if rng.random_bool(0.5) {
            s.add(&c);
        }
    }
    s
}

/// Sum of the generators equals the input, every generator stays at or below
/// the input's maximal vertex, and the certificate re-checks by summation.
pub fn check_decomposition(g: &SubexprGraph, even: &EdgeSet) {
    let d = decompose(g, even).unwrap();
    assert!(d.is_complete(), "{:?}", d.failure);
    let mut sum = EdgeSet::new(g.edge_count());
    for c in &d.generators {
        sum.add(&c.edges);
    }
    assert_eq!(&sum, even);
    if let Some(top) = even.edges().iter().map(|&e| g.edges()[e].v).max() {
        for c in &d.generators {
            assert!(c.vertices.iter().all(|&v| v <= top));
        }
    }
    let cert = certificate(g, &d.generators);
    check_certificate(g, &cert, even).unwrap();
    if !cert.is_empty() {
        let mut bad = cert.clone();
        bad.pop();
        assert!(matches!(check_certificate(g, &bad, even), Err(CycleError::BadCertificate(_))));
    }
}

/// Root signs against lengths from breadth-first search on the exact
/// integer model: `w e_s > 0` iff `ℓ(ws) > ℓ(w)`.
pub fn sign_agrees_with_length(t: CartanType, name: &str, max_len: usize) -> usize {
    let sys = t.system();
    let group = IntGroup::new(name);
    let lengths = group.lengths(max_len + 1);
    let mut checked = 0;
    for (w, &l) in &lengths {
        if l > max_len {
            continue;
        }
        // a reduced word for w, read off by descending along the Cayley graph
        let mut word = Vec::new();
        let mut cur = w.clone();
        while lengths[&cur] > 0 {
            let s = (0..group.rank)
                .find(|&s| lengths.get(&group.mul(&cur, &group.gens[s])) == Some(&(lengths[&cur] - 1)))
                .unwrap();
            word.push(s);
            cur = group.mul(&cur, &group.gens[s]);
        }
        word.reverse();
        let elem = sys.word(&word).unwrap();
        for s in 0..group.rank {
            let longer = lengths.get(&group.mul(w, &group.gens[s])).is_none_or(|&m| m > l);
            let sign = sys.root_sign(&sys.act(&elem, &sys.simple_root(s)).unwrap()).unwrap();
            assert_eq!(sign == Sign::Positive, longer, "{name} word {word:?} s{s}");
            checked += 1;
        }
    }
    checked
}

/// Chebyshev polynomial of the second kind `U_k(ξ)` for any integer `k`,
/// from the hyperbolic or trigonometric parametrization.
pub fn chebyshev_u(k: i64, xi: f64) -> f64 {
    let n = (k + 1) as f64;
    if (xi.abs() - 1.0).abs() < 1e-12 {
        return if xi > 0.0 { n } else { (-1f64).powi(k as i32) * n };
    }
    if xi.abs() > 1.0 {
        let t = xi.abs().acosh();
        let s = if xi < 0.0 { (-1f64).powi(k as i32) } else { 1.0 };
        s * (n * t).sinh() / t.sinh()
    } else {
        let t = xi.acos();
        (n * t).sin() / t.sin()
    }
}

/// `{αβ}_n = U_{n-1}(ξ) β - U_{n-2}(ξ) α`.
pub fn oracle(alpha: &RootVec, beta: &RootVec, xi: f64, n: i64) -> RootVec {
    &beta.scale(chebyshev_u(n - 1, xi)) - &alpha.scale(chebyshev_u(n - 2, xi))
}

pub fn rel_close(a: &RootVec, b: &RootVec, tol: f64) -> bool {
    a.dist(b) <= tol * a.max_abs().max(1.0)
}

pub fn random_xi(rng: &mut ChaCha8Rng) -> f64 {
    let mag = if rng.random_bool(0.2) { 1.0 } else { rng.random_range(1.0..=3.0) };
    if rng.random_bool(0.5) {
        mag
    } else {
        -mag
    }
}

/// Pairing with Gram matrix `[[1, ξ], [ξ, 1]]` in the `(α, β)` basis.
pub fn pairing(xi: f64, u: &RootVec, v: &RootVec) -> f64 {
    let g = Matrix2::new(1.0, xi, xi, 1.0);
    let (u, v) = (nalgebra::Vector2::new(u.coeffs()[0], u.coeffs()[1]), nalgebra::Vector2::new(v.coeffs()[0], v.coeffs()[1]));
    u.dot(&(g * v))
}

/// Recurrence and closed forms against the Chebyshev oracle for `|n| ≤ 20`.
pub fn check_fibonacci_closed_forms(rng: &mut ChaCha8Rng, samples: usize) {
    for _ in 0..samples {
        let a = RootVec::new(vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
        let b = RootVec::new(vec![rng.random_range(-2.0..2.0), rng.random_range(-2.0..2.0)]);
        let xi = random_xi(rng);
        for n in -20..=20 {
            let closed = fibonacci_closed(&a, &b, xi, n).unwrap();
            assert!(rel_close(&closed, &oracle(&a, &b, xi, n), 1e-7), "xi={xi} n={n}");
            assert!(rel_close(&closed, &fibonacci(&a, &b, xi, n), 1e-7), "xi={xi} n={n}");
        }
    }
}

/// Every term has unit norm and consecutive terms pair to `ξ`.
pub fn check_fibonacci_pairings(rng: &mut ChaCha8Rng, samples: usize) {
    let (a, b) = (RootVec::new(vec![1.0, 0.0]), RootVec::new(vec![0.0, 1.0]));
    for _ in 0..samples {
        let xi = if rng.random_bool(0.5) { random_xi(rng) } else { rng.random_range(-1.0..1.0) };
        // stay where the values are of moderate size so the absolute tolerance is meaningful
        let span = if xi.abs() > 1.5 { 6 } else { 12 };
        let seq = FibonacciSeq::new(&a, &b, xi, -span, span + 1);
        for n in -span..=span {
            let (x, y) = (seq.get(n), seq.get(n + 1));
            let scale = x.max_abs().max(y.max_abs()).max(1.0).powi(2);
            assert!((pairing(xi, x, x) - 1.0).abs() <= 1e-9 * scale, "xi={xi} n={n}");
            assert!((pairing(xi, x, y) - xi).abs() <= 1e-9 * scale, "xi={xi} n={n}");
        }
    }
}
