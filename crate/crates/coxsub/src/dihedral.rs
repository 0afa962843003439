//! Dihedral reflection subgroups `D = ⟨t_α, t_β⟩` for a properly situated
//! pair `(α, β)`, projections onto them, the circle model of their Coxeter
//! complex, the cycles `Cyc¹`, `Cyc²`, the reduction of a vertex with two
//! crossing special pairs, and the Tits-cone map of the hyperbolic case.
//!
//! Expressions in the letters `A = t_α`, `B = t_β` are ordinary expressions
//! over a rank-2 "local" system whose simple roots `e_0, e_1` stand for
//! `α, β`; local coefficients `(a, b)` mean the ambient root `aα + bβ`.
//!
//! In the circle model of order `n` panels are the integers mod `2n`, the
//! fundamental chamber lies between panels 0 and 1, odd panels have type `A`
//! and even panels type `B`. Points are handled in doubled coordinates so
//! chamber centres are integers too.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::Arc;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coxeter::{CoxeterError, CoxeterSystem, Element, Multiplicity, Order, RootVec, DEFAULT_MAX_ORDER};
use crate::roots::{plane_coords, properly_situated_pair, reflection_closure, Position, ProperPair, RootError};
use crate::subexpr::{is_special, Expression, SubexprError, Subexpression};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DihedralError {
    #[error(transparent)]
    Root(#[from] RootError),
    #[error(transparent)]
    Coxeter(#[from] CoxeterError),
    #[error(transparent)]
    Subexpr(#[from] SubexprError),
    #[error("element carries no defining word")]
    WordRequired,
    #[error("not a pair of crossing special pairs: {0}")]
    NotSpecial(String),
    #[error("dihedral subgroup has infinite order")]
    InfiniteOrder,
    #[error("parameter out of range: {0}")]
    ParamOutOfRange(String),
    #[error("signature move precondition violated: {0}")]
    MovePreconditionViolated(String),
    #[error("pair is not in hyperbolic position")]
    NotHyperbolic,
    #[error("point lies outside the cone")]
    OutsideCone,
    #[error("numeric failure: {0}")]
    NumericFailure(String),
}

/// A generator of the dihedral group.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Letter {
    A,
    B,
}

impl Letter {
    pub fn index(self) -> usize {
        match self {
            Letter::A => 0,
            Letter::B => 1,
        }
    }

    pub fn from_index(k: usize) -> Letter {
        if k == 0 { Letter::A } else { Letter::B }
    }

    pub fn other(self) -> Letter {
        match self {
            Letter::A => Letter::B,
            Letter::B => Letter::A,
        }
    }

    /// Type of a circle panel.
    pub fn of_panel(x: i64) -> Letter {
        if x.rem_euclid(2) == 1 { Letter::A } else { Letter::B }
    }
}

/// The alternating word `(c, c̄, c, …)` of length `len`.
pub fn alternating(c: Letter, len: usize) -> Vec<Letter> {
    (0..len).map(|k| if k % 2 == 0 { c } else { c.other() }).collect()
}

/// A dihedral reflection subgroup and its rank-2 model.
#[derive(Clone, Debug)]
pub struct DihedralContext {
    ambient: Arc<CoxeterSystem>,
    pair: ProperPair,
    a: Element,
    b: Element,
    order: Order,
    xi: f64,
    local: Arc<CoxeterSystem>,
    local_roots: Vec<RootVec>,
}

/// Builds the dihedral subgroup generated by `t_λ` and `t_μ`.
pub fn make_dihedral(sys: &Arc<CoxeterSystem>, lambda: &RootVec, mu: &RootVec) -> Result<DihedralContext, DihedralError> {
    let pair = properly_situated_pair(sys, lambda, mu)?;
    DihedralContext::from_pair(sys, pair)
}

impl DihedralContext {
    pub fn from_pair(sys: &Arc<CoxeterSystem>, pair: ProperPair) -> Result<Self, DihedralError> {
        let a = sys.reflection(&pair.alpha);
        let b = sys.reflection(&pair.beta);
        let order = sys.reflection_order(&a, &b, DEFAULT_MAX_ORDER);
        let c = sys.form(&pair.alpha, &pair.beta);
        let local = match pair.position {
            Position::Elliptic(n) => {
                if order != Order::Finite(n) {
                    return Err(DihedralError::NumericFailure(format!("order {order:?} for elliptic pair of order {n}")));
                }
                let m = Multiplicity::Finite(n);
                CoxeterSystem::new(vec![vec![Multiplicity::Finite(1), m], vec![m, Multiplicity::Finite(1)]])?
            }
            Position::Degenerate | Position::Hyperbolic => {
                let m = Multiplicity::Infinite;
                let cox = vec![vec![Multiplicity::Finite(1), m], vec![m, Multiplicity::Finite(1)]];
                CoxeterSystem::with_gram(cox, DMatrix::from_row_slice(2, 2, &[1.0, c, c, 1.0]))
            }
        }
        .with_eps(sys.eps());
        let local_roots = reflection_closure(&local, &local.simple_root(0), &local.simple_root(1), 24).roots;
        Ok(DihedralContext { ambient: sys.clone(), pair, a, b, order, xi: -c, local: Arc::new(local), local_roots })
    }

    pub fn ambient(&self) -> &Arc<CoxeterSystem> {
        &self.ambient
    }

    pub fn pair(&self) -> &ProperPair {
        &self.pair
    }

    pub fn alpha(&self) -> &RootVec {
        &self.pair.alpha
    }

    pub fn beta(&self) -> &RootVec {
        &self.pair.beta
    }

    /// `t_α` or `t_β` as ambient elements.
    pub fn generator(&self, c: Letter) -> &Element {
        match c {
            Letter::A => &self.a,
            Letter::B => &self.b,
        }
    }

    pub fn order(&self) -> Order {
        self.order
    }

    /// `ξ = -(α|β)`.
    pub fn xi(&self) -> f64 {
        self.xi
    }

    /// The rank-2 system in the letters `A`, `B`.
    pub fn local(&self) -> &Arc<CoxeterSystem> {
        &self.local
    }

    /// Positive local roots (a prefix when the order is infinite).
    pub fn local_roots(&self) -> &[RootVec] {
        &self.local_roots
    }

    pub fn to_ambient(&self, v: &RootVec) -> RootVec {
        &self.pair.alpha.scale(v.coeffs()[0]) + &self.pair.beta.scale(v.coeffs()[1])
    }

    pub fn to_local(&self, v: &RootVec) -> Option<RootVec> {
        plane_coords(&self.ambient, &self.pair.alpha, &self.pair.beta, v).map(|(a, b)| RootVec::new(vec![a, b]))
    }

    /// Local coordinates of `v` if `t_v ∈ D`.
    pub fn local_root(&self, v: &RootVec) -> Option<RootVec> {
        let l = self.to_local(v)?;
        self.local_roots.iter().any(|r| self.local.roots_equal_up_to_sign(r, &l)).then_some(l)
    }

    pub fn contains_root(&self, v: &RootVec) -> bool {
        self.local_root(v).is_some()
    }

    /// Expression over the local system.
    pub fn expression(&self, letters: &[Letter]) -> Arc<Expression> {
        Arc::new(
            Expression::new(self.local.clone(), letters.iter().map(|c| c.index()).collect())
                .expect("letters are local generators"),
        )
    }

    pub fn finite_order(&self) -> Result<u32, DihedralError> {
        self.order.finite().ok_or(DihedralError::InfiniteOrder)
    }
}

/// `pr_D(w)`: walking along the word of `w`, every generator whose
/// conjugate `w' s w'^{-1}` lies in `D` is applied on the left.
pub fn project_element(ctx: &DihedralContext, w: &Element) -> Result<Element, DihedralError> {
    let word = w.word().ok_or(DihedralError::WordRequired)?;
    let sys = ctx.ambient();
    let mut cur = sys.identity();
    let mut d = sys.identity().without_word();
    for &s in word {
        let r = cur.apply(&sys.simple_root(s));
        if ctx.contains_root(&r) {
            d = &sys.reflection(&r) * &d;
        }
        cur = sys.mul_gen(&cur, s);
    }
    Ok(d)
}

/// A `p`-pair morphism between expressions, extended from its defining
/// pair `(source_anchor, target_anchor)` by fold transport.
#[derive(Clone, Debug)]
pub struct Morphism {
    pub source: Arc<Expression>,
    pub target: Arc<Expression>,
    pub p: Vec<usize>,
    pub cosign: Vec<i8>,
    pub source_anchor: Vec<bool>,
    pub target_anchor: Vec<bool>,
}

impl Morphism {
    /// Builds the morphism of a `p`-pair, checking `target^{→p(i)} = ±map(source^{→i})`.
    pub fn from_pair(
        source: &Subexpression,
        target: &Subexpression,
        p: Vec<usize>,
        map: impl Fn(&RootVec) -> RootVec,
    ) -> Result<Morphism, DihedralError> {
        if p.len() != source.len() || p.windows(2).any(|w| w[0] >= w[1]) || p.last().is_some_and(|&x| x >= target.len()) {
            return Err(DihedralError::NumericFailure("index map is not an increasing map into the target".into()));
        }
        let sys = target.system();
        let mut cosign = Vec::with_capacity(p.len());
        for (k, &pk) in p.iter().enumerate() {
            let img = map(source.root(k));
            let t = target.root(pk);
            cosign.push(if sys.roots_equal(t, &img) {
                1
            } else if sys.roots_equal(t, &-&img) {
                -1
            } else {
                return Err(DihedralError::NumericFailure(format!("prefix roots at {k} -> {pk} are not ±equal")));
            });
        }
        Ok(Morphism {
            source: source.expr().clone(),
            target: target.expr().clone(),
            p,
            cosign,
            source_anchor: source.bits().to_vec(),
            target_anchor: target.bits().to_vec(),
        })
    }

    pub fn identity(gamma: &Subexpression) -> Morphism {
        Morphism {
            source: gamma.expr().clone(),
            target: gamma.expr().clone(),
            p: (0..gamma.len()).collect(),
            cosign: vec![1; gamma.len()],
            source_anchor: gamma.bits().to_vec(),
            target_anchor: gamma.bits().to_vec(),
        }
    }

    pub fn is_positive(&self) -> bool {
        self.cosign.iter().all(|&e| e == 1)
    }

    /// `φ(σ)`: the target anchor with the positions `p(k)` flipped wherever
    /// `σ` differs from the source anchor.
    pub fn apply(&self, bits: &[bool]) -> Vec<bool> {
        let mut out = self.target_anchor.clone();
        for (k, &pk) in self.p.iter().enumerate() {
            if bits[k] != self.source_anchor[k] {
                out[pk] = !out[pk];
            }
        }
        out
    }

    /// Transports a fold pair.
    pub fn map_fold(&self, i: usize, j: usize) -> (usize, usize) {
        (self.p[i], self.p[j])
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &Morphism) -> Morphism {
        Morphism {
            source: inner.source.clone(),
            target: self.target.clone(),
            p: inner.p.iter().map(|&k| self.p[k]).collect(),
            cosign: inner.p.iter().zip(&inner.cosign).map(|(&k, &e)| e * self.cosign[k]).collect(),
            source_anchor: inner.source_anchor.clone(),
            target_anchor: self.apply(&inner.target_anchor),
        }
    }
}

/// Result of projecting a subexpression onto a dihedral subgroup.
#[derive(Clone, Debug)]
pub struct Projection {
    /// The projected subexpression over the local expression.
    pub pi: Subexpression,
    /// Positions `i` with `t_{γ^{→i}} ∈ D`, increasing.
    pub positions: Vec<usize>,
    /// Morphism from the local expression to the ambient one.
    pub morphism: Morphism,
}

pub fn project_subexpression(gamma: &Subexpression, ctx: &DihedralContext) -> Result<Projection, DihedralError> {
    let local = ctx.local();
    let mut d = local.identity();
    let mut letters = Vec::new();
    let mut bits = Vec::new();
    let mut positions = Vec::new();
    for i in 0..gamma.len() {
        let Some(r) = ctx.local_root(gamma.root(i)) else { continue };
        // π^{→k} = d(-e_c) must equal the local root, so e_c = -d^{-1} r.
        let e = -d.inverse().apply(&r);
        let c = if local.roots_equal(&e, &local.simple_root(0)) {
            Letter::A
        } else if local.roots_equal(&e, &local.simple_root(1)) {
            Letter::B
        } else {
            return Err(DihedralError::NumericFailure(format!("projected root {e} at position {i} is not simple")));
        };
        letters.push(c);
        bits.push(gamma.bits()[i]);
        positions.push(i);
        if gamma.bits()[i] {
            d = local.mul_gen(&d, c.index());
        }
    }
    let expr = ctx.expression(&letters);
    let pi = Subexpression::new(&expr, bits)?;
    let morphism = Morphism::from_pair(&pi, gamma, positions.clone(), |v| ctx.to_ambient(v))?;
    if !morphism.is_positive() {
        return Err(DihedralError::NumericFailure("projection has a negative cosign".into()));
    }
    Ok(Projection { pi, positions, morphism })
}

/// Complements bits `k < l` of a signature; `k + l` must be even and the
/// bits strictly between them zero.
pub fn signature_move(eps: &[bool], k: usize, l: usize) -> Result<Vec<bool>, DihedralError> {
    if k >= l || l >= eps.len() {
        return Err(DihedralError::MovePreconditionViolated(format!("bad positions ({k}, {l})")));
    }
    if !(k + l).is_multiple_of(2) {
        return Err(DihedralError::MovePreconditionViolated(format!("{k} + {l} is odd")));
    }
    if eps[k + 1..l].iter().any(|&b| b) {
        return Err(DihedralError::MovePreconditionViolated("a bit between the move positions is set".into()));
    }
    let mut out = eps.to_vec();
    out[k] = !out[k];
    out[l] = !out[l];
    Ok(out)
}

/// Which of the two dihedral cycle families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CycKind {
    One,
    Two,
}

/// A cycle of length `n + 2` in `Sub(t, w)` for an alternating word `t`,
/// listed from its maximal vertex.
#[derive(Clone, Debug)]
pub struct DihedralCycle {
    pub kind: CycKind,
    pub n: u32,
    pub c: Letter,
    pub x: u32,
    pub y: u32,
    pub letters: Vec<Letter>,
    pub vertices: Vec<Vec<bool>>,
}

impl DihedralCycle {
    pub fn top(&self) -> &[bool] {
        &self.vertices[0]
    }
}

/// Signature of length `len` with zeros exactly at the given 1-based positions.
fn with_zeros(len: usize, zeros: impl IntoIterator<Item = i64>) -> Vec<bool> {
    let mut v = vec![true; len];
    for z in zeros {
        v[(z - 1) as usize] = false;
    }
    v
}

fn range(a: i64, b: i64) -> impl Iterator<Item = i64> {
    a..=b
}

/// `Cyc¹_c(x, y)` for order `n`: requires `1 ≤ x ≤ n-1` and `x+n+1 ≤ y ≤ 2n`.
pub fn cyc1(n: u32, c: Letter, x: u32, y: u32) -> Result<DihedralCycle, DihedralError> {
    if n < 2 || x < 1 || x > n - 1 || y < x + n + 1 || y > 2 * n {
        return Err(DihedralError::ParamOutOfRange(format!("Cyc1 with n={n}, x={x}, y={y}")));
    }
    let (ni, xi, len) = (n as i64, x as i64, y as usize);
    let mut vertices = vec![vec![true; len], with_zeros(len, [xi + 1, xi + ni + 1])];
    for i in (1..=xi).rev() {
        vertices.push(with_zeros(len, [xi, 2 * xi + 1 - i, 2 * xi + 2 - i, xi + ni + 1]));
    }
    for i in (xi - ni + 1..=-1).rev() {
        vertices.push(with_zeros(len, [xi, 2 * xi - i, 2 * xi + 1 - i, xi + ni + 1]));
    }
    vertices.push(with_zeros(len, [xi, xi + ni]));
    Ok(DihedralCycle { kind: CycKind::One, n, c, x, y, letters: alternating(c, len), vertices })
}

/// `Cyc²_c(x, y)` for order `n`: requires `1 ≤ x < y ≤ n`; the word has
/// length `2x + 2n - y`.
pub fn cyc2(n: u32, c: Letter, x: u32, y: u32) -> Result<DihedralCycle, DihedralError> {
    if n < 2 || x < 1 || x >= y || y > n {
        return Err(DihedralError::ParamOutOfRange(format!("Cyc2 with n={n}, x={x}, y={y}")));
    }
    let (n, x, y) = (n as i64, x as i64, y as i64);
    let last = 2 * x + 2 * n - y;
    let len = last as usize;
    let d = 2 * y - x - n;
    let mut vertices = vec![with_zeros(len, [x + n]), with_zeros(len, [y, x + n, last])];
    for i in (1..y).rev() {
        let zeros: Vec<i64> = if i >= x && (d < x || i > d) {
            range(i, 2 * y - i).chain([x + n, last]).collect()
        } else if i >= x {
            range(i, 2 * x - 2 * y + 2 * n - 1 + i).chain([last]).collect()
        } else if d > 0 && i <= d {
            [x].into_iter().chain(range(2 * x + 1 - i, 2 * x - 2 * y + 2 * n - 1 + i)).chain([last]).collect()
        } else {
            [x].into_iter().chain(range(2 * x + 1 - i, 2 * y - i)).chain([x + n, last]).collect()
        };
        vertices.push(with_zeros(len, zeros));
    }
    for i in (y - n..=-1).rev() {
        let zeros: Vec<i64> = if d <= 0 && i > d {
            [x].into_iter().chain(range(2 * x - i, 2 * y - 1 - i)).chain([x + n, last]).collect()
        } else {
            [x].into_iter().chain(range(2 * x - i, 2 * x - 2 * y + 2 * n + i)).chain([last]).collect()
        };
        vertices.push(with_zeros(len, zeros));
    }
    vertices.push(with_zeros(len, [x]));
    Ok(DihedralCycle {
        kind: CycKind::Two,
        n: n as u32,
        c,
        x: x as u32,
        y: y as u32,
        letters: alternating(c, len),
        vertices,
    })
}

pub fn generate_cyc1(ctx: &DihedralContext, c: Letter, x: u32, y: u32) -> Result<DihedralCycle, DihedralError> {
    cyc1(ctx.finite_order()?, c, x, y)
}

pub fn generate_cyc2(ctx: &DihedralContext, c: Letter, x: u32, y: u32) -> Result<DihedralCycle, DihedralError> {
    cyc2(ctx.finite_order()?, c, x, y)
}

/// All admissible parameters `(kind, x, y)` for order `n`.
pub fn cyc_parameters(n: u32) -> Vec<(CycKind, u32, u32)> {
    let mut out = Vec::new();
    for x in 1..n {
        for y in x + n + 1..=2 * n {
            out.push((CycKind::One, x, y));
        }
    }
    for y in 2..=n {
        for x in 1..y {
            out.push((CycKind::Two, x, y));
        }
    }
    out
}

pub fn make_cyc(n: u32, kind: CycKind, c: Letter, x: u32, y: u32) -> Result<DihedralCycle, DihedralError> {
    match kind {
        CycKind::One => cyc1(n, c, x, y),
        CycKind::Two => cyc2(n, c, x, y),
    }
}

/// `(A, C)` separates `(B, D)` on a circle of the given circumference.
pub fn separates(a: f64, b: f64, c: f64, d: f64, circumference: f64) -> bool {
    let f = |p: f64| (p - a).rem_euclid(circumference);
    let (fb, fc, fd) = (f(b), f(c), f(d));
    (fb < fc) != (fd < fc)
}

/// The circle model of a finite dihedral group: panel `x` carries the wall
/// whose positive local root is `panel_roots[x mod 2n]`.
#[derive(Clone, Debug)]
pub struct Circle {
    pub n: i64,
    panel_roots: Vec<RootVec>,
    local: Arc<CoxeterSystem>,
}

impl Circle {
    pub fn new(ctx: &DihedralContext) -> Result<Circle, DihedralError> {
        let n = ctx.finite_order()? as i64;
        let local = ctx.local().clone();
        // chamber (k, k+1) is d_k C with d_0 = 1 and d_k = d_{k-1} · type(k)
        let mut d = local.identity();
        let mut panel_roots = vec![RootVec::zeros(2); 2 * n as usize];
        for x in 1..=2 * n {
            let c = Letter::of_panel(x);
            panel_roots[(x % (2 * n)) as usize] = local.positive_rep(&d.apply(&local.simple_root(c.index())))?;
            d = local.mul_gen(&d, c.index());
        }
        Ok(Circle { n, panel_roots, local })
    }

    pub fn panel_root(&self, x: i64) -> &RootVec {
        &self.panel_roots[x.rem_euclid(2 * self.n) as usize]
    }

    /// The two antipodal panels of a wall, smaller first.
    pub fn panels_of(&self, root: &RootVec) -> Option<[i64; 2]> {
        let x = (0..self.n).find(|&x| self.local.roots_equal_up_to_sign(&self.panel_roots[x as usize], root))?;
        Some([x, x + self.n])
    }

    /// Panels hit by the alcove walk of `γ`, as unwrapped integers.
    pub fn walk(&self, gamma: &Subexpression) -> Result<Vec<i64>, DihedralError> {
        let mut k = 0i64;
        let mut out = Vec::with_capacity(gamma.len());
        for (i, &s) in gamma.expr().letters().iter().enumerate() {
            let c = Letter::from_index(s);
            let panel = if Letter::of_panel(k + 1) == c { k + 1 } else { k };
            if !self.local.roots_equal_up_to_sign(self.panel_root(panel), gamma.root(i)) {
                return Err(DihedralError::NumericFailure(format!("walk panel {panel} disagrees with prefix root {i}")));
            }
            out.push(panel);
            if gamma.bits()[i] {
                k = if panel == k + 1 { k + 1 } else { k - 1 };
            }
        }
        Ok(out)
    }

    /// Whether doubled-coordinate point `p2` lies on the positive side of
    /// the wall through panel `wall`.
    fn side(&self, p2: i64, wall: i64) -> bool {
        (p2 - 2 * wall).rem_euclid(4 * self.n) < 2 * self.n
    }

    /// Length and direction of the minor arc between doubled points.
    fn minor(&self, p2: i64, q2: i64) -> Result<(i64, i64), DihedralError> {
        let m = 4 * self.n;
        let fwd = (q2 - p2).rem_euclid(m);
        match fwd.cmp(&(2 * self.n)) {
            std::cmp::Ordering::Less => Ok((fwd, 1)),
            std::cmp::Ordering::Greater => Ok((m - fwd, -1)),
            std::cmp::Ordering::Equal => Err(DihedralError::NumericFailure("antipodal points have no minor arc".into())),
        }
    }
}

/// The circle configuration of a vertex with crossing special pairs, in
/// I-coordinates.
#[derive(Clone, Debug)]
pub struct CircleConfig {
    pub n: u32,
    pub o: f64,
    pub m1: f64,
    pub m2: f64,
    pub l1: f64,
    pub l2: f64,
    pub o_prime: f64,
    pub u: u8,
    pub breakpoints: [f64; 6],
}

/// Output of [`reduce_special_vertex`].
#[derive(Clone, Debug)]
pub struct Reduction {
    pub config: CircleConfig,
    /// Morphism from the alternating word of the cycles into the expression of `γ`.
    pub morphism: Morphism,
    pub cycles: Vec<DihedralCycle>,
    /// The cycles mapped into subexpressions of `γ`'s expression.
    pub images: Vec<Vec<Vec<bool>>>,
    /// The two edges at `γ` left by the sum of the images.
    pub residual_edges: [(Vec<bool>, Vec<bool>); 2],
}

/// Edges of a list of vertex cycles summed over GF(2).
pub fn cycle_sum(cycles: &[Vec<Vec<bool>>]) -> Vec<(Vec<bool>, Vec<bool>)> {
    let mut count: HashMap<(Vec<bool>, Vec<bool>), usize> = HashMap::new();
    for cyc in cycles {
        for k in 0..cyc.len() {
            let (a, b) = (&cyc[k], &cyc[(k + 1) % cyc.len()]);
            let key = if a <= b { (a.clone(), b.clone()) } else { (b.clone(), a.clone()) };
            *count.entry(key).or_default() += 1;
        }
    }
    let mut out: Vec<_> = count.into_iter().filter(|(_, c)| c % 2 == 1).map(|(e, _)| e).collect();
    out.sort();
    out
}

/// Given special `μ`-pair `(i, k)` and `λ`-pair `(j, l)` of a local
/// subexpression `γ` with `i < j < k < l`, finds dihedral cycles through `γ`
/// whose sum has exactly the edges `{γ, f_{i,k}γ}` and `{γ, f_{j,l}γ}` at `γ`.
pub fn reduce_special_vertex(
    ctx: &DihedralContext,
    gamma: &Subexpression,
    mu_pair: (usize, usize),
    lambda_pair: (usize, usize),
) -> Result<Reduction, DihedralError> {
    let (i, k) = mu_pair;
    let (j, l) = lambda_pair;
    if !(i < j && j < k && k < l) {
        return Err(DihedralError::NotSpecial(format!("expected i < j < k < l, got ({i}, {k}), ({j}, {l})")));
    }
    if l >= gamma.len() || !is_special(gamma, i, k) || !is_special(gamma, j, l) {
        return Err(DihedralError::NotSpecial(format!("({i}, {k}) or ({j}, {l}) is not special")));
    }
    let n = ctx.finite_order()? as i64;
    let circle = Circle::new(ctx)?;
    let walk = circle.walk(gamma)?;
    let modn = |x: i64| x.rem_euclid(2 * n);
    let fail = |what: &str| DihedralError::NumericFailure(format!("{what} (walk {walk:?})"));
    let mu_panels = circle.panels_of(gamma.root(k)).ok_or_else(|| fail("μ wall not found"))?;
    let lambda_panels = circle.panels_of(gamma.root(l)).ok_or_else(|| fail("λ wall not found"))?;
    let o2 = 1;
    let (mw, lw) = (mu_panels[0], lambda_panels[0]);
    let (m1, m2) = if circle.side(2 * mu_panels[0], lw) == circle.side(o2, lw) {
        (mu_panels[0], mu_panels[1])
    } else {
        (mu_panels[1], mu_panels[0])
    };
    let (l1, l2) = if circle.side(2 * lambda_panels[0], mw) == circle.side(o2, mw) {
        (lambda_panels[0], lambda_panels[1])
    } else {
        (lambda_panels[1], lambda_panels[0])
    };
    if modn(walk[i]) != m1 || modn(walk[j]) != l2 || modn(walk[k]) != m2 {
        return Err(fail("walk does not meet M1, Λ2, M2 at the special positions"));
    }
    let (u, lu) = if modn(walk[l]) == l1 {
        (1u8, l1)
    } else if modn(walk[l]) == l2 {
        (2u8, l2)
    } else {
        return Err(fail("walk does not meet the λ wall at l"));
    };
    let o_prime2 = [2 * lu - 1, 2 * lu + 1]
        .into_iter()
        .find(|&p| circle.side(p, lw) == circle.side(o2, lw))
        .expect("one neighbouring chamber lies on each side");
    let ys = [1, 2 * m1, 2 * l2, 2 * m2, 2 * lu, o_prime2];
    let mut xs2 = [1i64; 6];
    let mut dirs = [0i64; 6];
    for m in 1..6 {
        let (len, dir) = circle.minor(ys[m - 1], ys[m])?;
        xs2[m] = xs2[m - 1] + len;
        dirs[m] = dir;
    }
    if xs2[1..5].iter().any(|x| x % 2 != 0) {
        return Err(fail("breakpoints are not integers"));
    }
    let x: Vec<i64> = xs2.iter().map(|v| v / 2).collect();
    let x4 = x[4];
    let f_ends = [0usize, i, j, k, l];
    let mut letters = Vec::with_capacity(x4 as usize);
    let mut delta = Vec::with_capacity(x4 as usize);
    let mut p: Vec<usize> = Vec::with_capacity(x4 as usize);
    for z in 1..=x4 {
        let m = (1..5).find(|&m| xs2[m - 1] < 2 * z && 2 * z <= xs2[m]).expect("z lies in a segment");
        let pos2 = ys[m - 1] + dirs[m] * (2 * z - xs2[m - 1]);
        let panel = modn(pos2 / 2);
        letters.push(Letter::of_panel(panel));
        let at_break = 2 * z == xs2[m];
        delta.push(!at_break || dirs[m + 1] == dirs[m]);
        let q = if at_break {
            f_ends[m]
        } else {
            (f_ends[m - 1]..=f_ends[m])
                .find(|&t| modn(walk[t]) == panel)
                .ok_or_else(|| fail("no walk index meets the path panel"))?
        };
        if p.last().is_some_and(|&prev| prev >= q) {
            return Err(fail("index map is not increasing"));
        }
        p.push(q);
    }
    let r_expr = ctx.expression(&letters);
    let delta_sub = Subexpression::new(&r_expr, delta.clone())?;
    let morphism = Morphism::from_pair(&delta_sub, gamma, p, |v| v.clone())?;
    if !morphism.is_positive() {
        return Err(fail("path and walk do not form a positive p-pair"));
    }
    let c = letters[0];
    let nn = n as u32;
    let cycles = if u == 1 {
        (x[1]..x[2]).map(|xx| cyc1(nn, c, xx as u32, x4 as u32)).collect::<Result<Vec<_>, _>>()?
    } else {
        let cyc = cyc2(nn, c, x[1] as u32, x[2] as u32)?;
        if cyc.letters.len() != x4 as usize {
            return Err(fail("Cyc2 word length differs from the path length"));
        }
        vec![cyc]
    };
    if cycles.iter().any(|c| c.top() != delta.as_slice()) {
        return Err(fail("cycle top differs from the path signature"));
    }
    let images: Vec<Vec<Vec<bool>>> =
        cycles.iter().map(|c| c.vertices.iter().map(|v| morphism.apply(v)).collect()).collect();
    let fold = |a: usize, b: usize| {
        let mut v = gamma.bits().to_vec();
        v[a] = !v[a];
        v[b] = !v[b];
        v
    };
    let g = gamma.bits().to_vec();
    let expected = [fold(i, k), fold(j, l)];
    let at_gamma: Vec<Vec<bool>> = cycle_sum(&images)
        .into_iter()
        .filter_map(|(a, b)| if a == g { Some(b) } else if b == g { Some(a) } else { None })
        .collect();
    if at_gamma.len() != 2 || !expected.iter().all(|e| at_gamma.contains(e)) {
        return Err(fail("cycle sum has unexpected edges at the vertex"));
    }
    let half = |v2: i64| v2 as f64 / 2.0;
    let config = CircleConfig {
        n: nn,
        o: 0.5,
        m1: m1 as f64,
        m2: m2 as f64,
        l1: l1 as f64,
        l2: l2 as f64,
        o_prime: half(o_prime2),
        u,
        breakpoints: xs2.map(half),
    };
    let [e1, e2] = expected;
    Ok(Reduction { config, morphism, cycles, images, residual_edges: [(g.clone(), e1), (g, e2)] })
}

fn hyperbolic_xi(ctx: &DihedralContext) -> Result<f64, DihedralError> {
    if ctx.pair().position != Position::Hyperbolic {
        return Err(DihedralError::NotHyperbolic);
    }
    Ok(ctx.xi())
}

/// `ω(t)` in the coordinates `(α*, β*)`.
pub fn tits_omega(ctx: &DihedralContext, t: f64) -> Result<[f64; 2], DihedralError> {
    Ok(omega(hyperbolic_xi(ctx)?, t))
}

pub(crate) fn omega(xi: f64, t: f64) -> [f64; 2] {
    let root = (xi * xi - 1.0).sqrt();
    let (xp, xm) = (xi + root, xi - root);
    let denom = 2.0 * (xi * xi - 1.0);
    let (cp, cm) = ((xi * xp - 1.0) / denom, (xi * xm - 1.0) / denom);
    let (wp, wm) = (xp.powf(-(t + 1.0)), xm.powf(-(t + 1.0)));
    [cp * xp * wp + cm * xm * wm, -cp * wp - cm * wm]
}

/// `Ω°(x, y) = (x + y) ω(y / (x + y))` in the coordinates `(α*, β*)`.
pub fn tits_big_omega(ctx: &DihedralContext, x: f64, y: f64) -> Result<[f64; 2], DihedralError> {
    let xi = hyperbolic_xi(ctx)?;
    if x == 0.0 && y == 0.0 {
        return Ok([0.0, 0.0]);
    }
    let s = x + y;
    if s <= 0.0 {
        return Err(DihedralError::OutsideCone);
    }
    let w = omega(xi, y / s);
    Ok([s * w[0], s * w[1]])
}

/// The constant Jacobian `ln ξ₊ / √(ξ² - 1)` of `Ω°`.
pub fn tits_jacobian(ctx: &DihedralContext) -> Result<f64, DihedralError> {
    let xi = hyperbolic_xi(ctx)?;
    let root = (xi * xi - 1.0).sqrt();
    Ok((xi + root).ln() / root)
}

/// Action of `A` or `B` on `E*` in the coordinates `(α*, β*)`.
pub fn dual_action(c: Letter, xi: f64, p: [f64; 2]) -> [f64; 2] {
    match c {
        Letter::A => [-p[0], p[1] + 2.0 * xi * p[0]],
        Letter::B => [p[0] + 2.0 * xi * p[1], -p[1]],
    }
}

/// Action of `A` or `B` on the dual of the infinite dihedral model, in the
/// coordinates `(x, y)` of `x e_A* + y e_B*`.
pub fn cone_action(c: Letter, p: [f64; 2]) -> [f64; 2] {
    dual_action(c, 1.0, p)
}

/// Angle recognition helper: `cos(π/n)`.
pub fn elliptic_cos(n: u32) -> f64 {
    (PI / n as f64).cos()
}
