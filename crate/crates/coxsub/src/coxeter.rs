//! Coxeter systems, their geometric representation and root arithmetic.
//!
//! A system of rank `r` acts on `E = R^r` with basis the simple roots
//! `e_0, …, e_{r-1}`. Group elements are stored as their matrices; equality
//! is matrix equality up to the system tolerance.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default tolerance for every equality and sign test.
pub const EPS: f64 = 1e-9;

/// Default cutoff used when searching for the order of a product of two reflections.
pub const DEFAULT_MAX_ORDER: u32 = 64;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CoxeterError {
    #[error("malformed Coxeter matrix: {0}")]
    MalformedMatrix(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("vector is not of unit norm (norm {0})")]
    NotUnit(f64),
    #[error("root has coefficients of both signs: {0}")]
    MixedSigns(RootVec),
    #[error("zero vector is not a root")]
    ZeroRoot,
    #[error("generator index {0} out of range")]
    BadGenerator(usize),
}

/// An entry `m_ij` of a Coxeter matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "RawMultiplicity", into = "RawMultiplicity")]
pub enum Multiplicity {
    Finite(u32),
    Infinite,
}

impl Multiplicity {
    pub fn finite(self) -> Option<u32> {
        match self {
            Multiplicity::Finite(m) => Some(m),
            Multiplicity::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Multiplicity::Finite(_))
    }
}

impl fmt::Display for Multiplicity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Multiplicity::Finite(m) => write!(f, "{m}"),
            Multiplicity::Infinite => write!(f, "inf"),
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum RawMultiplicity {
    Num(u32),
    Str(String),
}

impl TryFrom<RawMultiplicity> for Multiplicity {
    type Error = String;

    fn try_from(raw: RawMultiplicity) -> Result<Self, Self::Error> {
        match raw {
            RawMultiplicity::Num(m) => Ok(Multiplicity::Finite(m)),
            RawMultiplicity::Str(s) if s == "inf" || s == "∞" => Ok(Multiplicity::Infinite),
            RawMultiplicity::Str(s) => Err(format!("expected an integer or \"inf\", got {s:?}")),
        }
    }
}

impl From<Multiplicity> for RawMultiplicity {
    fn from(m: Multiplicity) -> Self {
        match m {
            Multiplicity::Finite(m) => RawMultiplicity::Num(m),
            Multiplicity::Infinite => RawMultiplicity::Str("inf".into()),
        }
    }
}

/// Order of an element, as returned by [`CoxeterSystem::reflection_order`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Order {
    Finite(u32),
    Unbounded,
}

impl Order {
    pub fn finite(self) -> Option<u32> {
        match self {
            Order::Finite(n) => Some(n),
            Order::Unbounded => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Sign {
    Positive,
    Negative,
}

/// A vector of `E` in the simple-root basis. Usually a root.
#[derive(Clone, Debug, PartialEq)]
pub struct RootVec(DVector<f64>);

impl RootVec {
    pub fn new(coeffs: Vec<f64>) -> Self {
        RootVec(DVector::from_vec(coeffs))
    }

    pub fn from_vector(v: DVector<f64>) -> Self {
        RootVec(v)
    }

    pub fn zeros(rank: usize) -> Self {
        RootVec(DVector::zeros(rank))
    }

    pub fn basis(rank: usize, s: usize) -> Self {
        let mut v = DVector::zeros(rank);
        v[s] = 1.0;
        RootVec(v)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        self.0.as_slice()
    }

    pub fn vector(&self) -> &DVector<f64> {
        &self.0
    }

    pub fn scale(&self, c: f64) -> RootVec {
        RootVec(&self.0 * c)
    }

    /// Max-abs distance between coefficient vectors.
    pub fn dist(&self, other: &RootVec) -> f64 {
        (&self.0 - &other.0).amax()
    }

    pub fn approx_eq(&self, other: &RootVec, eps: f64) -> bool {
        self.len() == other.len() && self.dist(other) < eps
    }

    /// Equality up to sign, i.e. equality of the corresponding reflections.
    pub fn approx_eq_up_to_sign(&self, other: &RootVec, eps: f64) -> bool {
        self.approx_eq(other, eps) || self.approx_eq(&-other, eps)
    }

    pub fn max_abs(&self) -> f64 {
        self.0.amax()
    }

    /// Coefficients rounded to `digits` decimals, with negative zero normalized.
    pub fn rounded(&self, digits: i32) -> Vec<f64> {
        let f = 10f64.powi(digits);
        self.0
            .iter()
            .map(|c| {
                let r = (c * f).round() / f;
                if r == 0.0 { 0.0 } else { r }
            })
            .collect()
    }
}

impl fmt::Display for RootVec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (k, c) in self.rounded(6).iter().enumerate() {
            if k > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{c}")?;
        }
        write!(f, ")")
    }
}

impl Neg for &RootVec {
    type Output = RootVec;
    fn neg(self) -> RootVec {
        RootVec(-&self.0)
    }
}

impl Neg for RootVec {
    type Output = RootVec;
    fn neg(self) -> RootVec {
        RootVec(-self.0)
    }
}

impl Add for &RootVec {
    type Output = RootVec;
    fn add(self, rhs: &RootVec) -> RootVec {
        RootVec(&self.0 + &rhs.0)
    }
}

impl Sub for &RootVec {
    type Output = RootVec;
    fn sub(self, rhs: &RootVec) -> RootVec {
        RootVec(&self.0 - &rhs.0)
    }
}

/// A group element: its matrix on `E`, plus the word it was built from when known.
#[derive(Clone, Debug)]
pub struct Element {
    matrix: DMatrix<f64>,
    word: Option<Vec<usize>>,
}

impl Element {
    pub fn from_matrix(matrix: DMatrix<f64>) -> Self {
        Element { matrix, word: None }
    }

    pub fn identity(rank: usize) -> Self {
        Element { matrix: DMatrix::identity(rank, rank), word: Some(Vec::new()) }
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    pub fn word(&self) -> Option<&[usize]> {
        self.word.as_deref()
    }

    pub fn without_word(mut self) -> Self {
        self.word = None;
        self
    }

    pub fn rank(&self) -> usize {
        self.matrix.nrows()
    }

    /// Group inverse. Words are reversed, matrices inverted.
    pub fn inverse(&self) -> Element {
        let matrix = self
            .matrix
            .clone()
            .try_inverse()
            .expect("group elements act invertibly");
        let word = self.word.as_ref().map(|w| w.iter().rev().copied().collect());
        Element { matrix, word }
    }

    pub fn apply(&self, v: &RootVec) -> RootVec {
        RootVec(&self.matrix * &v.0)
    }

    /// Max-abs entry difference against another element.
    pub fn dist(&self, other: &Element) -> f64 {
        (&self.matrix - &other.matrix).amax()
    }

    pub fn is_identity(&self, eps: f64) -> bool {
        let n = self.rank();
        (&self.matrix - DMatrix::<f64>::identity(n, n)).amax() < eps
    }
}

impl Mul for &Element {
    type Output = Element;
    fn mul(self, rhs: &Element) -> Element {
        let word = match (&self.word, &rhs.word) {
            (Some(a), Some(b)) => Some(a.iter().chain(b).copied().collect()),
            _ => None,
        };
        Element { matrix: &self.matrix * &rhs.matrix, word }
    }
}

/// A Coxeter system together with its geometric representation.
#[derive(Clone, Debug)]
pub struct CoxeterSystem {
    cox: Vec<Vec<Multiplicity>>,
    gram: DMatrix<f64>,
    gens: Vec<DMatrix<f64>>,
    eps: f64,
}

impl CoxeterSystem {
    /// Builds the system from a Coxeter matrix.
    pub fn new(cox: Vec<Vec<Multiplicity>>) -> Result<Self, CoxeterError> {
        let r = cox.len();
        if r == 0 {
            return Err(CoxeterError::MalformedMatrix("empty matrix".into()));
        }
        for (i, row) in cox.iter().enumerate() {
            if row.len() != r {
                return Err(CoxeterError::MalformedMatrix(format!("row {i} has length {}", row.len())));
            }
            if row[i] != Multiplicity::Finite(1) {
                return Err(CoxeterError::MalformedMatrix(format!("diagonal entry {i} is {}", row[i])));
            }
            for j in 0..r {
                if cox[j][i] != row[j] {
                    return Err(CoxeterError::MalformedMatrix(format!("entries ({i},{j}) and ({j},{i}) differ")));
                }
                if i != j {
                    if let Multiplicity::Finite(m) = row[j] {
                        if m < 2 {
                            return Err(CoxeterError::MalformedMatrix(format!("entry ({i},{j}) is {m} < 2")));
                        }
                    }
                }
            }
        }
        let gram = DMatrix::from_fn(r, r, |i, j| match cox[i][j] {
            _ if i == j => 1.0,
            Multiplicity::Finite(2) => 0.0,
            Multiplicity::Finite(m) => -(std::f64::consts::PI / m as f64).cos(),
            Multiplicity::Infinite => -1.0,
        });
        Ok(Self::with_gram(cox, gram))
    }

    /// Parses a small integer matrix where `0` stands for infinity.
    pub fn from_rows(rows: &[&[u32]]) -> Result<Self, CoxeterError> {
        Self::new(
            rows.iter()
                .map(|row| {
                    row.iter()
                        .map(|&m| if m == 0 { Multiplicity::Infinite } else { Multiplicity::Finite(m) })
                        .collect()
                })
                .collect(),
        )
    }

    /// A system with an explicitly given Gram matrix; used for the rank-2
    /// models of dihedral reflection subgroups in hyperbolic position.
    pub(crate) fn with_gram(cox: Vec<Vec<Multiplicity>>, gram: DMatrix<f64>) -> Self {
        let r = cox.len();
        let gens = (0..r)
            .map(|s| {
                // r_{e_s}(v) = v - 2 (v|e_s) e_s, so row s changes only.
                let mut g = DMatrix::identity(r, r);
                for j in 0..r {
                    g[(s, j)] -= 2.0 * gram[(s, j)];
                }
                g
            })
            .collect();
        CoxeterSystem { cox, gram, gens, eps: EPS }
    }

    /// Same system with a different tolerance.
    pub fn with_eps(mut self, eps: f64) -> Self {
        self.eps = eps;
        self
    }

    pub fn rank(&self) -> usize {
        self.cox.len()
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn cox_matrix(&self) -> &[Vec<Multiplicity>] {
        &self.cox
    }

    pub fn m(&self, s: usize, t: usize) -> Multiplicity {
        self.cox[s][t]
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn gen_matrix(&self, s: usize) -> &DMatrix<f64> {
        &self.gens[s]
    }

    pub fn simple_root(&self, s: usize) -> RootVec {
        RootVec::basis(self.rank(), s)
    }

    pub fn identity(&self) -> Element {
        Element::identity(self.rank())
    }

    pub fn generator(&self, s: usize) -> Element {
        Element { matrix: self.gens[s].clone(), word: Some(vec![s]) }
    }

    /// The element `s_{w_0} s_{w_1} ⋯`.
    pub fn word(&self, word: &[usize]) -> Result<Element, CoxeterError> {
        let r = self.rank();
        let mut m = DMatrix::identity(r, r);
        for &s in word {
            if s >= r {
                return Err(CoxeterError::BadGenerator(s));
            }
            m *= &self.gens[s];
        }
        Ok(Element { matrix: m, word: Some(word.to_vec()) })
    }

    /// Right multiplication by a generator, keeping the word.
    pub fn mul_gen(&self, w: &Element, s: usize) -> Element {
        let word = w.word.as_ref().map(|w| {
            let mut w = w.clone();
            w.push(s);
            w
        });
        Element { matrix: &w.matrix * &self.gens[s], word }
    }

    /// The bilinear form `(u|v)`.
    pub fn form(&self, u: &RootVec, v: &RootVec) -> f64 {
        (u.0.transpose() * &self.gram * &v.0)[(0, 0)]
    }

    pub fn norm2(&self, v: &RootVec) -> f64 {
        self.form(v, v)
    }

    pub fn act(&self, w: &Element, v: &RootVec) -> Result<RootVec, CoxeterError> {
        if w.rank() != self.rank() || v.len() != self.rank() {
            return Err(CoxeterError::DimensionMismatch {
                expected: self.rank(),
                got: if w.rank() != self.rank() { w.rank() } else { v.len() },
            });
        }
        Ok(w.apply(v))
    }

    /// `v - 2(v|u)u`.
    pub fn reflect(&self, v: &RootVec, u: &RootVec) -> Result<RootVec, CoxeterError> {
        let n = self.norm2(u);
        if (n - 1.0).abs() > self.eps {
            return Err(CoxeterError::NotUnit(n));
        }
        Ok(self.reflect_unchecked(v, u))
    }

    pub(crate) fn reflect_unchecked(&self, v: &RootVec, u: &RootVec) -> RootVec {
        v - &u.scale(2.0 * self.form(v, u))
    }

    /// The reflection `t_u` as a group element (matrix `I - 2 u uᵀ B`).
    pub fn reflection(&self, u: &RootVec) -> Element {
        let r = self.rank();
        let bu = &self.gram * &u.0;
        let m = DMatrix::identity(r, r) - (&u.0 * bu.transpose()) * 2.0;
        Element::from_matrix(m)
    }

    pub fn root_sign(&self, v: &RootVec) -> Result<Sign, CoxeterError> {
        let pos = v.coeffs().iter().any(|&c| c > self.eps);
        let neg = v.coeffs().iter().any(|&c| c < -self.eps);
        match (pos, neg) {
            (true, false) => Ok(Sign::Positive),
            (false, true) => Ok(Sign::Negative),
            (true, true) => Err(CoxeterError::MixedSigns(v.clone())),
            (false, false) => Err(CoxeterError::ZeroRoot),
        }
    }

    pub fn is_positive(&self, v: &RootVec) -> Result<bool, CoxeterError> {
        Ok(self.root_sign(v)? == Sign::Positive)
    }

    /// The representative of `±v` that is positive.
    pub fn positive_rep(&self, v: &RootVec) -> Result<RootVec, CoxeterError> {
        Ok(match self.root_sign(v)? {
            Sign::Positive => v.clone(),
            Sign::Negative => -v,
        })
    }

    pub fn roots_equal(&self, u: &RootVec, v: &RootVec) -> bool {
        u.approx_eq(v, self.eps)
    }

    pub fn roots_equal_up_to_sign(&self, u: &RootVec, v: &RootVec) -> bool {
        u.approx_eq_up_to_sign(v, self.eps)
    }

    pub fn elements_equal(&self, x: &Element, y: &Element) -> bool {
        x.dist(y) < self.eps
    }

    /// Least `k ≤ max_order` with `(xy)^k = 1`.
    pub fn reflection_order(&self, x: &Element, y: &Element, max_order: u32) -> Order {
        let xy = &x.matrix * &y.matrix;
        let mut p = xy.clone();
        for k in 1..=max_order {
            if Element::from_matrix(p.clone()).is_identity(self.eps) {
                return Order::Finite(k);
            }
            p = &p * &xy;
        }
        Order::Unbounded
    }
}

/// Families of Coxeter diagrams used by the sweeps.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CartanType {
    A(usize),
    B(usize),
    D(usize),
    F4,
    G2,
    /// Affine type `Ã_n`.
    AffineA(usize),
}

impl CartanType {
    pub fn parse(name: &str) -> Option<CartanType> {
        let name = name.trim();
        let (affine, rest) = match name.strip_prefix('~') {
            Some(r) => (true, r),
            None => (false, name),
        };
        let (letter, num) = rest.split_at(1.min(rest.len()));
        let n: usize = num.parse().ok()?;
        Some(match (letter, affine) {
            ("A", false) if n >= 1 => CartanType::A(n),
            ("A", true) if n >= 1 => CartanType::AffineA(n),
            ("B", false) | ("C", false) if n >= 2 => CartanType::B(n),
            ("D", false) if n >= 4 => CartanType::D(n),
            ("F", false) if n == 4 => CartanType::F4,
            ("G", false) if n == 2 => CartanType::G2,
            _ => return None,
        })
    }

    pub fn rank(self) -> usize {
        match self {
            CartanType::A(n) | CartanType::B(n) | CartanType::D(n) => n,
            CartanType::F4 => 4,
            CartanType::G2 => 2,
            CartanType::AffineA(n) => n + 1,
        }
    }

    pub fn cox_matrix(self) -> Vec<Vec<Multiplicity>> {
        let r = self.rank();
        let mut m = vec![vec![2u32; r]; r];
        for (i, row) in m.iter_mut().enumerate() {
            row[i] = 1;
        }
        let mut link = |i: usize, j: usize, v: u32| {
            m[i][j] = v;
            m[j][i] = v;
        };
        match self {
            CartanType::A(n) => (1..n).for_each(|i| link(i - 1, i, 3)),
            CartanType::B(n) => {
                (1..n).for_each(|i| link(i - 1, i, 3));
                link(n - 2, n - 1, 4);
            }
            CartanType::D(n) => {
                (1..n - 1).for_each(|i| link(i - 1, i, 3));
                link(n - 3, n - 1, 3);
            }
            CartanType::F4 => {
                link(0, 1, 3);
                link(1, 2, 4);
                link(2, 3, 3);
            }
            CartanType::G2 => link(0, 1, 6),
            CartanType::AffineA(n) => {
                if n == 1 {
                    m[0][1] = 0;
                    m[1][0] = 0;
                } else {
                    (0..=n).for_each(|i| link(i, (i + 1) % (n + 1), 3));
                }
            }
        }
        m.into_iter()
            .map(|row| {
                row.into_iter()
                    .map(|v| if v == 0 { Multiplicity::Infinite } else { Multiplicity::Finite(v) })
                    .collect()
            })
            .collect()
    }

    pub fn system(self) -> CoxeterSystem {
        CoxeterSystem::new(self.cox_matrix()).expect("Cartan matrices are well formed")
    }
}

impl fmt::Display for CartanType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CartanType::A(n) => write!(f, "A{n}"),
            CartanType::B(n) => write!(f, "B{n}"),
            CartanType::D(n) => write!(f, "D{n}"),
            CartanType::F4 => write!(f, "F4"),
            CartanType::G2 => write!(f, "G2"),
            CartanType::AffineA(n) => write!(f, "~A{n}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn a2() -> CoxeterSystem {
        CoxeterSystem::from_rows(&[&[1, 3], &[3, 1]]).unwrap()
    }

    #[test]
    fn gram_entries() {
        let g = a2();
        assert!((g.gram()[(0, 1)] + 0.5).abs() < 1e-12);
        let g = CoxeterSystem::from_rows(&[&[1, 2], &[2, 1]]).unwrap();
        assert_eq!(g.gram()[(0, 1)], 0.0);
        let g = CoxeterSystem::from_rows(&[&[1, 0], &[0, 1]]).unwrap();
        assert_eq!(g.gram()[(0, 1)], -1.0);
    }

    #[test]
    fn malformed() {
        assert!(CoxeterSystem::from_rows(&[&[1, 3], &[2, 1]]).is_err());
        assert!(CoxeterSystem::from_rows(&[&[2, 3], &[3, 1]]).is_err());
        assert!(CoxeterSystem::from_rows(&[&[1, 1], &[1, 1]]).is_err());
    }

    #[test]
    fn generators_are_isometric_involutions() {
        for t in [CartanType::A(3), CartanType::B(3), CartanType::G2, CartanType::F4, CartanType::AffineA(2)] {
            let sys = t.system();
            for s in 0..sys.rank() {
                let g = sys.gen_matrix(s);
                let r = sys.rank();
                assert!((g * g - DMatrix::<f64>::identity(r, r)).amax() < EPS);
                assert!((g.transpose() * sys.gram() * g - sys.gram()).amax() < EPS);
            }
        }
    }

    #[test]
    fn act_and_reflect() {
        let sys = a2();
        let s = sys.generator(0);
        let es = sys.simple_root(0);
        let et = sys.simple_root(1);
        assert!(sys.act(&s, &es).unwrap().approx_eq(&-&es, EPS));
        let st = sys.act(&s, &et).unwrap();
        assert!(st.approx_eq(&RootVec::new(vec![1.0, 1.0]), EPS));
        assert!(sys.reflect(&et, &es).unwrap().approx_eq(&st, EPS));
        assert!(sys.reflect(&es, &es).unwrap().approx_eq(&-&es, EPS));
        assert_eq!(sys.root_sign(&st).unwrap(), Sign::Positive);
        assert!(matches!(sys.reflect(&es, &st.scale(2.0)), Err(CoxeterError::NotUnit(_))));
        assert!(matches!(sys.root_sign(&RootVec::new(vec![1.0, -1.0])), Err(CoxeterError::MixedSigns(_))));
    }

    #[test]
    fn element_equality_and_orders() {
        let sys = a2();
        let e = sys.identity();
        assert!(sys.elements_equal(&sys.word(&[0, 1, 0, 1, 0, 1]).unwrap(), &e));
        assert!(sys.elements_equal(&sys.word(&[0, 1, 0]).unwrap(), &sys.word(&[1, 0, 1]).unwrap()));
        assert!(!sys.elements_equal(&sys.generator(0), &sys.generator(1)));
        assert_eq!(sys.reflection_order(&sys.generator(0), &sys.generator(0), 64), Order::Finite(1));
        assert_eq!(sys.reflection_order(&sys.generator(0), &sys.generator(1), 64), Order::Finite(3));
        let inf = CoxeterSystem::from_rows(&[&[1, 0], &[0, 1]]).unwrap();
        assert_eq!(inf.reflection_order(&inf.generator(0), &inf.generator(1), 64), Order::Unbounded);
    }

    #[test]
    fn reflection_matrix_matches_conjugate() {
        let sys = CartanType::B(3).system();
        let w = sys.word(&[0, 1, 2, 1]).unwrap();
        let root = sys.act(&w, &sys.simple_root(0)).unwrap();
        let conj = &(&w * &sys.generator(0)) * &w.inverse();
        assert!(sys.elements_equal(&conj, &sys.reflection(&root)));
    }

    #[test]
    fn multiplicity_serde() {
        let m: Vec<Multiplicity> = serde_json::from_str("[1, 3, \"inf\"]").unwrap();
        assert_eq!(m, vec![Multiplicity::Finite(1), Multiplicity::Finite(3), Multiplicity::Infinite]);
        assert_eq!(serde_json::to_string(&m).unwrap(), "[1,3,\"inf\"]");
        assert!(serde_json::from_str::<Multiplicity>("\"x\"").is_err());
    }

    #[test]
    fn cartan_parse() {
        assert_eq!(CartanType::parse("B3"), Some(CartanType::B(3)));
        assert_eq!(CartanType::parse("~A2"), Some(CartanType::AffineA(2)));
        assert_eq!(CartanType::parse("G3"), None);
        assert_eq!(CartanType::AffineA(2).system().m(0, 2), Multiplicity::Finite(3));
    }
}
