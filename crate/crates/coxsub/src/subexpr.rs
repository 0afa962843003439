//! Expressions, subexpressions, double folds, the order on subexpressions with
//! a common target, special pairs, galleries and the graph `Sub(s, w)`.
//!
//! Positions are 0-based: the prefix element `prefix(i)` is the product of the
//! selected letters strictly before position `i`, and `root(i)` is
//! `prefix(i)(-e_{s_i})`.

use std::cmp::Ordering;
use std::collections::VecDeque;

use rustc_hash::FxHashMap as HashMap;
use std::sync::Arc;

use thiserror::Error;

use crate::coxeter::{CoxeterError, CoxeterSystem, Element, RootVec, Sign};

/// Default cap on the expression length for exhaustive enumeration.
pub const DEFAULT_LIMIT: usize = 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubexprError {
    #[error("index {0} out of range")]
    IndexOutOfRange(usize),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("double fold ({0}, {1}) is not applicable")]
    NotApplicable(usize, usize),
    #[error("subexpressions have different targets")]
    DifferentTargets,
    #[error("subexpressions belong to different expressions")]
    DifferentExpressions,
    #[error("expression of length {len} exceeds enumeration limit {limit}")]
    TooLarge { len: usize, limit: usize },
    #[error(transparent)]
    Coxeter(#[from] CoxeterError),
}

/// A word `(s_0, …, s_{m-1})` in the generators of a system.
#[derive(Clone, Debug)]
pub struct Expression {
    system: Arc<CoxeterSystem>,
    letters: Vec<usize>,
}

impl Expression {
    pub fn new(system: Arc<CoxeterSystem>, letters: Vec<usize>) -> Result<Self, SubexprError> {
        if let Some(&s) = letters.iter().find(|&&s| s >= system.rank()) {
            return Err(CoxeterError::BadGenerator(s).into());
        }
        Ok(Expression { system, letters })
    }

    pub fn system(&self) -> &Arc<CoxeterSystem> {
        &self.system
    }

    pub fn letters(&self) -> &[usize] {
        &self.letters
    }

    pub fn len(&self) -> usize {
        self.letters.len()
    }

    pub fn is_empty(&self) -> bool {
        self.letters.is_empty()
    }

    /// Product of the letters selected by `bits`.
    pub fn target_of(&self, bits: &[bool]) -> Element {
        let mut w = self.system.identity();
        for (k, &b) in bits.iter().enumerate() {
            if b {
                w = self.system.mul_gen(&w, self.letters[k]);
            }
        }
        w
    }
}

pub fn bits_to_mask(bits: &[bool]) -> u64 {
    bits.iter().enumerate().filter(|(_, &b)| b).fold(0, |m, (k, _)| m | 1 << k)
}

pub fn mask_to_bits(mask: u64, len: usize) -> Vec<bool> {
    (0..len).map(|k| mask >> k & 1 == 1).collect()
}

/// Renders bits as a string of `0`/`1`.
pub fn bit_string(bits: &[bool]) -> String {
    bits.iter().map(|&b| if b { '1' } else { '0' }).collect()
}

/// Parses a string of `0`/`1`.
pub fn parse_bits(s: &str) -> Option<Vec<bool>> {
    s.chars()
        .map(|c| match c {
            '0' => Some(false),
            '1' => Some(true),
            _ => None,
        })
        .collect()
}

/// A subexpression `γ ⊂ s` with its prefix elements and prefix roots.
#[derive(Clone, Debug)]
pub struct Subexpression {
    expr: Arc<Expression>,
    bits: Vec<bool>,
    mask: u64,
    prefix: Vec<Arc<Element>>,
    roots: Vec<Arc<RootVec>>,
    ids: Vec<i32>,
}

/// Signed integer ids of roots: equal ids for equal roots, opposite ids for
/// opposite roots. Coefficients are compared on a 1e-6 grid.
#[derive(Default)]
pub(crate) struct RootTable {
    table: HashMap<Vec<i64>, i32>,
    buf: Vec<i64>,
}

impl RootTable {
    pub(crate) fn key(v: &RootVec) -> Vec<i64> {
        v.coeffs().iter().map(|c| (c * 1e6).round() as i64).collect()
    }

    pub(crate) fn id(&mut self, r: &RootVec, positive: bool) -> i32 {
        let sign = if positive { 1.0 } else { -1.0 };
        self.buf.clear();
        self.buf.extend(r.coeffs().iter().map(|c| (sign * c * 1e6).round() as i64));
        let id = match self.table.get(self.buf.as_slice()) {
            Some(&id) => id,
            None => {
                let id = self.table.len() as i32 + 1;
                self.table.insert(self.buf.clone(), id);
                id
            }
        };
        if positive { id } else { -id }
    }
}

fn prefix_root(sys: &CoxeterSystem, table: &mut RootTable, w: &Element, s: usize) -> Result<(Arc<RootVec>, i32), SubexprError> {
    let r = -w.apply(&sys.simple_root(s));
    let pos = sys.root_sign(&r)? == Sign::Positive;
    let id = table.id(&r, pos);
    Ok((Arc::new(r), id))
}

impl Subexpression {
    pub fn new(expr: &Arc<Expression>, bits: Vec<bool>) -> Result<Self, SubexprError> {
        if bits.len() != expr.len() {
            return Err(SubexprError::Precondition(format!(
                "{} bits for an expression of length {}",
                bits.len(),
                expr.len()
            )));
        }
        if bits.len() > 63 {
            return Err(SubexprError::TooLarge { len: bits.len(), limit: 63 });
        }
        let sys = expr.system();
        let mut prefix = Vec::with_capacity(bits.len() + 1);
        let mut roots = Vec::with_capacity(bits.len());
        let mut ids = Vec::with_capacity(bits.len());
        let mut table = RootTable::default();
        let mut w = Arc::new(sys.identity());
        for (k, &s) in expr.letters().iter().enumerate() {
            let (r, id) = prefix_root(sys, &mut table, &w, s)?;
            roots.push(r);
            ids.push(id);
            let next = if bits[k] { Arc::new(sys.mul_gen(&w, s)) } else { w.clone() };
            prefix.push(w);
            w = next;
        }
        prefix.push(w);
        Ok(Subexpression { expr: expr.clone(), mask: bits_to_mask(&bits), bits, prefix, roots, ids })
    }

    pub fn expr(&self) -> &Arc<Expression> {
        &self.expr
    }

    pub fn system(&self) -> &CoxeterSystem {
        self.expr.system()
    }

    pub fn bits(&self) -> &[bool] {
        &self.bits
    }

    pub fn mask(&self) -> u64 {
        self.mask
    }

    pub fn len(&self) -> usize {
        self.bits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bits.is_empty()
    }

    pub fn target(&self) -> &Element {
        &self.prefix[self.bits.len()]
    }

    /// The prefix element before position `i`; `prefix(len())` is the target.
    pub fn prefix(&self, i: usize) -> &Element {
        &self.prefix[i]
    }

    /// `prefix(i)(-e_{s_i})`.
    pub fn root(&self, i: usize) -> &RootVec {
        &self.roots[i]
    }

    pub fn roots(&self) -> impl Iterator<Item = &RootVec> {
        self.roots.iter().map(|r| r.as_ref())
    }

    /// `prefix(i + 1)(-e_{s_i})`, the root seen from the chamber after position `i`.
    pub fn root_left(&self, i: usize) -> RootVec {
        -self.prefix[i + 1].apply(&self.system().simple_root(self.expr.letters()[i]))
    }

    pub fn is_positive(&self, i: usize) -> bool {
        self.ids[i] > 0
    }

    /// Signed ids of the prefix roots: `root_ids()[i] == ±root_ids()[j]` iff
    /// `root(i) = ±root(j)`. Subexpressions of one graph share ids.
    pub fn root_ids(&self) -> &[i32] {
        &self.ids
    }

    /// Positive representative of `±root(i)`.
    pub fn color(&self, i: usize) -> RootVec {
        if self.is_positive(i) { self.roots[i].as_ref().clone() } else { -self.roots[i].as_ref() }
    }

    fn check_pair(&self, i: usize, j: usize) -> Result<(), SubexprError> {
        if j >= self.len() {
            return Err(SubexprError::IndexOutOfRange(j));
        }
        if i >= j {
            return Err(SubexprError::Precondition(format!("expected i < j, got ({i}, {j})")));
        }
        Ok(())
    }

    pub fn double_fold_applicable(&self, i: usize, j: usize) -> Result<bool, SubexprError> {
        self.check_pair(i, j)?;
        Ok(self.system().roots_equal_up_to_sign(&self.roots[i], &self.roots[j]))
    }

    /// `f_{i,j}γ`: bits `i` and `j` complemented.
    pub fn double_fold(&self, i: usize, j: usize) -> Result<Subexpression, SubexprError> {
        if !self.double_fold_applicable(i, j)? {
            return Err(SubexprError::NotApplicable(i, j));
        }
        let mut bits = self.bits.clone();
        bits[i] = !bits[i];
        bits[j] = !bits[j];
        Subexpression::new(&self.expr, bits)
    }

    /// Index of the largest position where the two bit sequences differ.
    pub fn max_difference(&self, other: &Subexpression) -> Option<usize> {
        let x = self.mask ^ other.mask;
        (x != 0).then(|| 63 - x.leading_zeros() as usize)
    }
}

/// Order on subexpressions of one expression with a common target: at the
/// largest differing position, the greater one has a positive prefix root.
pub fn order_compare(delta: &Subexpression, gamma: &Subexpression) -> Result<Ordering, SubexprError> {
    if !Arc::ptr_eq(delta.expr(), gamma.expr()) && delta.expr().letters() != gamma.expr().letters() {
        return Err(SubexprError::DifferentExpressions);
    }
    if !delta.system().elements_equal(delta.target(), gamma.target()) {
        return Err(SubexprError::DifferentTargets);
    }
    Ok(compare_same_target(delta, gamma))
}

fn compare_same_target(delta: &Subexpression, gamma: &Subexpression) -> Ordering {
    match delta.max_difference(gamma) {
        None => Ordering::Equal,
        Some(i) if gamma.is_positive(i) => Ordering::Less,
        Some(_) => Ordering::Greater,
    }
}

/// A double fold that makes `γ` strictly smaller, or `None` if `γ` is minimal.
///
/// `γ` is minimal exactly when every prefix root is negative. Otherwise `j`
/// is the last position with a positive root and `i < j` the last position
/// with `root(i) = -root(j)`.
pub fn descend_step(gamma: &Subexpression) -> Option<(usize, usize)> {
    let sys = gamma.system();
    let j = (0..gamma.len()).rev().find(|&j| gamma.is_positive(j))?;
    let neg = -gamma.root(j);
    let i = (0..j)
        .rev()
        .find(|&i| sys.roots_equal(gamma.root(i), &neg))
        .expect("a positive prefix root is preceded by its negative");
    Some((i, j))
}

/// All special pairs `(i, j, color)` of `γ`.
pub fn special_pairs(gamma: &Subexpression) -> Vec<(usize, usize, RootVec)> {
    let mut out = Vec::new();
    for j in 0..gamma.len() {
        if !gamma.is_positive(j) {
            continue;
        }
        for i in 0..j {
            if is_special(gamma, i, j) {
                out.push((i, j, gamma.root(j).clone()));
            }
        }
    }
    out
}

/// Whether `(i, j)` is a special pair of `γ`.
pub fn is_special(gamma: &Subexpression, i: usize, j: usize) -> bool {
    let sys = gamma.system();
    if i >= j || j >= gamma.len() || !gamma.is_positive(j) {
        return false;
    }
    let (ri, rj) = (gamma.root(i), gamma.root(j));
    sys.roots_equal(ri, &-rj)
        && !(0..i).any(|k| sys.roots_equal(gamma.root(k), rj))
        && !(i + 1..j).any(|k| sys.roots_equal(gamma.root(k), ri))
}

/// A labelled gallery: chambers `wC` given by `w`, and the walls between them.
#[derive(Clone, Debug)]
pub struct Gallery {
    pub chambers: Vec<Element>,
    pub walls: Vec<RootVec>,
}

impl Gallery {
    /// Reads the subexpression back: a letter is selected iff the gallery
    /// crosses the corresponding wall.
    pub fn bits(&self, sys: &CoxeterSystem) -> Vec<bool> {
        self.chambers.windows(2).map(|c| !sys.elements_equal(&c[0], &c[1])).collect()
    }

    /// Reflects the part of the gallery strictly after wall `i` up to and
    /// including wall `j` in wall `i`.
    pub fn double_fold(&self, sys: &CoxeterSystem, i: usize, j: usize) -> Result<Gallery, SubexprError> {
        let t = sys.reflection(&self.walls[i]);
        let mut g = self.clone();
        for k in i + 1..=j {
            g.chambers[k] = &t * &self.chambers[k];
            g.walls[k] = sys.positive_rep(&t.apply(&self.walls[k]))?;
        }
        Ok(g)
    }
}

pub fn gallery_of(gamma: &Subexpression) -> Gallery {
    Gallery {
        chambers: gamma.prefix.iter().map(|w| w.as_ref().clone()).collect(),
        walls: (0..gamma.len()).map(|i| gamma.color(i)).collect(),
    }
}

/// An edge of `Sub(s, w)`: endpoints as vertex indices `u < v`, the fold
/// positions `i < j`, and the color.
#[derive(Clone, Debug)]
pub struct Edge {
    pub u: usize,
    pub v: usize,
    pub i: usize,
    pub j: usize,
    pub color: RootVec,
}

/// The graph `Sub(s, w)`.
#[derive(Clone, Debug)]
pub struct SubexprGraph {
    expr: Arc<Expression>,
    target: Element,
    vertices: Vec<Subexpression>,
    edges: Vec<Edge>,
    by_mask: HashMap<u64, usize>,
    by_pair: HashMap<(usize, usize), usize>,
    adjacency: Vec<Vec<usize>>,
}

impl SubexprGraph {
    fn assemble(expr: &Arc<Expression>, target: Element, mut vertices: Vec<Subexpression>) -> Self {
        let m = expr.len();
        vertices.sort_unstable_by(compare_same_target);
        let by_mask: HashMap<u64, usize> = vertices.iter().enumerate().map(|(k, v)| (v.mask(), k)).collect();
        let mut edges = Vec::with_capacity(2 * vertices.len());
        for (a, g) in vertices.iter().enumerate() {
            let mask = g.mask();
            for j in 0..m {
                for i in 0..j {
                    if let Some(&b) = by_mask.get(&(mask ^ (1 << i) ^ (1 << j))) {
                        if a < b {
                            edges.push(Edge { u: a, v: b, i, j, color: g.color(i) });
                        }
                    }
                }
            }
        }
        edges.sort_unstable_by_key(|e| (e.u, e.v));
        let mut degree = vec![0usize; vertices.len()];
        for e in &edges {
            degree[e.u] += 1;
            degree[e.v] += 1;
        }
        let mut adjacency: Vec<Vec<usize>> = degree.into_iter().map(Vec::with_capacity).collect();
        let mut by_pair = HashMap::with_capacity_and_hasher(edges.len(), Default::default());
        for (k, e) in edges.iter().enumerate() {
            adjacency[e.u].push(k);
            adjacency[e.v].push(k);
            by_pair.insert((e.u, e.v), k);
        }
        SubexprGraph { expr: expr.clone(), target, vertices, edges, by_mask, by_pair, adjacency }
    }

    pub fn expr(&self) -> &Arc<Expression> {
        &self.expr
    }

    pub fn system(&self) -> &CoxeterSystem {
        self.expr.system()
    }

    pub fn target(&self) -> &Element {
        &self.target
    }

    /// Vertices in increasing order.
    pub fn vertices(&self) -> &[Subexpression] {
        &self.vertices
    }

    pub fn vertex(&self, k: usize) -> &Subexpression {
        &self.vertices[k]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertex_by_bits(&self, bits: &[bool]) -> Option<usize> {
        self.by_mask.get(&bits_to_mask(bits)).copied()
    }

    pub fn vertex_by_mask(&self, mask: u64) -> Option<usize> {
        self.by_mask.get(&mask).copied()
    }

    /// Index of the edge joining two vertices.
    pub fn edge_between(&self, a: usize, b: usize) -> Option<usize> {
        self.by_pair.get(&(a.min(b), a.max(b))).copied()
    }

    /// Edge indices incident to a vertex.
    pub fn incident(&self, v: usize) -> &[usize] {
        &self.adjacency[v]
    }

    /// Component label of every vertex, and the number of components.
    pub fn components(&self) -> (Vec<usize>, usize) {
        let n = self.vertices.len();
        let mut label = vec![usize::MAX; n];
        let mut count = 0;
        for start in 0..n {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = count;
            let mut queue = VecDeque::from([start]);
            while let Some(x) = queue.pop_front() {
                for &e in &self.adjacency[x] {
                    let y = if self.edges[e].u == x { self.edges[e].v } else { self.edges[e].u };
                    if label[y] == usize::MAX {
                        label[y] = count;
                        queue.push_back(y);
                    }
                }
            }
            count += 1;
        }
        (label, count)
    }

    pub fn is_connected(&self) -> bool {
        self.components().1 <= 1
    }

    /// The minimal vertex, reached by iterating [`descend_step`] from the maximum.
    pub fn minimum_by_descent(&self) -> Option<usize> {
        let mut cur = self.vertices.last()?.clone();
        while let Some((i, j)) = descend_step(&cur) {
            cur = cur.double_fold(i, j).ok()?;
        }
        self.vertex_by_bits(cur.bits())
    }
}

fn check_limit(expr: &Expression, limit: usize) -> Result<(), SubexprError> {
    if expr.len() > limit.min(63) {
        return Err(SubexprError::TooLarge { len: expr.len(), limit: limit.min(63) });
    }
    Ok(())
}

/// Visits every subexpression by depth-first search; prefixes are shared.
fn for_each_subexpression(
    expr: &Arc<Expression>,
    visit: &mut dyn FnMut(Subexpression),
) -> Result<(), SubexprError> {
    struct Walk<'a> {
        expr: &'a Arc<Expression>,
        bits: Vec<bool>,
        prefix: Vec<Arc<Element>>,
        roots: Vec<Arc<RootVec>>,
        ids: Vec<i32>,
        table: RootTable,
    }
    fn rec(st: &mut Walk, visit: &mut dyn FnMut(Subexpression)) -> Result<(), SubexprError> {
        let k = st.bits.len();
        if k == st.expr.len() {
            visit(Subexpression {
                expr: st.expr.clone(),
                mask: bits_to_mask(&st.bits),
                bits: st.bits.clone(),
                prefix: st.prefix.clone(),
                roots: st.roots.clone(),
                ids: st.ids.clone(),
            });
            return Ok(());
        }
        let sys = st.expr.system();
        let s = st.expr.letters()[k];
        let w = st.prefix[k].clone();
        let (r, id) = prefix_root(sys, &mut st.table, &w, s)?;
        st.roots.push(r);
        st.ids.push(id);
        for (bit, next) in [(false, w.clone()), (true, Arc::new(sys.mul_gen(&w, s)))] {
            st.bits.push(bit);
            st.prefix.push(next);
            rec(st, visit)?;
            st.bits.pop();
            st.prefix.pop();
        }
        st.roots.pop();
        st.ids.pop();
        Ok(())
    }
    let mut st = Walk {
        expr,
        bits: Vec::with_capacity(expr.len()),
        prefix: vec![Arc::new(expr.system().identity())],
        roots: Vec::with_capacity(expr.len()),
        ids: Vec::with_capacity(expr.len()),
        table: RootTable::default(),
    };
    rec(&mut st, visit)
}

/// `Sub(s, w)`.
pub fn build_graph(expr: &Arc<Expression>, w: &Element, limit: usize) -> Result<SubexprGraph, SubexprError> {
    check_limit(expr, limit)?;
    let sys = expr.system();
    let mut subs = Vec::new();
    for_each_subexpression(expr, &mut |g| {
        if sys.elements_equal(g.target(), w) {
            subs.push(g);
        }
    })?;
    Ok(SubexprGraph::assemble(expr, w.clone(), subs))
}

fn matrix_key(w: &Element) -> Vec<i64> {
    w.matrix().iter().map(|c| (c * 1e6).round() as i64).collect()
}

/// `Sub(s, w)` for every `w` that is the target of some subexpression,
/// ordered by the smallest mask reaching each target.
pub fn build_all_graphs(expr: &Arc<Expression>, limit: usize) -> Result<Vec<SubexprGraph>, SubexprError> {
    check_limit(expr, limit)?;
    let sys = expr.system();
    let mut classes: Vec<Vec<Subexpression>> = Vec::new();
    let mut index: HashMap<Vec<i64>, Vec<usize>> = HashMap::default();
    for_each_subexpression(expr, &mut |g| {
        let bucket = index.entry(matrix_key(g.target())).or_default();
        match bucket.iter().find(|&&c| sys.elements_equal(classes[c][0].target(), g.target())) {
            Some(&c) => classes[c].push(g),
            None => {
                bucket.push(classes.len());
                classes.push(vec![g]);
            }
        }
    })?;
    for class in &mut classes {
        class.sort_by_key(|g| g.mask());
    }
    classes.sort_by_key(|c| c[0].mask());
    Ok(classes
        .into_iter()
        .map(|subs| {
            let t = subs[0].target().clone();
            SubexprGraph::assemble(expr, t, subs)
        })
        .collect())
}
