//! The cycle space of `Sub(s, w)` over GF(2): triangle and square
//! generators, dihedral cycle images, edge moving, spanning checks and the
//! constructive decomposition of even subgraphs.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::coxeter::{Order, RootVec};
use crate::dihedral::{
    cyc_parameters, make_cyc, make_dihedral, project_subexpression, reduce_special_vertex, CycKind, DihedralContext,
    DihedralError, Letter, Morphism, Projection,
};
use crate::roots::{properly_situated_pair, Position};
use crate::subexpr::{RootTable, bit_string, bits_to_mask, is_special, mask_to_bits, parse_bits, SubexprError, SubexprGraph, Subexpression};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CycleError {
    #[error("edge set is not even: vertex {0} has odd degree")]
    NotEven(usize),
    #[error("condition violated: {0}")]
    ConditionViolated(String),
    #[error("certificate rejected: {0}")]
    BadCertificate(String),
    #[error(transparent)]
    Dihedral(#[from] DihedralError),
    #[error(transparent)]
    Subexpr(#[from] SubexprError),
}

/// A set of edges of a fixed graph, as a bit vector over edge indices.
/// Addition is symmetric difference.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct EdgeSet {
    words: Vec<u64>,
    len: usize,
}

impl EdgeSet {
    pub fn new(len: usize) -> Self {
        EdgeSet { words: vec![0; len.div_ceil(64)], len }
    }

    pub fn from_edges(len: usize, edges: impl IntoIterator<Item = usize>) -> Self {
        let mut s = EdgeSet::new(len);
        for e in edges {
            s.toggle(e);
        }
        s
    }

    /// Number of edges of the host graph.
    pub fn universe(&self) -> usize {
        self.len
    }

    pub fn contains(&self, e: usize) -> bool {
        self.words[e / 64] >> (e % 64) & 1 == 1
    }

    pub fn toggle(&mut self, e: usize) {
        self.words[e / 64] ^= 1 << (e % 64);
    }

    pub fn add(&mut self, other: &EdgeSet) {
        for (a, b) in self.words.iter_mut().zip(&other.words) {
            *a ^= b;
        }
    }

    pub fn is_empty(&self) -> bool {
        self.words.iter().all(|&w| w == 0)
    }

    pub fn count(&self) -> usize {
        self.words.iter().map(|w| w.count_ones() as usize).sum()
    }

    pub fn edges(&self) -> Vec<usize> {
        (0..self.len).filter(|&e| self.contains(e)).collect()
    }

    pub fn max_edge(&self) -> Option<usize> {
        self.words.iter().enumerate().rev().find(|(_, w)| **w != 0).map(|(k, w)| 64 * k + 63 - w.leading_zeros() as usize)
    }
}

/// Whether every vertex has even degree in `set`.
pub fn is_even(g: &SubexprGraph, set: &EdgeSet) -> Result<(), CycleError> {
    let mut degree = vec![0usize; g.vertex_count()];
    for e in set.edges() {
        degree[g.edges()[e].u] += 1;
        degree[g.edges()[e].v] += 1;
    }
    match degree.iter().position(|d| d % 2 == 1) {
        Some(v) => Err(CycleError::NotEven(v)),
        None => Ok(()),
    }
}

/// `|E| - |V| + #components`.
pub fn cycle_space_dim(g: &SubexprGraph) -> usize {
    g.edge_count() + g.components().1 - g.vertex_count()
}

/// Fundamental cycles of a spanning forest; a basis of the cycle space.
pub fn fundamental_cycles(g: &SubexprGraph) -> Vec<EdgeSet> {
    let n = g.vertex_count();
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; n];
    let mut depth = vec![usize::MAX; n];
    let mut tree = vec![false; g.edge_count()];
    for root in 0..n {
        if depth[root] != usize::MAX {
            continue;
        }
        depth[root] = 0;
        let mut stack = vec![root];
        while let Some(x) = stack.pop() {
            for &e in g.incident(x) {
                let y = if g.edges()[e].u == x { g.edges()[e].v } else { g.edges()[e].u };
                if depth[y] == usize::MAX {
                    depth[y] = depth[x] + 1;
                    parent[y] = Some((x, e));
                    tree[e] = true;
                    stack.push(y);
                }
            }
        }
    }
    let mut out = Vec::new();
    for (e, edge) in g.edges().iter().enumerate() {
        if tree[e] {
            continue;
        }
        let mut set = EdgeSet::from_edges(g.edge_count(), [e]);
        let (mut a, mut b) = (edge.u, edge.v);
        while a != b {
            if depth[a] < depth[b] {
                std::mem::swap(&mut a, &mut b);
            }
            let (p, pe) = parent[a].expect("non-root vertex has a parent");
            set.toggle(pe);
            a = p;
        }
        out.push(set);
    }
    out
}

/// Incremental GF(2) row reduction keyed by the highest set bit.
#[derive(Clone, Debug)]
pub struct Gf2Basis {
    rows: Vec<Option<EdgeSet>>,
    rank: usize,
}

impl Gf2Basis {
    pub fn new(universe: usize) -> Self {
        Gf2Basis { rows: vec![None; universe], rank: 0 }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Adds a vector; returns whether it was independent of the rows so far.
    pub fn insert(&mut self, v: &EdgeSet) -> bool {
        let mut v = v.clone();
        while let Some(h) = v.max_edge() {
            match &self.rows[h] {
                Some(row) => {
                    let top = h / 64;
                    for k in 0..=top {
                        v.words[k] ^= row.words[k];
                    }
                }
                None => {
                    self.rows[h] = Some(v);
                    self.rank += 1;
                    return true;
                }
            }
        }
        false
    }
}

pub fn gf2_rank<'a>(universe: usize, sets: impl IntoIterator<Item = &'a EdgeSet>) -> usize {
    let mut basis = Gf2Basis::new(universe);
    for s in sets {
        basis.insert(s);
    }
    basis.rank()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GenKind {
    Tr1,
    Tr2,
    Tr3,
    Sq1,
    Sq2,
    Cyc1,
    Cyc2,
}

/// Parameters of a dihedral cycle image.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CycParams {
    pub n: u32,
    pub c: Letter,
    pub x: u32,
    pub y: u32,
}

/// A generating cycle with its maximal vertex.
#[derive(Clone, Debug)]
pub struct GeneratorCycle {
    pub kind: GenKind,
    /// Vertex index of the maximal vertex.
    pub anchor: usize,
    /// Fold indices for triangles and squares, the index map for dihedral images.
    pub indices: Vec<usize>,
    /// Vertex indices in cycle order, starting at the anchor.
    pub vertices: Vec<usize>,
    pub edges: EdgeSet,
    pub cyc: Option<CycParams>,
}

impl GeneratorCycle {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }
}

fn fold(mask: u64, i: usize, j: usize) -> u64 {
    mask ^ (1 << i) ^ (1 << j)
}

fn build_cycle(
    g: &SubexprGraph,
    kind: GenKind,
    indices: Vec<usize>,
    masks: &[u64],
    cyc: Option<CycParams>,
) -> Result<GeneratorCycle, CycleError> {
    let vertices = masks
        .iter()
        .map(|&m| g.vertex_by_mask(m))
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| CycleError::ConditionViolated(format!("{kind:?} leaves the graph")))?;
    let mut edges = EdgeSet::new(g.edge_count());
    for k in 0..vertices.len() {
        let (a, b) = (vertices[k], vertices[(k + 1) % vertices.len()]);
        let e = g
            .edge_between(a, b)
            .ok_or_else(|| CycleError::ConditionViolated(format!("{kind:?} uses a non-edge")))?;
        if edges.contains(e) {
            return Err(CycleError::ConditionViolated(format!("{kind:?} repeats an edge")));
        }
        edges.toggle(e);
    }
    let anchor = vertices[0];
    if vertices[1..].iter().any(|&v| v >= anchor) {
        return Err(CycleError::ConditionViolated(format!("{kind:?} anchor is not the strict maximum")));
    }
    Ok(GeneratorCycle { kind, anchor, indices, vertices, edges, cyc })
}

fn triangle_holds(kind: GenKind, r: &[i32], i: usize, j: usize, k: usize) -> bool {
    match kind {
        GenKind::Tr1 | GenKind::Tr3 => r[i].abs() == r[j].abs() && r[j] == r[k] && r[k] > 0,
        GenKind::Tr2 => r[i].abs() == r[k].abs() && r[j].abs() == r[k].abs() && r[k] > 0,
        _ => false,
    }
}

fn square_holds(kind: GenKind, r: &[i32], i: usize, j: usize, k: usize, l: usize) -> bool {
    match kind {
        GenKind::Sq1 => r[i].abs() == r[j] && r[j] > 0 && r[k].abs() == r[l] && r[l] > 0,
        GenKind::Sq2 => r[i].abs() == r[l] && r[l] > 0 && r[j].abs() == r[k] && r[k] > 0,
        _ => false,
    }
}

fn triangle_masks(kind: GenKind, m: u64, i: usize, j: usize, k: usize) -> [u64; 3] {
    match kind {
        GenKind::Tr1 => [m, fold(m, i, j), fold(m, i, k)],
        GenKind::Tr2 => [m, fold(m, j, k), fold(m, i, k)],
        _ => [m, fold(m, i, j), fold(m, j, k)],
    }
}

fn square_masks(kind: GenKind, m: u64, i: usize, j: usize, k: usize, l: usize) -> [u64; 4] {
    match kind {
        GenKind::Sq1 => [m, fold(m, i, j), fold(fold(m, i, j), k, l), fold(m, k, l)],
        _ => [m, fold(m, j, k), fold(fold(m, j, k), i, l), fold(m, i, l)],
    }
}

/// `Tr¹_{i,j,k}`, `Tr²_{i,j,k}` or `Tr³_{i,j,k}` at vertex `gamma`.
pub fn make_triangle(
    g: &SubexprGraph,
    gamma: usize,
    kind: GenKind,
    i: usize,
    j: usize,
    k: usize,
) -> Result<GeneratorCycle, CycleError> {
    let ids = g.vertex(gamma).root_ids();
    if !(i < j && j < k && k < ids.len()) || !triangle_holds(kind, ids, i, j, k) {
        return Err(CycleError::ConditionViolated(format!("{kind:?} at ({i}, {j}, {k})")));
    }
    build_cycle(g, kind, vec![i, j, k], &triangle_masks(kind, g.vertex(gamma).mask(), i, j, k), None)
}

/// `Sq¹_{i,j,k,l}` or `Sq²_{i,j,k,l}` at vertex `gamma`.
pub fn make_square(
    g: &SubexprGraph,
    gamma: usize,
    kind: GenKind,
    i: usize,
    j: usize,
    k: usize,
    l: usize,
) -> Result<GeneratorCycle, CycleError> {
    let ids = g.vertex(gamma).root_ids();
    if !(i < j && j < k && k < l && l < ids.len()) || !square_holds(kind, ids, i, j, k, l) {
        return Err(CycleError::ConditionViolated(format!("{kind:?} at ({i}, {j}, {k}, {l})")));
    }
    build_cycle(g, kind, vec![i, j, k, l], &square_masks(kind, g.vertex(gamma).mask(), i, j, k, l), None)
}

/// A triangle or square at a vertex, given by its fold indices and the
/// positions in the vertex's fold-pair list of its two edges at the vertex.
struct Candidate {
    kind: GenKind,
    idx: [usize; 4],
    ends: (usize, usize),
}

impl Candidate {
    fn tri(kind: GenKind, i: usize, j: usize, k: usize, ends: (usize, usize)) -> Self {
        Candidate { kind, idx: [i, j, k, 0], ends }
    }

    fn sq(kind: GenKind, idx: [usize; 4], ends: (usize, usize)) -> Self {
        Candidate { kind, idx, ends }
    }

    fn is_triangle(&self) -> bool {
        matches!(self.kind, GenKind::Tr1 | GenKind::Tr2 | GenKind::Tr3)
    }

    fn indices(&self) -> Vec<usize> {
        self.idx[..if self.is_triangle() { 3 } else { 4 }].to_vec()
    }

    /// Vertex masks in cycle order; unused trailing entries repeat the first.
    fn masks(&self, m: u64) -> ([u64; 4], usize) {
        let x = &self.idx;
        if self.is_triangle() {
            let [a, b, c] = triangle_masks(self.kind, m, x[0], x[1], x[2]);
            ([a, b, c, a], 3)
        } else {
            (square_masks(self.kind, m, x[0], x[1], x[2], x[3]), 4)
        }
    }

    fn build(&self, g: &SubexprGraph, m: u64) -> Result<GeneratorCycle, CycleError> {
        let (masks, n) = self.masks(m);
        build_cycle(g, self.kind, self.indices(), &masks[..n], None)
    }

    /// Whether the cycle lies in the graph with its first vertex as strict maximum.
    fn exists(&self, g: &SubexprGraph, m: u64) -> bool {
        let (masks, n) = self.masks(m);
        let mut vs = [0usize; 4];
        for k in 0..n {
            match g.vertex_by_mask(masks[k]) {
                Some(v) if k == 0 || v < vs[0] => vs[k] = v,
                _ => return false,
            }
        }
        (0..n).all(|k| g.edge_between(vs[k], vs[(k + 1) % n]).is_some())
    }
}

/// Fold pairs `(a, b)` with `r[a] = ±r[b] > 0`, which are exactly the edges
/// to smaller vertices.
fn fold_pairs(r: &[i32]) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for b in 0..r.len() {
        if r[b] > 0 {
            pairs.extend((0..b).filter(|&a| r[a].abs() == r[b]).map(|a| (a, b)));
        }
    }
    pairs
}

/// The triangles spanned by the fold pairs of a vertex.
fn triangles(r: &[i32], pairs: &[(usize, usize)]) -> Vec<Candidate> {
    let mut out = Vec::new();
    for (x, &(a, b)) in pairs.iter().enumerate() {
        for (y, &(c, d)) in pairs.iter().enumerate() {
            if a == c && b < d && r[b] == r[d] {
                out.push(Candidate::tri(GenKind::Tr1, a, b, d, (x, y)));
            }
            if b == d && a < c {
                out.push(Candidate::tri(GenKind::Tr2, a, c, d, (y, x)));
            }
            if b == c && r[b] == r[d] {
                out.push(Candidate::tri(GenKind::Tr3, a, b, d, (x, y)));
            }
        }
    }
    out
}

/// The squares spanned by the fold pairs of a vertex.
fn squares(pairs: &[(usize, usize)]) -> impl Iterator<Item = Candidate> + '_ {
    pairs.iter().enumerate().flat_map(move |(x, &(a, b))| {
        pairs.iter().enumerate().filter_map(move |(y, &(c, d))| {
            if b < c {
                Some(Candidate::sq(GenKind::Sq1, [a, b, c, d], (x, y)))
            } else if a < c && d < b {
                Some(Candidate::sq(GenKind::Sq2, [a, c, d, b], (y, x)))
            } else {
                None
            }
        })
    })
}

/// Every triangle and square generator of the graph.
pub fn triangles_and_squares(g: &SubexprGraph) -> Vec<GeneratorCycle> {
    (0..g.vertex_count())
        .into_par_iter()
        .flat_map_iter(|v| {
            let m = g.vertex(v).mask();
            let r = g.vertex(v).root_ids();
            let pairs = fold_pairs(r);
            triangles(r, &pairs)
                .into_iter()
                .chain(squares(&pairs))
                .collect::<Vec<_>>()
                .into_iter()
                .filter_map(move |c| c.build(g, m).ok())
        })
        .collect()
}

/// Key identifying a dihedral reflection subgroup by its canonical pair.
fn pair_key(ctx: &DihedralContext) -> Vec<i64> {
    RootTable::key(ctx.alpha()).into_iter().chain(RootTable::key(ctx.beta())).collect()
}

/// Finite dihedral reflection subgroups generated by two edge colors.
pub fn harvest_contexts(g: &SubexprGraph) -> Vec<DihedralContext> {
    let sys = g.expr().system();
    let mut colors: Vec<RootVec> = Vec::new();
    let mut seen = HashSet::new();
    for e in g.edges() {
        if seen.insert(RootTable::key(&e.color)) {
            colors.push(e.color.clone());
        }
    }
    let mut out = Vec::new();
    let mut keys = HashSet::new();
    for b in 0..colors.len() {
        for a in 0..b {
            let Ok(pair) = properly_situated_pair(sys, &colors[a], &colors[b]) else { continue };
            if !matches!(pair.position, Position::Elliptic(_)) {
                continue;
            }
            let Ok(ctx) = DihedralContext::from_pair(sys, pair) else { continue };
            if keys.insert(pair_key(&ctx)) {
                out.push(ctx);
            }
        }
    }
    out.sort_by_key(pair_key);
    out
}

/// All increasing maps `p` with `target^{→p(z)} = source^{→z}`.
fn embeddings(source: &Subexpression, target: &Subexpression) -> Vec<Vec<usize>> {
    let sys = target.system();
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(source.len());
    fn rec(
        sys: &crate::coxeter::CoxeterSystem,
        source: &Subexpression,
        target: &Subexpression,
        from: usize,
        cur: &mut Vec<usize>,
        out: &mut Vec<Vec<usize>>,
    ) {
        let z = cur.len();
        if z == source.len() {
            out.push(cur.clone());
            return;
        }
        let remaining = source.len() - z;
        for q in from..=target.len().saturating_sub(remaining) {
            if sys.roots_equal(target.root(q), source.root(z)) {
                cur.push(q);
                rec(sys, source, target, q + 1, cur, out);
                cur.pop();
            }
        }
    }
    if source.len() <= target.len() {
        rec(sys, source, target, 0, &mut cur, &mut out);
    }
    out
}

fn cyc_kind(kind: CycKind) -> GenKind {
    match kind {
        CycKind::One => GenKind::Cyc1,
        CycKind::Two => GenKind::Cyc2,
    }
}

fn cyc_images_at(g: &SubexprGraph, ctx: &DihedralContext, proj: &Projection) -> Vec<GeneratorCycle> {
    let Order::Finite(n) = ctx.order() else { return Vec::new() };
    let mut out = Vec::new();
    for (kind, x, y) in cyc_parameters(n) {
        for c in [Letter::A, Letter::B] {
            let cyc = make_cyc(n, kind, c, x, y).expect("parameters are admissible");
            let expr = ctx.expression(&cyc.letters);
            let Ok(delta) = Subexpression::new(&expr, cyc.top().to_vec()) else { continue };
            for p in embeddings(&delta, &proj.pi) {
                let inner = Morphism {
                    source: expr.clone(),
                    target: proj.pi.expr().clone(),
                    cosign: vec![1; p.len()],
                    p,
                    source_anchor: delta.bits().to_vec(),
                    target_anchor: proj.pi.bits().to_vec(),
                };
                let full = proj.morphism.compose(&inner);
                let masks: Vec<u64> = cyc.vertices.iter().map(|v| bits_to_mask(&full.apply(v))).collect();
                let params = CycParams { n, c, x, y };
                out.extend(build_cycle(g, cyc_kind(kind), full.p.clone(), &masks, Some(params)));
            }
        }
    }
    out
}

/// Images of `Cyc¹`, `Cyc²` under positive morphisms through the
/// projection of each vertex onto each harvested dihedral subgroup.
pub fn dihedral_cycles(g: &SubexprGraph) -> Vec<GeneratorCycle> {
    let contexts = harvest_contexts(g);
    let found: Vec<GeneratorCycle> = (0..g.vertex_count())
        .into_par_iter()
        .flat_map_iter(|v| {
            let gamma = g.vertex(v);
            contexts
                .iter()
                .filter_map(|ctx| project_subexpression(gamma, ctx).ok().map(|p| cyc_images_at(g, ctx, &p)))
                .flatten()
                .collect::<Vec<_>>()
        })
        .collect();
    dedupe(found)
}

fn dedupe(gens: Vec<GeneratorCycle>) -> Vec<GeneratorCycle> {
    let mut seen = HashSet::new();
    gens.into_iter().filter(|c| seen.insert(c.edges.clone())).collect()
}

/// Triangles, squares and dihedral cycle images, without repeated edge sets.
pub fn enumerate_generators(g: &SubexprGraph) -> Vec<GeneratorCycle> {
    let mut all = triangles_and_squares(g);
    all.extend(dihedral_cycles(g));
    dedupe(all)
}

/// How spanning was established.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum SpanMethod {
    /// Nothing to span.
    Trivial,
    /// At every vertex the generators anchored there connect all edges to
    /// smaller vertices; these generators are triangular with respect to
    /// their anchors, so their rank is the sum of the local ranks.
    Local,
    /// Gaussian elimination over every generator.
    Elimination,
}

/// Outcome of a spanning check.
#[derive(Clone, Debug, Serialize)]
pub struct SpanReport {
    pub vertices: usize,
    pub edges: usize,
    pub dim: usize,
    pub rank: usize,
    /// Generators whose conditions were checked.
    pub generator_count: usize,
    /// Lengths of the generators in the basis found, with multiplicities.
    pub basis_lengths: BTreeMap<usize, usize>,
    pub used_dihedral: bool,
    pub method: SpanMethod,
    pub spanned: bool,
}

impl SpanReport {
    pub fn length_set(&self) -> BTreeSet<usize> {
        self.basis_lengths.keys().copied().collect()
    }
}

struct UnionFind(Vec<usize>);

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind((0..n).collect())
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.0[x] != x {
            self.0[x] = self.0[self.0[x]];
            x = self.0[x];
        }
        x
    }

    fn joins(&mut self, a: usize, b: usize) -> bool {
        self.find(a) != self.find(b)
    }

    fn union(&mut self, a: usize, b: usize) {
        let (a, b) = (self.find(a), self.find(b));
        self.0[a] = b;
    }
}

/// Checks that generators span the cycle space, shortest generators first.
/// Dihedral cycle images are only enumerated at vertices where triangles and
/// squares fall short; if the local test fails, every generator enters a
/// Gaussian elimination.
pub fn verify_span(g: &SubexprGraph) -> SpanReport {
    let dim = cycle_space_dim(g);
    let mut report = SpanReport {
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        dim,
        rank: 0,
        generator_count: 0,
        basis_lengths: BTreeMap::new(),
        used_dihedral: false,
        method: SpanMethod::Trivial,
        spanned: dim == 0,
    };
    if dim == 0 {
        return report;
    }
    report.method = SpanMethod::Local;
    let mut pending = Vec::new();
    for v in 0..g.vertex_count() {
        let m = g.vertex(v).mask();
        let r = g.vertex(v).root_ids();
        let pairs = fold_pairs(r);
        if pairs.len() < 2 {
            continue;
        }
        let mut uf = UnionFind::new(pairs.len());
        let mut merged = 0;
        for c in triangles(r, &pairs).into_iter().chain(squares(&pairs)) {
            if merged + 1 == pairs.len() {
                break;
            }
            report.generator_count += 1;
            if uf.joins(c.ends.0, c.ends.1) && c.exists(g, m) {
                uf.union(c.ends.0, c.ends.1);
                merged += 1;
                *report.basis_lengths.entry(if c.is_triangle() { 3 } else { 4 }).or_default() += 1;
            }
        }
        report.rank += merged;
        if merged + 1 < pairs.len() {
            pending.push((v, pairs, uf, merged));
        }
    }
    if !pending.is_empty() {
        report.used_dihedral = true;
        let contexts = harvest_contexts(g);
        for (v, pairs, mut uf, mut merged) in pending {
            let gamma = g.vertex(v);
            let position: HashMap<u64, usize> =
                pairs.iter().enumerate().map(|(k, &(a, b))| (fold(gamma.mask(), a, b), k)).collect();
            let mut cycles: Vec<GeneratorCycle> = contexts
                .iter()
                .filter_map(|ctx| project_subexpression(gamma, ctx).ok().map(|p| cyc_images_at(g, ctx, &p)))
                .flatten()
                .filter(|c| c.anchor == v)
                .collect();
            cycles.sort_by_key(|c| c.len());
            report.generator_count += cycles.len();
            for c in cycles {
                let first = position[&g.vertex(c.vertices[1]).mask()];
                let last = position[&g.vertex(*c.vertices.last().expect("cycles are nonempty")).mask()];
                if uf.joins(first, last) {
                    uf.union(first, last);
                    merged += 1;
                    report.rank += 1;
                    *report.basis_lengths.entry(c.len()).or_default() += 1;
                }
            }
            if merged + 1 < pairs.len() {
                return eliminate(g, report);
            }
        }
    }
    report.spanned = report.rank == dim;
    report
}

fn eliminate(g: &SubexprGraph, mut report: SpanReport) -> SpanReport {
    let mut gens = enumerate_generators(g);
    gens.sort_by_key(|c| c.len());
    let mut basis = Gf2Basis::new(g.edge_count());
    report.method = SpanMethod::Elimination;
    report.used_dihedral = gens.iter().any(|c| c.cyc.is_some());
    report.generator_count = gens.len();
    report.basis_lengths.clear();
    for c in &gens {
        if basis.insert(&c.edges) {
            *report.basis_lengths.entry(c.len()).or_default() += 1;
        }
    }
    report.rank = basis.rank();
    report.spanned = report.rank == report.dim;
    report
}

/// GF(2) rank of every enumerated generator, by elimination.
pub fn generator_rank(g: &SubexprGraph) -> usize {
    let gens = enumerate_generators(g);
    gf2_rank(g.edge_count(), gens.iter().map(|c| &c.edges))
}

/// An edge `γ`-moved to a special pair, with the generators used.
#[derive(Clone, Debug)]
pub struct MovedEdge {
    pub special: (usize, usize),
    pub edge: usize,
    pub used: Vec<GeneratorCycle>,
}

/// Moves the edge `{γ, f_{p,q}γ}` (with `γ` the greater endpoint) to the edge
/// of a special pair of the same color using `Tr²`, `Tr³` and `Sq¹`
/// generators with maximal vertex `γ`.
pub fn move_edge(g: &SubexprGraph, gamma: usize, edge: usize) -> Result<MovedEdge, CycleError> {
    let e = &g.edges()[edge];
    if e.v != gamma {
        return Err(CycleError::ConditionViolated(format!("vertex {gamma} is not the greater endpoint of edge {edge}")));
    }
    let r = g.vertex(gamma).root_ids();
    let sub = g.vertex(gamma);
    let (mut p, mut q) = (e.i, e.j);
    let alpha = r[q];
    let missing = |what: &str| CycleError::ConditionViolated(format!("no {what} while moving edge {edge}"));
    let mut used = Vec::new();
    while !is_special(sub, p, q) {
        if let Some(k) = (0..p).find(|&k| r[k] == alpha) {
            let s = (0..k).rev().find(|&s| r[s] == -alpha).ok_or_else(|| missing("opposite root before k"))?;
            used.push(make_square(g, gamma, GenKind::Sq1, s, k, p, q)?);
            (p, q) = (s, k);
        } else if r[p] == alpha {
            let s = (0..p).rev().find(|&s| r[s] == -alpha).ok_or_else(|| missing("opposite root before p"))?;
            used.push(make_triangle(g, gamma, GenKind::Tr3, s, p, q)?);
            (p, q) = (s, p);
        } else if let Some(k) = (p + 1..q).rev().find(|&k| r[k] == -alpha) {
            used.push(make_triangle(g, gamma, GenKind::Tr2, p, k, q)?);
            (p, q) = (k, q);
        } else {
            return Err(missing("applicable move"));
        }
    }
    let other = g.vertex_by_mask(fold(sub.mask(), p, q)).ok_or_else(|| missing("folded vertex"))?;
    let special = g.edge_between(gamma, other).ok_or_else(|| missing("special edge"))?;
    Ok(MovedEdge { special: (p, q), edge: special, used })
}

/// Result of [`decompose`]: generators summing to the input minus `residue`.
#[derive(Clone, Debug)]
pub struct Decomposition {
    pub generators: Vec<GeneratorCycle>,
    pub residue: EdgeSet,
    pub failure: Option<String>,
}

impl Decomposition {
    pub fn is_complete(&self) -> bool {
        self.failure.is_none() && self.residue.is_empty()
    }
}

/// Generators cancelling two special edges `{γ, f_{i,k}γ}`, `{γ, f_{j,l}γ}` at `γ`.
fn cancel_pair(
    g: &SubexprGraph,
    gamma: usize,
    first: (usize, usize),
    second: (usize, usize),
    contexts: &mut HashMap<Vec<i64>, Arc<DihedralContext>>,
) -> Result<Vec<GeneratorCycle>, CycleError> {
    let ((i, k), (j, l)) = if first <= second { (first, second) } else { (second, first) };
    if i == j {
        return Ok(vec![make_triangle(g, gamma, GenKind::Tr1, i, k, l)?]);
    }
    if k == j {
        return Ok(vec![make_triangle(g, gamma, GenKind::Tr3, i, j, l)?]);
    }
    if k == l {
        return Ok(vec![make_triangle(g, gamma, GenKind::Tr2, i, j, l)?]);
    }
    if k < j {
        return Ok(vec![make_square(g, gamma, GenKind::Sq1, i, k, j, l)?]);
    }
    if l < k {
        return Ok(vec![make_square(g, gamma, GenKind::Sq2, i, j, l, k)?]);
    }
    // i < j < k < l: crossing pairs, reduced inside their dihedral subgroup
    let sub = g.vertex(gamma);
    let sys = g.expr().system();
    let (lambda, mu) = (sub.root(l), sub.root(k));
    let key: Vec<i64> = RootTable::key(lambda).into_iter().chain(RootTable::key(mu)).collect();
    let ctx = match contexts.get(&key) {
        Some(c) => c.clone(),
        None => {
            let c = Arc::new(make_dihedral(sys, lambda, mu)?);
            contexts.insert(key, c.clone());
            c
        }
    };
    let proj = project_subexpression(sub, &ctx)?;
    let local = |x: usize| {
        proj.positions
            .binary_search(&x)
            .map_err(|_| CycleError::ConditionViolated(format!("position {x} is not in the projection")))
    };
    let red = reduce_special_vertex(&ctx, &proj.pi, (local(i)?, local(k)?), (local(j)?, local(l)?))?;
    let full = proj.morphism.compose(&red.morphism);
    red.cycles
        .iter()
        .map(|cyc| {
            let masks: Vec<u64> = cyc.vertices.iter().map(|v| bits_to_mask(&full.apply(v))).collect();
            let params = CycParams { n: cyc.n, c: cyc.c, x: cyc.x, y: cyc.y };
            build_cycle(g, cyc_kind(cyc.kind), full.p.clone(), &masks, Some(params))
        })
        .collect()
}

/// Writes an even subgraph as a sum of generators, descending through the
/// maximal incident vertex. Stops with a residue if a step fails.
pub fn decompose(g: &SubexprGraph, even: &EdgeSet) -> Result<Decomposition, CycleError> {
    is_even(g, even)?;
    let mut rest = even.clone();
    let mut generators = Vec::new();
    let mut contexts = HashMap::new();
    let mut bound = usize::MAX;
    let stop = |rest: EdgeSet, generators, why: String| Ok(Decomposition { generators, residue: rest, failure: Some(why) });
    while let Some(top) = rest.edges().iter().map(|&e| g.edges()[e].v).max() {
        if top >= bound {
            return stop(rest, generators, format!("maximal vertex {top} did not decrease"));
        }
        bound = top;
        let at = |rest: &EdgeSet| -> Vec<usize> { g.incident(top).iter().copied().filter(|&e| rest.contains(e)).collect() };
        let sub = g.vertex(top);
        while let Some(e) = at(&rest).into_iter().find(|&e| !is_special(sub, g.edges()[e].i, g.edges()[e].j)) {
            match move_edge(g, top, e) {
                Ok(moved) => {
                    for c in moved.used {
                        rest.add(&c.edges);
                        generators.push(c);
                    }
                }
                Err(err) => return stop(rest, generators, format!("moving edge {e} at vertex {top}: {err}")),
            }
        }
        let special = at(&rest);
        for pair in special.chunks(2) {
            let [a, b] = pair else {
                return stop(rest, generators, format!("odd number of edges at vertex {top}"));
            };
            let (ea, eb) = (&g.edges()[*a], &g.edges()[*b]);
            match cancel_pair(g, top, (ea.i, ea.j), (eb.i, eb.j), &mut contexts) {
                Ok(cycles) => {
                    for c in cycles {
                        if c.anchor > top {
                            return stop(rest, generators, format!("generator above vertex {top}"));
                        }
                        rest.add(&c.edges);
                        generators.push(c);
                    }
                }
                Err(err) => return stop(rest, generators, format!("cancelling edges {a}, {b} at vertex {top}: {err}")),
            }
        }
        if !at(&rest).is_empty() {
            return stop(rest, generators, format!("edges remain at vertex {top}"));
        }
    }
    Ok(Decomposition { generators, residue: rest, failure: None })
}

/// A re-checkable record of one generator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub kind: GenKind,
    pub anchor: String,
    pub indices: Vec<usize>,
    pub vertices: Vec<String>,
}

pub fn certificate(g: &SubexprGraph, gens: &[GeneratorCycle]) -> Vec<CertificateEntry> {
    gens.iter()
        .map(|c| CertificateEntry {
            kind: c.kind,
            anchor: bit_string(g.vertex(c.anchor).bits()),
            indices: c.indices.clone(),
            vertices: c.vertices.iter().map(|&v| bit_string(g.vertex(v).bits())).collect(),
        })
        .collect()
}

/// Re-sums a certificate from its vertex lists alone and compares with `expected`.
pub fn check_certificate(g: &SubexprGraph, entries: &[CertificateEntry], expected: &EdgeSet) -> Result<(), CycleError> {
    let mut sum = EdgeSet::new(g.edge_count());
    for (n, entry) in entries.iter().enumerate() {
        let verts = entry
            .vertices
            .iter()
            .map(|s| parse_bits(s).and_then(|b| g.vertex_by_bits(&b)))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| CycleError::BadCertificate(format!("entry {n} names a non-vertex")))?;
        if entry.vertices.first() != Some(&entry.anchor) {
            return Err(CycleError::BadCertificate(format!("entry {n} does not start at its anchor")));
        }
        for k in 0..verts.len() {
            let e = g
                .edge_between(verts[k], verts[(k + 1) % verts.len()])
                .ok_or_else(|| CycleError::BadCertificate(format!("entry {n} uses a non-edge")))?;
            sum.toggle(e);
        }
    }
    if &sum != expected {
        return Err(CycleError::BadCertificate("sum differs from the input".into()));
    }
    Ok(())
}

/// Vertex bits of a cycle, for display.
pub fn cycle_bits(g: &SubexprGraph, c: &GeneratorCycle) -> Vec<String> {
    c.vertices.iter().map(|&v| bit_string(&mask_to_bits(g.vertex(v).mask(), g.vertex(v).len()))).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::{CartanType, CoxeterSystem};
    use crate::subexpr::{build_all_graphs, Expression};

    fn graphs(t: CartanType, letters: &[usize]) -> Vec<SubexprGraph> {
        let sys = Arc::new(t.system());
        let expr = Arc::new(Expression::new(sys, letters.to_vec()).unwrap());
        build_all_graphs(&expr, 24).unwrap()
    }

    #[test]
    fn rank_and_dim() {
        for g in graphs(CartanType::A(2), &[0, 1, 0, 1, 0, 1]) {
            let dim = cycle_space_dim(&g);
            let fc = fundamental_cycles(&g);
            assert_eq!(fc.len(), dim);
            assert_eq!(gf2_rank(g.edge_count(), &fc), dim);
            for c in &fc {
                is_even(&g, c).unwrap();
            }
        }
    }

    #[test]
    fn spans_small_dihedral() {
        for t in [CartanType::A(2), CartanType::B(2), CartanType::G2] {
            for g in graphs(t, &[0, 1, 0, 1, 0, 1, 0]) {
                let r = verify_span(&g);
                assert!(r.spanned, "{t} {r:?}");
            }
        }
    }

    #[test]
    fn decomposes_fundamental_cycles() {
        for g in graphs(CartanType::B(2), &[0, 1, 0, 1, 0, 1, 0, 1]) {
            for c in fundamental_cycles(&g) {
                let d = decompose(&g, &c).unwrap();
                assert!(d.is_complete(), "{:?}", d.failure);
                check_certificate(&g, &certificate(&g, &d.generators), &c).unwrap();
            }
        }
    }

    #[test]
    fn triangle_conditions() {
        let sys = Arc::new(CoxeterSystem::from_rows(&[&[1]]).unwrap());
        let expr = Arc::new(Expression::new(sys, vec![0, 0, 0]).unwrap());
        let gs = build_all_graphs(&expr, 24).unwrap();
        let g = gs.iter().find(|g| g.vertex_by_bits(&[true, true, true]).is_some()).unwrap();
        // roots of 111 are -e, e, -e
        let top = g.vertex_by_bits(&[true, true, true]).unwrap();
        assert!(make_triangle(g, top, GenKind::Tr1, 0, 1, 2).is_err());
        assert!(make_triangle(g, top, GenKind::Tr2, 0, 1, 2).is_err());
        let tr = make_triangle(g, top, GenKind::Tr2, 0, 2, 1);
        assert!(tr.is_err());
        assert!(make_square(g, top, GenKind::Sq1, 0, 1, 1, 2).is_err());
    }
}
