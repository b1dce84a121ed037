//! Theta bases and quotient-ring multiplication for the supported ideals.
//!
//! Every oracle exposes the same interface: an ordered monomial basis of
//! `R[x]/I` (degree-nondecreasing, constant first), the sparse coordinates of
//! any polynomial modulo `I` in that basis, and the linear form of every
//! coordinate `x_i`.

use std::collections::{BTreeSet, HashMap, VecDeque};

use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ThetaError};
use crate::poly::{Monomial, MonomialOrder, Polynomial, ReducerSet};
use crate::rational::{inverse, rat, Rational};

/// Sparse vector of `(basis index, coefficient)` pairs sorted by index.
pub type SparseVec = Vec<(usize, Rational)>;

pub const DEFAULT_TJOIN_EDGE_CAP: usize = 16;
pub const DEFAULT_PERMUTATION_CAP: usize = 5040;

/// Simple undirected graph on vertices `0..n`. JSON form is 1-indexed.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "GraphJson", into = "GraphJson")]
pub struct Graph {
    n: usize,
    edges: Vec<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct GraphJson {
    n: usize,
    edges: Vec<[usize; 2]>,
}

impl TryFrom<GraphJson> for Graph {
    type Error = ThetaError;

    fn try_from(g: GraphJson) -> Result<Self> {
        let mut edges = Vec::with_capacity(g.edges.len());
        for [u, v] in g.edges {
            if u == 0 || v == 0 {
                return Err(ThetaError::Invalid("graph vertices are 1-indexed".into()));
            }
            edges.push((u - 1, v - 1));
        }
        Graph::new(g.n, edges)
    }
}

impl From<Graph> for GraphJson {
    fn from(g: Graph) -> Self {
        GraphJson { n: g.n, edges: g.edges.iter().map(|&(u, v)| [u + 1, v + 1]).collect() }
    }
}

impl Graph {
    /// Edges are 0-indexed pairs; each is normalized to `u < v`.
    pub fn new(n: usize, edges: Vec<(usize, usize)>) -> Result<Self> {
        if n > 64 {
            return Err(ThetaError::CapExceeded(format!("graphs are limited to 64 vertices, got {n}")));
        }
        let mut seen = BTreeSet::new();
        let mut out = Vec::with_capacity(edges.len());
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(ThetaError::Invalid(format!("edge ({}, {}) outside vertex range 1..={n}", u + 1, v + 1)));
            }
            if u == v {
                return Err(ThetaError::Invalid(format!("self-loop at vertex {}", u + 1)));
            }
            let e = (u.min(v), u.max(v));
            if !seen.insert(e) {
                return Err(ThetaError::Invalid(format!("repeated edge ({}, {})", e.0 + 1, e.1 + 1)));
            }
            out.push(e);
        }
        Ok(Graph { n, edges: out })
    }

    pub fn cycle(n: usize) -> Self {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n)).collect()).expect("valid cycle")
    }

    pub fn complete(n: usize) -> Self {
        let edges = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
        Graph::new(n, edges).expect("valid complete graph")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    fn adjacency_masks(&self) -> Vec<u64> {
        let mut adj = vec![0u64; self.n];
        for &(u, v) in &self.edges {
            adj[u] |= 1 << v;
            adj[v] |= 1 << u;
        }
        adj
    }

    fn is_stable_mask(&self, adj: &[u64], mask: u64) -> bool {
        (0..self.n).all(|v| mask & (1 << v) == 0 || adj[v] & mask == 0)
    }

    /// Stable sets of size at most `max_size`, ordered by size then lexicographically.
    pub fn stable_sets(&self, max_size: usize) -> Vec<Vec<usize>> {
        let adj = self.adjacency_masks();
        let mut out = vec![Vec::new()];
        let mut frontier: Vec<(Vec<usize>, u64)> = vec![(Vec::new(), 0)];
        for _ in 0..max_size.min(self.n) {
            let mut next = Vec::new();
            for (set, blocked) in &frontier {
                let start = set.last().map_or(0, |&l| l + 1);
                for v in start..self.n {
                    if blocked & (1 << v) == 0 {
                        let mut s = set.clone();
                        s.push(v);
                        next.push((s, blocked | adj[v] | (1 << v)));
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            out.extend(next.iter().map(|(s, _)| s.clone()));
            frontier = next;
        }
        out
    }

    /// 0/1 incidence vectors of all stable sets, in stable-set order.
    pub fn stable_set_points(&self) -> Vec<Vec<Rational>> {
        self.stable_sets(self.n)
            .into_iter()
            .map(|s| {
                let mut p = vec![Rational::zero(); self.n];
                for v in s {
                    p[v] = Rational::one();
                }
                p
            })
            .collect()
    }

    /// Distinct ±1 cut vectors indexed by edges (`-1` on cut edges).
    pub fn cut_points(&self) -> Result<Vec<Vec<Rational>>> {
        if self.n > 24 {
            return Err(ThetaError::CapExceeded(format!("cut enumeration limited to 24 vertices, got {}", self.n)));
        }
        let mut set = BTreeSet::new();
        let half = if self.n == 0 { 1u64 } else { 1u64 << (self.n - 1) };
        for side in 0..half {
            let v: Vec<i8> = self
                .edges
                .iter()
                .map(|&(a, b)| if ((side >> a) ^ (side >> b)) & 1 == 1 { -1 } else { 1 })
                .collect();
            set.insert(v);
        }
        Ok(set.into_iter().map(|v| v.into_iter().map(|s| rat(s as i64)).collect()).collect())
    }
}

/// Which ideal an oracle represents.
#[derive(Clone, Debug, PartialEq)]
pub enum IdealSpec {
    FinitePoints(Vec<Vec<Rational>>),
    StableSet(Graph),
    CutIdeal(Graph),
    Principal { h: Polynomial, order: MonomialOrder },
    /// A caller-supplied reducer set (the singleton case is `Principal`).
    Marked(ReducerSet),
}

impl IdealSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            IdealSpec::FinitePoints(_) => "points",
            IdealSpec::StableSet(_) => "stable_set",
            IdealSpec::CutIdeal(_) => "cut",
            IdealSpec::Principal { .. } => "principal",
            IdealSpec::Marked(_) => "marked",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ThetaBasis {
    pub elements: Vec<Monomial>,
    /// Vertex sets (0-indexed) for stable-set and cut bases.
    pub labels: Option<Vec<Vec<usize>>>,
}

impl ThetaBasis {
    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    /// Length of the prefix `B_level` (elements of degree at most `level`).
    pub fn prefix_len(&self, level: usize) -> usize {
        self.elements.partition_point(|m| m.degree() as usize <= level)
    }

    pub fn max_degree(&self) -> u32 {
        self.elements.last().map_or(0, Monomial::degree)
    }

    /// Human-readable name of element `i`.
    pub fn label(&self, i: usize) -> String {
        self.elements[i].to_string()
    }
}

#[derive(Clone, Debug)]
enum Backend {
    Points { points: Vec<Vec<Rational>>, inv_eval: Vec<Vec<Rational>> },
    StableSet { graph: Graph, adj: Vec<u64>, index: HashMap<u64, usize> },
    Cut { graph: Graph, index: HashMap<u64, usize> },
    Reducers { set: ReducerSet, index: HashMap<Monomial, usize> },
}

/// Theta basis plus the multiplication structure of `R[x]/I`.
#[derive(Clone, Debug)]
pub struct QuotientOracle {
    spec: IdealSpec,
    nvars: usize,
    basis: ThetaBasis,
    max_level: Option<usize>,
    coords: Vec<SparseVec>,
    backend: Backend,
}

impl QuotientOracle {
    /// Builds the oracle for products of `B_k` elements (basis up to degree `2k`).
    pub fn new(spec: IdealSpec, k: usize) -> Result<Self> {
        match spec {
            IdealSpec::FinitePoints(points) => basis_points(points, MonomialOrder::Grevlex),
            IdealSpec::StableSet(g) => basis_stable_set(&g, k),
            IdealSpec::CutIdeal(g) => basis_cut_ideal(&g, k),
            IdealSpec::Principal { h, order } => basis_principal(h, order, k),
            IdealSpec::Marked(set) => basis_reducers(set, k),
        }
    }

    pub fn spec(&self) -> &IdealSpec {
        &self.spec
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn basis(&self) -> &ThetaBasis {
        &self.basis
    }

    /// Largest `k` whose products are supported; `None` means unrestricted.
    pub fn max_level(&self) -> Option<usize> {
        self.max_level
    }

    pub fn check_level(&self, k: usize) -> Result<()> {
        match self.max_level {
            Some(built) if k > built => Err(ThetaError::LevelTooHigh { requested: k, built }),
            _ => Ok(()),
        }
    }

    /// Linear form of coordinate `x_i` in the basis.
    pub fn coordinate(&self, i: usize) -> &SparseVec {
        &self.coords[i]
    }

    pub fn coordinates(&self) -> &[SparseVec] {
        &self.coords
    }

    /// True when some `x_i` is not itself a basis element.
    pub fn is_degenerate(&self) -> bool {
        self.coords.iter().enumerate().any(|(i, c)| c.len() != 1 || c[0].0 != i + 1 || !c[0].1.is_one())
    }

    /// Sparse coordinates of `f_i * f_j + I`.
    pub fn multiply(&self, i: usize, j: usize) -> Result<SparseVec> {
        let m = self.basis.elements[i].mul(&self.basis.elements[j]);
        match &self.backend {
            Backend::Points { points, inv_eval } => {
                let values: Vec<Rational> = points.iter().map(|p| m.eval_rational(p)).collect();
                Ok(apply_inverse(inv_eval, &values))
            }
            _ => self.reduce_monomial(&m),
        }
    }

    /// Sparse basis coordinates of `f + I`.
    pub fn reduce(&self, f: &Polynomial) -> Result<SparseVec> {
        if f.nvars() != self.nvars {
            return Err(ThetaError::VariableMismatch { expected: self.nvars, got: f.nvars() });
        }
        match &self.backend {
            Backend::Points { points, inv_eval } => {
                let values: Vec<Rational> = points.iter().map(|p| f.eval_rational(p)).collect();
                Ok(apply_inverse(inv_eval, &values))
            }
            Backend::Reducers { set, .. } => {
                let nf = crate::poly::normal_form(f, set)?;
                let mut acc = Accumulator::default();
                for (m, c) in nf.terms() {
                    acc.add(self.lookup_standard(m)?, c.clone());
                }
                Ok(acc.finish())
            }
            _ => {
                let mut acc = Accumulator::default();
                for (m, c) in f.terms() {
                    for (idx, v) in self.reduce_monomial(m)? {
                        acc.add(idx, c * v);
                    }
                }
                Ok(acc.finish())
            }
        }
    }

    /// Normal form of `f` as a polynomial in the basis monomials.
    pub fn reduce_poly(&self, f: &Polynomial) -> Result<Polynomial> {
        let coords = self.reduce(f)?;
        Polynomial::from_terms(self.nvars, coords.into_iter().map(|(i, c)| (self.basis.elements[i].clone(), c)))
    }

    /// Values `(f_b(s))_b` of all basis elements at a point.
    pub fn evaluate_basis(&self, s: &[Rational]) -> Vec<Rational> {
        self.basis.elements.iter().map(|m| m.eval_rational(s)).collect()
    }

    pub fn evaluate_basis_f64(&self, s: &[f64]) -> Vec<f64> {
        self.basis.elements.iter().map(|m| m.eval_f64(s)).collect()
    }

    fn lookup_standard(&self, m: &Monomial) -> Result<usize> {
        let Backend::Reducers { index, .. } = &self.backend else { unreachable!() };
        index
            .get(m)
            .copied()
            .ok_or(ThetaError::OutsideBasis { degree: m.degree(), max_degree: self.basis.max_degree() })
    }

    fn reduce_monomial(&self, m: &Monomial) -> Result<SparseVec> {
        let outside = || ThetaError::OutsideBasis { degree: m.degree(), max_degree: self.basis.max_degree() };
        match &self.backend {
            Backend::StableSet { graph, adj, index } => {
                let mask = m.support().iter().fold(0u64, |a, &v| a | (1 << v));
                if !graph.is_stable_mask(adj, mask) {
                    return Ok(Vec::new());
                }
                let idx = index.get(&mask).ok_or_else(outside)?;
                Ok(vec![(*idx, Rational::one())])
            }
            Backend::Cut { graph, index } => {
                let mut t = 0u64;
                for (e, &x) in m.exponents().iter().enumerate() {
                    if x % 2 == 1 {
                        let (u, v) = graph.edges[e];
                        t ^= (1 << u) | (1 << v);
                    }
                }
                let idx = index.get(&t).ok_or_else(outside)?;
                Ok(vec![(*idx, Rational::one())])
            }
            Backend::Reducers { .. } => self.reduce(&Polynomial::term(m.clone(), Rational::one())),
            Backend::Points { points, inv_eval } => {
                let values: Vec<Rational> = points.iter().map(|p| m.eval_rational(p)).collect();
                Ok(apply_inverse(inv_eval, &values))
            }
        }
    }
}

#[derive(Default)]
struct Accumulator(std::collections::BTreeMap<usize, Rational>);

impl Accumulator {
    fn add(&mut self, i: usize, c: Rational) {
        *self.0.entry(i).or_insert_with(Rational::zero) += c;
    }

    fn finish(self) -> SparseVec {
        self.0.into_iter().filter(|(_, c)| !c.is_zero()).collect()
    }
}

fn apply_inverse(inv: &[Vec<Rational>], values: &[Rational]) -> SparseVec {
    inv.iter()
        .enumerate()
        .filter_map(|(i, row)| {
            let c = row.iter().zip(values).filter(|(a, _)| !a.is_zero()).fold(Rational::zero(), |acc, (a, b)| acc + a * b);
            (!c.is_zero()).then_some((i, c))
        })
        .collect()
}

fn identity_coords(nvars: usize) -> Vec<SparseVec> {
    (0..nvars).map(|i| vec![(i + 1, Rational::one())]).collect()
}

/// All exponent vectors of total degree `d` in `n` variables.
fn monomials_of_degree(n: usize, d: u32) -> Vec<Monomial> {
    fn rec(n: usize, d: u32, prefix: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if prefix.len() + 1 == n {
            prefix.push(d);
            out.push(Monomial::new(prefix.clone()));
            prefix.pop();
            return;
        }
        for e in (0..=d).rev() {
            prefix.push(e);
            rec(n, d - e, prefix, out);
            prefix.pop();
        }
    }
    if n == 0 {
        return if d == 0 { vec![Monomial::one(0)] } else { Vec::new() };
    }
    let mut out = Vec::new();
    rec(n, d, &mut Vec::with_capacity(n), &mut out);
    out
}

/// Sorts by degree, then decreasing under `order` within each degree.
fn sort_basis(elements: &mut [Monomial], order: MonomialOrder) {
    elements.sort_by(|a, b| a.degree().cmp(&b.degree()).then_with(|| order.cmp(b, a)));
}

/// Standard monomials of the vanishing ideal of `points` by evaluation
/// elimination, scanning monomials in increasing graded order.
pub fn basis_points(points: Vec<Vec<Rational>>, order: MonomialOrder) -> Result<QuotientOracle> {
    let m = points.len();
    if m == 0 {
        return Err(ThetaError::Invalid("point set is empty".into()));
    }
    let nvars = points[0].len();
    let mut seen = HashMap::new();
    for (i, p) in points.iter().enumerate() {
        if p.len() != nvars {
            return Err(ThetaError::DimensionMismatch { expected: nvars, got: p.len() });
        }
        if seen.insert(p.clone(), i).is_some() {
            return Err(ThetaError::DuplicatePoint(i));
        }
    }

    let mut standard: Vec<Monomial> = Vec::new();
    let mut leading: Vec<Monomial> = Vec::new();
    let mut echelon: Vec<(usize, Vec<Rational>)> = Vec::new();
    let mut degree = 0u32;
    while standard.len() < m {
        let mut candidates = monomials_of_degree(nvars, degree);
        candidates.sort_by(|a, b| order.cmp(a, b));
        for mono in candidates {
            if standard.len() == m {
                break;
            }
            if leading.iter().any(|l| l.divides(&mono)) {
                continue;
            }
            let mut v: Vec<Rational> = points.iter().map(|p| mono.eval_rational(p)).collect();
            for (piv, row) in &echelon {
                if !v[*piv].is_zero() {
                    let f = v[*piv].clone();
                    for (a, b) in v.iter_mut().zip(row) {
                        *a -= &f * b;
                    }
                }
            }
            match v.iter().position(|x| !x.is_zero()) {
                Some(piv) => {
                    let inv = v[piv].recip();
                    for x in v.iter_mut() {
                        *x *= &inv;
                    }
                    echelon.push((piv, v));
                    standard.push(mono);
                }
                None => leading.push(mono),
            }
        }
        degree += 1;
    }

    sort_basis(&mut standard, order);
    let eval: Vec<Vec<Rational>> =
        points.iter().map(|p| standard.iter().map(|mono| mono.eval_rational(p)).collect()).collect();
    let inv_eval = inverse(&eval).ok_or_else(|| ThetaError::Numerical("singular evaluation matrix".into()))?;
    let backend = Backend::Points { points: points.clone(), inv_eval };
    let mut oracle = QuotientOracle {
        spec: IdealSpec::FinitePoints(points),
        nvars,
        basis: ThetaBasis { elements: standard, labels: None },
        max_level: None,
        coords: Vec::new(),
        backend,
    };
    oracle.coords = (0..nvars)
        .map(|i| oracle.reduce_monomial(&Monomial::var(nvars, i)))
        .collect::<Result<_>>()?;
    Ok(oracle)
}

/// Stable-set monomials `x^U` with `|U| <= 2k`.
pub fn basis_stable_set(g: &Graph, k: usize) -> Result<QuotientOracle> {
    let sets = g.stable_sets(2 * k);
    let n = g.n();
    let mut index = HashMap::new();
    let elements = sets
        .iter()
        .enumerate()
        .map(|(i, s)| {
            index.insert(s.iter().fold(0u64, |a, &v| a | (1 << v)), i);
            Monomial::from_support(n, s)
        })
        .collect();
    Ok(QuotientOracle {
        spec: IdealSpec::StableSet(g.clone()),
        nvars: n,
        basis: ThetaBasis { elements, labels: Some(sets) },
        max_level: Some(k),
        coords: identity_coords(n),
        backend: Backend::StableSet { graph: g.clone(), adj: g.adjacency_masks(), index },
    })
}

/// Cut-ideal basis indexed by even vertex sets `T` with a minimal `T`-join of
/// at most `2k` edges. Variables are the edges in input order.
pub fn basis_cut_ideal(g: &Graph, k: usize) -> Result<QuotientOracle> {
    basis_cut_ideal_with_cap(g, k, DEFAULT_TJOIN_EDGE_CAP)
}

pub fn basis_cut_ideal_with_cap(g: &Graph, k: usize, edge_cap: usize) -> Result<QuotientOracle> {
    let ne = g.edges().len();
    if k >= 2 && ne > edge_cap {
        return Err(ThetaError::CapExceeded(format!("T-join search needs |E| <= {edge_cap}, graph has {ne} edges")));
    }
    let depth = (2 * k).min(ne);
    let edge_mask: Vec<u64> = g.edges().iter().map(|&(u, v)| (1u64 << u) | (1u64 << v)).collect();
    // size-ascending lexicographic scan: the first subset hitting T is its H_T
    let mut found: HashMap<u64, Vec<usize>> = HashMap::new();
    let mut joins: Vec<(u64, Vec<usize>)> = Vec::new();
    for size in 0..=depth {
        for_each_combination(ne, size, |combo| {
            let t = combo.iter().fold(0u64, |a, &e| a ^ edge_mask[e]);
            if let std::collections::hash_map::Entry::Vacant(slot) = found.entry(t) {
                slot.insert(combo.to_vec());
                joins.push((t, combo.to_vec()));
            }
        });
    }
    let mut index = HashMap::new();
    let mut elements = Vec::with_capacity(joins.len());
    let mut labels = Vec::with_capacity(joins.len());
    for (i, (t, h)) in joins.iter().enumerate() {
        index.insert(*t, i);
        elements.push(Monomial::from_support(ne, h));
        labels.push((0..g.n()).filter(|v| t & (1 << v) != 0).collect());
    }
    Ok(QuotientOracle {
        spec: IdealSpec::CutIdeal(g.clone()),
        nvars: ne,
        basis: ThetaBasis { elements, labels: Some(labels) },
        max_level: Some(k),
        coords: identity_coords(ne),
        backend: Backend::Cut { graph: g.clone(), index },
    })
}

fn for_each_combination(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else { return };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Monomials of degree at most `2k` not divisible by the leading monomial of `h`.
pub fn basis_principal(h: Polynomial, order: MonomialOrder, k: usize) -> Result<QuotientOracle> {
    let set = ReducerSet::singleton(h.clone(), order)?;
    let mut oracle = basis_reducers(set, k)?;
    oracle.spec = IdealSpec::Principal { h, order };
    Ok(oracle)
}

/// Standard monomials of degree at most `2k` for a confluent reducer set.
pub fn basis_reducers(set: ReducerSet, k: usize) -> Result<QuotientOracle> {
    if !set.is_confluent() {
        return Err(ThetaError::NotConfluent(set.reducers().len()));
    }
    let nvars = set.nvars();
    let mut elements: Vec<Monomial> = (0..=2 * k as u32)
        .flat_map(|d| monomials_of_degree(nvars, d))
        .filter(|m| !set.is_reducible(m))
        .collect();
    sort_basis(&mut elements, set.order());
    let index = elements.iter().enumerate().map(|(i, m)| (m.clone(), i)).collect();
    let mut oracle = QuotientOracle {
        spec: IdealSpec::Marked(set.clone()),
        nvars,
        basis: ThetaBasis { elements, labels: None },
        max_level: Some(k),
        coords: Vec::new(),
        backend: Backend::Reducers { set, index },
    };
    oracle.coords = (0..nvars).map(|i| oracle.reduce(&Polynomial::var(nvars, i))).collect::<Result<_>>()?;
    Ok(oracle)
}

/// Elements of the group generated by `generators` (one-line notation,
/// 1-indexed) as flattened permutation matrices with `P[i][σ(i)] = 1`.
pub fn permutation_points(n: usize, generators: &[Vec<usize>]) -> Result<Vec<Vec<Rational>>> {
    permutation_points_with_cap(n, generators, DEFAULT_PERMUTATION_CAP)
}

pub fn permutation_points_with_cap(n: usize, generators: &[Vec<usize>], cap: usize) -> Result<Vec<Vec<Rational>>> {
    if n == 0 {
        return Err(ThetaError::Invalid("permutations need at least one symbol".into()));
    }
    let mut gens = Vec::with_capacity(generators.len());
    for g in generators {
        let mut seen = vec![false; n];
        if g.len() != n || !g.iter().all(|&v| v >= 1 && v <= n && !std::mem::replace(&mut seen[v - 1], true)) {
            return Err(ThetaError::Invalid(format!("{g:?} is not a permutation of 1..={n}")));
        }
        gens.push(g.iter().map(|v| v - 1).collect::<Vec<usize>>());
    }
    let identity: Vec<usize> = (0..n).collect();
    let mut group = BTreeSet::from([identity.clone()]);
    let mut queue = VecDeque::from([identity]);
    while let Some(p) = queue.pop_front() {
        for g in &gens {
            let q: Vec<usize> = p.iter().map(|&i| g[i]).collect();
            if group.insert(q.clone()) {
                if group.len() > cap {
                    return Err(ThetaError::CapExceeded(format!("group order exceeds {cap}")));
                }
                queue.push_back(q);
            }
        }
    }
    Ok(group
        .into_iter()
        .map(|p| {
            let mut v = vec![Rational::zero(); n * n];
            for (i, &s) in p.iter().enumerate() {
                v[i * n + s] = Rational::one();
            }
            v
        })
        .collect())
}
