#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use theta_core::quotient::permutation_points;
use theta_core::rational::{rat, to_f64};
use theta_core::{Graph, IdealSpec, MonomialOrder, Polynomial, Rational};

pub const CARDIOID: &str = "x1^4 + 2*x1^2*x2^2 + x2^4 + 4*x1^3 + 4*x1*x2^2 - 4*x2^2";

pub fn cardioid() -> Polynomial {
    CARDIOID.parse().unwrap()
}

pub fn cardioid_point(theta: f64) -> Vec<f64> {
    let c = theta.cos();
    vec![2.0 * c * (1.0 - c), 2.0 * theta.sin() * (1.0 - c)]
}

pub struct Fixture {
    pub name: &'static str,
    pub spec: IdealSpec,
    pub levels: Vec<usize>,
    /// Points of the real variety (all of them when it is finite and small).
    pub samples: Vec<Vec<f64>>,
    pub points: Option<Vec<Vec<Rational>>>,
}

fn to_f64_points(pts: &[Vec<Rational>]) -> Vec<Vec<f64>> {
    pts.iter().map(|p| p.iter().map(to_f64).collect()).collect()
}

fn finite(name: &'static str, spec: IdealSpec, levels: Vec<usize>, pts: Vec<Vec<Rational>>) -> Fixture {
    Fixture { name, spec, levels, samples: to_f64_points(&pts), points: Some(pts) }
}

pub fn int_points(rows: &[&[i64]]) -> Vec<Vec<Rational>> {
    rows.iter().map(|r| r.iter().map(|&v| rat(v)).collect()).collect()
}

pub fn cube_points(n: usize) -> Vec<Vec<Rational>> {
    (0..1usize << n).map(|m| (0..n).map(|i| rat(((m >> i) & 1) as i64)).collect()).collect()
}

pub fn simplex_points(n: usize) -> Vec<Vec<Rational>> {
    let mut pts = vec![vec![rat(0); n]];
    for i in 0..n {
        let mut p = vec![rat(0); n];
        p[i] = rat(1);
        pts.push(p);
    }
    pts
}

pub fn cross_polytope_points(n: usize) -> Vec<Vec<Rational>> {
    let mut pts = Vec::new();
    for i in 0..n {
        for s in [1, -1] {
            let mut p = vec![rat(0); n];
            p[i] = rat(s);
            pts.push(p);
        }
    }
    pts
}

pub fn s3_points() -> Vec<Vec<Rational>> {
    permutation_points(3, &[vec![2, 1, 3], vec![2, 3, 1]]).unwrap()
}

/// The problems shipped in `problems/`, plus the small polytopes used by the
/// exactness checks.
pub fn fixtures() -> Vec<Fixture> {
    let c5 = Graph::cycle(5);
    let c7 = Graph::cycle(7);
    let path = Graph::new(4, vec![(0, 1), (1, 2), (2, 3)]).unwrap();
    let mut out = vec![
        finite("pentagon stable set", IdealSpec::StableSet(c5.clone()), vec![1, 2], c5.stable_set_points()),
        finite("C7 stable set", IdealSpec::StableSet(c7.clone()), vec![1, 2], c7.stable_set_points()),
        finite("P4 stable set", IdealSpec::StableSet(path.clone()), vec![1, 2], path.stable_set_points()),
        finite("C5 max cut", IdealSpec::CutIdeal(c5.clone()), vec![1, 2], c5.cut_points().unwrap()),
        finite("K3 max cut", IdealSpec::CutIdeal(Graph::complete(3)), vec![1], Graph::complete(3).cut_points().unwrap()),
        finite("C4 max cut", IdealSpec::CutIdeal(Graph::cycle(4)), vec![1, 2], Graph::cycle(4).cut_points().unwrap()),
        finite("3-cube", IdealSpec::FinitePoints(cube_points(3)), vec![1, 2], cube_points(3)),
        finite("3-simplex", IdealSpec::FinitePoints(simplex_points(3)), vec![1], simplex_points(3)),
        finite("3-cross-polytope", IdealSpec::FinitePoints(cross_polytope_points(3)), vec![1, 2], cross_polytope_points(3)),
        finite("S3 permutation matrices", IdealSpec::FinitePoints(s3_points()), vec![1, 2], s3_points()),
    ];
    out.push(Fixture {
        name: "cardioid",
        spec: IdealSpec::Principal { h: cardioid(), order: MonomialOrder::Grevlex },
        levels: vec![1, 2, 3],
        samples: (0..100).map(|j| cardioid_point(2.0 * std::f64::consts::PI * j as f64 / 100.0)).collect(),
        points: None,
    });
    out
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Objectives with independent uniform `[-1, 1]` entries.
pub fn signed_objectives(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..n).map(|_| rng.random_range(-1.0..=1.0)).collect()).collect()
}

pub fn brute_force_alpha(g: &Graph) -> usize {
    let n = g.n();
    (0..1u64 << n)
        .filter(|m| g.edges().iter().all(|&(u, v)| m & (1 << u) == 0 || m & (1 << v) == 0))
        .map(|m| m.count_ones() as usize)
        .max()
        .unwrap()
}

pub fn brute_force_stable_count(g: &Graph) -> usize {
    let n = g.n();
    (0..1u64 << n).filter(|m| g.edges().iter().all(|&(u, v)| m & (1 << u) == 0 || m & (1 << v) == 0)).count()
}

pub fn brute_force_maxcut(g: &Graph) -> usize {
    let n = g.n();
    (0..1u64 << n)
        .map(|m| g.edges().iter().filter(|&&(u, v)| ((m >> u) ^ (m >> v)) & 1 == 1).count())
        .max()
        .unwrap()
}

pub fn random_bipartite(rng: &mut ChaCha8Rng, max_n: usize) -> Graph {
    let n = rng.random_range(2..=max_n);
    let side: Vec<bool> = (0..n).map(|_| rng.random()).collect();
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if side[u] != side[v] && rng.random::<f64>() < 0.5 {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    Graph::new(n, edges).unwrap()
}

/// Distinct integer points in `{-2..2}^dim`.
pub fn random_points(rng: &mut ChaCha8Rng, count: usize, dim: usize) -> Vec<Vec<Rational>> {
    let mut out: Vec<Vec<Rational>> = Vec::new();
    while out.len() < count {
        let p: Vec<Rational> = (0..dim).map(|_| rat(rng.random_range(-2..=2))).collect();
        if !out.contains(&p) {
            out.push(p);
        }
    }
    out
}

pub struct Kkt {
    pub primal: f64,
    pub dual: f64,
    pub gap: f64,
    pub psd: f64,
}

/// Residuals recomputed from `y` and the Gram matrix alone.
pub fn kkt(t: &theta_core::MomentTemplate, c_y: &[f64], sol: &theta_core::SdpSolution) -> Kkt {
    let m = theta_core::instantiate(t, &sol.y).unwrap();
    let x = &sol.dual_matrix;
    // Gram side: sum_ij X_ij lambda^l_ij must reproduce bound - c.y coefficientwise
    let mut lin = vec![0.0; t.nvars_y()];
    for (i, j, form) in t.upper_entries() {
        let w = if i == j { x[(i, i)] } else { x[(i, j)] + x[(j, i)] };
        for (l, a) in form {
            lin[*l] += w * to_f64(a);
        }
    }
    let mut primal = (lin[0] - (sol.bound - c_y[0])).abs();
    for l in 1..lin.len() {
        primal = primal.max((lin[l] + c_y[l]).abs());
    }
    let dual = (sol.y.values[0] - 1.0).abs();
    let value: f64 = c_y.iter().zip(&sol.y.values).map(|(c, y)| c * y).sum();
    let lmin = |a: &nalgebra::DMatrix<f64>| a.clone().symmetric_eigen().eigenvalues.min();
    Kkt {
        primal,
        dual: dual.max((value - sol.value).abs()),
        gap: (sol.bound - sol.value).abs(),
        psd: lmin(&m).min(lmin(x)),
    }
}

/// Positive weights with independent uniform `[1/2, 1]` entries.
pub fn weight_objectives(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<Vec<f64>> {
    (0..count).map(|_| (0..n).map(|_| rng.random_range(0.5..=1.0)).collect()).collect()
}
