//! One line per acceptance criterion; the test fails if any criterion fails.

mod common;

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use common::*;
use rand::Rng;
use theta_core::moment::point_to_moment_vector_f64;
use theta_core::quotient::basis_reducers;
use theta_core::rational::{rat, ratio, to_f64};
use theta_core::thetaops::{brute_force_max, maxcut_bound, odd_cycle_identity, plane_directions, verify_sos_identity};
use theta_core::{
    build_moment_template, instantiate, maximize_linear, normal_form, ray_shoot, solve, support_contour, th1_exact_finite, Graph,
    IdealSpec, Monomial, MonomialOrder, Polynomial, QuotientOracle, Rational, RayOutcome, ReducerSet, SdpOptions, SdpProblem,
    SdpStatus, Sense, ThetaBodyProblem, ThetaError,
};

type Check = Result<String, String>;

fn ensure(ok: bool, msg: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn within(limit: Duration, start: Instant, what: &str) -> Result<(), String> {
    let el = start.elapsed();
    ensure(el < limit, format!("{what} took {:.1}s (limit {:.0}s)", el.as_secs_f64(), limit.as_secs_f64()))
}

fn opts() -> SdpOptions {
    SdpOptions::default()
}

fn value(p: &ThetaBodyProblem, c: &[f64]) -> Result<f64, String> {
    maximize_linear(p, c, &opts()).map(|m| m.value).map_err(|e| e.to_string())
}

fn theta_cycle(n: usize) -> f64 {
    let c = (PI / n as f64).cos();
    n as f64 * c / (1.0 + c)
}

fn criterion_1() -> Check {
    let g = Graph::cycle(5);
    let ones = [1.0; 5];
    let t = Instant::now();
    let v1 = value(&ThetaBodyProblem::stable_set(&g, 1).map_err(|e| e.to_string())?, &ones)?;
    within(Duration::from_secs(5), t, "TH_1")?;
    let t = Instant::now();
    let v2 = value(&ThetaBodyProblem::stable_set(&g, 2).map_err(|e| e.to_string())?, &ones)?;
    within(Duration::from_secs(5), t, "TH_2")?;
    let oracle = theta_cycle(5);
    ensure((v1 - oracle).abs() <= 1e-5 && (v1 - 2.2360680).abs() <= 1e-5, format!("TH_1 {v1:.9} vs {oracle:.9}"))?;
    ensure((v2 - 2.0).abs() <= 1e-5, format!("TH_2 {v2:.9}"))?;
    Ok(format!("TH_1 = {v1:.9}, TH_2 = {v2:.9}"))
}

fn criterion_2() -> Check {
    let t = Instant::now();
    let mut r = rng(2024);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let g = random_bipartite(&mut r, 8);
        let v = value(&ThetaBodyProblem::stable_set(&g, 1).map_err(|e| e.to_string())?, &vec![1.0; g.n()])?;
        let alpha = brute_force_alpha(&g) as f64;
        worst = worst.max((v - alpha).abs());
        ensure((v - alpha).abs() <= 1e-5, format!("n={} edges={:?}: {v} vs alpha {alpha}", g.n(), g.edges()))?;
    }
    within(Duration::from_secs(60), t, "10 graphs")?;
    Ok(format!("max |TH_1 - alpha| = {worst:.2e}"))
}

/// Counter-clockwise hull of planar points (monotone chain).
fn hull(mut pts: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    pts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    pts.dedup();
    let cross = |o: [f64; 2], a: [f64; 2], b: [f64; 2]| (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0]);
    let mut out: Vec<[f64; 2]> = Vec::new();
    for pass in 0..2 {
        let start = out.len();
        let iter: Box<dyn Iterator<Item = &[f64; 2]>> = if pass == 0 { Box::new(pts.iter()) } else { Box::new(pts.iter().rev()) };
        for &p in iter {
            while out.len() >= start + 2 && cross(out[out.len() - 2], out[out.len() - 1], p) <= 0.0 {
                out.pop();
            }
            out.push(p);
        }
        out.pop();
    }
    out
}

/// `max { t : t d in conv }` for a hull containing the origin.
fn ray_exit(h: &[[f64; 2]], d: [f64; 2]) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..h.len() {
        let (a, b) = (h[i], h[(i + 1) % h.len()]);
        let n = [b[1] - a[1], a[0] - b[0]];
        let nd = n[0] * d[0] + n[1] * d[1];
        if nd > 0.0 {
            best = best.min((n[0] * a[0] + n[1] * a[1]) / nd);
        }
    }
    best
}

fn criterion_3() -> Check {
    let t = Instant::now();
    let h = cardioid();
    let order = MonomialOrder::Grevlex;
    let dirs = plane_directions(64);
    let p1 = ThetaBodyProblem::principal(h.clone(), order, 1).map_err(|e| e.to_string())?;
    for d in &dirs {
        let out = ray_shoot(&p1, d, &opts()).map_err(|e| e.to_string())?;
        ensure(out == RayOutcome::Unbounded, format!("k=1 direction {d:?}: {out:?}"))?;
    }
    let samples: Vec<[f64; 2]> = (0..100_000)
        .map(|j| {
            let p = cardioid_point(2.0 * PI * j as f64 / 100_000.0);
            [p[0], p[1]]
        })
        .collect();
    let conv = hull(samples.clone());
    let p2 = ThetaBodyProblem::principal(h, order, 2).map_err(|e| e.to_string())?;
    let mut worst_ray = 0.0f64;
    for d in &dirs {
        let tmax = ray_shoot(&p2, d, &opts()).map_err(|e| e.to_string())?.finite().ok_or(format!("k=2 {d:?} unbounded"))?;
        let exit = ray_exit(&conv, [d[0], d[1]]);
        worst_ray = worst_ray.max(tmax - exit);
        ensure(tmax >= exit - 1e-6 && tmax <= exit + 1e-2, format!("ray {d:?}: t = {tmax:.9}, hull exit {exit:.9}"))?;
    }
    let lines = support_contour(&p2, &dirs, &opts()).map_err(|e| e.to_string())?;
    let mut worst_support = 0.0f64;
    for line in &lines {
        let lam = line.lambda.ok_or("unbounded support")?;
        let support = samples.iter().map(|s| line.c[0] * s[0] + line.c[1] * s[1]).fold(f64::NEG_INFINITY, f64::max);
        worst_support = worst_support.max(lam - support);
        ensure(lam >= support - 1e-6 && lam <= support + 1e-2, format!("support {:?}: {lam:.9} vs {support:.9}", line.c))?;
    }
    within(Duration::from_secs(120), t, "cardioid sweep")?;
    Ok(format!("k=1 unbounded on 64 rays; k=2 max excess over hull: ray {worst_ray:.2e}, support {worst_support:.2e}"))
}

/// Parses an entry such as `2y_2 - y_1`, `y_{10}`, `0` or `1` (= `y_0`).
fn parse_entry(s: &str, named: &BTreeMap<&str, BTreeMap<usize, Rational>>) -> BTreeMap<usize, Rational> {
    let mut out = BTreeMap::new();
    if let Some(form) = named.get(s.trim()) {
        return form.clone();
    }
    let s: String = s.chars().filter(|c| !c.is_whitespace() && *c != '{' && *c != '}').collect();
    let s = s.replace('-', "+-");
    for term in s.split('+').filter(|t| !t.is_empty()) {
        let (coef, var) = match term.find('y') {
            Some(pos) => {
                let c = &term[..pos];
                let c = match c {
                    "" => rat(1),
                    "-" => rat(-1),
                    c => rat(c.parse().unwrap()),
                };
                (c, term[pos + 1..].trim_start_matches('_').parse::<usize>().unwrap())
            }
            None => (rat(term.parse().unwrap()), 0),
        };
        if coef != rat(0) {
            *out.entry(var).or_insert_with(|| rat(0)) += coef;
        }
    }
    out.retain(|_, c| *c != rat(0));
    out
}

fn compare_template(name: &str, o: &QuotientOracle, k: usize, display: &str, named: &BTreeMap<&str, BTreeMap<usize, Rational>>) -> Result<(), String> {
    let t = build_moment_template(o, k).map_err(|e| e.to_string())?;
    let rows: Vec<Vec<&str>> = display.trim().split("\\\\").map(|r| r.split('&').collect()).collect();
    ensure(rows.len() == t.dim(), format!("{name}: {} rows vs dim {}", rows.len(), t.dim()))?;
    for (i, row) in rows.iter().enumerate() {
        ensure(row.len() == t.dim(), format!("{name}: row {i} has {} entries", row.len()))?;
        for (j, cell) in row.iter().enumerate() {
            let expected = parse_entry(cell, named);
            let got: BTreeMap<usize, Rational> = t.entry(i, j).iter().cloned().collect();
            ensure(expected == got, format!("{name} ({i},{j}): expected {cell:?}, got {}", t.render_entry(i, j)))?;
        }
    }
    Ok(())
}

const EXAMPLE_DISPLAY: &str = r"y_0 & y_1 & y_2 \\ y_1 & 2y_2-y_1 & 0 \\ y_2 & 0 & y_3";

const PENTAGON_TH1: &str = r"
1 & y_1 & y_2 & y_3 & y_4 & y_5 \\
y_1 & y_1 & 0 & y_6 & y_7 & 0 \\
y_2 & 0 & y_2 & 0 & y_8 & y_9 \\
y_3 & y_6 & 0 & y_3 & 0 & y_{10} \\
y_4 & y_7 & y_8 & 0 & y_4 & 0 \\
y_5 & 0 & y_9 & y_{10} & 0 & y_5";

const PENTAGON_TH2: &str = r"
1 & y_1 & y_2 & y_3 & y_4 & y_5 & y_6 & y_7 & y_8 & y_9 & y_{10}\\
y_1 & y_1 & 0 & y_6 & y_7 & 0 & y_6 & y_7 & 0 & 0 & 0 \\
y_2 & 0 & y_2 & 0 & y_8 & y_9 & 0 & 0 & y_8 & y_9 & 0 \\
y_3 & y_6 & 0 & y_3 & 0 & y_{10} & y_6  & 0 & 0 & 0 & y_{10}\\
y_4 & y_7 & y_8 & 0 & y_4 & 0 & 0 & y_7 & y_8 & 0 & 0 \\
y_5 & 0 & y_9 & y_{10} & 0 & y_5 & 0 & 0 & 0 & y_9 & y_{10}\\
y_6 &  y_6 & 0 & y_6 & 0 & 0 & y_6 & 0 & 0 & 0 & 0 \\
y_7 &  y_7 & 0 &  0 & y_7 & 0 & 0 & y_7 & 0 & 0 & 0 \\
y_8 &  0 & y_8 &  0 & y_8 & 0 & 0 & 0 & y_8 & 0 & 0 \\
y_9 &  0 & y_9 &  0 & 0 & y_9 & 0 & 0 & 0 & y_9 & 0 \\
y_{10} & 0 & 0 &  y_{10} & 0 & y_{10} & 0 & 0 & 0 & 0 & y_{10}";

const CARDIOID_TH2: &str = r"
1 & y_1 & y_2 & y_3 & y_4 & y_5 \\
y_1 & y_3 & y_4 & y_6 & y_7 & y_8 \\
y_2 & y_4 & y_5 & y_7 & y_8 & y_9 \\
y_3 & y_6 & y_7 & T & y_{10} & y_{11} \\
y_4 & y_7 & y_8 & y_{10} & y_{11} & y_{12} \\
y_5 & y_8 & y_9 & y_{11} & y_{12} & y_{13}";

fn criterion_4() -> Check {
    let none = BTreeMap::new();
    let pairs = vec![
        (Polynomial::parse("x1^2 + x1 - 2*x2", 2).unwrap(), Monomial::new(vec![2, 0])),
        (Polynomial::parse("x1*x2", 2).unwrap(), Monomial::new(vec![1, 1])),
    ];
    let example = basis_reducers(ReducerSet::with_marked(pairs, MonomialOrder::Grevlex, true).unwrap(), 1).map_err(|e| e.to_string())?;
    compare_template("example", &example, 1, EXAMPLE_DISPLAY, &none)?;

    let g = Graph::cycle(5);
    compare_template("pentagon TH_1", &QuotientOracle::new(IdealSpec::StableSet(g.clone()), 1).unwrap(), 1, PENTAGON_TH1, &none)?;
    compare_template("pentagon TH_2", &QuotientOracle::new(IdealSpec::StableSet(g), 2).unwrap(), 2, PENTAGON_TH2, &none)?;

    let t_form = parse_entry("-2y_{11} - y_{13} - 4y_6 - 4y_8 + 4y_5", &none);
    let named = BTreeMap::from([("T", t_form)]);
    let spec = IdealSpec::Principal { h: cardioid(), order: MonomialOrder::Grevlex };
    compare_template("cardioid TH_2", &QuotientOracle::new(spec, 2).unwrap(), 2, CARDIOID_TH2, &named)?;
    Ok("example 3x3, pentagon 6x6 and 11x11, cardioid 6x6 with T match entrywise".into())
}

fn criterion_5() -> Check {
    let mut sizes = Vec::new();
    for k in 2..=4 {
        let n = 2 * k + 1;
        let (l, squares) = odd_cycle_identity(k);
        let o = QuotientOracle::new(IdealSpec::StableSet(Graph::cycle(n)), 2).map_err(|e| e.to_string())?;
        let residual = verify_sos_identity(&l, &squares, &o).map_err(|e| e.to_string())?;
        ensure(residual.is_zero(), format!("C{n}: residual {residual}"))?;
        sizes.push(format!("C{n} ({} squares)", squares.len()));
    }
    Ok(format!("zero residual for {}", sizes.join(", ")))
}

fn criterion_6() -> Check {
    let t = Instant::now();
    let bound = |g: &Graph, k| -> Result<f64, String> {
        let p = ThetaBodyProblem::maxcut(g, k).map_err(|e| e.to_string())?;
        maxcut_bound(&p, &opts()).map_err(|e| e.to_string())
    };
    let c5 = Graph::cycle(5);
    let b2 = bound(&c5, 2)?;
    let b1 = bound(&c5, 1)?;
    ensure((b2 - 4.0).abs() <= 1e-4, format!("C5 k=2 bound {b2:.9}"))?;
    ensure(b1 > 4.0 + 1e-3, format!("C5 k=1 bound {b1:.9}"))?;
    let mut exact = Vec::new();
    for (name, g) in [("K3", Graph::complete(3)), ("C4", Graph::cycle(4))] {
        let b = bound(&g, 1)?;
        let opt = brute_force_maxcut(&g) as f64;
        ensure((b - opt).abs() <= 1e-4, format!("{name} k=1 bound {b:.9} vs {opt}"))?;
        exact.push(format!("{name} = {b:.6}"));
    }
    within(Duration::from_secs(60), t, "max cut")?;
    Ok(format!("C5: k=1 {b1:.6}, k=2 {b2:.6}; {}", exact.join(", ")))
}

fn criterion_7() -> Check {
    let mut r = rng(77);
    let sets = [
        ("3-cube", cube_points(3)),
        ("3-simplex", simplex_points(3)),
        ("3-cross-polytope", cross_polytope_points(3)),
        ("C5 stable sets", Graph::cycle(5).stable_set_points()),
    ];
    let mut summary = Vec::new();
    for (name, pts) in sets {
        let algebraic = th1_exact_finite(&pts).map_err(|e| e.to_string())?;
        let p = ThetaBodyProblem::points(pts.clone(), 1).map_err(|e| e.to_string())?;
        let mut numeric = true;
        for c in weight_objectives(&mut r, pts[0].len(), 25) {
            let v = value(&p, &c)?;
            if (v - brute_force_max(&pts, &c)).abs() > 1e-5 {
                numeric = false;
            }
        }
        ensure(algebraic == numeric, format!("{name}: 2-level {algebraic}, SDP matches LP {numeric}"))?;
        summary.push(format!("{name} {algebraic}"));
    }
    Ok(summary.join(", "))
}

fn random_poly(r: &mut rand_chacha::ChaCha8Rng, nvars: usize, max_exp: u32) -> Polynomial {
    let mut p = Polynomial::zero(nvars);
    for _ in 0..r.random_range(0..7) {
        let e: Vec<u32> = (0..nvars).map(|_| r.random_range(0..=max_exp)).collect();
        p.add_term(Monomial::new(e), ratio(r.random_range(-9..=9), r.random_range(1..=4)));
    }
    p
}

fn criterion_8() -> Check {
    let o = opts();
    let mut r = rng(8);

    // hierarchy nesting
    for f in fixtures().into_iter().filter(|f| f.levels.len() > 1) {
        let probs: Vec<_> = f.levels.iter().map(|&k| ThetaBodyProblem::from_spec(f.spec.clone(), k).unwrap()).collect();
        for c in signed_objectives(&mut r, probs[0].nvars(), 3) {
            let vals: Vec<Option<f64>> = probs
                .iter()
                .map(|p| match maximize_linear(p, &c, &o) {
                    Ok(m) => Ok(Some(m.value)),
                    Err(ThetaError::Unbounded) => Ok(None),
                    Err(e) => Err(format!("{}: {e}", f.name)),
                })
                .collect::<Result<_, _>>()?;
            for w in vals.windows(2) {
                let ok = match (w[0], w[1]) {
                    (Some(hi), Some(lo)) => lo <= hi + 1e-6,
                    (None, _) => true,
                    (Some(_), None) => false,
                };
                ensure(ok, format!("nesting fails on {}: {vals:?}", f.name))?;
            }
        }
    }

    // rank-1 moment matrices at variety points
    for f in fixtures() {
        for &k in &f.levels {
            let oracle = QuotientOracle::new(f.spec.clone(), k).unwrap();
            let t = build_moment_template(&oracle, k).unwrap();
            for s in f.samples.iter().take(100) {
                let m = instantiate(&t, &point_to_moment_vector_f64(&t, &oracle, s).unwrap()).unwrap();
                let mut ev: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
                ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
                ensure(ev[ev.len() - 1] >= -1e-9, format!("{} k={k}: negative eigenvalue", f.name))?;
                ensure(ev.len() < 2 || ev[1] <= 1e-8 * ev[0], format!("{} k={k}: rank > 1", f.name))?;
            }
        }
    }

    // KKT residuals
    let mut solved = 0;
    for f in fixtures() {
        for &k in &f.levels {
            let oracle = QuotientOracle::new(f.spec.clone(), k).unwrap();
            let t = Arc::new(build_moment_template(&oracle, k).unwrap());
            if t.dim() > 50 {
                continue;
            }
            for c in signed_objectives(&mut r, oracle.nvars(), 2) {
                let mut c_y = vec![0.0; t.nvars_y()];
                for (ci, form) in c.iter().zip(oracle.coordinates()) {
                    for (l, a) in form {
                        c_y[*l] += ci * to_f64(a);
                    }
                }
                let objective = c_y.iter().copied().enumerate().collect();
                let sol = solve(&SdpProblem::new(t.clone(), objective, Sense::Maximize), &o).map_err(|e| e.to_string())?;
                match sol.status {
                    SdpStatus::Optimal => {
                        let res = kkt(&t, &c_y, &sol);
                        let worst = res.primal.max(res.dual).max(res.gap).max(-res.psd);
                        ensure(worst <= 1e-8, format!("{} k={k}: KKT residual {worst:.2e}", f.name))?;
                        solved += 1;
                    }
                    SdpStatus::Unbounded if f.name == "cardioid" && k == 1 => {}
                    s => return Err(format!("{} k={k}: {s:?}", f.name)),
                }
            }
        }
    }

    // normal-form idempotence and linearity
    let set = ReducerSet::singleton(cardioid(), MonomialOrder::Grevlex).unwrap();
    for _ in 0..1000 {
        let (f, g) = (random_poly(&mut r, 2, 5), random_poly(&mut r, 2, 5));
        let nf = |p: &Polynomial| normal_form(p, &set).unwrap();
        ensure(nf(&nf(&f)) == nf(&f), format!("idempotence fails on {f}"))?;
        ensure(nf(&(&f + &g)) == &nf(&f) + &nf(&g), format!("linearity fails on {f}, {g}"))?;
    }

    // finite varieties are exact at some level
    for set_idx in 0..10 {
        let dim = 1 + set_idx % 3;
        let count = r.random_range(1..=6usize).min(5usize.pow(dim as u32));
        let pts = random_points(&mut r, count, dim);
        let objectives = signed_objectives(&mut r, dim, 20);
        let exact = (1..=pts.len()).any(|k| {
            let p = ThetaBodyProblem::points(pts.clone(), k).unwrap();
            objectives.iter().all(|c| value(&p, c).is_ok_and(|v| (v - brute_force_max(&pts, c)).abs() <= 1e-5))
        });
        ensure(exact, format!("no exact level for {pts:?}"))?;
    }
    Ok(format!("nesting, rank-1, KKT ({solved} solves), normal forms (1000), finite exactness (10 sets)"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, fn() -> Check); 8] = [
        ("pentagon stable set", criterion_1),
        ("perfect graphs", criterion_2),
        ("cardioid rays", criterion_3),
        ("moment fixtures", criterion_4),
        ("odd-cycle certificates", criterion_5),
        ("max cut", criterion_6),
        ("exactness cross-validation", criterion_7),
        ("property suites", criterion_8),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name} ({secs:.1}s): {detail}", i + 1),
            Err(detail) => {
                println!("FAIL {} {name} ({secs:.1}s): {detail}", i + 1);
                failed.push(i + 1);
            }
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
