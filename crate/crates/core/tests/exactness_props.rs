mod common;

use common::*;
use proptest::prelude::*;
use theta_core::rational::rat;
use theta_core::thetaops::brute_force_max;
use theta_core::{enumerate_facets, level_report, maximize_linear, th1_exact_finite, Rational, SdpOptions, ThetaBodyProblem};

/// The 3-cube with the corner `(1,1,1)` removed: 3-level.
fn corner_cut_cube() -> Vec<Vec<Rational>> {
    cube_points(3).into_iter().filter(|p| p.iter().any(|v| *v == rat(0))).collect()
}

fn point_sets() -> Vec<(String, Vec<Vec<Rational>>)> {
    let mut out: Vec<(String, Vec<Vec<Rational>>)> = fixtures()
        .into_iter()
        .filter_map(|f| f.points.map(|p| (f.name.to_string(), p)))
        .filter(|(_, p)| p.len() <= 16)
        .collect();
    out.push(("corner-cut cube".into(), corner_cut_cube()));
    out.push(("square".into(), cube_points(2)));
    out
}

fn matches_lp(pts: &[Vec<Rational>], k: usize, objectives: &[Vec<f64>], opts: &SdpOptions) -> bool {
    let p = ThetaBodyProblem::points(pts.to_vec(), k).unwrap();
    objectives.iter().all(|c| {
        let v = maximize_linear(&p, c, opts).unwrap().value;
        (v - brute_force_max(pts, c)).abs() <= 1e-5
    })
}

#[test]
fn th1_exactness_agrees_with_sdp() {
    let opts = SdpOptions::default();
    let mut r = rng(3);
    for (name, pts) in point_sets() {
        let report = level_report(&pts).unwrap();
        if report.dimension > 4 {
            continue;
        }
        let objectives = weight_objectives(&mut r, pts[0].len(), 25);
        let algebraic = th1_exact_finite(&pts).unwrap();
        assert_eq!(algebraic, matches_lp(&pts, 1, &objectives, &opts), "{name}");
    }
}

#[test]
fn level_bound_is_sufficient() {
    let opts = SdpOptions::default();
    let mut r = rng(4);
    for (name, pts) in point_sets() {
        let report = level_report(&pts).unwrap();
        let objectives = signed_objectives(&mut r, pts[0].len(), 10);
        assert!(matches_lp(&pts, report.th_k_bound, &objectives, &opts), "{name} at k={}", report.th_k_bound);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn facets_are_valid(seed in any::<u64>(), count in 3usize..=10, dim in 2usize..=3) {
        let pts = random_points(&mut rng(seed), count, dim);
        let Ok(facets) = enumerate_facets(&pts) else { return Ok(()) };
        for f in &facets {
            let mut tight = 0;
            for s in &pts {
                let l = f.eval(s);
                prop_assert!(l >= rat(0));
                if l == rat(0) {
                    tight += 1;
                }
            }
            prop_assert!(tight >= 1);
        }
        let report = level_report(&pts).unwrap();
        prop_assert_eq!(report.is_2_level, report.level <= 2);
        prop_assert!(report.facets.iter().all(|f| f.level >= 1));
    }
}
