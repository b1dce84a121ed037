//! Operations on theta bodies: linear optimization, membership, ray shooting,
//! boundary sweeps and sum-of-squares certificates.

use std::sync::Arc;

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ThetaError};
use crate::moment::{barycenter, build_moment_template, MomentTemplate};
use crate::poly::{Monomial, MonomialOrder, Polynomial};
use crate::quotient::{Graph, IdealSpec, QuotientOracle, SparseVec};
use crate::rational::{limit_denominator, nullspace, rat, solve_any, to_f64, Rational};
use crate::sdp::{self, min_eigenvalue, SdpOptions, SdpProblem, SdpSolution, SdpStatus, Sense};

/// Largest denominator used when rounding a numerical Gram matrix.
pub const GRAM_DENOMINATOR: u64 = 1_000_000;
/// Coefficient threshold for numeric-mode certificate residuals.
pub const NUMERIC_RESIDUAL_TOL: f64 = 1e-6;

/// `TH_k(I)` represented by its moment template.
#[derive(Clone, Debug)]
pub struct ThetaBodyProblem {
    oracle: Arc<QuotientOracle>,
    k: usize,
    template: Arc<MomentTemplate>,
}

impl ThetaBodyProblem {
    pub fn new(oracle: QuotientOracle, k: usize) -> Result<Self> {
        let template = build_moment_template(&oracle, k)?;
        Ok(ThetaBodyProblem { oracle: Arc::new(oracle), k, template: Arc::new(template) })
    }

    pub fn from_spec(spec: IdealSpec, k: usize) -> Result<Self> {
        Self::new(QuotientOracle::new(spec, k)?, k)
    }

    pub fn stable_set(g: &Graph, k: usize) -> Result<Self> {
        Self::from_spec(IdealSpec::StableSet(g.clone()), k)
    }

    pub fn maxcut(g: &Graph, k: usize) -> Result<Self> {
        Self::from_spec(IdealSpec::CutIdeal(g.clone()), k)
    }

    pub fn points(points: Vec<Vec<Rational>>, k: usize) -> Result<Self> {
        Self::from_spec(IdealSpec::FinitePoints(points), k)
    }

    pub fn principal(h: Polynomial, order: MonomialOrder, k: usize) -> Result<Self> {
        Self::from_spec(IdealSpec::Principal { h, order }, k)
    }

    pub fn oracle(&self) -> &QuotientOracle {
        &self.oracle
    }

    pub fn template(&self) -> &MomentTemplate {
        &self.template
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn nvars(&self) -> usize {
        self.oracle.nvars()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.nvars() {
            return Err(ThetaError::DimensionMismatch { expected: self.nvars(), got: len });
        }
        Ok(())
    }

    /// `c.x(y)` as a sparse form over `y`.
    fn linear_in_y(&self, c: &[f64]) -> Vec<(usize, f64)> {
        let mut acc = vec![0.0; self.template.nvars_y()];
        for (ci, form) in c.iter().zip(self.oracle.coordinates()) {
            for (l, a) in form {
                acc[*l] += ci * to_f64(a);
            }
        }
        acc.into_iter().enumerate().filter(|(_, v)| *v != 0.0).collect()
    }

    fn base_problem(&self, objective: Vec<(usize, f64)>) -> SdpProblem {
        let mut p = SdpProblem::new(self.template.clone(), objective, Sense::Maximize);
        if let IdealSpec::FinitePoints(points) = self.oracle.spec() {
            p.warm_start = barycenter(&self.template, &self.oracle, points).ok();
        }
        p
    }

    fn project(&self, sol: &SdpSolution) -> Result<Vec<f64>> {
        self.template.project(&sol.y)
    }
}

#[derive(Clone, Debug)]
pub struct Maximization {
    pub value: f64,
    pub optimizer: Vec<f64>,
    pub solution: SdpSolution,
}

fn status_error(sol: &SdpSolution) -> ThetaError {
    match sol.status {
        SdpStatus::Unbounded => ThetaError::Unbounded,
        SdpStatus::Infeasible => ThetaError::Infeasible(f64::NAN),
        _ => ThetaError::Numerical(format!(
            "no convergence after {} iterations (primal residual {:.2e}, dual residual {:.2e})",
            sol.iterations, sol.pinf, sol.dinf
        )),
    }
}

/// `sup { c.x : x in TH_k }`.
pub fn maximize_linear(p: &ThetaBodyProblem, c: &[f64], opts: &SdpOptions) -> Result<Maximization> {
    p.check_len(c.len())?;
    let sol = sdp::solve(&p.base_problem(p.linear_in_y(c)), opts)?;
    if sol.status != SdpStatus::Optimal {
        return Err(status_error(&sol));
    }
    Ok(Maximization { value: sol.value, optimizer: p.project(&sol)?, solution: sol })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Membership {
    Inside { margin: f64 },
    Outside { margin: f64 },
}

impl Membership {
    pub fn is_inside(&self) -> bool {
        matches!(self, Membership::Inside { .. })
    }
}

/// Pins `x(y) = x` and runs the max-`t` phase I. A point is reported outside
/// only when the phase-I bound certifies `t < -feas_tol`.
pub fn membership(p: &ThetaBodyProblem, x: &[f64], opts: &SdpOptions) -> Result<Membership> {
    p.check_len(x.len())?;
    let mut prob = SdpProblem::new(p.template.clone(), Vec::new(), Sense::Maximize);
    for (xi, form) in x.iter().zip(p.oracle.coordinates()) {
        prob.add_equality(form.iter().map(|(l, a)| (*l, to_f64(a))).collect(), *xi);
    }
    let res = sdp::phase1(&prob, opts)?;
    if res.upper_bound < -opts.feas_tol {
        Ok(Membership::Outside { margin: res.upper_bound })
    } else {
        Ok(Membership::Inside { margin: res.margin })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum RayOutcome {
    Finite(f64),
    Unbounded,
}

impl RayOutcome {
    pub fn finite(self) -> Option<f64> {
        match self {
            RayOutcome::Finite(t) => Some(t),
            RayOutcome::Unbounded => None,
        }
    }
}

/// `max { t : t d in TH_k }`.
pub fn ray_shoot(p: &ThetaBodyProblem, direction: &[f64], opts: &SdpOptions) -> Result<RayOutcome> {
    p.check_len(direction.len())?;
    let norm = direction.iter().map(|v| v * v).sum::<f64>().sqrt();
    if !(norm > 0.0) {
        return Err(ThetaError::Invalid("ray direction must be nonzero".into()));
    }
    let u: Vec<f64> = direction.iter().map(|v| v / norm).collect();
    let n = u.len();
    let mut prob = p.base_problem(p.linear_in_y(&u));
    prob.warm_start = None;
    // (I - u u^T) x(y) = 0 keeps x on the ray
    for i in 0..n {
        let row: Vec<f64> = (0..n).map(|j| if i == j { 1.0 } else { 0.0 } - u[i] * u[j]).collect();
        if row.iter().all(|v| v.abs() < 1e-15) {
            continue;
        }
        let terms = p.linear_in_y(&row);
        prob.add_equality(terms, 0.0);
    }
    let sol = sdp::solve(&prob, opts)?;
    match sol.status {
        SdpStatus::Optimal => Ok(RayOutcome::Finite(sol.value / norm)),
        SdpStatus::Unbounded => Ok(RayOutcome::Unbounded),
        _ => Err(status_error(&sol)),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundaryPoint {
    pub theta: f64,
    /// `None` when the ray is unbounded.
    pub t: Option<f64>,
    pub point: Option<[f64; 2]>,
}

/// Ray shooting along `theta_j = 2 pi j / num_dirs`. Runs on the current rayon
/// pool; results are ordered by direction index.
pub fn trace_boundary_2d(p: &ThetaBodyProblem, num_dirs: usize, opts: &SdpOptions) -> Result<Vec<BoundaryPoint>> {
    if p.nvars() != 2 {
        return Err(ThetaError::DimensionMismatch { expected: 2, got: p.nvars() });
    }
    (0..num_dirs)
        .into_par_iter()
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / num_dirs as f64;
            let d = [theta.cos(), theta.sin()];
            let t = ray_shoot(p, &d, opts)?.finite();
            Ok(BoundaryPoint { theta, t, point: t.map(|t| [t * d[0], t * d[1]]) })
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SupportLine {
    pub c: Vec<f64>,
    /// Least `lambda` with `lambda - c.x` nonnegative on `TH_k`; `None` if unbounded.
    pub lambda: Option<f64>,
}

/// Support values for each direction, from the Gram-side bound of each solve.
pub fn support_contour(p: &ThetaBodyProblem, directions: &[Vec<f64>], opts: &SdpOptions) -> Result<Vec<SupportLine>> {
    directions
        .par_iter()
        .map(|c| {
            if c.iter().all(|v| *v == 0.0) {
                return Err(ThetaError::Invalid("support direction must be nonzero".into()));
            }
            match maximize_linear(p, c, opts) {
                Ok(m) => Ok(SupportLine { c: c.clone(), lambda: Some(m.solution.bound) }),
                Err(ThetaError::Unbounded) => Ok(SupportLine { c: c.clone(), lambda: None }),
                Err(e) => Err(e),
            }
        })
        .collect()
}

/// Equally spaced unit directions in the plane.
pub fn plane_directions(count: usize) -> Vec<Vec<f64>> {
    (0..count)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / count as f64;
            vec![theta.cos(), theta.sin()]
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CertificateMode {
    Exact,
    Numeric,
}

/// Gram certificate for `l = lambda - c.x` over `B_k`.
#[derive(Clone, Debug)]
pub struct Certificate {
    pub linear_poly: Polynomial,
    pub basis: Vec<String>,
    pub gram: Vec<Vec<Rational>>,
    pub gram_f64: DMatrix<f64>,
    /// `l - f^T P f` reduced modulo the ideal (exact for the rational Gram).
    pub residual: Polynomial,
    pub mode: CertificateMode,
    pub verified: bool,
    pub max_residual: f64,
    pub min_eigenvalue: f64,
}

impl Certificate {
    pub fn ensure_verified(&self) -> Result<()> {
        if self.verified {
            Ok(())
        } else {
            Err(ThetaError::Verification(self.max_residual.max(-self.min_eigenvalue.min(0.0))))
        }
    }
}

/// Target coordinates of `lambda - c.x` over `B_2k`.
fn target_vector(p: &ThetaBodyProblem, c: &[Rational], lambda: &Rational) -> Result<Vec<Rational>> {
    let mut t = vec![Rational::zero(); p.template.nvars_y()];
    t[0] += lambda;
    for (ci, form) in c.iter().zip(p.oracle.coordinates()) {
        for (l, a) in form {
            if *l >= t.len() {
                return Err(ThetaError::OutsideBasis { degree: 1, max_degree: 2 * p.k as u32 });
            }
            t[*l] -= ci * a;
        }
    }
    Ok(t)
}

fn linear_polynomial(nvars: usize, c: &[Rational], lambda: &Rational) -> Polynomial {
    let p = Polynomial::linear(lambda.clone(), &c.iter().map(|v| -v.clone()).collect::<Vec<_>>());
    debug_assert_eq!(p.nvars(), nvars);
    p
}

/// `target - sum_ij P_ij lambda^l_ij`.
fn exact_residual(t: &MomentTemplate, target: &[Rational], gram: &[Vec<Rational>]) -> Vec<Rational> {
    let mut r = target.to_vec();
    for (i, j, form) in t.upper_entries() {
        let w = if i == j { gram[i][i].clone() } else { &gram[i][j] + &gram[j][i] };
        if w.is_zero() {
            continue;
        }
        for (l, a) in form {
            r[*l] -= &w * a;
        }
    }
    r
}

fn float_residual(t: &MomentTemplate, target: &[Rational], gram: &DMatrix<f64>) -> f64 {
    let mut r: Vec<f64> = target.iter().map(to_f64).collect();
    for (i, j, form) in t.upper_entries() {
        let w = if i == j { gram[(i, i)] } else { gram[(i, j)] + gram[(j, i)] };
        for (l, a) in form {
            r[*l] -= w * to_f64(a);
        }
    }
    r.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Minimum-norm change of the parameters whose columns (sparse images in
/// the residual space) are `cols`, cancelling `residual` exactly.
fn min_norm_correction(cols: &[Vec<(usize, Rational)>], residual: &[Rational]) -> Option<Vec<Rational>> {
    let n = residual.len();
    let mut aat = vec![vec![Rational::zero(); n]; n];
    for col in cols {
        for (l1, a1) in col {
            for (l2, a2) in col {
                aat[*l1][*l2] += a1 * a2;
            }
        }
    }
    let mu = solve_any(&aat, residual)?;
    Some(cols.iter().map(|col| col.iter().map(|(l, a)| a * &mu[*l]).sum()).collect())
}

/// Minimum-norm symmetric correction making the residual vanish exactly.
fn project_gram(t: &MomentTemplate, gram: &mut [Vec<Rational>], residual: &[Rational]) -> bool {
    let pairs: Vec<(usize, usize, Vec<(usize, Rational)>)> = t
        .upper_entries()
        .filter(|(_, _, f)| !f.is_empty())
        .map(|(i, j, f)| {
            let w = if i == j { rat(1) } else { rat(2) };
            (i, j, f.iter().map(|(l, a)| (*l, a * &w)).collect())
        })
        .collect();
    let cols: Vec<Vec<(usize, Rational)>> = pairs.iter().map(|(_, _, c)| c.clone()).collect();
    let Some(delta) = min_norm_correction(&cols, residual) else {
        return false;
    };
    for ((i, j, _), delta) in pairs.iter().zip(delta) {
        if delta.is_zero() {
            continue;
        }
        gram[*i][*j] += &delta;
        if i != j {
            gram[*j][*i] += &delta;
        }
    }
    true
}

/// Largest Gram size for which the tight-point face is computed.
const FACE_MAX_DIM: usize = 40;
const FACE_MAX_POINTS: usize = 4096;

/// Exact basis `W` (as columns) of the vectors orthogonal to `v(s)` for every
/// point `s` of a finite variety where `lambda - c.x` vanishes. Any Gram matrix
/// certifying the inequality has the form `W Q W^T`.
fn tight_face(p: &ThetaBodyProblem, c: &[Rational], lambda: &Rational) -> Option<Vec<Vec<Rational>>> {
    let d = p.template.dim();
    if d > FACE_MAX_DIM {
        return None;
    }
    let points = match p.oracle.spec() {
        IdealSpec::FinitePoints(pts) => pts.clone(),
        IdealSpec::StableSet(g) if g.n() <= 20 => g.stable_set_points(),
        IdealSpec::CutIdeal(g) if g.n() <= 12 => g.cut_points().ok()?,
        _ => return None,
    };
    if points.len() > FACE_MAX_POINTS {
        return None;
    }
    let rows: Vec<Vec<Rational>> = points
        .iter()
        .filter(|s| {
            let cs: Rational = c.iter().zip(s.iter()).map(|(a, b)| a * b).sum();
            (lambda - cs).is_zero()
        })
        .map(|s| p.oracle.evaluate_basis(s)[..d].to_vec())
        .collect();
    if rows.is_empty() {
        return None;
    }
    Some(nullspace(&rows, d))
}

/// Rounds `x` onto the face spanned by `w` and repairs the residual there.
fn face_gram(t: &MomentTemplate, target: &[Rational], x: &DMatrix<f64>, w: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let d = t.dim();
    let r = w.len();
    let params: Vec<(usize, usize)> = (0..r).flat_map(|a| (a..r).map(move |b| (a, b))).collect();
    // entry (i, j) of W Q W^T as a combination of the parameters
    let coef = |i: usize, j: usize, a: usize, b: usize| -> Rational {
        let mut v = &w[a][i] * &w[b][j];
        if a != b {
            v += &w[b][i] * &w[a][j];
        }
        v
    };
    let mut cols: Vec<Vec<Rational>> = vec![vec![Rational::zero(); target.len()]; params.len()];
    for (i, j, form) in t.upper_entries() {
        let weight = if i == j { rat(1) } else { rat(2) };
        for (k, &(a, b)) in params.iter().enumerate() {
            let e = coef(i, j, a, b);
            if e.is_zero() {
                continue;
            }
            let e = e * &weight;
            for (l, val) in form {
                cols[k][*l] += &e * val;
            }
        }
    }
    let sparse: Vec<Vec<(usize, Rational)>> =
        cols.iter().map(|c| c.iter().enumerate().filter(|(_, v)| !v.is_zero()).map(|(l, v)| (l, v.clone())).collect()).collect();

    let wf = DMatrix::from_fn(d, r, |i, a| to_f64(&w[a][i]));
    let pinv = (wf.transpose() * &wf).try_inverse()? * wf.transpose();
    let qf = &pinv * x * pinv.transpose();

    let assemble = |q: &[Rational]| -> Vec<Vec<Rational>> {
        let mut g = vec![vec![Rational::zero(); d]; d];
        for (k, &(a, b)) in params.iter().enumerate() {
            if q[k].is_zero() {
                continue;
            }
            for i in 0..d {
                for j in 0..d {
                    let e = coef(i, j, a, b);
                    if !e.is_zero() {
                        g[i][j] += e * &q[k];
                    }
                }
            }
        }
        g
    };
    let mut den = 1u64;
    while den <= GRAM_DENOMINATOR {
        let mut q: Vec<Rational> = params.iter().map(|&(a, b)| limit_denominator(0.5 * (qf[(a, b)] + qf[(b, a)]), den)).collect();
        let res = exact_residual(t, target, &assemble(&q));
        if !res.iter().all(Zero::is_zero) {
            if let Some(delta) = min_norm_correction(&sparse, &res) {
                for (qk, dk) in q.iter_mut().zip(delta) {
                    *qk += dk;
                }
            }
        }
        let gram = assemble(&q);
        if exact_residual(t, target, &gram).iter().all(Zero::is_zero) && is_psd_exact(&gram) {
            return Some(gram);
        }
        den *= 10;
    }
    None
}

/// Exact PSD test by symmetric elimination.
pub fn is_psd_exact(m: &[Vec<Rational>]) -> bool {
    let n = m.len();
    let mut a = m.to_vec();
    for k in 0..n {
        let piv = a[k][k].clone();
        if piv.is_negative() {
            return false;
        }
        if piv.is_zero() {
            if (k + 1..n).any(|j| !a[k][j].is_zero()) {
                return false;
            }
            continue;
        }
        for i in k + 1..n {
            if a[i][k].is_zero() {
                continue;
            }
            let f = &a[i][k] / &piv;
            for j in k..n {
                let t = &f * &a[k][j];
                a[i][j] -= t;
            }
        }
    }
    true
}

fn rational_matrix_to_f64(m: &[Vec<Rational>]) -> DMatrix<f64> {
    let n = m.len();
    DMatrix::from_fn(n, n, |i, j| to_f64(&m[i][j]))
}

fn residual_polynomial(p: &ThetaBodyProblem, r: &[Rational]) -> Result<Polynomial> {
    let basis = &p.oracle.basis().elements;
    Polynomial::from_terms(p.nvars(), r.iter().enumerate().map(|(l, c)| (basis[l].clone(), c.clone())))
}

/// Checks a user-supplied Gram matrix exactly.
pub fn verify_gram(p: &ThetaBodyProblem, c: &[Rational], lambda: &Rational, gram: Vec<Vec<Rational>>) -> Result<Certificate> {
    p.check_len(c.len())?;
    let d = p.template.dim();
    if gram.len() != d || gram.iter().any(|r| r.len() != d) {
        return Err(ThetaError::DimensionMismatch { expected: d, got: gram.len() });
    }
    let target = target_vector(p, c, lambda)?;
    let r = exact_residual(&p.template, &target, &gram);
    let gram_f64 = rational_matrix_to_f64(&gram);
    let exact_zero = r.iter().all(Zero::is_zero);
    let psd = is_psd_exact(&gram);
    Ok(Certificate {
        linear_poly: linear_polynomial(p.nvars(), c, lambda),
        basis: (0..d).map(|i| p.oracle.basis().label(i)).collect(),
        max_residual: r.iter().map(|v| to_f64(&v.abs())).fold(0.0, f64::max),
        min_eigenvalue: min_eigenvalue(&gram_f64),
        residual: residual_polynomial(p, &r)?,
        gram,
        gram_f64,
        mode: CertificateMode::Exact,
        verified: exact_zero && psd,
    })
}

/// Certificate for `lambda - c.x` built from the dual matrix of the
/// maximization SDP, shifted so its constant term matches `lambda`.
pub fn try_certificate(p: &ThetaBodyProblem, c: &[Rational], lambda: &Rational, opts: &SdpOptions) -> Result<Certificate> {
    p.check_len(c.len())?;
    let cf: Vec<f64> = c.iter().map(to_f64).collect();
    let m = maximize_linear(p, &cf, opts)?;
    let d = p.template.dim();
    let mut x = m.solution.dual_matrix.clone();
    x[(0, 0)] += to_f64(lambda) - m.solution.bound;
    let target = target_vector(p, c, lambda)?;
    let basis: Vec<String> = (0..d).map(|i| p.oracle.basis().label(i)).collect();
    let linear_poly = linear_polynomial(p.nvars(), c, lambda);

    let exact = |gram: Vec<Vec<Rational>>| {
        let gram_f64 = rational_matrix_to_f64(&gram);
        Certificate {
            linear_poly: linear_poly.clone(),
            basis: basis.clone(),
            min_eigenvalue: min_eigenvalue(&gram_f64),
            residual: Polynomial::zero(p.nvars()),
            gram,
            gram_f64,
            mode: CertificateMode::Exact,
            verified: true,
            max_residual: 0.0,
        }
    };

    // tight points force a kernel; rounding inside that face keeps it
    if let Some(gram) = tight_face(p, c, lambda).and_then(|w| face_gram(&p.template, &target, &x, &w)) {
        return Ok(exact(gram));
    }

    // coarse denominators first: they snap near-rational duals onto exact identities
    let mut den = 1u64;
    while den <= GRAM_DENOMINATOR {
        let mut gram: Vec<Vec<Rational>> =
            (0..d).map(|i| (0..d).map(|j| limit_denominator(0.5 * (x[(i, j)] + x[(j, i)]), den)).collect()).collect();
        let r = exact_residual(&p.template, &target, &gram);
        let projected = r.iter().all(Zero::is_zero) || project_gram(&p.template, &mut gram, &r);
        if projected
            && exact_residual(&p.template, &target, &gram).iter().all(Zero::is_zero)
            && is_psd_exact(&gram)
        {
            return Ok(exact(gram));
        }
        den *= 10;
    }

    // numeric fallback on the unrounded matrix
    let max_residual = float_residual(&p.template, &target, &x);
    let lmin = min_eigenvalue(&x);
    let scale = x.iter().fold(1.0f64, |a, v| a.max(v.abs()));
    let verified = max_residual <= NUMERIC_RESIDUAL_TOL && lmin >= -1e-8 * scale;
    let rounded: Vec<Vec<Rational>> =
        (0..d).map(|i| (0..d).map(|j| limit_denominator(x[(i, j)], GRAM_DENOMINATOR)).collect()).collect();
    let r = exact_residual(&p.template, &target, &rounded);
    Ok(Certificate {
        linear_poly,
        basis,
        residual: residual_polynomial(p, &r)?,
        gram: rounded,
        gram_f64: x,
        mode: CertificateMode::Numeric,
        verified,
        max_residual,
        min_eigenvalue: lmin,
    })
}

/// As [`try_certificate`], failing with the residual size when verification fails.
pub fn extract_certificate(p: &ThetaBodyProblem, c: &[Rational], lambda: &Rational, opts: &SdpOptions) -> Result<Certificate> {
    let cert = try_certificate(p, c, lambda, opts)?;
    cert.ensure_verified()?;
    Ok(cert)
}

/// Normal form of `l - sum s_i^2` modulo the oracle's ideal.
pub fn verify_sos_identity(l: &Polynomial, squares: &[Polynomial], oracle: &QuotientOracle) -> Result<Polynomial> {
    let mut acc = l.clone();
    for s in squares {
        acc = &acc - &(s * s);
    }
    oracle.reduce_poly(&acc)
}

/// `(k - sum x_i, [p_1..p_k, g_1..g_{k-1}])` for the cycle `C_{2k+1}`, with
/// `p_i = (1 - x1)(1 - x_{2i} - x_{2i+1})` and `g_i = x1 (1 - x_{2i+1} - x_{2i+2})`.
pub fn odd_cycle_identity(k: usize) -> (Polynomial, Vec<Polynomial>) {
    let n = 2 * k + 1;
    let x = |i: usize| Polynomial::var(n, i - 1);
    let one = Polynomial::constant(n, Rational::one());
    let mut l = Polynomial::constant(n, rat(k as i64));
    for i in 1..=n {
        l = &l - &x(i);
    }
    let mut squares = Vec::new();
    for i in 1..=k {
        let edge = &(&one - &x(2 * i)) - &x(2 * i + 1);
        squares.push(&(&one - &x(1)) * &edge);
    }
    for i in 1..k {
        let edge = &(&one - &x(2 * i + 1)) - &x(2 * i + 2);
        squares.push(&x(1) * &edge);
    }
    (l, squares)
}

/// `max c.s` over a finite point set.
pub fn brute_force_max(points: &[Vec<Rational>], c: &[f64]) -> f64 {
    points
        .iter()
        .map(|s| s.iter().zip(c).map(|(v, ci)| to_f64(v) * ci).sum::<f64>())
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Upper bound on the maximum cut: `(|E| + max(-sum x_e)) / 2`.
pub fn maxcut_bound(p: &ThetaBodyProblem, opts: &SdpOptions) -> Result<f64> {
    let ne = p.nvars();
    let m = maximize_linear(p, &vec![-1.0; ne], opts)?;
    Ok((ne as f64 + m.value) / 2.0)
}

/// Real points of a plane curve `h = 0` on lines through `center`.
pub fn sample_plane_curve(h: &Polynomial, center: [f64; 2], num_dirs: usize) -> Result<Vec<[f64; 2]>> {
    if h.nvars() != 2 {
        return Err(ThetaError::DimensionMismatch { expected: 2, got: h.nvars() });
    }
    let mut out = Vec::new();
    for j in 0..num_dirs {
        // half-turn suffices: each line is traversed in both directions
        let theta = std::f64::consts::PI * j as f64 / num_dirs as f64;
        let u = [theta.cos(), theta.sin()];
        let coeffs = restrict_to_line(h, center, u);
        for r in real_roots(&coeffs) {
            out.push([center[0] + r * u[0], center[1] + r * u[1]]);
        }
    }
    Ok(out)
}

/// Coefficients (constant first) of `r -> h(center + r u)`.
fn restrict_to_line(h: &Polynomial, center: [f64; 2], u: [f64; 2]) -> Vec<f64> {
    fn power(base: [f64; 2], e: u32) -> Vec<f64> {
        let mut acc = vec![1.0];
        for _ in 0..e {
            let mut next = vec![0.0; acc.len() + 1];
            for (i, a) in acc.iter().enumerate() {
                next[i] += a * base[0];
                next[i + 1] += a * base[1];
            }
            acc = next;
        }
        acc
    }
    let deg = h.degree().unwrap_or(0) as usize;
    let mut out = vec![0.0; deg + 1];
    for (m, c) in h.terms() {
        let e = m.exponents();
        let a = power([center[0], u[0]], e[0]);
        let b = power([center[1], u[1]], e[1]);
        for (i, ai) in a.iter().enumerate() {
            for (j, bj) in b.iter().enumerate() {
                out[i + j] += to_f64(c) * ai * bj;
            }
        }
    }
    out
}

/// Real roots via companion-matrix eigenvalues.
fn real_roots(coeffs: &[f64]) -> Vec<f64> {
    let scale = coeffs.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut c: Vec<f64> = coeffs.to_vec();
    while c.len() > 1 && c.last().is_some_and(|v| v.abs() <= 1e-12 * scale) {
        c.pop();
    }
    // strip zero roots
    let mut zeros = 0;
    while c.len() > 1 && c[0].abs() <= 1e-12 * scale {
        c.remove(0);
        zeros += 1;
    }
    let mut roots = vec![0.0; zeros.min(1)];
    let n = c.len() - 1;
    if n == 0 {
        return roots;
    }
    let lead = c[n];
    let mut comp = DMatrix::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        comp[(i, n - 1)] = -c[i] / lead;
    }
    for z in comp.complex_eigenvalues().iter() {
        if z.im.abs() <= 1e-6 * (1.0 + z.re.abs()) {
            roots.push(z.re);
        }
    }
    roots
}

/// Squarefree monomial helper for tests and the CLI.
pub fn monomial_of_support(nvars: usize, support: &[usize]) -> Monomial {
    Monomial::from_support(nvars, support)
}

/// Reduced sparse coordinates of `f` (convenience re-export of the oracle).
pub fn reduce(p: &ThetaBodyProblem, f: &Polynomial) -> Result<SparseVec> {
    p.oracle.reduce(f)
}
