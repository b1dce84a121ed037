//! Primal-dual interior-point solver for moment LMIs.
//!
//! The user problem is `max c.y` subject to `M(y) >= 0` and linear equalities
//! (pins such as `y_0 = 1`). Equalities are eliminated first, leaving the
//! standard dual form
//!
//! ```text
//! max b.z   s.t.  S = F0 + sum_v z_v F_v >= 0
//! min <F0, X>   s.t.  <F_v, X> = -b_v,  X >= 0
//! ```
//!
//! whose primal matrix `X` is the Gram matrix of the matching certificate.
//! Iterations use Nesterov-Todd scaling with Mehrotra predictor-corrector steps
//! from an infeasible start.

use std::collections::BTreeMap;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ThetaError};
use crate::moment::{MomentTemplate, MomentVector};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sense {
    #[default]
    Maximize,
    Minimize,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SdpStatus {
    Optimal,
    Unbounded,
    Infeasible,
    NumericalTrouble,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SdpOptions {
    pub gap_tol: f64,
    pub feas_tol: f64,
    pub max_iter: usize,
    pub unbounded_cap: f64,
}

impl Default for SdpOptions {
    fn default() -> Self {
        SdpOptions { gap_tol: 1e-9, feas_tol: 1e-9, max_iter: 200, unbounded_cap: 1e8 }
    }
}

/// `sum_l terms[l] * y_l = rhs`.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearEquality {
    pub terms: Vec<(usize, f64)>,
    pub rhs: f64,
}

#[derive(Clone, Debug)]
pub struct SdpProblem {
    pub template: Arc<MomentTemplate>,
    pub objective: Vec<(usize, f64)>,
    pub fixed: BTreeMap<usize, f64>,
    pub equalities: Vec<LinearEquality>,
    pub sense: Sense,
    /// Optional starting moment vector; used only if strictly feasible.
    pub warm_start: Option<MomentVector>,
}

impl SdpProblem {
    /// New problem with `y_0 = 1` pinned.
    pub fn new(template: Arc<MomentTemplate>, objective: Vec<(usize, f64)>, sense: Sense) -> Self {
        SdpProblem {
            template,
            objective,
            fixed: BTreeMap::from([(0, 1.0)]),
            equalities: Vec::new(),
            sense,
            warm_start: None,
        }
    }

    pub fn pin(&mut self, l: usize, value: f64) {
        self.fixed.insert(l, value);
    }

    pub fn add_equality(&mut self, terms: Vec<(usize, f64)>, rhs: f64) {
        self.equalities.push(LinearEquality { terms, rhs });
    }

    fn validate(&self) -> Result<()> {
        let n = self.template.nvars_y();
        if self.template.dim() == 0 {
            return Err(ThetaError::Invalid("empty moment template".into()));
        }
        let bad = self
            .objective
            .iter()
            .map(|(l, _)| *l)
            .chain(self.fixed.keys().copied())
            .chain(self.equalities.iter().flat_map(|e| e.terms.iter().map(|(l, _)| *l)))
            .find(|&l| l >= n);
        if let Some(l) = bad {
            return Err(ThetaError::DimensionMismatch { expected: n, got: l + 1 });
        }
        if let Some(w) = &self.warm_start {
            if w.len() != n {
                return Err(ThetaError::DimensionMismatch { expected: n, got: w.len() });
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IterRecord {
    pub iter: usize,
    /// Upper bound `<F0, X>` on the objective (maximization form).
    pub pobj: f64,
    /// Objective value `b.z` of the current `y` (maximization form).
    pub dobj: f64,
    pub pinf: f64,
    pub dinf: f64,
    pub mu: f64,
    pub step_p: f64,
    pub step_d: f64,
}

#[derive(Clone, Debug)]
pub struct SdpSolution {
    pub status: SdpStatus,
    pub y: MomentVector,
    /// Objective at `y` in the problem's sense.
    pub value: f64,
    /// Bound from the dual matrix, in the problem's sense.
    pub bound: f64,
    /// Gram candidate indexed like the template.
    pub dual_matrix: DMatrix<f64>,
    pub gap: f64,
    pub pinf: f64,
    pub dinf: f64,
    pub iterations: usize,
    pub history: Vec<IterRecord>,
}

impl SdpSolution {
    fn status_only(status: SdpStatus, problem: &SdpProblem) -> Self {
        let sign = if problem.sense == Sense::Maximize { 1.0 } else { -1.0 };
        let value = match status {
            SdpStatus::Unbounded => sign * f64::INFINITY,
            SdpStatus::Infeasible => -sign * f64::INFINITY,
            _ => f64::NAN,
        };
        let d = problem.template.dim();
        SdpSolution {
            status,
            y: MomentVector::new(Vec::new()),
            value,
            bound: value,
            dual_matrix: DMatrix::zeros(d, d),
            gap: f64::NAN,
            pinf: f64::NAN,
            dinf: f64::NAN,
            iterations: 0,
            history: Vec::new(),
        }
    }
}

/// Outcome of the max-`t` feasibility problem `M(y) - t I >= 0`, `t <= 1`.
#[derive(Clone, Debug)]
pub struct Phase1Result {
    /// Best `t` found (lower bound on the optimum).
    pub margin: f64,
    /// Certified upper bound on the optimal `t`.
    pub upper_bound: f64,
    pub y: MomentVector,
    pub status: SdpStatus,
}

type UpperMap = BTreeMap<(usize, usize), f64>;

/// Dense LMI data in standard dual form over a single block-diagonal matrix.
#[derive(Clone, Debug)]
struct Lmi {
    dim: usize,
    block: Vec<usize>,
    f0: DMatrix<f64>,
    /// Both triangles listed for off-diagonal entries.
    fs: Vec<Vec<(usize, usize, f64)>>,
    b: Vec<f64>,
}

impl Lmi {
    fn from_maps(dim: usize, block: Vec<usize>, f0: &UpperMap, fs: &[UpperMap], b: Vec<f64>) -> Lmi {
        let mut m0 = DMatrix::zeros(dim, dim);
        for (&(i, j), &v) in f0 {
            m0[(i, j)] = v;
            m0[(j, i)] = v;
        }
        let fs = fs
            .iter()
            .map(|f| {
                let mut out = Vec::with_capacity(2 * f.len());
                for (&(i, j), &v) in f {
                    out.push((i, j, v));
                    if i != j {
                        out.push((j, i, v));
                    }
                }
                out
            })
            .collect();
        Lmi { dim, block, f0: m0, fs, b }
    }

    fn nvars(&self) -> usize {
        self.fs.len()
    }

    fn affine(&self, z: &[f64]) -> DMatrix<f64> {
        let mut s = self.f0.clone();
        for (f, &zv) in self.fs.iter().zip(z) {
            if zv != 0.0 {
                for &(i, j, v) in f {
                    s[(i, j)] += zv * v;
                }
            }
        }
        s
    }

    fn apply_dir(&self, dz: &[f64]) -> DMatrix<f64> {
        let mut s = DMatrix::zeros(self.dim, self.dim);
        for (f, &zv) in self.fs.iter().zip(dz) {
            for &(i, j, v) in f {
                s[(i, j)] += zv * v;
            }
        }
        s
    }

    fn inner(&self, v: usize, m: &DMatrix<f64>) -> f64 {
        self.fs[v].iter().map(|&(i, j, c)| c * m[(j, i)]).sum()
    }

    fn mask_blocks(&self, m: &mut DMatrix<f64>) {
        for i in 0..self.dim {
            for j in 0..self.dim {
                if self.block[i] != self.block[j] {
                    m[(i, j)] = 0.0;
                }
            }
        }
    }
}

#[derive(Debug, PartialEq)]
enum IpmExit {
    Converged,
    CapExceeded,
    Stalled,
}

struct IpmState {
    exit: IpmExit,
    x: DMatrix<f64>,
    z: Vec<f64>,
    pobj: f64,
    dobj: f64,
    pinf: f64,
    dinf: f64,
    history: Vec<IterRecord>,
}

fn frob(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|v| v * v).sum::<f64>().sqrt()
}

fn dot(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum()
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (m[(i, j)] + m[(j, i)]);
            m[(i, j)] = v;
            m[(j, i)] = v;
        }
    }
}

pub(crate) fn min_eigenvalue(m: &DMatrix<f64>) -> f64 {
    if m.nrows() == 0 {
        return f64::INFINITY;
    }
    SymmetricEigen::new(m.clone()).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Largest `alpha` with `I + alpha * M >= 0`.
fn max_step(m: &DMatrix<f64>) -> f64 {
    let lmin = min_eigenvalue(m);
    if lmin < 0.0 {
        -1.0 / lmin
    } else {
        f64::INFINITY
    }
}

/// Newton system in scaled form: find `dx` with `A^T dx = rp` closest to `g`,
/// and `dz` with `A dz = g - dx`, from a thin QR factor of `A`.
struct SchurSolver {
    q: DMatrix<f64>,
    r: DMatrix<f64>,
}

impl SchurSolver {
    fn new(a: DMatrix<f64>) -> Option<Self> {
        let m = a.ncols();
        if a.nrows() < m {
            return None;
        }
        let qr = a.qr();
        let r = qr.r();
        let top = (0..m).map(|i| r[(i, i)].abs()).fold(0.0f64, f64::max);
        if (0..m).any(|i| !(r[(i, i)].abs() > 1e-15 * top)) {
            return None;
        }
        Some(SchurSolver { q: qr.q(), r })
    }

    fn solve(&self, g: &DVector<f64>, rp: &DVector<f64>) -> Option<(DVector<f64>, DVector<f64>)> {
        let qtg = self.q.transpose() * g;
        let w = self.r.tr_solve_upper_triangular(rp)?;
        let dx = g - &self.q * (&qtg - &w);
        let dz = self.r.solve_upper_triangular(&(qtg - w))?;
        Some((dx, dz))
    }
}

fn ipm(lmi: &Lmi, z0: Option<Vec<f64>>, opts: &SdpOptions) -> Result<IpmState> {
    let d = lmi.dim;
    let m = lmi.nvars();
    let norm_b = lmi.b.iter().map(|v| v * v).sum::<f64>().sqrt();
    let norm_f0 = frob(&lmi.f0);
    let f_norms: Vec<f64> = lmi.fs.iter().map(|f| f.iter().map(|e| e.2 * e.2).sum::<f64>().sqrt()).collect();
    let sqrt_d = (d as f64).sqrt();
    let mut xi = sqrt_d.max(10.0);
    for (bv, fv) in lmi.b.iter().zip(&f_norms) {
        xi = xi.max(sqrt_d * (1.0 + bv.abs()) / (1.0 + fv));
    }
    let eta = f_norms.iter().copied().fold(sqrt_d.max(10.0).max(norm_f0), f64::max);

    let mut x = DMatrix::identity(d, d) * xi;
    let (mut z, mut s) = match z0 {
        Some(z) if min_eigenvalue(&lmi.affine(&z)) > 0.0 => {
            let s = lmi.affine(&z);
            (z, s)
        }
        _ => (vec![0.0; m], DMatrix::identity(d, d) * eta),
    };
    let mut history = Vec::new();
    let (mut step_p, mut step_d) = (0.0, 0.0);

    for iter in 0..=opts.max_iter {
        let mut rd = lmi.affine(&z) - &s;
        lmi.mask_blocks(&mut rd);
        let rp: Vec<f64> = (0..m).map(|v| -lmi.b[v] - lmi.inner(v, &x)).collect();
        let pobj = dot(&lmi.f0, &x);
        let dobj: f64 = lmi.b.iter().zip(&z).map(|(a, b)| a * b).sum();
        let pinf = rp.iter().map(|v| v * v).sum::<f64>().sqrt() / (1.0 + norm_b);
        let dinf = frob(&rd) / (1.0 + norm_f0);
        let mu = dot(&x, &s) / d as f64;
        history.push(IterRecord { iter, pobj, dobj, pinf, dinf, mu, step_p, step_d });
        let rel_gap = (pobj - dobj).abs() / (1.0 + pobj.abs() + dobj.abs());
        let rel_mu = mu * d as f64 / (1.0 + pobj.abs() + dobj.abs());
        let state = |exit, x: DMatrix<f64>, z: Vec<f64>, history| IpmState { exit, x, z, pobj, dobj, pinf, dinf, history };

        if rel_gap <= opts.gap_tol && rel_mu <= opts.gap_tol && pinf <= opts.feas_tol && dinf <= opts.feas_tol {
            return Ok(state(IpmExit::Converged, x, z, history));
        }
        if dinf <= opts.feas_tol && dobj > opts.unbounded_cap {
            return Ok(state(IpmExit::CapExceeded, x, z, history));
        }
        let too_big = |v: &DMatrix<f64>| v.iter().any(|e| !e.is_finite() || e.abs() > 1e14);
        if iter == opts.max_iter || too_big(&x) || too_big(&s) {
            return Ok(state(IpmExit::Stalled, x, z, history));
        }

        let Some(lx) = x.clone().cholesky() else {
            return Ok(state(IpmExit::Stalled, x, z, history));
        };
        let Some(ls) = s.clone().cholesky() else {
            return Ok(state(IpmExit::Stalled, x, z, history));
        };
        let lx = lx.l();
        let ls = ls.l();
        let svd = (ls.transpose() * &lx).svd(true, true);
        let (Some(_), Some(vt)) = (svd.u, svd.v_t) else {
            return Ok(state(IpmExit::Stalled, x, z, history));
        };
        let lam: Vec<f64> = svd.singular_values.iter().copied().collect();
        if lam.iter().any(|&l| !(l > 0.0)) {
            return Ok(state(IpmExit::Stalled, x, z, history));
        }
        let mut r = &lx * vt.transpose();
        for (j, &l) in lam.iter().enumerate() {
            let f = 1.0 / l.sqrt();
            for i in 0..d {
                r[(i, j)] *= f;
            }
        }

        // scaled constraint matrices G_u = R^T F_u R; the Schur matrix is A^T A
        // with A holding the packed G_u, solved through a QR factor of A
        let g_mats: Vec<DMatrix<f64>> = lmi
            .fs
            .iter()
            .map(|f| {
                let mut g = DMatrix::zeros(d, d);
                for &(a, b, c) in f {
                    g += r.row(a).transpose() * r.row(b) * c;
                }
                symmetrize(&mut g);
                g
            })
            .collect();
        let npack = d * (d + 1) / 2;
        let pack = |mat: &DMatrix<f64>| -> DVector<f64> {
            let mut out = DVector::zeros(npack);
            let mut k = 0;
            for j in 0..d {
                for i in 0..=j {
                    out[k] = if i == j { mat[(i, i)] } else { std::f64::consts::SQRT_2 * mat[(i, j)] };
                    k += 1;
                }
            }
            out
        };
        let mut amat = DMatrix::zeros(npack, m);
        for (u, g) in g_mats.iter().enumerate() {
            amat.set_column(u, &pack(g));
        }
        let Some(schur) = SchurSolver::new(amat) else {
            return Ok(state(IpmExit::Stalled, x, z, history));
        };
        let mut rd_t = r.transpose() * &rd * &r;
        symmetrize(&mut rd_t);
        let lam_inv_sqrt: Vec<f64> = lam.iter().map(|l| 1.0 / l.sqrt()).collect();
        let rp_vec = DVector::from_vec(rp.clone());
        let unpack = |v: &DVector<f64>| -> DMatrix<f64> {
            let mut out = DMatrix::zeros(d, d);
            let mut k = 0;
            for j in 0..d {
                for i in 0..=j {
                    let e = if i == j { v[k] } else { v[k] / std::f64::consts::SQRT_2 };
                    out[(i, j)] = e;
                    out[(j, i)] = e;
                    k += 1;
                }
            }
            out
        };

        // direction for a given scaled complementarity target
        let direction = |zmat: &DMatrix<f64>| -> Option<(Vec<f64>, DMatrix<f64>, DMatrix<f64>, DMatrix<f64>)> {
            let g = zmat - &rd_t;
            let (dx_packed, dz) = schur.solve(&pack(&g), &rp_vec)?;
            let dz: Vec<f64> = dz.iter().copied().collect();
            let mut ds = &rd + lmi.apply_dir(&dz);
            lmi.mask_blocks(&mut ds);
            let dx_t = unpack(&dx_packed);
            let ds_t = zmat - &dx_t;
            Some((dz, ds, dx_t, ds_t))
        };
        let steps = |dx_t: &DMatrix<f64>, ds_t: &DMatrix<f64>| -> (f64, f64) {
            let scale = |mat: &DMatrix<f64>| {
                let mut out = mat.clone();
                for i in 0..d {
                    for j in 0..d {
                        out[(i, j)] *= lam_inv_sqrt[i] * lam_inv_sqrt[j];
                    }
                }
                out
            };
            (max_step(&scale(dx_t)), max_step(&scale(ds_t)))
        };

        let z_aff = DMatrix::from_diagonal(&DVector::from_iterator(d, lam.iter().map(|l| -l)));
        let Some((_, _, dx_a, ds_a)) = direction(&z_aff) else {
            return Ok(state(IpmExit::Stalled, x, z, history));
        };
        let (ap_max, ad_max) = steps(&dx_a, &ds_a);
        let (ap, ad) = (ap_max.min(1.0), ad_max.min(1.0));
        let lam_m = DMatrix::from_diagonal(&DVector::from_vec(lam.clone()));
        let mu_aff = dot(&(&lam_m + &dx_a * ap), &(&lam_m + &ds_a * ad)) / d as f64;
        let sigma = (mu_aff / mu).clamp(0.0, 1.0).powi(3);

        let mut rc = -(&lam_m * &lam_m);
        let mut cross = &dx_a * &ds_a;
        symmetrize(&mut cross);
        rc -= cross;
        for i in 0..d {
            rc[(i, i)] += sigma * mu;
        }
        let mut zc = DMatrix::zeros(d, d);
        for i in 0..d {
            for j in 0..d {
                zc[(i, j)] = 2.0 * rc[(i, j)] / (lam[i] + lam[j]);
            }
        }
        let Some((dz, ds, dx_t, ds_t)) = direction(&zc) else {
            return Ok(state(IpmExit::Stalled, x, z, history));
        };
        let (ap_max, ad_max) = steps(&dx_t, &ds_t);
        let gamma = 0.9 + 0.09 * ap.min(ad);
        step_p = (gamma * ap_max).min(1.0);
        step_d = (gamma * ad_max).min(1.0);

        let mut dx = &r * &dx_t * r.transpose();
        symmetrize(&mut dx);
        lmi.mask_blocks(&mut dx);
        x += dx * step_p;
        s += ds * step_d;
        symmetrize(&mut s);
        for (zv, dv) in z.iter_mut().zip(&dz) {
            *zv += step_d * dv;
        }
    }
    unreachable!("loop returns on the final iteration")
}

/// `y = offset + sum_f coef z_f` for each moment coordinate.
#[derive(Clone, Debug)]
struct Elimination {
    y_const: Vec<f64>,
    y_free: Vec<Vec<(usize, f64)>>,
    free_cols: Vec<usize>,
}

impl Elimination {
    fn y_of(&self, z: &[f64]) -> Vec<f64> {
        self.y_const
            .iter()
            .zip(&self.y_free)
            .map(|(c, terms)| c + terms.iter().map(|(f, a)| a * z[*f]).sum::<f64>())
            .collect()
    }
}

/// Gauss-Jordan elimination of pins and equalities; `None` if inconsistent.
fn eliminate(problem: &SdpProblem) -> Option<Elimination> {
    let n = problem.template.nvars_y();
    let mut rows: Vec<(Vec<f64>, f64)> = Vec::new();
    for (&l, &v) in &problem.fixed {
        let mut a = vec![0.0; n];
        a[l] = 1.0;
        rows.push((a, v));
    }
    for e in &problem.equalities {
        let mut a = vec![0.0; n];
        for &(l, c) in &e.terms {
            a[l] += c;
        }
        rows.push((a, e.rhs));
    }
    let mut pivots: Vec<(usize, Vec<f64>, f64)> = Vec::new();
    for (mut a, mut rhs) in rows {
        let scale = a.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-300);
        for (pc, prow, prhs) in &pivots {
            let f = a[*pc];
            if f != 0.0 {
                for (x, p) in a.iter_mut().zip(prow) {
                    *x -= f * p;
                }
                rhs -= f * prhs;
            }
        }
        let (col, big) = a.iter().enumerate().fold((0, 0.0f64), |(bc, bv), (c, v)| if v.abs() > bv { (c, v.abs()) } else { (bc, bv) });
        if big <= 1e-11 * scale {
            if rhs.abs() > 1e-9 * (1.0 + rhs.abs()) {
                return None;
            }
            continue;
        }
        let p = a[col];
        for v in a.iter_mut() {
            *v /= p;
        }
        rhs /= p;
        a[col] = 1.0;
        for (_, prow, prhs) in pivots.iter_mut() {
            let f = prow[col];
            if f != 0.0 {
                for (x, q) in prow.iter_mut().zip(&a) {
                    *x -= f * q;
                }
                prow[col] = 0.0;
                *prhs -= f * rhs;
            }
        }
        pivots.push((col, a, rhs));
    }
    let mut is_pivot = vec![None; n];
    for (k, (c, _, _)) in pivots.iter().enumerate() {
        is_pivot[*c] = Some(k);
    }
    let free_cols: Vec<usize> = (0..n).filter(|c| is_pivot[*c].is_none()).collect();
    let mut free_index = vec![usize::MAX; n];
    for (f, &c) in free_cols.iter().enumerate() {
        free_index[c] = f;
    }
    let mut y_const = vec![0.0; n];
    let mut y_free = vec![Vec::new(); n];
    for l in 0..n {
        match is_pivot[l] {
            Some(k) => {
                let (_, row, rhs) = &pivots[k];
                y_const[l] = *rhs;
                y_free[l] = free_cols
                    .iter()
                    .enumerate()
                    .filter(|(_, &c)| row[c] != 0.0)
                    .map(|(f, &c)| (f, -row[c]))
                    .collect();
            }
            None => y_free[l] = vec![(free_index[l], 1.0)],
        }
    }
    Some(Elimination { y_const, y_free, free_cols })
}

/// Reduced problem after elimination and diagonal presolve.
struct Reduced {
    elim: Elimination,
    /// Template rows kept in the LMI.
    alive: Vec<usize>,
    /// `(row, free variable, coefficient)` in deletion order.
    deleted: Vec<(usize, usize, f64)>,
    /// Free variable index for each LMI variable.
    lmi_vars: Vec<usize>,
    lmi: Lmi,
    c0: f64,
    /// An objective variable lost all its matrix entries.
    ray: bool,
}

fn reduce(problem: &SdpProblem) -> Option<Reduced> {
    let t = &problem.template;
    let elim = eliminate(problem)?;
    let nfree = elim.free_cols.len();
    let sign = if problem.sense == Sense::Maximize { 1.0 } else { -1.0 };
    let mut c_y = vec![0.0; t.nvars_y()];
    for &(l, c) in &problem.objective {
        c_y[l] += sign * c;
    }
    let mut f0 = UpperMap::new();
    let mut fs = vec![UpperMap::new(); nfree];
    let mut b = vec![0.0; nfree];
    let mut c0 = 0.0;
    for (l, occ) in t.occurrences().into_iter().enumerate() {
        let k = elim.y_const[l];
        c0 += c_y[l] * k;
        for &(f, a) in &elim.y_free[l] {
            b[f] += c_y[l] * a;
        }
        for (i, j, c) in occ {
            if k != 0.0 {
                *f0.entry((i, j)).or_insert(0.0) += c * k;
            }
            for &(f, a) in &elim.y_free[l] {
                *fs[f].entry((i, j)).or_insert(0.0) += c * a;
            }
        }
    }
    // objective terms on y's that never enter the matrix still count
    let scale = fs.iter().flat_map(|f| f.values()).fold(1.0f64, |m, v| m.max(v.abs()));
    for f in fs.iter_mut() {
        f.retain(|_, v| v.abs() > 1e-14 * scale);
    }
    f0.retain(|_, v| v.abs() > 1e-14 * scale);

    let dim = t.dim();
    let mut alive_mask = vec![true; dim];
    let mut deleted = Vec::new();
    let mut active = vec![true; nfree];
    let btol = 1e-13 * (1.0 + b.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    loop {
        let mut changed = false;
        for v in 0..nfree {
            if !active[v] || b[v].abs() > btol {
                continue;
            }
            let live: Vec<_> = fs[v].iter().filter(|((i, j), _)| alive_mask[*i] && alive_mask[*j]).collect();
            if let [(&(i, j), &c)] = live.as_slice() {
                if i == j && c > 0.0 && alive_mask.iter().filter(|a| **a).count() > 1 {
                    alive_mask[i] = false;
                    active[v] = false;
                    deleted.push((i, v, c));
                    changed = true;
                }
            }
        }
        if !changed {
            break;
        }
    }
    let alive: Vec<usize> = (0..dim).filter(|i| alive_mask[*i]).collect();
    let mut pos = vec![usize::MAX; dim];
    for (p, &i) in alive.iter().enumerate() {
        pos[i] = p;
    }
    let remap = |m: &UpperMap| -> UpperMap {
        m.iter()
            .filter(|((i, j), _)| alive_mask[*i] && alive_mask[*j])
            .map(|(&(i, j), &v)| {
                let (a, b2) = (pos[i], pos[j]);
                ((a.min(b2), a.max(b2)), v)
            })
            .collect()
    };
    let mut ray = false;
    let mut lmi_vars = Vec::new();
    let mut lmi_fs = Vec::new();
    let mut lmi_b = Vec::new();
    for v in 0..nfree {
        if !active[v] {
            continue;
        }
        let f = remap(&fs[v]);
        if f.is_empty() {
            if b[v].abs() > btol {
                ray = true;
            }
            continue;
        }
        lmi_vars.push(v);
        lmi_fs.push(f);
        lmi_b.push(b[v]);
    }
    let d = alive.len();
    let lmi = Lmi::from_maps(d, vec![0; d], &remap(&f0), &lmi_fs, lmi_b);
    Some(Reduced { elim, alive, deleted, lmi_vars, lmi, c0, ray })
}

impl Reduced {
    /// Free-variable vector from LMI variables, with deleted diagonals chosen so
    /// that each removed row keeps a Schur complement of `slack`.
    fn complete(&self, t: &MomentTemplate, zl: &[f64], slack: f64) -> Vec<f64> {
        let nfree = self.elim.free_cols.len();
        let mut z = vec![0.0; nfree];
        for (k, &v) in self.lmi_vars.iter().enumerate() {
            z[v] = zl[k];
        }
        let mut alive: Vec<usize> = self.alive.clone();
        for &(row, v, coef) in self.deleted.iter().rev() {
            let y = self.elim.y_of(&z);
            let full = crate::moment::instantiate(t, &MomentVector::new(y)).expect("template sized");
            let n = alive.len();
            let sub = DMatrix::from_fn(n, n, |a, b| full[(alive[a], alive[b])]);
            let col = DVector::from_fn(n, |a, _| full[(alive[a], row)]);
            let need = pinv_quadratic(&sub, &col);
            z[v] += (need + slack - full[(row, row)]) / coef;
            alive.push(row);
        }
        z
    }
}

/// `b^T A^+ b` for symmetric PSD `A`.
fn pinv_quadratic(a: &DMatrix<f64>, b: &DVector<f64>) -> f64 {
    if a.nrows() == 0 {
        return 0.0;
    }
    let eig = SymmetricEigen::new(a.clone());
    let top = eig.eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut acc = 0.0;
    for (k, &l) in eig.eigenvalues.iter().enumerate() {
        if l > 1e-10 * top.max(1e-300) {
            let p = eig.eigenvectors.column(k).dot(b);
            acc += p * p / l;
        }
    }
    acc
}

/// Solves the moment SDP.
pub fn solve(problem: &SdpProblem, opts: &SdpOptions) -> Result<SdpSolution> {
    problem.validate()?;
    let Some(red) = reduce(problem) else {
        return Ok(SdpSolution::status_only(SdpStatus::Infeasible, problem));
    };
    let sign = if problem.sense == Sense::Maximize { 1.0 } else { -1.0 };
    let t = &problem.template;

    if red.ray {
        let feasible = lmi_feasible(&red.lmi, opts)?;
        let status = if feasible { SdpStatus::Unbounded } else { SdpStatus::Infeasible };
        return Ok(SdpSolution::status_only(status, problem));
    }

    if red.lmi.nvars() == 0 {
        let lmin = min_eigenvalue(&red.lmi.f0);
        if lmin < -opts.feas_tol * (1.0 + frob(&red.lmi.f0)) {
            return Ok(SdpSolution::status_only(SdpStatus::Infeasible, problem));
        }
        let z = red.complete(t, &[], 0.0);
        let y = red.elim.y_of(&z);
        let d = t.dim();
        return Ok(SdpSolution {
            status: SdpStatus::Optimal,
            y: MomentVector::new(y),
            value: sign * red.c0,
            bound: sign * red.c0,
            dual_matrix: DMatrix::zeros(d, d),
            gap: 0.0,
            pinf: 0.0,
            dinf: 0.0,
            iterations: 0,
            history: Vec::new(),
        });
    }

    let warm = problem.warm_start.as_ref().map(|w| {
        let mut z = Vec::with_capacity(red.lmi_vars.len());
        for &v in &red.lmi_vars {
            z.push(w.values[red.elim.free_cols[v]]);
        }
        z
    });
    let st = ipm(&red.lmi, warm, opts)?;
    match st.exit {
        IpmExit::Converged => {
            let z = red.complete(t, &st.z, 0.0);
            let y = red.elim.y_of(&z);
            let d = t.dim();
            let mut gram = DMatrix::zeros(d, d);
            for (a, &i) in red.alive.iter().enumerate() {
                for (b, &j) in red.alive.iter().enumerate() {
                    gram[(i, j)] = st.x[(a, b)];
                }
            }
            let iterations = st.history.len() - 1;
            Ok(SdpSolution {
                status: SdpStatus::Optimal,
                y: MomentVector::new(y),
                value: sign * (st.dobj + red.c0),
                bound: sign * (st.pobj + red.c0),
                dual_matrix: gram,
                gap: (st.pobj - st.dobj).abs(),
                pinf: st.pinf,
                dinf: st.dinf,
                iterations,
                history: st.history,
            })
        }
        IpmExit::CapExceeded => {
            let mut sol = SdpSolution::status_only(SdpStatus::Unbounded, problem);
            sol.iterations = st.history.len() - 1;
            sol.history = st.history;
            Ok(sol)
        }
        IpmExit::Stalled => {
            let status = if !lmi_feasible(&red.lmi, opts)? {
                SdpStatus::Infeasible
            } else if recession_improves(&red.lmi, opts)? || grows_under_trace_cap(&red.lmi, opts)? {
                SdpStatus::Unbounded
            } else {
                SdpStatus::NumericalTrouble
            };
            let mut sol = SdpSolution::status_only(status, problem);
            if status == SdpStatus::NumericalTrouble {
                let z = red.complete(t, &st.z, 0.0);
                sol.y = MomentVector::new(red.elim.y_of(&z));
                sol.value = sign * (st.dobj + red.c0);
                sol.pinf = st.pinf;
                sol.dinf = st.dinf;
            }
            sol.iterations = st.history.len() - 1;
            sol.history = st.history;
            Ok(sol)
        }
    }
}

/// Max `t` with `F(z) - t I >= 0` and `t <= 1`.
fn phase1_lmi(lmi: &Lmi) -> Lmi {
    let d = lmi.dim;
    let mut f0 = DMatrix::zeros(d + 1, d + 1);
    f0.view_mut((0, 0), (d, d)).copy_from(&lmi.f0);
    f0[(d, d)] = 1.0;
    let mut fs = lmi.fs.clone();
    fs.push((0..=d).map(|i| (i, i, -1.0)).collect());
    let mut b = vec![0.0; lmi.nvars()];
    b.push(1.0);
    let mut block = lmi.block.clone();
    block.push(usize::MAX);
    Lmi { dim: d + 1, block, f0, fs, b }
}

fn run_phase1(lmi: &Lmi, opts: &SdpOptions) -> Result<(IpmState, f64)> {
    if lmi.nvars() == 0 {
        let lmin = min_eigenvalue(&lmi.f0).min(1.0);
        let st = IpmState {
            exit: IpmExit::Converged,
            x: DMatrix::zeros(lmi.dim + 1, lmi.dim + 1),
            z: vec![lmin],
            pobj: lmin,
            dobj: lmin,
            pinf: 0.0,
            dinf: 0.0,
            history: Vec::new(),
        };
        return Ok((st, lmin));
    }
    let p1 = phase1_lmi(lmi);
    let st = ipm(&p1, None, opts)?;
    let t = *st.z.last().expect("phase-I variable");
    Ok((st, t))
}

fn lmi_feasible(lmi: &Lmi, opts: &SdpOptions) -> Result<bool> {
    let (st, t) = run_phase1(lmi, opts)?;
    // infeasible only when the dual bound certifies a negative optimum
    let certified = st.pinf <= opts.feas_tol.max(1e-8) && st.pobj < -opts.feas_tol;
    Ok(!(certified && t < 0.0))
}

/// Max `b.d` over `sum d_v F_v >= 0`, `|d_v| <= 1`; positive means an improving ray.
fn recession_improves(lmi: &Lmi, opts: &SdpOptions) -> Result<bool> {
    let d = lmi.dim;
    let m = lmi.nvars();
    let dim = d + 2 * m;
    let mut f0 = DMatrix::zeros(dim, dim);
    let mut block = lmi.block.clone();
    let mut fs = lmi.fs.clone();
    for (v, f) in fs.iter_mut().enumerate() {
        f0[(d + 2 * v, d + 2 * v)] = 1.0;
        f0[(d + 2 * v + 1, d + 2 * v + 1)] = 1.0;
        f.push((d + 2 * v, d + 2 * v, 1.0));
        f.push((d + 2 * v + 1, d + 2 * v + 1, -1.0));
        block.push(usize::MAX - 2 * v);
        block.push(usize::MAX - 2 * v - 1);
    }
    let rec = Lmi { dim, block, f0, fs, b: lmi.b.clone() };
    let st = ipm(&rec, None, opts)?;
    let norm_b = lmi.b.iter().map(|v| v.abs()).sum::<f64>();
    Ok(st.exit == IpmExit::Converged && st.dobj > 1e-6 * (1.0 + norm_b))
}

/// Adds the block `cap - tr F(z) >= 0`.
fn trace_capped(lmi: &Lmi, cap: f64) -> Lmi {
    let d = lmi.dim;
    let mut f0 = DMatrix::zeros(d + 1, d + 1);
    f0.view_mut((0, 0), (d, d)).copy_from(&lmi.f0);
    f0[(d, d)] = cap - lmi.f0.trace();
    let mut fs = lmi.fs.clone();
    for f in fs.iter_mut() {
        let tr: f64 = f.iter().filter(|(i, j, _)| i == j).map(|e| e.2).sum();
        f.push((d, d, -tr));
    }
    let mut block = lmi.block.clone();
    block.push(usize::MAX);
    Lmi { dim: d + 1, block, f0, fs, b: lmi.b.clone() }
}

/// Unboundedness without an improving ray: the optimum under `tr F(z) <= R`
/// keeps growing as `R` increases by three orders of magnitude.
fn grows_under_trace_cap(lmi: &Lmi, opts: &SdpOptions) -> Result<bool> {
    let scale = lmi.dim as f64 + lmi.f0.trace().abs();
    let mut values = Vec::new();
    for cap in [1e3 * scale, 1e6 * scale] {
        let st = ipm(&trace_capped(lmi, cap), None, opts)?;
        if st.exit != IpmExit::Converged {
            return Ok(false);
        }
        values.push(st.dobj);
    }
    Ok(values[1] - values[0] > 1.0 + values[0].abs())
}

/// Max-`t` phase I on the problem's constraints (the objective is ignored).
pub fn phase1(problem: &SdpProblem, opts: &SdpOptions) -> Result<Phase1Result> {
    problem.validate()?;
    let t = &problem.template;
    let Some(red) = reduce(&SdpProblem { objective: Vec::new(), ..problem.clone() }) else {
        return Ok(Phase1Result {
            margin: f64::NEG_INFINITY,
            upper_bound: f64::NEG_INFINITY,
            y: MomentVector::new(Vec::new()),
            status: SdpStatus::Infeasible,
        });
    };
    let (st, margin) = run_phase1(&red.lmi, opts)?;
    let upper_bound = if st.pinf <= opts.feas_tol.max(1e-8) { st.pobj } else { f64::INFINITY };
    let zl = &st.z[..red.lmi.nvars()];
    let z = red.complete(t, zl, margin.max(0.0));
    let status = if upper_bound < -opts.feas_tol {
        SdpStatus::Infeasible
    } else if st.exit == IpmExit::Converged {
        SdpStatus::Optimal
    } else {
        SdpStatus::NumericalTrouble
    };
    Ok(Phase1Result { margin, upper_bound, y: MomentVector::new(red.elim.y_of(&z)), status })
}

/// Strictly feasible moment vector (warm start if it qualifies, else phase I).
pub fn phase1_interior(problem: &SdpProblem, opts: &SdpOptions) -> Result<MomentVector> {
    problem.validate()?;
    if let Some(w) = &problem.warm_start {
        let consistent = problem.fixed.iter().all(|(&l, &v)| (w.values[l] - v).abs() <= 1e-12 * (1.0 + v.abs()))
            && problem.equalities.iter().all(|e| {
                let lhs: f64 = e.terms.iter().map(|(l, c)| c * w.values[*l]).sum();
                (lhs - e.rhs).abs() <= 1e-9 * (1.0 + e.rhs.abs())
            });
        if consistent && min_eigenvalue(&crate::moment::instantiate(&problem.template, w)?) > 0.0 {
            return Ok(w.clone());
        }
    }
    let res = phase1(problem, opts)?;
    if res.margin > 0.0 {
        Ok(res.y)
    } else {
        Err(ThetaError::Infeasible(res.margin))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moment::build_moment_template;
    use crate::quotient::{basis_stable_set, Graph};
    use crate::rational::rat;

    fn two_by_two() -> Arc<MomentTemplate> {
        // [[y0, y1], [y1, y2]]
        let forms = vec![((0, 0), vec![(0, rat(1))]), ((0, 1), vec![(1, rat(1))]), ((1, 1), vec![(2, rat(1))])];
        let t = MomentTemplate::from_entries(2, 3, forms).unwrap();
        Arc::new(t)
    }

    #[test]
    fn unit_disk_corner() {
        let mut p = SdpProblem::new(two_by_two(), vec![(1, 1.0)], Sense::Maximize);
        p.pin(2, 1.0);
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.value - 1.0).abs() < 1e-8, "{}", sol.value);
        assert!((sol.y.values[1] - 1.0).abs() < 1e-6);
        assert!(sol.pinf <= 1e-8 && sol.dinf <= 1e-8);
    }

    #[test]
    fn minimize_sense() {
        let mut p = SdpProblem::new(two_by_two(), vec![(1, 1.0)], Sense::Minimize);
        p.pin(2, 1.0);
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        assert!((sol.value + 1.0).abs() < 1e-8);
    }

    #[test]
    fn free_corner_is_unbounded() {
        let p = SdpProblem::new(two_by_two(), vec![(1, 1.0)], Sense::Maximize);
        assert_eq!(solve(&p, &SdpOptions::default()).unwrap().status, SdpStatus::Unbounded);
    }

    #[test]
    fn inconsistent_pins_are_infeasible() {
        let mut p = SdpProblem::new(two_by_two(), vec![(1, 1.0)], Sense::Maximize);
        p.pin(2, 1.0);
        p.add_equality(vec![(2, 2.0)], 3.0);
        assert_eq!(solve(&p, &SdpOptions::default()).unwrap().status, SdpStatus::Infeasible);
    }

    #[test]
    fn trivial_template() {
        let t = Arc::new(MomentTemplate::from_entries(1, 1, vec![((0, 0), vec![(0, rat(1))])]).unwrap());
        let p = SdpProblem::new(t, Vec::new(), Sense::Maximize);
        let y = phase1_interior(&p, &SdpOptions::default()).unwrap();
        assert_eq!(y.values, vec![1.0]);
        assert_eq!(solve(&p, &SdpOptions::default()).unwrap().status, SdpStatus::Optimal);
    }

    fn pentagon_th1() -> Arc<MomentTemplate> {
        let o = basis_stable_set(&Graph::cycle(5), 1).unwrap();
        Arc::new(build_moment_template(&o, 1).unwrap())
    }

    #[test]
    fn pentagon_theta() {
        let t = pentagon_th1();
        let p = SdpProblem::new(t, (1..=5).map(|i| (i, 1.0)).collect(), Sense::Maximize);
        let sol = solve(&p, &SdpOptions::default()).unwrap();
        let theta = 5.0 * (std::f64::consts::PI / 5.0).cos() / (1.0 + (std::f64::consts::PI / 5.0).cos());
        assert_eq!(sol.status, SdpStatus::Optimal);
        assert!((sol.value - theta).abs() < 1e-7, "{} vs {theta}", sol.value);
        assert!(sol.pinf <= 1e-8 && sol.dinf <= 1e-8 && sol.gap <= 1e-8 * (1.0 + theta));
        assert!(min_eigenvalue(&sol.dual_matrix) >= -1e-9);
        let m = crate::moment::instantiate(&p.template, &sol.y).unwrap();
        assert!(dot(&m, &sol.dual_matrix).abs() < 1e-7);
    }

    #[test]
    fn pinned_outside_point_is_infeasible() {
        let t = pentagon_th1();
        let mut p = SdpProblem::new(t, vec![(1, 1.0)], Sense::Maximize);
        p.pin(1, 10.0);
        let res = phase1(&p, &SdpOptions::default()).unwrap();
        assert_eq!(res.status, SdpStatus::Infeasible);
        assert!(res.upper_bound < 0.0);
        assert!(matches!(phase1_interior(&p, &SdpOptions::default()), Err(ThetaError::Infeasible(_))));
        assert_eq!(solve(&p, &SdpOptions::default()).unwrap().status, SdpStatus::Infeasible);
    }

    #[test]
    fn deterministic_iterates() {
        let t = pentagon_th1();
        let p = SdpProblem::new(t, (1..=5).map(|i| (i, 1.0)).collect(), Sense::Maximize);
        let a = solve(&p, &SdpOptions::default()).unwrap();
        let b = solve(&p, &SdpOptions::default()).unwrap();
        assert_eq!(a.history, b.history);
        assert_eq!(a.y, b.y);
    }
}
