//! Python bindings: the `thetabody` extension module.

use pyo3::exceptions::{PyArithmeticError, PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::PyDict;
use theta_core::rational::parse_rational;
use theta_core::thetaops::{try_certificate, BoundaryPoint};
use theta_core::{
    level_report as core_level_report, maximize_linear, membership, ray_shoot, trace_boundary_2d, Certificate as CoreCertificate,
    CertificateMode, Graph, MonomialOrder, Polynomial, Rational, RayOutcome, SdpOptions, ThetaBodyProblem, ThetaError,
};

fn err(e: ThetaError) -> PyErr {
    match e {
        ThetaError::Numerical(_) => PyRuntimeError::new_err(e.to_string()),
        ThetaError::Unbounded | ThetaError::Infeasible(_) => PyArithmeticError::new_err(e.to_string()),
        _ => PyValueError::new_err(e.to_string()),
    }
}

/// Integers or strings such as `"3/4"`.
fn rational(v: &Bound<'_, PyAny>) -> PyResult<Rational> {
    if let Ok(i) = v.extract::<i64>() {
        return Ok(Rational::from_integer(i.into()));
    }
    if let Ok(s) = v.extract::<String>() {
        return parse_rational(&s).map_err(err);
    }
    Err(PyValueError::new_err("expected an int or a rational string like \"1/2\""))
}

fn rationals(vs: &[Bound<'_, PyAny>]) -> PyResult<Vec<Rational>> {
    vs.iter().map(rational).collect()
}

fn order(name: &str) -> PyResult<MonomialOrder> {
    match name {
        "grevlex" => Ok(MonomialOrder::Grevlex),
        "grlex" => Ok(MonomialOrder::Grlex),
        other => Err(PyValueError::new_err(format!("unknown monomial order {other:?}"))),
    }
}

/// The level-`k` theta body of a real variety.
#[pyclass(module = "thetabody")]
struct ThetaBody {
    problem: ThetaBodyProblem,
    opts: SdpOptions,
}

#[pymethods]
impl ThetaBody {
    /// Stable set polytope relaxation of a graph on vertices `0..n`.
    #[staticmethod]
    fn stable_set(n: usize, edges: Vec<(usize, usize)>, k: usize) -> PyResult<Self> {
        let g = Graph::new(n, edges).map_err(err)?;
        Self::wrap(ThetaBodyProblem::stable_set(&g, k))
    }

    /// Cut polytope relaxation, one coordinate per edge.
    #[staticmethod]
    fn maxcut(n: usize, edges: Vec<(usize, usize)>, k: usize) -> PyResult<Self> {
        let g = Graph::new(n, edges).map_err(err)?;
        Self::wrap(ThetaBodyProblem::maxcut(&g, k))
    }

    /// Finite point set; coordinates are ints or rational strings.
    #[staticmethod]
    fn points(points: Vec<Vec<Bound<'_, PyAny>>>, k: usize) -> PyResult<Self> {
        let pts = points.iter().map(|p| rationals(p)).collect::<PyResult<Vec<_>>>()?;
        Self::wrap(ThetaBodyProblem::points(pts, k))
    }

    /// Variety of one polynomial, e.g. `"x1^4 + x2^4 - 1"`.
    #[staticmethod]
    #[pyo3(signature = (polynomial, k, nvars = 2, order = "grevlex"))]
    fn curve(polynomial: &str, k: usize, nvars: usize, order: &str) -> PyResult<Self> {
        let h = Polynomial::parse(polynomial, nvars).map_err(err)?;
        Self::wrap(ThetaBodyProblem::principal(h, self::order(order)?, k))
    }

    #[getter]
    fn k(&self) -> usize {
        self.problem.k()
    }

    #[getter]
    fn nvars(&self) -> usize {
        self.problem.nvars()
    }

    /// Labels of the basis used at this level.
    #[getter]
    fn basis(&self) -> Vec<String> {
        let b = self.problem.oracle().basis();
        (0..b.prefix_len(self.problem.k())).map(|i| b.label(i)).collect()
    }

    /// `(value, optimizer)` of `max c.x`; `(inf, None)` when unbounded.
    fn maximize(&self, c: Vec<f64>) -> PyResult<(f64, Option<Vec<f64>>)> {
        match maximize_linear(&self.problem, &c, &self.opts) {
            Ok(m) => Ok((m.value, Some(m.optimizer))),
            Err(ThetaError::Unbounded) => Ok((f64::INFINITY, None)),
            Err(e) => Err(err(e)),
        }
    }

    /// Largest `t` with `t * direction` in the body, measured from the origin.
    fn ray_shoot(&self, direction: Vec<f64>) -> PyResult<f64> {
        Ok(match ray_shoot(&self.problem, &direction, &self.opts).map_err(err)? {
            RayOutcome::Finite(t) => t,
            RayOutcome::Unbounded => f64::INFINITY,
        })
    }

    fn contains(&self, x: Vec<f64>) -> PyResult<bool> {
        Ok(membership(&self.problem, &x, &self.opts).map_err(err)?.is_inside())
    }

    /// `(theta, t, point)` for evenly spaced directions in the plane.
    fn trace(&self, num_dirs: usize) -> PyResult<Vec<(f64, Option<f64>, Option<(f64, f64)>)>> {
        let pts = trace_boundary_2d(&self.problem, num_dirs, &self.opts).map_err(err)?;
        Ok(pts.into_iter().map(|BoundaryPoint { theta, t, point, .. }| (theta, t, point.map(|p| (p[0], p[1])))).collect())
    }

    /// Gram certificate for `lam - c.x >= 0` on the body.
    fn certify(&self, c: Vec<Bound<'_, PyAny>>, lam: Bound<'_, PyAny>) -> PyResult<Certificate> {
        let cert = try_certificate(&self.problem, &rationals(&c)?, &rational(&lam)?, &self.opts).map_err(err)?;
        Ok(Certificate::from(cert))
    }

    fn __repr__(&self) -> String {
        format!("ThetaBody(kind={}, nvars={}, k={})", self.problem.oracle().spec().kind(), self.problem.nvars(), self.problem.k())
    }
}

impl ThetaBody {
    fn wrap(p: theta_core::Result<ThetaBodyProblem>) -> PyResult<Self> {
        Ok(ThetaBody { problem: p.map_err(err)?, opts: SdpOptions::default() })
    }
}

#[pyclass(module = "thetabody", get_all)]
struct Certificate {
    basis: Vec<String>,
    /// Entries as rational strings.
    gram: Vec<Vec<String>>,
    residual: String,
    exact: bool,
    verified: bool,
    max_residual: f64,
    min_eigenvalue: f64,
}

impl From<CoreCertificate> for Certificate {
    fn from(c: CoreCertificate) -> Self {
        Certificate {
            basis: c.basis,
            gram: c.gram.iter().map(|row| row.iter().map(|r| r.to_string()).collect()).collect(),
            residual: c.residual.to_string(),
            exact: c.mode == CertificateMode::Exact,
            verified: c.verified,
            max_residual: c.max_residual,
            min_eigenvalue: c.min_eigenvalue,
        }
    }
}

#[pymethods]
impl Certificate {
    fn __repr__(&self) -> String {
        format!("Certificate(size={}, exact={}, verified={})", self.basis.len(), self.exact, self.verified)
    }
}

/// Facet levels of a finite point set, as a dict.
#[pyfunction]
fn level_report<'py>(py: Python<'py>, points: Vec<Vec<Bound<'py, PyAny>>>) -> PyResult<Bound<'py, PyDict>> {
    let pts = points.iter().map(|p| rationals(p)).collect::<PyResult<Vec<_>>>()?;
    let r = core_level_report(&pts).map_err(err)?;
    let facets = r
        .facets
        .iter()
        .map(|f| {
            let d = PyDict::new(py);
            d.set_item("inequality", &f.inequality)?;
            d.set_item("normal", &f.normal)?;
            d.set_item("offset", &f.offset)?;
            d.set_item("level", f.level)?;
            Ok(d)
        })
        .collect::<PyResult<Vec<_>>>()?;
    let d = PyDict::new(py);
    d.set_item("dimension", r.dimension)?;
    d.set_item("num_points", r.num_points)?;
    d.set_item("facets", facets)?;
    d.set_item("level", r.level)?;
    d.set_item("is_2_level", r.is_2_level)?;
    d.set_item("th_k_bound", r.th_k_bound)?;
    Ok(d)
}

#[pymodule]
fn thetabody(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<ThetaBody>()?;
    m.add_class::<Certificate>()?;
    m.add_function(wrap_pyfunction!(level_report, m)?)?;
    Ok(())
}
