//! `theta` command-line front end: problem files in, reports, CSV traces and
//! SVG plots out.

pub mod fmt;
pub mod problem;
pub mod svg;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use theta_core::rational::{format_rational, limit_denominator, to_f64};
use theta_core::thetaops::{plane_directions, sample_plane_curve, try_certificate};
use theta_core::{
    enumerate_facets, level_report, maximize_linear, support_contour, trace_boundary_2d, CertificateMode, LevelReport, MonomialOrder,
    Rational, SdpOptions, ThetaError,
};
use thiserror::Error;

use crate::fmt::{round9, round_all, sig};
use crate::problem::{parse_number, parse_numbers, ProblemFile, TraceMode};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
    #[error("{0}")]
    Verification(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Input(_) => 2,
            CliError::Numerical(_) => 3,
            CliError::Verification(_) => 4,
        }
    }
}

impl From<ThetaError> for CliError {
    fn from(e: ThetaError) -> Self {
        match e {
            ThetaError::Numerical(_) => CliError::Numerical(e.to_string()),
            ThetaError::Verification(_) => CliError::Verification(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "theta", version, about = "Theta-body relaxations: optimize, trace, test exactness, certify")]
pub struct Cli {
    /// Solver tolerances (TOML: gap_tol, feas_tol, max_iter, unbounded_cap).
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Relative duality gap at which the solver stops; overrides the config file.
    #[arg(long, global = true)]
    pub gap_tol: Option<f64>,
    /// Primal and dual feasibility tolerance; overrides the config file.
    #[arg(long, global = true)]
    pub feas_tol: Option<f64>,
    /// Interior-point iteration limit; overrides the config file.
    #[arg(long, global = true)]
    pub max_iter: Option<usize>,
    /// Objective magnitude treated as unbounded; overrides the config file.
    #[arg(long, global = true)]
    pub unbounded_cap: Option<f64>,
    /// Worker threads for direction sweeps (default: logical cores).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Report format on stdout.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Table,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Maximize a linear objective over TH_k.
    Solve(SolveArgs),
    /// Ray-shoot or support-line sweep of a planar theta body.
    Trace(TraceArgs),
    /// Facet levels of a finite point set.
    Exactness(FileArg),
    /// Gram certificate for `lambda - c.x >= 0`.
    Certify(CertifyArgs),
}

#[derive(Debug, Args)]
pub struct FileArg {
    /// Problem file (JSON).
    pub file: PathBuf,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    /// Problem file (JSON).
    pub file: PathBuf,
    /// Override the level in the file.
    #[arg(long)]
    pub k: Option<usize>,
    /// Comma-separated objective coefficients.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub objective: Option<Vec<f64>>,
}

#[derive(Debug, Args)]
pub struct TraceArgs {
    /// Problem file (JSON) with two variables.
    pub file: PathBuf,
    /// Override the level in the file.
    #[arg(long)]
    pub k: Option<usize>,
    /// Number of equally spaced directions.
    #[arg(long)]
    pub dirs: Option<usize>,
    /// Ray shooting from the origin, or support lines in each direction.
    #[arg(long, value_enum)]
    pub mode: Option<TraceMode>,
    /// Write one row per direction to this CSV file.
    #[arg(long)]
    pub csv: Option<PathBuf>,
    /// Write a plot of the sweep to this SVG file.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CertifyArgs {
    /// Problem file (JSON).
    pub file: PathBuf,
    /// Override the level in the file.
    #[arg(long)]
    pub k: Option<usize>,
    /// Comma-separated coefficients of `c` (integers or rationals like 1/2).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub c: Option<Vec<String>>,
    /// Right-hand side (default: the rationalized optimal value).
    #[arg(long, allow_hyphen_values = true)]
    pub lambda: Option<String>,
    /// Certify the facet with this index (see `theta exactness`).
    #[arg(long)]
    pub facet: Option<usize>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct Config {
    gap_tol: Option<f64>,
    feas_tol: Option<f64>,
    max_iter: Option<usize>,
    unbounded_cap: Option<f64>,
}

/// Defaults, then the config file, then command-line flags.
pub fn load_options(cli: &Cli) -> Result<SdpOptions, CliError> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
            toml::from_str(&text).map_err(|e| CliError::Input(format!("config: {e}")))?
        }
        None => Config::default(),
    };
    cfg.gap_tol = cli.gap_tol.or(cfg.gap_tol);
    cfg.feas_tol = cli.feas_tol.or(cfg.feas_tol);
    cfg.max_iter = cli.max_iter.or(cfg.max_iter);
    cfg.unbounded_cap = cli.unbounded_cap.or(cfg.unbounded_cap);
    let mut opts = SdpOptions::default();
    if let Some(v) = cfg.gap_tol {
        opts.gap_tol = v;
    }
    if let Some(v) = cfg.feas_tol {
        opts.feas_tol = v;
    }
    if let Some(v) = cfg.max_iter {
        opts.max_iter = v;
    }
    if let Some(v) = cfg.unbounded_cap {
        opts.unbounded_cap = v;
    }
    let positive = |v: f64| v.is_finite() && v > 0.0;
    if !positive(opts.gap_tol) || !positive(opts.feas_tol) || !positive(opts.unbounded_cap) || opts.max_iter == 0 {
        return Err(CliError::Input("solver tolerances and max_iter must be positive".into()));
    }
    Ok(opts)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolveReport {
    pub problem: String,
    pub k: usize,
    pub objective: Vec<f64>,
    pub status: String,
    pub value: Option<f64>,
    pub optimizer: Option<Vec<f64>>,
    pub bound: Option<f64>,
    pub gap: Option<f64>,
    pub iterations: Option<usize>,
    pub primal_residual: Option<f64>,
    pub dual_residual: Option<f64>,
    /// Max-cut problems: `sum_e (1 - x_e) / 2` at the optimizer.
    pub cut_bound: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceReport {
    pub problem: String,
    pub k: usize,
    pub mode: TraceMode,
    pub num_dirs: usize,
    pub finite: usize,
    pub unbounded: usize,
    pub csv: Option<String>,
    pub svg: Option<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifyReport {
    pub problem: String,
    pub k: usize,
    pub inequality: String,
    pub basis: Vec<String>,
    pub gram: Vec<Vec<String>>,
    pub residual: String,
    pub mode: CertificateMode,
    pub verified: bool,
    pub max_residual: f64,
    pub min_eigenvalue: f64,
}

pub fn run(cli: &Cli) -> Result<String, CliError> {
    let opts = load_options(cli)?;
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(j) = cli.jobs {
        if j == 0 {
            return Err(CliError::Input("--jobs must be at least 1".into()));
        }
        pool = pool.num_threads(j);
    }
    let pool = pool.build().map_err(|e| CliError::Input(format!("thread pool: {e}")))?;
    pool.install(|| match &cli.command {
        Command::Solve(a) => solve(a, &opts).map(|r| render(cli.format, &r, solve_table)),
        Command::Trace(a) => trace(a, &opts).map(|r| render(cli.format, &r, trace_table)),
        Command::Exactness(a) => exactness(&a.file).map(|r| render(cli.format, &r, exactness_table)),
        Command::Certify(a) => {
            let r = certify(a, &opts)?;
            let out = render(cli.format, &r, certify_table);
            if r.verified {
                Ok(out)
            } else {
                Err(CliError::Verification(format!("{out}certificate verification failed (max residual {})", sig(r.max_residual))))
            }
        }
    })
}

fn render<T: Serialize>(format: Format, report: &T, table: fn(&T) -> String) -> String {
    match format {
        Format::Json => serde_json::to_string_pretty(report).expect("reports serialize") + "\n",
        Format::Table => table(report),
    }
}

fn opt_sig(x: Option<f64>) -> String {
    x.map_or("-".into(), sig)
}

fn solve_table(r: &SolveReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "problem     {}", r.problem);
    let _ = writeln!(s, "level       {}", r.k);
    let _ = writeln!(s, "status      {}", r.status);
    let _ = writeln!(s, "value       {}", opt_sig(r.value));
    if let Some(x) = &r.optimizer {
        let _ = writeln!(s, "optimizer   [{}]", x.iter().map(|v| sig(*v)).collect::<Vec<_>>().join(", "));
    }
    let _ = writeln!(s, "bound       {}", opt_sig(r.bound));
    let _ = writeln!(s, "gap         {}", opt_sig(r.gap));
    let _ = writeln!(s, "iterations  {}", r.iterations.map_or("-".into(), |v| v.to_string()));
    let _ = writeln!(s, "residuals   primal {} dual {}", opt_sig(r.primal_residual), opt_sig(r.dual_residual));
    if let Some(c) = r.cut_bound {
        let _ = writeln!(s, "cut bound   {}", sig(c));
    }
    s
}

fn trace_table(r: &TraceReport) -> String {
    let mut s = format!(
        "problem {} level {} mode {:?}: {} directions, {} finite, {} unbounded\n",
        r.problem, r.k, r.mode, r.num_dirs, r.finite, r.unbounded
    );
    for (what, path) in [("csv", &r.csv), ("svg", &r.svg)] {
        if let Some(p) = path {
            let _ = writeln!(s, "wrote {what} {p}");
        }
    }
    s
}

fn exactness_table(r: &LevelReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "points {} in an affine hull of dimension {}", r.num_points, r.dimension);
    for (i, f) in r.facets.iter().enumerate() {
        let _ = writeln!(s, "{i:>4}  level {}  {}", f.level, f.inequality);
    }
    let _ = writeln!(s, "level {}  2-level {}  exact at k = {}", r.level, r.is_2_level, r.th_k_bound);
    s
}

fn certify_table(r: &CertifyReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "problem     {} (k = {})", r.problem, r.k);
    let _ = writeln!(s, "inequality  {} >= 0", r.inequality);
    let _ = writeln!(s, "basis       [{}]", r.basis.join(", "));
    let _ = writeln!(s, "gram");
    for row in &r.gram {
        let _ = writeln!(s, "  [{}]", row.join(", "));
    }
    let _ = writeln!(s, "residual    {}", r.residual);
    let _ = writeln!(s, "mode        {:?}", r.mode);
    let _ = writeln!(s, "verified    {}", r.verified);
    s
}

pub fn solve(a: &SolveArgs, opts: &SdpOptions) -> Result<SolveReport, CliError> {
    let file = ProblemFile::load(&a.file)?;
    let k = a.k.unwrap_or(file.k());
    let p = file.problem(k)?;
    let n = p.nvars();
    let objective = match a.objective.as_ref().or(file.objective()) {
        Some(c) => c.clone(),
        None if file.is_maxcut() => vec![-1.0; n],
        None => vec![1.0; n],
    };
    if objective.len() != n {
        return Err(CliError::Input(format!("objective has {} entries, problem has {n} variables", objective.len())));
    }
    let mut report = SolveReport {
        problem: file.name(),
        k,
        objective: objective.clone(),
        status: String::new(),
        value: None,
        optimizer: None,
        bound: None,
        gap: None,
        iterations: None,
        primal_residual: None,
        dual_residual: None,
        cut_bound: None,
    };
    match maximize_linear(&p, &objective, opts) {
        Ok(m) => {
            report.status = "optimal".into();
            report.value = Some(round9(m.value));
            report.bound = Some(round9(m.solution.bound));
            report.gap = Some(round9(m.solution.gap));
            report.iterations = Some(m.solution.iterations);
            report.primal_residual = Some(round9(m.solution.pinf));
            report.dual_residual = Some(round9(m.solution.dinf));
            if file.is_maxcut() {
                report.cut_bound = Some(round9(m.optimizer.iter().map(|x| (1.0 - x) / 2.0).sum()));
            }
            report.optimizer = Some(round_all(&m.optimizer));
        }
        Err(ThetaError::Unbounded) => report.status = "unbounded".into(),
        Err(ThetaError::Infeasible(_)) => report.status = "infeasible".into(),
        Err(e) => return Err(e.into()),
    }
    Ok(report)
}

pub fn trace(a: &TraceArgs, opts: &SdpOptions) -> Result<TraceReport, CliError> {
    let file = ProblemFile::load(&a.file)?;
    let k = a.k.unwrap_or(file.k());
    let p = file.problem(k)?;
    if p.nvars() != 2 {
        return Err(CliError::Input(format!("trace needs a problem in 2 variables, got {}", p.nvars())));
    }
    let spec = file.trace();
    let mode = a.mode.or(spec.mode).unwrap_or_default();
    let num_dirs = a.dirs.or(spec.num_dirs).unwrap_or(match mode {
        TraceMode::Ray => 720,
        TraceMode::Contour => 32,
    });
    if num_dirs == 0 {
        return Err(CliError::Input("number of directions must be positive".into()));
    }
    let mut plot = svg::Plot { title: format!("{} TH_{k}", file.name()), ..Default::default() };
    let mut csv = String::new();
    let (finite, unbounded) = match mode {
        TraceMode::Ray => {
            let pts = trace_boundary_2d(&p, num_dirs, opts)?;
            csv.push_str("theta,t,x,y\n");
            for b in &pts {
                match (b.t, b.point) {
                    (Some(t), Some(q)) => {
                        let _ = writeln!(csv, "{},{},{},{}", sig(b.theta), sig(t), sig(q[0]), sig(q[1]));
                        plot.trace.push(q);
                    }
                    _ => {
                        let _ = writeln!(csv, "{},inf,,", sig(b.theta));
                    }
                }
            }
            let f = plot.trace.len();
            (f, pts.len() - f)
        }
        TraceMode::Contour => {
            let lines = support_contour(&p, &plane_directions(num_dirs), opts)?;
            csv.push_str("theta,c1,c2,lambda\n");
            let mut f = 0;
            for (j, l) in lines.iter().enumerate() {
                let theta = 2.0 * std::f64::consts::PI * j as f64 / num_dirs as f64;
                match l.lambda {
                    Some(lam) => {
                        let _ = writeln!(csv, "{},{},{},{}", sig(theta), sig(l.c[0]), sig(l.c[1]), sig(lam));
                        plot.lines.push(([l.c[0], l.c[1]], lam));
                        f += 1;
                    }
                    None => {
                        let _ = writeln!(csv, "{},{},{},inf", sig(theta), sig(l.c[0]), sig(l.c[1]));
                    }
                }
            }
            (f, lines.len() - f)
        }
    };
    if let Some(h) = file.curve()? {
        let center = if plot.trace.is_empty() {
            [0.0, 0.0]
        } else {
            let n = plot.trace.len() as f64;
            [plot.trace.iter().map(|q| q[0]).sum::<f64>() / n, plot.trace.iter().map(|q| q[1]).sum::<f64>() / n]
        };
        plot.curve = svg::angular_order(sample_plane_curve(&h, center, 360)?);
    }
    let write = |path: &Option<PathBuf>, text: &str| -> Result<Option<String>, CliError> {
        let Some(path) = path else { return Ok(None) };
        std::fs::write(path, text).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Ok(Some(path.display().to_string()))
    };
    Ok(TraceReport {
        problem: file.name(),
        k,
        mode,
        num_dirs,
        finite,
        unbounded,
        csv: write(&a.csv, &csv)?,
        svg: write(&a.svg, &plot.render())?,
    })
}

pub fn exactness(path: &Path) -> Result<LevelReport, CliError> {
    let file = ProblemFile::load(path)?;
    if matches!(file, ProblemFile::Curve { .. } | ProblemFile::Maxcut { .. }) {
        return Err(CliError::Input("exactness applies to points, stable_set and permutation problems".into()));
    }
    Ok(level_report(&file.point_set()?)?)
}

pub fn certify(a: &CertifyArgs, opts: &SdpOptions) -> Result<CertifyReport, CliError> {
    let file = ProblemFile::load(&a.file)?;
    let k = a.k.unwrap_or(file.k());
    let p = file.problem(k)?;
    let spec = file.certify();
    let facet = a.facet.or(if a.c.is_some() { None } else { spec.facet });
    let (c, lambda): (Vec<Rational>, Option<Rational>) = if let Some(idx) = facet {
        let facets = enumerate_facets(&file.point_set()?)?;
        let f = facets.get(idx).ok_or_else(|| CliError::Input(format!("facet {idx} out of range ({} facets)", facets.len())))?;
        (f.normal.clone(), Some(f.offset.clone()))
    } else {
        let c = match (&a.c, &spec.c) {
            (Some(c), _) => c
                .iter()
                .map(|s| theta_core::rational::parse_rational(s).map_err(|e| CliError::Input(format!("bad coefficient {s:?}: {e}"))))
                .collect::<Result<Vec<_>, _>>()?,
            (None, Some(c)) => parse_numbers(c)?,
            (None, None) => return Err(CliError::Input("certify needs --c (with optional --lambda) or --facet".into())),
        };
        let lambda = match (&a.lambda, &spec.lambda) {
            (Some(s), _) => Some(theta_core::rational::parse_rational(s).map_err(|e| CliError::Input(format!("bad lambda {s:?}: {e}")))?),
            (None, Some(v)) => Some(parse_number(v)?),
            (None, None) => None,
        };
        (c, lambda)
    };
    if c.len() != p.nvars() {
        return Err(CliError::Input(format!("c has {} entries, problem has {} variables", c.len(), p.nvars())));
    }
    let lambda = match lambda {
        Some(l) => l,
        // the optimal bound, snapped to a nearby rational
        None => {
            let cf: Vec<f64> = c.iter().map(to_f64).collect();
            limit_denominator(maximize_linear(&p, &cf, opts)?.solution.bound, 1_000_000_000)
        }
    };
    let cert = try_certificate(&p, &c, &lambda, opts)?;
    Ok(CertifyReport {
        problem: file.name(),
        k,
        inequality: cert.linear_poly.display_with(MonomialOrder::Grevlex),
        basis: cert.basis.clone(),
        gram: cert.gram.iter().map(|r| r.iter().map(format_rational).collect()).collect(),
        residual: cert.residual.display_with(MonomialOrder::Grevlex),
        mode: cert.mode,
        verified: cert.verified,
        max_residual: round9(cert.max_residual),
        min_eigenvalue: round9(cert.min_eigenvalue),
    })
}
