//! Problem files: JSON documents tagged by `kind`.

use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use theta_core::quotient::permutation_points;
use theta_core::rational::parse_rational;
use theta_core::{Graph, IdealSpec, MonomialOrder, Polynomial, Rational, ThetaBodyProblem};

use crate::CliError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphSpec {
    pub n: usize,
    /// Zero-based vertex pairs.
    pub edges: Vec<(usize, usize)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProblemFile {
    StableSet {
        #[serde(default)]
        name: Option<String>,
        graph: GraphSpec,
        k: usize,
        #[serde(default)]
        objective: Option<Vec<f64>>,
        #[serde(default)]
        certify: Option<CertifySpec>,
    },
    Maxcut {
        #[serde(default)]
        name: Option<String>,
        graph: GraphSpec,
        k: usize,
        #[serde(default)]
        objective: Option<Vec<f64>>,
    },
    Points {
        #[serde(default)]
        name: Option<String>,
        /// Integers or rational strings such as `"1/2"`.
        points: Vec<Vec<Value>>,
        k: usize,
        #[serde(default)]
        objective: Option<Vec<f64>>,
        #[serde(default)]
        certify: Option<CertifySpec>,
    },
    Curve {
        #[serde(default)]
        name: Option<String>,
        polynomial: String,
        #[serde(default = "two")]
        nvars: usize,
        #[serde(default)]
        order: MonomialOrder,
        k: usize,
        #[serde(default)]
        objective: Option<Vec<f64>>,
        #[serde(default)]
        trace: Option<TraceSpec>,
        #[serde(default)]
        certify: Option<CertifySpec>,
    },
    Permutation {
        #[serde(default)]
        name: Option<String>,
        n: usize,
        /// One-line notation over `1..=n`.
        generators: Vec<Vec<usize>>,
        k: usize,
        #[serde(default)]
        objective: Option<Vec<f64>>,
    },
}

fn two() -> usize {
    2
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum TraceMode {
    #[default]
    Ray,
    Contour,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    #[serde(default)]
    pub num_dirs: Option<usize>,
    #[serde(default)]
    pub mode: Option<TraceMode>,
}

/// Target inequality `lambda - c.x >= 0`, or a facet of the point set.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CertifySpec {
    #[serde(default)]
    pub c: Option<Vec<Value>>,
    #[serde(default)]
    pub lambda: Option<Value>,
    #[serde(default)]
    pub facet: Option<usize>,
}

pub fn parse_number(v: &Value) -> Result<Rational, CliError> {
    match v {
        Value::Number(n) if n.is_i64() => Ok(Rational::from_integer(n.as_i64().unwrap().into())),
        Value::String(s) => parse_rational(s).map_err(|e| CliError::Input(format!("bad rational {s:?}: {e}"))),
        other => Err(CliError::Input(format!("expected an integer or a rational string like \"1/2\", got {other}"))),
    }
}

pub fn parse_numbers(vs: &[Value]) -> Result<Vec<Rational>, CliError> {
    vs.iter().map(parse_number).collect()
}

impl ProblemFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self, CliError> {
        let p: ProblemFile = serde_json::from_str(text).map_err(|e| CliError::Input(format!("problem file: {e}")))?;
        p.validate()?;
        Ok(p)
    }

    fn validate(&self) -> Result<(), CliError> {
        if self.k() == 0 {
            return Err(CliError::Input("k must be at least 1".into()));
        }
        if let ProblemFile::StableSet { graph, .. } | ProblemFile::Maxcut { graph, .. } = self {
            if let Some(&(u, v)) = graph.edges.iter().find(|(u, v)| *u >= graph.n || *v >= graph.n) {
                return Err(CliError::Input(format!("edge ({u}, {v}) outside 0..{}", graph.n)));
            }
        }
        if let ProblemFile::Points { points, .. } = self {
            if points.is_empty() {
                return Err(CliError::Input("points must be nonempty".into()));
            }
            if points.iter().any(|p| p.len() != points[0].len()) {
                return Err(CliError::Input("points must share one dimension".into()));
            }
        }
        Ok(())
    }

    pub fn name(&self) -> String {
        let (name, kind) = match self {
            ProblemFile::StableSet { name, .. } => (name, "stable_set"),
            ProblemFile::Maxcut { name, .. } => (name, "maxcut"),
            ProblemFile::Points { name, .. } => (name, "points"),
            ProblemFile::Curve { name, .. } => (name, "curve"),
            ProblemFile::Permutation { name, .. } => (name, "permutation"),
        };
        name.clone().unwrap_or_else(|| kind.to_string())
    }

    pub fn k(&self) -> usize {
        match self {
            ProblemFile::StableSet { k, .. }
            | ProblemFile::Maxcut { k, .. }
            | ProblemFile::Points { k, .. }
            | ProblemFile::Curve { k, .. }
            | ProblemFile::Permutation { k, .. } => *k,
        }
    }

    pub fn objective(&self) -> Option<&Vec<f64>> {
        match self {
            ProblemFile::StableSet { objective, .. }
            | ProblemFile::Maxcut { objective, .. }
            | ProblemFile::Points { objective, .. }
            | ProblemFile::Curve { objective, .. }
            | ProblemFile::Permutation { objective, .. } => objective.as_ref(),
        }
    }

    pub fn trace(&self) -> TraceSpec {
        match self {
            ProblemFile::Curve { trace: Some(t), .. } => t.clone(),
            _ => TraceSpec::default(),
        }
    }

    pub fn certify(&self) -> CertifySpec {
        match self {
            ProblemFile::StableSet { certify: Some(c), .. } | ProblemFile::Points { certify: Some(c), .. } | ProblemFile::Curve { certify: Some(c), .. } => {
                c.clone()
            }
            _ => CertifySpec::default(),
        }
    }

    pub fn is_maxcut(&self) -> bool {
        matches!(self, ProblemFile::Maxcut { .. })
    }

    pub fn curve(&self) -> Result<Option<Polynomial>, CliError> {
        match self {
            ProblemFile::Curve { polynomial, nvars, .. } => Ok(Some(Polynomial::parse(polynomial, *nvars)?)),
            _ => Ok(None),
        }
    }

    fn graph(spec: &GraphSpec) -> Result<Graph, CliError> {
        Ok(Graph::new(spec.n, spec.edges.clone())?)
    }

    /// The finite point set, for kinds that have one.
    pub fn point_set(&self) -> Result<Vec<Vec<Rational>>, CliError> {
        match self {
            ProblemFile::StableSet { graph, .. } => Ok(Self::graph(graph)?.stable_set_points()),
            ProblemFile::Points { points, .. } => points.iter().map(|p| parse_numbers(p)).collect(),
            ProblemFile::Permutation { n, generators, .. } => Ok(permutation_points(*n, generators)?),
            ProblemFile::Maxcut { graph, .. } => Ok(Self::graph(graph)?.cut_points()?),
            ProblemFile::Curve { .. } => Err(CliError::Input("curve problems have no finite point set".into())),
        }
    }

    pub fn spec(&self) -> Result<IdealSpec, CliError> {
        Ok(match self {
            ProblemFile::StableSet { graph, .. } => IdealSpec::StableSet(Self::graph(graph)?),
            ProblemFile::Maxcut { graph, .. } => IdealSpec::CutIdeal(Self::graph(graph)?),
            ProblemFile::Points { .. } | ProblemFile::Permutation { .. } => IdealSpec::FinitePoints(self.point_set()?),
            ProblemFile::Curve { polynomial, nvars, order, .. } => {
                IdealSpec::Principal { h: Polynomial::parse(polynomial, *nvars)?, order: *order }
            }
        })
    }

    pub fn problem(&self, k: usize) -> Result<ThetaBodyProblem, CliError> {
        Ok(ThetaBodyProblem::from_spec(self.spec()?, k)?)
    }
}
