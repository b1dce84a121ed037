//! Combinatorial moment matrices as symmetric matrices of sparse linear forms.

use nalgebra::DMatrix;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ThetaError};
use crate::quotient::{QuotientOracle, SparseVec};
use crate::rational::{format_rational, to_f64, Rational};

/// `M_{B_k}(y)` before instantiation. Entry `(i, j)` is `sum_l lambda^l_ij y_l`.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentTemplate {
    k: usize,
    dim: usize,
    nvars_y: usize,
    /// Packed upper triangle: entry `(i, j)` with `i <= j` at `j (j + 1) / 2 + i`.
    entries: Vec<SparseVec>,
    coord_slots: Vec<SparseVec>,
    labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MomentVector {
    pub values: Vec<f64>,
}

impl MomentVector {
    pub fn new(values: Vec<f64>) -> Self {
        MomentVector { values }
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn packed(i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    j * (j + 1) / 2 + i
}

/// Builds `M_{B_k}(y)` from the oracle's structure constants.
pub fn build_moment_template(oracle: &QuotientOracle, k: usize) -> Result<MomentTemplate> {
    oracle.check_level(k)?;
    let basis = oracle.basis();
    let dim = basis.prefix_len(k);
    let mut entries = Vec::with_capacity(dim * (dim + 1) / 2);
    let mut max_index = basis.prefix_len(2 * k).max(1) - 1;
    for j in 0..dim {
        for i in 0..=j {
            let form = oracle.multiply(i, j)?;
            if let Some(&(l, _)) = form.last() {
                max_index = max_index.max(l);
            }
            entries.push(form);
        }
    }
    let coord_slots: Vec<SparseVec> = oracle.coordinates().to_vec();
    for c in &coord_slots {
        if let Some(&(l, _)) = c.last() {
            max_index = max_index.max(l);
        }
    }
    let nvars_y = max_index + 1;
    let labels = (0..nvars_y).map(|l| basis.label(l)).collect();
    Ok(MomentTemplate { k, dim, nvars_y, entries, coord_slots, labels })
}

impl MomentTemplate {
    /// Template from explicit upper-triangular forms; used for hand-built LMIs.
    pub fn from_entries(dim: usize, nvars_y: usize, forms: Vec<((usize, usize), SparseVec)>) -> Result<Self> {
        let mut entries = vec![Vec::new(); dim * (dim + 1) / 2];
        for ((i, j), form) in forms {
            if i >= dim || j >= dim {
                return Err(ThetaError::DimensionMismatch { expected: dim, got: i.max(j) + 1 });
            }
            if let Some(&(l, _)) = form.iter().find(|(l, _)| *l >= nvars_y) {
                return Err(ThetaError::DimensionMismatch { expected: nvars_y, got: l + 1 });
            }
            entries[packed(i, j)] = form;
        }
        Ok(MomentTemplate {
            k: 0,
            dim,
            nvars_y,
            entries,
            coord_slots: Vec::new(),
            labels: (0..nvars_y).map(|l| format!("y{l}")).collect(),
        })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Side length `|B_k|`.
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Number of moment variables `|B_2k|`.
    pub fn nvars_y(&self) -> usize {
        self.nvars_y
    }

    pub fn entry(&self, i: usize, j: usize) -> &SparseVec {
        &self.entries[packed(i, j)]
    }

    /// Linear forms giving each `x_i` in terms of `y`.
    pub fn coord_slots(&self) -> &[SparseVec] {
        &self.coord_slots
    }

    pub fn nvars_x(&self) -> usize {
        self.coord_slots.len()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    /// Iterates `(i, j, form)` over the upper triangle.
    pub fn upper_entries(&self) -> impl Iterator<Item = (usize, usize, &SparseVec)> {
        (0..self.dim).flat_map(move |j| (0..=j).map(move |i| (i, j, &self.entries[packed(i, j)])))
    }

    /// For each `y_l`, the upper-triangular positions and coefficients where it occurs.
    pub fn occurrences(&self) -> Vec<Vec<(usize, usize, f64)>> {
        let mut occ = vec![Vec::new(); self.nvars_y];
        for (i, j, form) in self.upper_entries() {
            for (l, c) in form {
                occ[*l].push((i, j, to_f64(c)));
            }
        }
        occ
    }

    fn check_len(&self, got: usize) -> Result<()> {
        if got != self.nvars_y {
            return Err(ThetaError::DimensionMismatch { expected: self.nvars_y, got });
        }
        Ok(())
    }

    /// Projects a moment vector onto the coordinates `x_1..x_n`.
    pub fn project(&self, y: &MomentVector) -> Result<Vec<f64>> {
        self.check_len(y.len())?;
        Ok(self.coord_slots.iter().map(|form| form.iter().map(|(l, c)| to_f64(c) * y.values[*l]).sum()).collect())
    }

    /// Renders entry `(i, j)` as text, e.g. `2y2 - y1`.
    pub fn render_entry(&self, i: usize, j: usize) -> String {
        render_form(self.entry(i, j))
    }

    pub fn render(&self) -> Vec<Vec<String>> {
        (0..self.dim).map(|i| (0..self.dim).map(|j| self.render_entry(i, j)).collect()).collect()
    }

    pub fn to_json(&self) -> TemplateDump {
        TemplateDump {
            k: self.k,
            basis: self.labels[..self.dim.min(self.labels.len())].to_vec(),
            y_labels: self.labels.clone(),
            entries: self
                .upper_entries()
                .map(|(i, j, form)| EntryDump {
                    i,
                    j,
                    terms: form.iter().map(|(l, c)| (*l, format_rational(c))).collect(),
                })
                .collect(),
        }
    }
}

/// Terms in increasing `y` index; `0` for the empty form.
pub fn render_form(form: &SparseVec) -> String {
    if form.is_empty() {
        return "0".into();
    }
    let mut out = String::new();
    for (n, (l, c)) in form.iter().enumerate() {
        let mag = c.abs();
        match (n, c.is_negative()) {
            (0, true) => out.push('-'),
            (0, false) => {}
            (_, true) => out.push_str(" - "),
            (_, false) => out.push_str(" + "),
        }
        if !mag.is_one() {
            out.push_str(&format_rational(&mag));
        }
        out.push_str(&format!("y{l}"));
    }
    out
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TemplateDump {
    pub k: usize,
    pub basis: Vec<String>,
    pub y_labels: Vec<String>,
    pub entries: Vec<EntryDump>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EntryDump {
    pub i: usize,
    pub j: usize,
    pub terms: Vec<(usize, String)>,
}

/// `y^s = (f_l(s))_{l in B_2k}` for a point `s` with rational coordinates.
pub fn point_to_moment_vector(template: &MomentTemplate, oracle: &QuotientOracle, s: &[Rational]) -> Result<MomentVector> {
    Ok(MomentVector::new(point_to_moment_vector_exact(template, oracle, s)?.iter().map(to_f64).collect()))
}

pub fn point_to_moment_vector_exact(
    template: &MomentTemplate,
    oracle: &QuotientOracle,
    s: &[Rational],
) -> Result<Vec<Rational>> {
    if s.len() != oracle.nvars() {
        return Err(ThetaError::DimensionMismatch { expected: oracle.nvars(), got: s.len() });
    }
    let basis = &oracle.basis().elements;
    Ok(basis[..template.nvars_y].iter().map(|m| m.eval_rational(s)).collect())
}

/// Floating-point variant for points that are not rational (curve samples).
pub fn point_to_moment_vector_f64(template: &MomentTemplate, oracle: &QuotientOracle, s: &[f64]) -> Result<MomentVector> {
    if s.len() != oracle.nvars() {
        return Err(ThetaError::DimensionMismatch { expected: oracle.nvars(), got: s.len() });
    }
    let basis = &oracle.basis().elements;
    Ok(MomentVector::new(basis[..template.nvars_y].iter().map(|m| m.eval_f64(s)).collect()))
}

/// Average of `y^s` over the given points.
pub fn barycenter(template: &MomentTemplate, oracle: &QuotientOracle, points: &[Vec<Rational>]) -> Result<MomentVector> {
    if points.is_empty() {
        return Err(ThetaError::Invalid("barycenter of an empty sample".into()));
    }
    let mut acc = vec![0.0; template.nvars_y];
    for p in points {
        for (a, v) in acc.iter_mut().zip(point_to_moment_vector(template, oracle, p)?.values) {
            *a += v;
        }
    }
    let n = points.len() as f64;
    Ok(MomentVector::new(acc.into_iter().map(|a| a / n).collect()))
}

pub fn instantiate(template: &MomentTemplate, y: &MomentVector) -> Result<DMatrix<f64>> {
    template.check_len(y.len())?;
    let mut m = DMatrix::zeros(template.dim, template.dim);
    for (i, j, form) in template.upper_entries() {
        let v: f64 = form.iter().map(|(l, c)| to_f64(c) * y.values[*l]).sum();
        m[(i, j)] = v;
        m[(j, i)] = v;
    }
    Ok(m)
}

pub fn instantiate_exact(template: &MomentTemplate, y: &[Rational]) -> Result<Vec<Vec<Rational>>> {
    template.check_len(y.len())?;
    let mut m = vec![vec![Rational::zero(); template.dim]; template.dim];
    for (i, j, form) in template.upper_entries() {
        let v: Rational = form.iter().map(|(l, c)| c * &y[*l]).sum();
        m[i][j] = v.clone();
        m[j][i] = v;
    }
    Ok(m)
}
