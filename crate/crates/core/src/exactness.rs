//! Facets and level counts of small finite point sets.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Result, ThetaError};
use crate::rational::{format_rational, nullspace, rref, Rational};

pub const MAX_FACET_DIM: usize = 6;
pub const MAX_FACET_POINTS: usize = 64;

/// `offset - normal.x >= 0` on the point set.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Facet {
    pub normal: Vec<Rational>,
    pub offset: Rational,
}

impl Facet {
    pub fn eval(&self, x: &[Rational]) -> Rational {
        let dot: Rational = self.normal.iter().zip(x).map(|(a, b)| a * b).sum();
        &self.offset - dot
    }

    /// Human-readable form such as `2 - x1 - x2 - x3 - x4 - x5 >= 0`.
    pub fn display(&self) -> String {
        let mut out = if self.offset.is_zero() { String::new() } else { format_rational(&self.offset) };
        for (i, a) in self.normal.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            let neg = -a;
            let mag = neg.abs();
            let sign = match (out.is_empty(), neg.is_negative()) {
                (true, true) => "-",
                (true, false) => "",
                (false, true) => " - ",
                (false, false) => " + ",
            };
            if mag.is_one() {
                out.push_str(&format!("{sign}x{}", i + 1));
            } else {
                out.push_str(&format!("{sign}{}*x{}", format_rational(&mag), i + 1));
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out + " >= 0"
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FacetLevel {
    pub normal: Vec<String>,
    pub offset: String,
    pub inequality: String,
    pub level: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LevelReport {
    pub dimension: usize,
    pub num_points: usize,
    pub facets: Vec<FacetLevel>,
    pub level: usize,
    pub is_2_level: bool,
    pub th_k_bound: usize,
}

/// Affine chart: `base` plus coordinates on the `pivots` columns.
struct Chart {
    pivots: Vec<usize>,
    points: Vec<Vec<Rational>>,
}

fn dedup(points: &[Vec<Rational>]) -> Result<Vec<Vec<Rational>>> {
    let n = points.first().map_or(0, Vec::len);
    if points.iter().any(|p| p.len() != n) {
        return Err(ThetaError::Invalid("points have different lengths".into()));
    }
    let mut seen = BTreeSet::new();
    Ok(points.iter().filter(|p| seen.insert((*p).clone())).cloned().collect())
}

fn chart(points: &[Vec<Rational>]) -> Result<Chart> {
    if points.len() > MAX_FACET_POINTS {
        return Err(ThetaError::CapExceeded(format!("{} points (limit {MAX_FACET_POINTS})", points.len())));
    }
    let Some(base) = points.first() else {
        return Err(ThetaError::Invalid("empty point set".into()));
    };
    let mut diffs: Vec<Vec<Rational>> =
        points.iter().map(|p| p.iter().zip(base).map(|(a, b)| a - b).collect()).collect();
    let pivots = rref(&mut diffs);
    if pivots.is_empty() {
        return Err(ThetaError::Invalid("point set has affine dimension 0".into()));
    }
    if pivots.len() > MAX_FACET_DIM {
        return Err(ThetaError::CapExceeded(format!("affine dimension {} (limit {MAX_FACET_DIM})", pivots.len())));
    }
    // the hull is a graph over the pivot coordinates, so projecting onto them is injective
    let projected = points.iter().map(|p| pivots.iter().map(|&c| p[c].clone()).collect()).collect();
    Ok(Chart { pivots, points: projected })
}

fn combinations(n: usize, r: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..r).collect();
    if r > n {
        return out;
    }
    loop {
        out.push(idx.clone());
        let mut i = r;
        loop {
            if i == 0 {
                return out;
            }
            i -= 1;
            if idx[i] != i + n - r {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

/// Scales to a primitive integer normal.
fn primitive(normal: Vec<Rational>, offset: Rational) -> (Vec<Rational>, Rational) {
    let mut lcm = BigInt::one();
    for a in &normal {
        lcm = lcm.lcm(a.denom());
    }
    let scaled: Vec<Rational> = normal.iter().map(|a| a * Rational::from_integer(lcm.clone())).collect();
    let mut g = BigInt::zero();
    for a in &scaled {
        g = g.gcd(a.numer());
    }
    let f = Rational::new(lcm, g);
    (normal.iter().map(|a| a * &f).collect(), offset * f)
}

fn hyperplane(pts: &[&Vec<Rational>], d: usize) -> Option<(Vec<Rational>, Rational)> {
    let rows: Vec<Vec<Rational>> =
        pts[1..].iter().map(|p| p.iter().zip(pts[0]).map(|(a, b)| a - b).collect()).collect();
    let ns = nullspace(&rows, d);
    if ns.len() != 1 {
        return None;
    }
    let n = ns.into_iter().next()?;
    let offset: Rational = n.iter().zip(pts[0]).map(|(a, b)| a * b).sum();
    Some((n, offset))
}

/// Facets of `conv(S)` inside its affine hull, sorted.
pub fn enumerate_facets(points: &[Vec<Rational>]) -> Result<Vec<Facet>> {
    let pts = dedup(points)?;
    let ch = chart(&pts)?;
    let d = ch.pivots.len();
    let ambient = pts[0].len();
    let found: BTreeSet<Facet> = combinations(ch.points.len(), d)
        .into_par_iter()
        .filter_map(|subset| {
            let sel: Vec<&Vec<Rational>> = subset.iter().map(|&i| &ch.points[i]).collect();
            let (n, off) = hyperplane(&sel, d)?;
            let vals: Vec<Rational> =
                ch.points.iter().map(|p| &off - n.iter().zip(p).map(|(a, b)| a * b).sum::<Rational>()).collect();
            let (n, off) = if vals.iter().all(|v| !v.is_negative()) {
                (n, off)
            } else if vals.iter().all(|v| !v.is_positive()) {
                (n.iter().map(|a| -a).collect(), -off)
            } else {
                return None;
            };
            let (n, off) = primitive(n, off);
            let mut normal = vec![Rational::zero(); ambient];
            for (a, &c) in n.into_iter().zip(&ch.pivots) {
                normal[c] = a;
            }
            Some(Facet { normal, offset: off })
        })
        .collect::<Vec<_>>()
        .into_iter()
        .collect();
    Ok(found.into_iter().collect())
}

/// Number of distinct values of each facet functional over `S`.
pub fn level_report(points: &[Vec<Rational>]) -> Result<LevelReport> {
    let pts = dedup(points)?;
    let facets = enumerate_facets(&pts)?;
    let dimension = chart(&pts)?.pivots.len();
    let rows: Vec<FacetLevel> = facets
        .iter()
        .map(|f| {
            let values: BTreeSet<Rational> = pts.iter().map(|s| f.eval(s)).collect();
            FacetLevel {
                normal: f.normal.iter().map(format_rational).collect(),
                offset: format_rational(&f.offset),
                inequality: f.display(),
                level: values.len(),
            }
        })
        .collect();
    let level = rows.iter().map(|r| r.level).max().unwrap_or(1);
    Ok(LevelReport {
        dimension,
        num_points: pts.len(),
        facets: rows,
        level,
        is_2_level: level <= 2,
        th_k_bound: level.saturating_sub(1).max(1),
    })
}

/// `TH_1`-exactness of `I(S)`: every facet has one parallel translate covering `S`.
pub fn th1_exact_finite(points: &[Vec<Rational>]) -> Result<bool> {
    Ok(level_report(points)?.is_2_level)
}
