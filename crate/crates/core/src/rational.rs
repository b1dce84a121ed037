//! Exact rational helpers and small dense linear algebra over the rationals.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Result, ThetaError};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn ratio(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Parses `"p/q"`, `"p"`, or a plain integer string.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let bad = || ThetaError::Invalid(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Rational::new(n, d))
        }
        None => Ok(Rational::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

pub fn format_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued-fraction convergents plus the best semiconvergent).
pub fn limit_denominator(x: f64, max_den: u64) -> Rational {
    if !x.is_finite() {
        return Rational::zero();
    }
    let exact = match Rational::from_float(x) {
        Some(r) => r,
        None => return Rational::zero(),
    };
    let max_den = BigInt::from(max_den.max(1));
    if exact.denom() <= &max_den {
        return exact;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut n = exact.numer().clone();
    let mut d = exact.denom().clone();
    loop {
        let a = n.div_floor(&d);
        let q2 = &q0 + &a * &q1;
        if q2 > max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let r = &n - &a * &d;
        n = std::mem::replace(&mut d, r);
        if d.is_zero() {
            break;
        }
    }
    let k = (&max_den - &q0) / &q1;
    let bound1 = Rational::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let bound2 = Rational::new(p1, q1);
    if (&bound2 - &exact).abs() <= (&bound1 - &exact).abs() {
        bound2
    } else {
        bound1
    }
}

/// Row-reduced echelon form in place; returns the pivot columns.
pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
    let rows = m.len();
    if rows == 0 {
        return Vec::new();
    }
    let cols = m[0].len();
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..cols {
        if r == rows {
            break;
        }
        let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else {
            continue;
        };
        m.swap(r, p);
        let inv = m[r][c].recip();
        for v in m[r].iter_mut() {
            *v *= &inv;
        }
        for i in 0..rows {
            if i != r && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in c..cols {
                    let t = &f * &m[r][j];
                    m[i][j] -= t;
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

pub fn rank(m: &[Vec<Rational>]) -> usize {
    let mut work = m.to_vec();
    rref(&mut work).len()
}

/// Basis of the right nullspace of `m` (each vector has `cols` entries).
pub fn nullspace(m: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
    let mut work = m.to_vec();
    let pivots = rref(&mut work);
    let mut basis = Vec::new();
    for free in (0..cols).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Rational::zero(); cols];
        v[free] = Rational::one();
        for (row, &pc) in pivots.iter().enumerate() {
            v[pc] = -work[row][free].clone();
        }
        basis.push(v);
    }
    basis
}

/// Inverse of a square matrix, or `None` if singular.
pub fn inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
    let n = m.len();
    let mut aug: Vec<Vec<Rational>> = m
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let mut r = row.clone();
            r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.len() < n || pivots[n - 1] != n - 1 {
        return None;
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Some solution of `a x = b`, or `None` if the system is inconsistent.
pub fn solve_any(a: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
    let cols = a.first().map_or(0, Vec::len);
    let mut aug: Vec<Vec<Rational>> = a
        .iter()
        .zip(b)
        .map(|(row, bi)| {
            let mut r = row.clone();
            r.push(bi.clone());
            r
        })
        .collect();
    let pivots = rref(&mut aug);
    if pivots.contains(&cols) {
        return None;
    }
    let mut x = vec![Rational::zero(); cols];
    for (row, &pc) in pivots.iter().enumerate() {
        x[pc] = aug[row][cols].clone();
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn limit_denominator_recovers_simple_fractions() {
        assert_eq!(limit_denominator(0.5, 1_000_000), ratio(1, 2));
        assert_eq!(limit_denominator(1.0 / 3.0, 1_000_000), ratio(1, 3));
        assert_eq!(limit_denominator(-2.0 / 7.0 + 1e-13, 1_000_000), ratio(-2, 7));
        let pi = limit_denominator(std::f64::consts::PI, 1000);
        assert_eq!(pi, ratio(355, 113));
    }

    #[test]
    fn parse_and_format() {
        assert_eq!(parse_rational(" -3/6 ").unwrap(), ratio(-1, 2));
        assert_eq!(parse_rational("7").unwrap(), rat(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
        assert_eq!(format_rational(&ratio(4, -6)), "-2/3");
    }

    #[test]
    fn inverse_and_nullspace() {
        let m = vec![vec![rat(2), rat(1)], vec![rat(1), rat(1)]];
        let inv = inverse(&m).unwrap();
        assert_eq!(inv, vec![vec![rat(1), rat(-1)], vec![rat(-1), rat(2)]]);
        let sing = vec![vec![rat(1), rat(2)], vec![rat(2), rat(4)]];
        assert!(inverse(&sing).is_none());
        let ns = nullspace(&sing, 2);
        assert_eq!(ns, vec![vec![rat(-2), rat(1)]]);
        assert!(solve_any(&sing, &[rat(1), rat(3)]).is_none());
        assert_eq!(solve_any(&sing, &[rat(1), rat(2)]).unwrap(), vec![rat(1), rat(0)]);
    }
}
