//! Sparse multivariate polynomials with exact rational coefficients.
//!
//! Monomials are stored as dense exponent vectors; polynomials map monomials
//! to nonzero coefficients. Term orders are always graded, so comparing two
//! monomials first compares total degree. Reduction against a marked reducer
//! set follows the classical division algorithm.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Result, ThetaError};
use crate::rational::{format_rational, to_f64, Rational};

/// Graded monomial orders with `x1 > x2 > ... > xn`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MonomialOrder {
    /// Graded reverse lexicographic.
    #[default]
    Grevlex,
    /// Graded lexicographic.
    Grlex,
}

impl MonomialOrder {
    pub fn cmp(self, a: &Monomial, b: &Monomial) -> Ordering {
        a.degree.cmp(&b.degree).then_with(|| match self {
            MonomialOrder::Grlex => a.exponents.cmp(&b.exponents),
            MonomialOrder::Grevlex => {
                for (ea, eb) in a.exponents.iter().zip(&b.exponents).rev() {
                    if ea != eb {
                        // smaller exponent in the last differing variable wins
                        return eb.cmp(ea);
                    }
                }
                Ordering::Equal
            }
        })
    }
}

impl FromStr for MonomialOrder {
    type Err = ThetaError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "grevlex" => Ok(MonomialOrder::Grevlex),
            "grlex" => Ok(MonomialOrder::Grlex),
            other => Err(ThetaError::Invalid(format!("unknown monomial order {other:?}"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Monomial {
    // field order matters: the derived Ord sorts by degree first
    degree: u32,
    exponents: Vec<u32>,
}

impl Monomial {
    pub fn new(exponents: Vec<u32>) -> Self {
        let degree = exponents.iter().sum();
        Monomial { degree, exponents }
    }

    pub fn one(nvars: usize) -> Self {
        Monomial { degree: 0, exponents: vec![0; nvars] }
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        let mut e = vec![0; nvars];
        e[i] = 1;
        Monomial { degree: 1, exponents: e }
    }

    /// Squarefree monomial on the given variable indices.
    pub fn from_support(nvars: usize, support: &[usize]) -> Self {
        let mut e = vec![0; nvars];
        for &i in support {
            e[i] += 1;
        }
        Monomial::new(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.exponents
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn nvars(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_one(&self) -> bool {
        self.degree == 0
    }

    /// Variable indices with nonzero exponent.
    pub fn support(&self) -> Vec<usize> {
        self.exponents.iter().enumerate().filter(|(_, &e)| e > 0).map(|(i, _)| i).collect()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial {
            degree: self.degree + other.degree,
            exponents: self.exponents.iter().zip(&other.exponents).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exponents.iter().zip(&other.exponents).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial {
            degree: other.degree - self.degree,
            exponents: other.exponents.iter().zip(&self.exponents).map(|(b, a)| b - a).collect(),
        }
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.exponents.iter().zip(x).map(|(&e, &v)| v.powi(e as i32)).product()
    }

    pub fn eval_rational(&self, x: &[Rational]) -> Rational {
        let mut acc = Rational::one();
        for (&e, v) in self.exponents.iter().zip(x) {
            for _ in 0..e {
                acc *= v;
            }
        }
        acc
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.degree == 0 {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.exponents.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}

/// Compares two monomials under a graded order.
pub fn compare_monomials(a: &Monomial, b: &Monomial, order: MonomialOrder) -> Result<Ordering> {
    if a.nvars() != b.nvars() {
        return Err(ThetaError::VariableMismatch { expected: a.nvars(), got: b.nvars() });
    }
    Ok(order.cmp(a, b))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Polynomial {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

impl Polynomial {
    pub fn zero(nvars: usize) -> Self {
        Polynomial { nvars, terms: BTreeMap::new() }
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Polynomial::term(Monomial::one(nvars), c)
    }

    pub fn var(nvars: usize, i: usize) -> Self {
        Polynomial::term(Monomial::var(nvars, i), Rational::one())
    }

    pub fn term(m: Monomial, c: Rational) -> Self {
        let mut p = Polynomial::zero(m.nvars());
        p.add_term(m, c);
        p
    }

    /// Linear polynomial `c0 + sum_i coeffs[i] * x_i`.
    pub fn linear(c0: Rational, coeffs: &[Rational]) -> Self {
        let n = coeffs.len();
        let mut p = Polynomial::constant(n, c0);
        for (i, c) in coeffs.iter().enumerate() {
            p.add_term(Monomial::var(n, i), c.clone());
        }
        p
    }

    pub fn from_terms(nvars: usize, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Result<Self> {
        let mut p = Polynomial::zero(nvars);
        for (m, c) in terms {
            if m.nvars() != nvars {
                return Err(ThetaError::VariableMismatch { expected: nvars, got: m.nvars() });
            }
            p.add_term(m, c);
        }
        Ok(p)
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn leading_term(&self, order: MonomialOrder) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().max_by(|a, b| order.cmp(a.0, b.0))
    }

    pub fn scale(&self, c: &Rational) -> Polynomial {
        if c.is_zero() {
            return Polynomial::zero(self.nvars);
        }
        Polynomial { nvars: self.nvars, terms: self.terms.iter().map(|(m, v)| (m.clone(), v * c)).collect() }
    }

    pub fn mul_term(&self, m: &Monomial, c: &Rational) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (k, v) in &self.terms {
            out.add_term(k.mul(m), v * c);
        }
        out
    }

    pub fn pow(&self, e: u32) -> Polynomial {
        let mut acc = Polynomial::constant(self.nvars, Rational::one());
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval_rational(&self, x: &[Rational]) -> Rational {
        self.terms.iter().map(|(m, c)| c * m.eval_rational(x)).fold(Rational::zero(), |a, b| a + b)
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        self.terms.iter().map(|(m, c)| to_f64(c) * m.eval_f64(x)).sum()
    }

    pub fn max_abs_coefficient(&self) -> Rational {
        self.terms.values().map(|c| c.abs()).max().unwrap_or_else(Rational::zero)
    }

    /// Renders terms in decreasing order under `order`.
    pub fn display_with(&self, order: MonomialOrder) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        let mut terms: Vec<_> = self.terms.iter().collect();
        terms.sort_by(|a, b| order.cmp(b.0, a.0));
        let mut out = String::new();
        for (idx, (m, c)) in terms.into_iter().enumerate() {
            let neg = c.is_negative();
            let mag = c.abs();
            match (idx, neg) {
                (0, true) => out.push('-'),
                (0, false) => {}
                (_, true) => out.push_str(" - "),
                (_, false) => out.push_str(" + "),
            }
            if m.is_one() {
                out.push_str(&format_rational(&mag));
            } else if mag.is_one() {
                out.push_str(&m.to_string());
            } else {
                out.push_str(&format!("{}*{}", format_rational(&mag), m));
            }
        }
        out
    }

    /// Parses the text format with a fixed number of variables.
    pub fn parse(text: &str, nvars: usize) -> Result<Polynomial> {
        let terms = Parser { src: text.as_bytes(), pos: 0 }.expression()?;
        let needed = terms.iter().flat_map(|(_, vars)| vars.iter().map(|(i, _)| i + 1)).max().unwrap_or(0);
        if needed > nvars {
            return Err(ThetaError::VariableMismatch { expected: nvars, got: needed });
        }
        Ok(Self::assemble(terms, nvars))
    }

    fn assemble(terms: Vec<(Rational, Vec<(usize, u32)>)>, nvars: usize) -> Polynomial {
        let mut p = Polynomial::zero(nvars);
        for (c, vars) in terms {
            let mut e = vec![0; nvars];
            for (i, k) in vars {
                e[i] += k;
            }
            p.add_term(Monomial::new(e), c);
        }
        p
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(MonomialOrder::Grevlex))
    }
}

/// Infers the variable count from the largest index mentioned.
impl FromStr for Polynomial {
    type Err = ThetaError;

    fn from_str(s: &str) -> Result<Self> {
        let terms = Parser { src: s.as_bytes(), pos: 0 }.expression()?;
        let nvars = terms.iter().flat_map(|(_, vars)| vars.iter().map(|(i, _)| i + 1)).max().unwrap_or(0);
        Ok(Self::assemble(terms, nvars))
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

type ParsedTerm = (Rational, Vec<(usize, u32)>);

impl Parser<'_> {
    fn err<T>(&self, msg: &str) -> Result<T> {
        Err(ThetaError::Parse { pos: self.pos, msg: msg.to_string() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn digits(&mut self) -> Result<&str> {
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return self.err("expected digits");
        }
        Ok(std::str::from_utf8(&self.src[start..self.pos]).expect("ascii digits"))
    }

    fn expression(mut self) -> Result<Vec<ParsedTerm>> {
        let mut terms = Vec::new();
        let mut sign = Rational::one();
        match self.peek() {
            Some(b'-') => {
                sign = -sign;
                self.pos += 1;
            }
            Some(b'+') => self.pos += 1,
            None => return self.err("empty polynomial"),
            _ => {}
        }
        loop {
            let (c, vars) = self.term()?;
            terms.push((sign * c, vars));
            match self.peek() {
                None => break,
                Some(b'+') => sign = Rational::one(),
                Some(b'-') => sign = -Rational::one(),
                Some(_) => return self.err("expected '+' or '-'"),
            }
            self.pos += 1;
        }
        Ok(terms)
    }

    fn term(&mut self) -> Result<ParsedTerm> {
        let mut coeff = Rational::one();
        let mut vars = Vec::new();
        loop {
            match self.peek() {
                Some(b'x') => {
                    self.pos += 1;
                    let idx: usize = self.digits()?.parse().map_err(|_| ThetaError::Parse {
                        pos: self.pos,
                        msg: "bad variable index".into(),
                    })?;
                    if idx == 0 {
                        return self.err("variables are numbered from x1");
                    }
                    let mut e = 1u32;
                    if self.peek() == Some(b'^') {
                        self.pos += 1;
                        e = self.digits()?.parse().map_err(|_| ThetaError::Parse {
                            pos: self.pos,
                            msg: "bad exponent".into(),
                        })?;
                    }
                    vars.push((idx - 1, e));
                }
                Some(c) if c.is_ascii_digit() => {
                    let num: num_bigint::BigInt = self.digits()?.parse().expect("digits parse");
                    let mut r = Rational::from_integer(num);
                    if self.peek() == Some(b'/') {
                        self.pos += 1;
                        let den: num_bigint::BigInt = self.digits()?.parse().expect("digits parse");
                        if den.is_zero() {
                            return self.err("zero denominator");
                        }
                        r /= Rational::from_integer(den);
                    }
                    coeff *= r;
                }
                _ => return self.err("expected a number or a variable"),
            }
            if self.peek() == Some(b'*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((coeff, vars))
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;

    fn add(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;

    fn sub(self, rhs: &Polynomial) -> Polynomial {
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;

    fn mul(self, rhs: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;

    fn neg(self) -> Polynomial {
        self.scale(&-Rational::one())
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr for Polynomial {
            type Output = Polynomial;

            fn $method(self, rhs: Polynomial) -> Polynomial {
                (&self).$method(&rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[derive(Clone, Debug, PartialEq)]
pub struct Reducer {
    pub poly: Polynomial,
    pub marked: Monomial,
}

/// Polynomials with marked leading monomials used for normal-form reduction.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducerSet {
    reducers: Vec<Reducer>,
    order: MonomialOrder,
    confluent: bool,
}

impl ReducerSet {
    /// A single polynomial is always a Gröbner basis of the ideal it generates.
    pub fn singleton(h: Polynomial, order: MonomialOrder) -> Result<Self> {
        let marked = h
            .leading_term(order)
            .map(|(m, _)| m.clone())
            .ok_or_else(|| ThetaError::Invalid("zero reducer".into()))?;
        if marked.is_one() {
            return Err(ThetaError::UnitIdeal);
        }
        Ok(ReducerSet { reducers: vec![Reducer { poly: h, marked }], order, confluent: true })
    }

    /// Builds a reducer set from polynomials with explicit markings. The caller
    /// asserts confluence; multi-element sets without it cannot be used for
    /// normal forms.
    pub fn with_marked(pairs: Vec<(Polynomial, Monomial)>, order: MonomialOrder, confluent: bool) -> Result<Self> {
        let mut reducers = Vec::with_capacity(pairs.len());
        for (poly, marked) in pairs {
            let (lead, _) = poly.leading_term(order).ok_or_else(|| ThetaError::Invalid("zero reducer".into()))?;
            if *lead != marked {
                return Err(ThetaError::BadMarking { marked: marked.to_string(), leading: lead.to_string() });
            }
            if marked.is_one() {
                return Err(ThetaError::UnitIdeal);
            }
            reducers.push(Reducer { poly, marked });
        }
        let confluent = confluent || reducers.len() <= 1;
        Ok(ReducerSet { reducers, order, confluent })
    }

    pub fn reducers(&self) -> &[Reducer] {
        &self.reducers
    }

    pub fn order(&self) -> MonomialOrder {
        self.order
    }

    pub fn is_confluent(&self) -> bool {
        self.confluent
    }

    pub fn nvars(&self) -> usize {
        self.reducers.first().map_or(0, |r| r.poly.nvars())
    }

    /// True if some marked monomial divides `m`.
    pub fn is_reducible(&self, m: &Monomial) -> bool {
        self.reducers.iter().any(|r| r.marked.divides(m))
    }
}

/// Remainder of `f` on division by `g`: no term of the result is divisible by
/// a marked monomial, and `f - result` lies in the ideal generated by `g`.
pub fn normal_form(f: &Polynomial, g: &ReducerSet) -> Result<Polynomial> {
    if !g.confluent {
        return Err(ThetaError::NotConfluent(g.reducers.len()));
    }
    if let Some(r) = g.reducers.first() {
        if r.poly.nvars() != f.nvars() {
            return Err(ThetaError::VariableMismatch { expected: r.poly.nvars(), got: f.nvars() });
        }
    }
    let order = g.order;
    let mut p = f.clone();
    let mut rem = Polynomial::zero(f.nvars());
    while let Some((lead, coeff)) = p.leading_term(order).map(|(m, c)| (m.clone(), c.clone())) {
        match g.reducers.iter().find(|r| r.marked.divides(&lead)) {
            Some(r) => {
                let lc = r.poly.coefficient(&r.marked);
                let factor = coeff / lc;
                let shift = r.marked.quotient_of(&lead);
                p = &p - &r.poly.mul_term(&shift, &factor);
            }
            None => {
                p.terms.remove(&lead);
                rem.add_term(lead, coeff);
            }
        }
    }
    Ok(rem)
}
