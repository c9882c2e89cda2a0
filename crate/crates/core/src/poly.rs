//! Sparse multivariate polynomials over the rationals.
//!
//! Terms live in a `BTreeMap` keyed by [`Monomial`], whose `Ord` is graded
//! reverse lexicographic with the first context variable largest. The
//! canonical text form lists terms in descending grevlex order.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::PolyError;

/// Exact rational coefficient. `BigRational` keeps values in lowest terms
/// with a positive denominator.
pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

pub fn rat_frac(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Exponent vector with trailing zeros trimmed.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Default)]
pub struct Monomial(Vec<u32>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn from_exponents(mut exps: Vec<u32>) -> Self {
        while exps.last() == Some(&0) {
            exps.pop();
        }
        Monomial(exps)
    }

    pub fn var(i: usize) -> Self {
        let mut e = vec![0; i + 1];
        e[i] = 1;
        Monomial(e)
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn exponent(&self, i: usize) -> u32 {
        self.0.get(i).copied().unwrap_or(0)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        Monomial((0..n).map(|i| self.exponent(i) + other.exponent(i)).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.len() <= other.0.len() && self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, when `self` divides `other`.
    pub fn quotient_of(&self, other: &Monomial) -> Option<Monomial> {
        if !self.divides(other) {
            return None;
        }
        let e = (0..other.0.len()).map(|i| other.exponent(i) - self.exponent(i)).collect();
        Some(Monomial::from_exponents(e))
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        let n = self.0.len().max(other.0.len());
        Monomial((0..n).map(|i| self.exponent(i).max(other.exponent(i))).collect())
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Graded reverse lexicographic comparison, variable 0 largest.
    /// All monomials in `n` variables of degree ≤ `d`, ascending.
    pub fn all_up_to(n: usize, d: u32) -> Vec<Monomial> {
        fn rec(i: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Monomial>) {
            if i == cur.len() {
                out.push(Monomial(cur.clone()));
                return;
            }
            for e in 0..=left {
                cur[i] = e;
                rec(i + 1, left - e, cur, out);
            }
            cur[i] = 0;
        }
        let mut out = Vec::new();
        rec(0, d, &mut vec![0; n], &mut out);
        let mut out: Vec<Monomial> = out.into_iter().map(|m| Monomial::from_exponents(m.0)).collect();
        out.sort();
        out
    }

    pub fn grevlex_cmp(&self, other: &Monomial) -> Ordering {
        match self.degree().cmp(&other.degree()) {
            Ordering::Equal => {}
            o => return o,
        }
        let n = self.0.len().max(other.0.len());
        for i in (0..n).rev() {
            let (a, b) = (self.exponent(i), other.exponent(i));
            if a != b {
                return b.cmp(&a);
            }
        }
        Ordering::Equal
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.grevlex_cmp(other)
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Ordered variable names shared by polynomials of one ring.
#[derive(Clone, Debug)]
pub struct VarContext(Arc<Vec<String>>);

impl VarContext {
    pub fn new<S: Into<String>>(names: impl IntoIterator<Item = S>) -> Self {
        VarContext(Arc::new(names.into_iter().map(Into::into).collect()))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.0
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.0.iter().position(|n| n == name)
    }

    /// Two copies of every variable, suffixed `_1` and `_2`.
    pub fn doubled(&self) -> VarContext {
        let first = self.0.iter().map(|n| format!("{n}_1"));
        let second = self.0.iter().map(|n| format!("{n}_2"));
        VarContext::new(first.chain(second))
    }

    /// Context with `name` prepended as a new variable 0.
    pub fn with_leading(&self, name: &str) -> VarContext {
        VarContext::new(std::iter::once(name.to_string()).chain(self.0.iter().cloned()))
    }
}

impl PartialEq for VarContext {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || self.0 == other.0
    }
}

impl Eq for VarContext {}

/// Least total degree of a polynomial; the zero polynomial has none.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum MinDegree {
    Finite(u32),
    Infinite,
}

impl MinDegree {
    pub fn finite(self) -> Option<u32> {
        match self {
            MinDegree::Finite(d) => Some(d),
            MinDegree::Infinite => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Poly {
    vars: VarContext,
    terms: BTreeMap<Monomial, Rational>,
}

impl Poly {
    pub fn zero(vars: &VarContext) -> Self {
        Poly { vars: vars.clone(), terms: BTreeMap::new() }
    }

    pub fn constant(vars: &VarContext, c: Rational) -> Self {
        let mut p = Poly::zero(vars);
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn one(vars: &VarContext) -> Self {
        Poly::constant(vars, Rational::one())
    }

    pub fn var(vars: &VarContext, i: usize) -> Result<Self, PolyError> {
        if i >= vars.len() {
            return Err(PolyError::VariableOutOfRange { index: i, len: vars.len() });
        }
        Ok(Poly::monomial(vars, Monomial::var(i), Rational::one()))
    }

    pub fn monomial(vars: &VarContext, m: Monomial, c: Rational) -> Self {
        let mut p = Poly::zero(vars);
        p.add_term(m, c);
        p
    }

    pub fn from_terms(vars: &VarContext, terms: impl IntoIterator<Item = (Monomial, Rational)>) -> Self {
        let mut p = Poly::zero(vars);
        for (m, c) in terms {
            p.add_term(m, c);
        }
        p
    }

    pub fn vars(&self) -> &VarContext {
        &self.vars
    }

    /// Terms in ascending grevlex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn coefficient(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(Monomial::is_one)
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

    fn check_context(&self, other: &Poly) -> Result<(), PolyError> {
        if self.vars != other.vars {
            return Err(PolyError::ContextMismatch {
                left: self.vars.names().join(","),
                right: other.vars.names().join(","),
            });
        }
        Ok(())
    }

    pub fn try_add(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check_context(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn try_sub(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check_context(other)?;
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        Ok(out)
    }

    pub fn try_mul(&self, other: &Poly) -> Result<Poly, PolyError> {
        self.check_context(other)?;
        let mut out = Poly::zero(&self.vars);
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        Ok(out)
    }

    pub fn scale(&self, c: &Rational) -> Poly {
        if c.is_zero() {
            return Poly::zero(&self.vars);
        }
        Poly { vars: self.vars.clone(), terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect() }
    }

    pub fn mul_monomial(&self, m: &Monomial) -> Poly {
        Poly { vars: self.vars.clone(), terms: self.terms.iter().map(|(t, a)| (t.mul(m), a.clone())).collect() }
    }

    pub fn pow(&self, e: u32) -> Poly {
        let mut out = Poly::one(&self.vars);
        for _ in 0..e {
            out = &out * self;
        }
        out
    }

    /// Formal partial derivative in variable `i`.
    pub fn partial(&self, i: usize) -> Result<Poly, PolyError> {
        if i >= self.vars.len() {
            return Err(PolyError::VariableOutOfRange { index: i, len: self.vars.len() });
        }
        let mut out = Poly::zero(&self.vars);
        for (m, c) in &self.terms {
            let e = m.exponent(i);
            if e == 0 {
                continue;
            }
            let mut exps = m.exponents().to_vec();
            exps[i] -= 1;
            out.add_term(Monomial::from_exponents(exps), c * rat(e as i64));
        }
        Ok(out)
    }

    pub fn min_degree(&self) -> MinDegree {
        self.terms.keys().map(Monomial::degree).min().map_or(MinDegree::Infinite, MinDegree::Finite)
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    pub fn is_homogeneous(&self) -> bool {
        let mut degs = self.terms.keys().map(Monomial::degree);
        match degs.next() {
            None => true,
            Some(d) => degs.all(|e| e == d),
        }
    }

    /// Drop every term of total degree above `d`.
    pub fn truncate_degree(&self, d: u32) -> Poly {
        Poly {
            vars: self.vars.clone(),
            terms: self.terms.iter().filter(|(m, _)| m.degree() <= d).map(|(m, c)| (m.clone(), c.clone())).collect(),
        }
    }

    /// Re-embed into `target`, sending variable `i` to `map[i]`.
    pub fn remap(&self, target: &VarContext, map: &[usize]) -> Poly {
        let mut out = Poly::zero(target);
        for (m, c) in &self.terms {
            let mut e = vec![0; target.len()];
            for (i, &k) in m.exponents().iter().enumerate() {
                e[map[i]] += k;
            }
            out.add_term(Monomial::from_exponents(e), c.clone());
        }
        out
    }

    /// Hadamard quotients by telescoping in context order.
    ///
    /// Returns `g_1..g_n` over [`VarContext::doubled`] with
    /// `f(x) - f(y) = sum_i (x_i - y_i) g_i`, where the `_1` copies play
    /// `x` and the `_2` copies play `y`. The quotients are not unique; this
    /// is one valid witness. The identity is checked by expansion.
    pub fn hadamard_quotients(&self) -> Vec<Poly> {
        let n = self.vars.len();
        let dbl = self.vars.doubled();
        let mut quotients = vec![Poly::zero(&dbl); n];
        for (m, c) in &self.terms {
            for (i, q) in quotients.iter_mut().enumerate() {
                let e = m.exponent(i);
                if e == 0 {
                    continue;
                }
                // variables before i sit at their second copy, after i at their first
                let mut frame = vec![0u32; 2 * n];
                for j in 0..n {
                    match j.cmp(&i) {
                        Ordering::Less => frame[n + j] = m.exponent(j),
                        Ordering::Greater => frame[j] = m.exponent(j),
                        Ordering::Equal => {}
                    }
                }
                for k in 0..e {
                    let mut exps = frame.clone();
                    exps[i] = k;
                    exps[n + i] = e - 1 - k;
                    q.add_term(Monomial::from_exponents(exps), c.clone());
                }
            }
        }
        let first: Vec<usize> = (0..n).collect();
        let second: Vec<usize> = (n..2 * n).collect();
        let mut residual = &self.remap(&dbl, &first) - &self.remap(&dbl, &second);
        for (i, q) in quotients.iter().enumerate() {
            let diff = &Poly::monomial(&dbl, Monomial::var(i), Rational::one())
                - &Poly::monomial(&dbl, Monomial::var(n + i), Rational::one());
            residual = &residual - &(&diff * q);
        }
        assert!(residual.is_zero(), "hadamard reconstruction failed for {self}");
        quotients
    }

    /// Leading (grevlex-largest) term.
    pub fn leading(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }
}

impl Add for &Poly {
    type Output = Poly;
    fn add(self, rhs: &Poly) -> Poly {
        self.try_add(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Sub for &Poly {
    type Output = Poly;
    fn sub(self, rhs: &Poly) -> Poly {
        self.try_sub(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Mul for &Poly {
    type Output = Poly;
    fn mul(self, rhs: &Poly) -> Poly {
        self.try_mul(rhs).unwrap_or_else(|e| panic!("{e}"))
    }
}

impl Neg for &Poly {
    type Output = Poly;
    fn neg(self) -> Poly {
        self.scale(&-Rational::one())
    }
}

/// Writes `c*m` terms joined by ` + ` / ` - `, in descending order.
pub(crate) fn write_terms<'a, W: fmt::Write>(
    out: &mut W,
    terms: impl Iterator<Item = (String, &'a Rational)>,
) -> fmt::Result {
    let mut first = true;
    for (mono, c) in terms {
        let neg = c.is_negative();
        let abs = c.abs();
        let body = if mono.is_empty() {
            abs.to_string()
        } else if abs.is_one() {
            mono
        } else {
            format!("{abs}*{mono}")
        };
        match (first, neg) {
            (true, false) => write!(out, "{body}")?,
            (true, true) => write!(out, "-{body}")?,
            (false, false) => write!(out, " + {body}")?,
            (false, true) => write!(out, " - {body}")?,
        }
        first = false;
    }
    if first {
        write!(out, "0")?;
    }
    Ok(())
}

pub(crate) fn monomial_text(names: &[String], exps: &[u32]) -> String {
    let mut parts = Vec::new();
    for (i, &e) in exps.iter().enumerate() {
        match e {
            0 => {}
            1 => parts.push(names[i].clone()),
            _ => parts.push(format!("{}^{}", names[i], e)),
        }
    }
    parts.join("*")
}

impl fmt::Display for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names = self.vars.names();
        write_terms(f, self.terms.iter().rev().map(|(m, c)| (monomial_text(names, m.exponents()), c)))
    }
}
