//! The classical de Rham stalk of a hypersurface and the divergence equation.
//!
//! For an ideal `𝓘 ⊂ ℚ[x₁..xₙ]` the forms `K^k = 𝓘·Ω^k + d𝓘 ∧ Ω^(k-1)`
//! (with `K⁰ = 𝓘`) make a differential ideal, and `Ω/K` is the naive de Rham
//! complex of the zero set at the origin. For a hypersurface `f` it is
//! acyclic in degree `n - 1` exactly when `f·g = Σ ∂ᵢ(f·hᵢ)` can be solved for
//! every `g`. Truncating the Taylor expansion at degree `D` turns the
//! equation into a finite linear system whose inconsistency already rules
//! out a formal solution; consistency at a finite `D` decides nothing.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Zero};

use crate::complex::CohomologyReport;
use crate::error::ReiffenError;
use crate::linalg::{solve, verify_certificate, Echelon, Solution, SparseMatrix};
use crate::poly::{Monomial, Poly, Rational, VarContext};

pub const DEFAULT_UNKNOWN_CAP: usize = 20_000;

/// A differential form `Σ c·m·dx_S` with `S` a bitmask of variables.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Form {
    terms: BTreeMap<(Monomial, u32), Rational>,
}

impl Form {
    pub fn zero() -> Self {
        Form::default()
    }

    pub fn from_poly(p: &Poly) -> Self {
        let mut f = Form::zero();
        for (m, c) in p.terms() {
            f.add_term(m.clone(), 0, c.clone());
        }
        f
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&(Monomial, u32), &Rational)> {
        self.terms.iter()
    }

    pub fn add_term(&mut self, m: Monomial, s: u32, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry((m, s)).or_insert_with(Rational::zero);
        *entry += c;
        if entry.is_zero() {
            self.terms.retain(|_, v| !v.is_zero());
        }
    }

    /// `p ∧ self` for a function `p`.
    pub fn mul_poly(&self, p: &Poly) -> Form {
        let mut out = Form::zero();
        for ((m, s), c) in &self.terms {
            for (pm, pc) in p.terms() {
                out.add_term(m.mul(pm), *s, c * pc);
            }
        }
        out
    }

    /// `dx_i ∧ self`.
    pub fn wedge_dx(&self, i: usize) -> Form {
        let mut out = Form::zero();
        for ((m, s), c) in &self.terms {
            if s & (1 << i) != 0 {
                continue;
            }
            let before = (s & ((1 << i) - 1)).count_ones();
            let c = if before % 2 == 1 { -c.clone() } else { c.clone() };
            out.add_term(m.clone(), s | (1 << i), c);
        }
        out
    }

    pub fn add(&self, other: &Form) -> Form {
        let mut out = self.clone();
        for ((m, s), c) in &other.terms {
            out.add_term(m.clone(), *s, c.clone());
        }
        out
    }

    pub fn d(&self, n: usize) -> Form {
        let mut out = Form::zero();
        for ((m, s), c) in &self.terms {
            for i in 0..n {
                let e = m.exponent(i);
                if e == 0 {
                    continue;
                }
                let mut exps: Vec<u32> = (0..n).map(|j| m.exponent(j)).collect();
                exps[i] -= 1;
                let mut single = Form::zero();
                single.add_term(Monomial::from_exponents(exps), *s, c * Rational::from_integer(e.into()));
                out = out.add(&single.wedge_dx(i));
            }
        }
        out
    }

    /// Drops terms of weight (degree + form degree) above `w`.
    pub fn truncate(&self, w: u32) -> Form {
        Form { terms: self.terms.iter().filter(|((m, s), _)| m.degree() + s.count_ones() <= w).map(|(k, v)| (k.clone(), v.clone())).collect() }
    }

    pub fn display(&self, vars: &VarContext) -> String {
        let mut by_mask: BTreeMap<u32, Poly> = BTreeMap::new();
        for ((m, s), c) in &self.terms {
            by_mask.entry(*s).or_insert_with(|| Poly::zero(vars)).add_term(m.clone(), c.clone());
        }
        if by_mask.is_empty() {
            return "0".to_string();
        }
        let names = vars.names();
        by_mask
            .iter()
            .map(|(s, p)| {
                let dx: Vec<String> = (0..names.len()).filter(|i| s & (1 << i) != 0).map(|i| format!("d{}", names[i])).collect();
                let dx = dx.join("^");
                match (dx.is_empty(), p.num_terms()) {
                    (true, _) => p.to_string(),
                    (false, 1) if p.to_string() == "1" => dx,
                    (false, 1) => format!("{p}*{dx}"),
                    (false, _) => format!("({p})*{dx}"),
                }
            })
            .collect::<Vec<_>>()
            .join(" + ")
    }
}

/// Basis of `Ω^k` in weight ≤ `w`.
fn form_basis(n: usize, k: usize, w: u32) -> Vec<(Monomial, u32)> {
    if k > n || (k as u32) > w {
        return Vec::new();
    }
    let masks: Vec<u32> = (0u32..1 << n).filter(|s| s.count_ones() as usize == k).collect();
    let mut out = Vec::new();
    for m in Monomial::all_up_to(n, w - k as u32) {
        for &s in &masks {
            out.push((m.clone(), s));
        }
    }
    out
}

fn basis_form(m: &Monomial, s: u32) -> Form {
    let mut f = Form::zero();
    f.add_term(m.clone(), s, Rational::one());
    f
}

/// The forms `K^k = 𝓘·Ω^k + d𝓘 ∧ Ω^(k-1)` at weight ≤ `W`.
#[derive(Clone, Debug)]
pub struct KIdealComplex {
    pub vars: VarContext,
    pub gens: Vec<Poly>,
    pub truncation: u32,
    /// `spans[k]` spans `K^k` truncated at weight `truncation`.
    pub spans: Vec<Vec<Form>>,
}

pub fn k_ideal_complex(gens: &[Poly], w: u32) -> Result<KIdealComplex, ReiffenError> {
    let Some(first) = gens.first() else { return Err(ReiffenError::ZeroPolynomial) };
    let vars = first.vars().clone();
    if gens.iter().any(Poly::is_zero) {
        return Err(ReiffenError::ZeroPolynomial);
    }
    for g in gens {
        first.try_add(g)?;
    }
    let n = vars.len();
    let dgens: Vec<Form> = gens.iter().map(|g| Form::from_poly(g).d(n)).collect();
    let mut spans = Vec::new();
    for k in 0..=n {
        let mut span = Vec::new();
        for (m, s) in form_basis(n, k, w) {
            let omega = basis_form(&m, s);
            for g in gens {
                push_nonzero(&mut span, omega.mul_poly(g).truncate(w));
            }
        }
        if k > 0 {
            for (m, s) in form_basis(n, k - 1, w) {
                let eta = basis_form(&m, s);
                for dg in &dgens {
                    push_nonzero(&mut span, wedge(dg, &eta, n).truncate(w));
                }
            }
        }
        spans.push(span);
    }
    Ok(KIdealComplex { vars, gens: gens.to_vec(), truncation: w, spans })
}

fn push_nonzero(span: &mut Vec<Form>, f: Form) {
    if !f.is_zero() {
        span.push(f);
    }
}

/// `a ∧ b` for a 1-form `a`.
fn wedge(a: &Form, b: &Form, n: usize) -> Form {
    let mut out = Form::zero();
    for ((m, s), c) in a.terms() {
        debug_assert_eq!(s.count_ones(), 1);
        let i = s.trailing_zeros() as usize;
        debug_assert!(i < n);
        let mut scaled = Form::zero();
        for ((bm, bs), bc) in b.terms() {
            scaled.add_term(bm.mul(m), *bs, bc * c);
        }
        out = out.add(&scaled.wedge_dx(i));
    }
    out
}

impl KIdealComplex {
    fn n(&self) -> usize {
        self.vars.len()
    }

    fn index(&self, k: usize) -> BTreeMap<(Monomial, u32), usize> {
        form_basis(self.n(), k, self.truncation).into_iter().enumerate().map(|(i, b)| (b, i)).collect()
    }

    fn column(index: &BTreeMap<(Monomial, u32), usize>, f: &Form) -> Vec<(usize, Rational)> {
        let mut col: Vec<(usize, Rational)> = f.terms().map(|(k, c)| (index[k], c.clone())).collect();
        col.sort_by_key(|(i, _)| *i);
        col
    }

    fn echelon(&self, k: usize) -> Echelon {
        let index = self.index(k);
        let mut e = Echelon::new();
        if let Some(span) = self.spans.get(k) {
            for f in span {
                e.insert(&Self::column(&index, f));
            }
        }
        e
    }

    pub fn dim_form(&self, k: usize) -> usize {
        form_basis(self.n(), k, self.truncation).len()
    }

    pub fn rank(&self, k: usize) -> usize {
        self.echelon(k).rank()
    }

    pub fn contains(&self, k: usize, f: &Form) -> bool {
        let f = f.truncate(self.truncation);
        self.echelon(k).contains(&Self::column(&self.index(k), &f))
    }

    /// `d(K^k) ⊆ K^(k+1)` for every `k`.
    pub fn is_differential_ideal(&self) -> bool {
        (0..self.n()).all(|k| {
            let target = self.echelon(k + 1);
            let index = self.index(k + 1);
            self.spans[k].iter().all(|f| target.contains(&Self::column(&index, &f.d(self.n()))))
        })
    }

    /// `dim H^k(Ω/K)` at this truncation, `k = 0..=n`.
    pub fn quotient_cohomology(&self) -> BTreeMap<i32, usize> {
        let n = self.n();
        let dim_q: Vec<usize> = (0..=n).map(|k| self.dim_form(k) - self.rank(k)).collect();
        let mut rank_d = vec![0usize; n + 1];
        for k in 0..n {
            let mut e = self.echelon(k + 1);
            let base = e.rank();
            let index = self.index(k + 1);
            for (m, s) in form_basis(n, k, self.truncation) {
                e.insert(&Self::column(&index, &basis_form(&m, s).d(n)));
            }
            rank_d[k] = e.rank() - base;
        }
        (0..=n).map(|k| (k as i32, dim_q[k] - rank_d[k] - if k > 0 { rank_d[k - 1] } else { 0 })).collect()
    }
}

/// Cohomology of `Ω/K` at `W` with stability against `W + 1`.
pub fn classical_stalk_cohomology(gens: &[Poly], w: u32) -> Result<CohomologyReport, ReiffenError> {
    let a = k_ideal_complex(gens, w)?.quotient_cohomology();
    let b = k_ideal_complex(gens, w + 1)?.quotient_cohomology();
    Ok(CohomologyReport::compare(&a, &b))
}

/// One linear equation `Σ coef·unknown = rhs`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    pub monomial: Monomial,
    pub coefficients: Vec<(usize, Rational)>,
    pub rhs: Rational,
}

impl Row {
    pub fn display(&self, labels: &[String]) -> String {
        let mut out = String::new();
        let terms = self.coefficients.iter().map(|(j, c)| (labels[*j].clone(), c));
        crate::poly::write_terms(&mut out, terms).expect("writing to a string");
        format!("{out} = {}", self.rhs)
    }

    /// Equal to `Σ coef·label = rhs` up to a nonzero rational factor.
    pub fn matches(&self, labels: &[String], expected: &[(&str, i64)], rhs: i64) -> bool {
        let mut want: BTreeMap<&str, Rational> = expected.iter().map(|(l, c)| (*l, Rational::from_integer((*c).into()))).collect();
        want.retain(|_, c| !c.is_zero());
        let have: BTreeMap<&str, Rational> = self.coefficients.iter().map(|(j, c)| (labels[*j].as_str(), c.clone())).collect();
        if have.len() != want.len() || !have.keys().eq(want.keys()) {
            return false;
        }
        let want_rhs = Rational::from_integer(rhs.into());
        let (l, c) = want.iter().next().map_or((None, None), |(l, c)| (Some(*l), Some(c.clone())));
        let factor = match (l, c) {
            (Some(l), Some(c)) => &have[l] / &c,
            _ if !want_rhs.is_zero() => &self.rhs / &want_rhs,
            _ => return self.rhs.is_zero(),
        };
        !factor.is_zero() && want.iter().all(|(l, c)| have[l] == c * &factor) && self.rhs == want_rhs * &factor
    }
}

/// The truncated equation `f·g = Σ ∂ᵢ(f·hᵢ)` in the Taylor coefficients of `hᵢ`.
#[derive(Clone, Debug)]
pub struct DivergenceSystem {
    pub f: Poly,
    pub g: Poly,
    pub degree: u32,
    /// `unknowns[j] = (i, m)`: the coefficient of `m` in `hᵢ`.
    pub unknowns: Vec<(usize, Monomial)>,
    pub labels: Vec<String>,
    pub rows: Vec<Row>,
}

fn unknown_label(n: usize, i: usize, m: &Monomial) -> String {
    let exps: Vec<u32> = (0..n).map(|j| m.exponent(j)).collect();
    let head = if n <= 26 { ((b'A' + i as u8) as char).to_string() } else { format!("h{}_", i + 1) };
    if exps.iter().all(|e| *e < 10) {
        format!("{head}{}", exps.iter().map(u32::to_string).collect::<String>())
    } else {
        format!("{head}_{{{}}}", exps.iter().map(u32::to_string).collect::<Vec<_>>().join(","))
    }
}

pub fn divergence_system(f: &Poly, g: &Poly, degree: u32) -> Result<DivergenceSystem, ReiffenError> {
    if f.is_zero() {
        return Err(ReiffenError::ZeroPolynomial);
    }
    f.try_add(g)?;
    let m0 = f.min_degree().finite().expect("nonzero");
    if m0 == 0 {
        return Err(ReiffenError::UnitPolynomial);
    }
    let vars = f.vars().clone();
    let n = vars.len();
    let h_degree = (degree + 1).checked_sub(m0);
    let mut unknowns = Vec::new();
    if let Some(hd) = h_degree {
        for i in 0..n {
            for m in Monomial::all_up_to(n, hd) {
                unknowns.push((i, m));
            }
        }
    }
    let labels = unknowns.iter().map(|(i, m)| unknown_label(n, *i, m)).collect();
    let mut columns: BTreeMap<Monomial, Vec<(usize, Rational)>> = BTreeMap::new();
    for (j, (i, m)) in unknowns.iter().enumerate() {
        let image = f.mul_monomial(m).partial(*i)?;
        for (t, c) in image.terms() {
            if t.degree() <= degree {
                columns.entry(t.clone()).or_default().push((j, c.clone()));
            }
        }
    }
    let fg = f.try_mul(g)?;
    let mut rows = Vec::new();
    for t in Monomial::all_up_to(n, degree) {
        let coefficients = columns.remove(&t).unwrap_or_default();
        let rhs = fg.coefficient(&t);
        if coefficients.is_empty() && rhs.is_zero() {
            continue;
        }
        rows.push(Row { monomial: t, coefficients, rhs });
    }
    Ok(DivergenceSystem { f: f.clone(), g: g.clone(), degree, unknowns, labels, rows })
}

impl DivergenceSystem {
    pub fn matrix(&self) -> (SparseMatrix, Vec<Rational>) {
        let mut cols: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); self.unknowns.len()];
        for (r, row) in self.rows.iter().enumerate() {
            for (j, c) in &row.coefficients {
                cols[*j].push((r, c.clone()));
            }
        }
        let b = self.rows.iter().map(|r| r.rhs.clone()).collect();
        (SparseMatrix::from_columns(self.rows.len(), cols), b)
    }

    /// Repeatedly sets to zero every unknown that appears alone in a row
    /// with zero right-hand side and substitutes. Returns the forced zeros
    /// and the remaining nontrivial rows.
    pub fn forced_zero_view(&self) -> (Vec<usize>, Vec<Row>) {
        let mut rows = self.rows.clone();
        let mut zeros = Vec::new();
        loop {
            let forced: Vec<usize> = rows
                .iter()
                .filter(|r| r.coefficients.len() == 1 && r.rhs.is_zero())
                .map(|r| r.coefficients[0].0)
                .collect();
            if forced.is_empty() {
                break;
            }
            zeros.extend(forced.iter().copied());
            for r in &mut rows {
                r.coefficients.retain(|(j, _)| !forced.contains(j));
            }
            rows.retain(|r| !(r.coefficients.is_empty() && r.rhs.is_zero()));
        }
        zeros.sort_unstable();
        zeros.dedup();
        (zeros, rows)
    }

    /// `hᵢ` from a coefficient vector.
    pub fn witness_polys(&self, x: &[Rational]) -> Vec<Poly> {
        let vars = self.f.vars();
        let mut hs = vec![Poly::zero(vars); vars.len()];
        for ((i, m), c) in self.unknowns.iter().zip(x) {
            hs[*i].add_term(m.clone(), c.clone());
        }
        hs
    }
}

/// `f·g - Σ ∂ᵢ(f·hᵢ)`.
pub fn divergence_residual(f: &Poly, g: &Poly, h: &[Poly]) -> Result<Poly, ReiffenError> {
    let mut r = f.try_mul(g)?;
    for (i, hi) in h.iter().enumerate() {
        r = r.try_sub(&f.try_mul(hi)?.partial(i)?)?;
    }
    Ok(r)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum FeasibilityVerdict {
    /// Solvable up to degree `D`; says nothing about the untruncated equation.
    Feasible { witness: Vec<Poly> },
    /// Row multipliers combining the rows into `0 = 1`.
    Infeasible { certificate: Vec<Rational> },
    ResourceLimit { unknowns: usize, cap: usize },
}

impl FeasibilityVerdict {
    pub fn is_infeasible(&self) -> bool {
        matches!(self, FeasibilityVerdict::Infeasible { .. })
    }

    pub fn is_feasible(&self) -> bool {
        matches!(self, FeasibilityVerdict::Feasible { .. })
    }
}

impl fmt::Display for FeasibilityVerdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeasibilityVerdict::Feasible { witness } => {
                let hs: Vec<String> = witness.iter().map(Poly::to_string).collect();
                write!(f, "verdict=feasible witness=[{}]", hs.join(", "))
            }
            FeasibilityVerdict::Infeasible { certificate } => {
                let ys: Vec<String> = certificate.iter().map(Rational::to_string).collect();
                write!(f, "verdict=infeasible certificate=[{}]", ys.join(", "))
            }
            FeasibilityVerdict::ResourceLimit { unknowns, cap } => {
                write!(f, "verdict=resource-limit unknowns={unknowns} cap={cap}")
            }
        }
    }
}

pub fn solve_system(system: &DivergenceSystem, cap: usize) -> FeasibilityVerdict {
    if system.unknowns.len() > cap {
        return FeasibilityVerdict::ResourceLimit { unknowns: system.unknowns.len(), cap };
    }
    let (a, b) = system.matrix();
    match solve(&a, &b) {
        Solution::Feasible(x) => FeasibilityVerdict::Feasible { witness: system.witness_polys(&x) },
        Solution::Infeasible(y) => {
            debug_assert!(verify_certificate(&a, &b, &y));
            FeasibilityVerdict::Infeasible { certificate: y }
        }
    }
}

pub fn divergence_feasible(f: &Poly, g: &Poly, degree: u32) -> Result<FeasibilityVerdict, ReiffenError> {
    divergence_feasible_with_cap(f, g, degree, DEFAULT_UNKNOWN_CAP)
}

pub fn divergence_feasible_with_cap(f: &Poly, g: &Poly, degree: u32, cap: usize) -> Result<FeasibilityVerdict, ReiffenError> {
    Ok(solve_system(&divergence_system(f, g, degree)?, cap))
}

/// `x^q + y^p + y^(p-1)·x` in `ℚ[x, y]`.
pub fn family_member(q: u32, p: u32) -> Poly {
    let vars = VarContext::new(["x", "y"]);
    let one = Rational::one();
    Poly::from_terms(
        &vars,
        [
            (Monomial::from_exponents(vec![q, 0]), one.clone()),
            (Monomial::from_exponents(vec![0, p]), one.clone()),
            (Monomial::from_exponents(vec![1, p - 1]), one),
        ],
    )
}

#[derive(Clone, Debug)]
pub struct ScanCell {
    pub q: u32,
    pub p: u32,
    pub verdict: FeasibilityVerdict,
}

impl fmt::Display for ScanCell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let v = match &self.verdict {
            FeasibilityVerdict::Feasible { .. } => "feasible",
            FeasibilityVerdict::Infeasible { .. } => "infeasible",
            FeasibilityVerdict::ResourceLimit { .. } => "resource-limit",
        };
        write!(f, "q={} p={} verdict={v}", self.q, self.p)
    }
}

/// Verdicts with `g = 1` for `4 ≤ q ≤ q_max`, `q + 1 ≤ p ≤ p_max`.
pub fn family_scan(q_max: u32, p_max: u32, degree: u32) -> Result<Vec<ScanCell>, ReiffenError> {
    if degree < p_max + 3 {
        return Err(ReiffenError::ScanDegree { degree, p_max });
    }
    let mut cells = Vec::new();
    for q in 4..=q_max {
        for p in q + 1..=p_max {
            let f = family_member(q, p);
            let verdict = divergence_feasible(&f, &Poly::one(f.vars()), degree)?;
            cells.push(ScanCell { q, p, verdict });
        }
    }
    Ok(cells)
}
