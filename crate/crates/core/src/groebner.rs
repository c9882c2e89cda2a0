//! Ideal arithmetic: Buchberger's algorithm, normal forms, colon ideals and
//! annihilator chains.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{One, Zero};

use crate::error::IdealError;
use crate::poly::{Monomial, Poly, Rational, VarContext};

pub const DEFAULT_PAIR_BUDGET: usize = 100_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OrderKind {
    Grevlex,
    Lex,
}

/// Monomial order. `perm[0]` is the most significant variable.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MonomialOrder {
    kind: OrderKind,
    perm: Vec<usize>,
}

impl MonomialOrder {
    pub fn grevlex(nvars: usize) -> Self {
        MonomialOrder { kind: OrderKind::Grevlex, perm: (0..nvars).collect() }
    }

    pub fn lex(nvars: usize) -> Self {
        MonomialOrder { kind: OrderKind::Lex, perm: (0..nvars).collect() }
    }

    /// `perm` must be a permutation of `0..perm.len()`.
    pub fn with_permutation(kind: OrderKind, perm: Vec<usize>) -> Option<Self> {
        let mut seen = vec![false; perm.len()];
        for &p in &perm {
            if p >= perm.len() || std::mem::replace(&mut seen[p], true) {
                return None;
            }
        }
        Some(MonomialOrder { kind, perm })
    }

    pub fn kind(&self) -> OrderKind {
        self.kind
    }

    pub fn nvars(&self) -> usize {
        self.perm.len()
    }

    /// A key whose lexicographic order realizes this monomial order.
    fn key(&self, m: &Monomial) -> Vec<i64> {
        match self.kind {
            OrderKind::Lex => self.perm.iter().map(|&v| m.exponent(v) as i64).collect(),
            OrderKind::Grevlex => std::iter::once(m.degree() as i64)
                .chain(self.perm.iter().rev().map(|&v| -(m.exponent(v) as i64)))
                .collect(),
        }
    }

    pub fn cmp(&self, a: &Monomial, b: &Monomial) -> Ordering {
        self.key(a).cmp(&self.key(b))
    }
}

/// Polynomial with terms sorted descending in a fixed order.
#[derive(Clone, Debug)]
struct Sorted {
    terms: Vec<(Monomial, Rational)>,
}

impl Sorted {
    fn from_poly(p: &Poly, order: &MonomialOrder) -> Sorted {
        let mut terms: Vec<_> = p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        terms.sort_by(|a, b| order.cmp(&b.0, &a.0));
        Sorted { terms }
    }

    fn lm(&self) -> &Monomial {
        &self.terms[0].0
    }

    fn lc(&self) -> &Rational {
        &self.terms[0].1
    }

    fn monic(mut self) -> Sorted {
        let inv = self.lc().recip();
        for t in &mut self.terms {
            t.1 *= &inv;
        }
        self
    }

    fn to_poly(&self, vars: &VarContext) -> Poly {
        Poly::from_terms(vars, self.terms.iter().cloned())
    }
}

type Work = BTreeMap<Vec<i64>, (Monomial, Rational)>;

fn work_add(work: &mut Work, order: &MonomialOrder, m: Monomial, c: Rational) {
    let k = order.key(&m);
    match work.entry(k) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert((m, c));
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            e.get_mut().1 += c;
            if e.get().1.is_zero() {
                e.remove();
            }
        }
    }
}

/// Full reduction of `p` by `basis`; returns the remainder, descending.
fn reduce(p: Vec<(Monomial, Rational)>, basis: &[Sorted], order: &MonomialOrder) -> Vec<(Monomial, Rational)> {
    let mut work = Work::new();
    for (m, c) in p {
        work_add(&mut work, order, m, c);
    }
    let mut rem = Vec::new();
    while let Some((_, (m, c))) = work.pop_last() {
        match basis.iter().find(|g| g.lm().divides(&m)) {
            Some(g) => {
                let q = g.lm().quotient_of(&m).expect("divides");
                let coef = &c / g.lc();
                for (mg, cg) in &g.terms[1..] {
                    work_add(&mut work, order, mg.mul(&q), -(&coef * cg));
                }
            }
            None => rem.push((m, c)),
        }
    }
    rem
}

/// Reduced Gröbner basis of an ideal under a fixed order.
#[derive(Clone, Debug)]
pub struct GroebnerBasis {
    vars: VarContext,
    order: MonomialOrder,
    generators: Vec<Poly>,
    source: Vec<Poly>,
    sorted: Vec<Sorted>,
}

impl PartialEq for GroebnerBasis {
    fn eq(&self, other: &Self) -> bool {
        self.vars == other.vars && self.order == other.order && self.generators == other.generators
    }
}

impl GroebnerBasis {
    pub fn vars(&self) -> &VarContext {
        &self.vars
    }

    pub fn order(&self) -> &MonomialOrder {
        &self.order
    }

    pub fn generators(&self) -> &[Poly] {
        &self.generators
    }

    pub fn source(&self) -> &[Poly] {
        &self.source
    }

    pub fn is_zero_ideal(&self) -> bool {
        self.generators.is_empty()
    }

    pub fn is_whole_ring(&self) -> bool {
        self.generators.iter().any(Poly::is_constant)
    }

    pub fn leading_monomials(&self) -> impl Iterator<Item = &Monomial> {
        self.sorted.iter().map(Sorted::lm)
    }

    pub fn normal_form(&self, p: &Poly) -> Poly {
        let terms = p.terms().map(|(m, c)| (m.clone(), c.clone())).collect();
        Poly::from_terms(&self.vars, reduce(terms, &self.sorted, &self.order))
    }

    pub fn contains(&self, p: &Poly) -> bool {
        self.normal_form(p).is_zero()
    }

    /// True when `m` is not divisible by any leading monomial.
    pub fn is_standard(&self, m: &Monomial) -> bool {
        !self.sorted.iter().any(|g| g.lm().divides(m))
    }

    /// Ideal containment `self ⊆ other`, via generators.
    pub fn is_subideal_of(&self, other: &GroebnerBasis) -> bool {
        self.generators.iter().all(|g| other.contains(g))
    }
}

pub fn normal_form(p: &Poly, g: &GroebnerBasis) -> Poly {
    g.normal_form(p)
}

pub fn buchberger(gens: &[Poly], vars: &VarContext, order: &MonomialOrder) -> Result<GroebnerBasis, IdealError> {
    buchberger_with_budget(gens, vars, order, DEFAULT_PAIR_BUDGET)
}

/// Buchberger's algorithm with the normal selection strategy and both
/// Buchberger criteria. Errors once more than `budget` S-pairs were reduced.
pub fn buchberger_with_budget(
    gens: &[Poly],
    vars: &VarContext,
    order: &MonomialOrder,
    budget: usize,
) -> Result<GroebnerBasis, IdealError> {
    for g in gens {
        if g.vars() != vars {
            return Err(crate::error::PolyError::ContextMismatch {
                left: vars.names().join(","),
                right: g.vars().names().join(","),
            }
            .into());
        }
    }
    let mut basis: Vec<Sorted> = Vec::new();
    for g in gens.iter().filter(|g| !g.is_zero()) {
        let s = Sorted::from_poly(g, order);
        let r = reduce(s.terms, &basis, order);
        if !r.is_empty() {
            basis.push(Sorted { terms: r }.monic());
        }
    }
    // pending pairs keyed for normal selection
    let mut pending: BTreeMap<(u32, Vec<i64>, usize, usize), ()> = BTreeMap::new();
    let pair_key = |basis: &[Sorted], i: usize, j: usize| {
        let l = basis[i].lm().lcm(basis[j].lm());
        (l.degree(), order.key(&l), i, j)
    };
    for j in 0..basis.len() {
        for i in 0..j {
            pending.insert(pair_key(&basis, i, j), ());
        }
    }
    let is_pending = |pending: &BTreeMap<(u32, Vec<i64>, usize, usize), ()>, basis: &[Sorted], a: usize, b: usize| {
        let (i, j) = if a < b { (a, b) } else { (b, a) };
        pending.contains_key(&pair_key(basis, i, j))
    };
    let mut used = 0usize;
    while let Some(((_, _, i, j), ())) = pending.pop_first() {
        let (lmi, lmj) = (basis[i].lm().clone(), basis[j].lm().clone());
        if lmi.is_coprime(&lmj) {
            continue;
        }
        let lcm = lmi.lcm(&lmj);
        let chain = (0..basis.len()).any(|k| {
            k != i
                && k != j
                && basis[k].lm().divides(&lcm)
                && !is_pending(&pending, &basis, i, k)
                && !is_pending(&pending, &basis, j, k)
        });
        if chain {
            continue;
        }
        used += 1;
        if used > budget {
            return Err(IdealError::PairBudgetExceeded { budget });
        }
        let qi = lmi.quotient_of(&lcm).expect("lcm");
        let qj = lmj.quotient_of(&lcm).expect("lcm");
        let mut s: Vec<(Monomial, Rational)> = Vec::new();
        for (m, c) in &basis[i].terms {
            s.push((m.mul(&qi), c / basis[i].lc()));
        }
        for (m, c) in &basis[j].terms {
            s.push((m.mul(&qj), -(c / basis[j].lc())));
        }
        let r = reduce(s, &basis, order);
        if r.is_empty() {
            continue;
        }
        basis.push(Sorted { terms: r }.monic());
        let n = basis.len() - 1;
        for k in 0..n {
            pending.insert(pair_key(&basis, k, n), ());
        }
    }
    Ok(finish(basis, gens, vars, order))
}

fn finish(basis: Vec<Sorted>, source: &[Poly], vars: &VarContext, order: &MonomialOrder) -> GroebnerBasis {
    // minimize
    let mut minimal: Vec<Sorted> = Vec::new();
    for (i, g) in basis.iter().enumerate() {
        let redundant = basis.iter().enumerate().any(|(j, h)| {
            j != i && h.lm().divides(g.lm()) && (h.lm() != g.lm() || j < i)
        });
        if !redundant {
            minimal.push(g.clone());
        }
    }
    // interreduce
    let mut reduced = Vec::with_capacity(minimal.len());
    for i in 0..minimal.len() {
        let others: Vec<Sorted> = minimal.iter().enumerate().filter(|(j, _)| *j != i).map(|(_, g)| g.clone()).collect();
        let lead = minimal[i].terms[0].clone();
        let tail = reduce(minimal[i].terms[1..].to_vec(), &others, order);
        let mut terms = vec![lead];
        terms.extend(tail);
        reduced.push(Sorted { terms }.monic());
    }
    reduced.sort_by(|a, b| order.cmp(b.lm(), a.lm()));
    GroebnerBasis {
        vars: vars.clone(),
        order: order.clone(),
        generators: reduced.iter().map(|s| s.to_poly(vars)).collect(),
        source: source.to_vec(),
        sorted: reduced,
    }
}

/// Exact quotient `h / f`, or `None` when `f` does not divide `h`.
pub fn divide_exact(h: &Poly, f: &Poly, order: &MonomialOrder) -> Option<Poly> {
    let fs = Sorted::from_poly(f, order);
    if fs.terms.is_empty() {
        return None;
    }
    let mut work = Work::new();
    for (m, c) in h.terms() {
        work_add(&mut work, order, m.clone(), c.clone());
    }
    let mut q = Poly::zero(h.vars());
    while let Some((_, (m, c))) = work.pop_last() {
        let qm = fs.lm().quotient_of(&m)?;
        let qc = &c / fs.lc();
        for (mf, cf) in &fs.terms[1..] {
            work_add(&mut work, order, mf.mul(&qm), -(&qc * cf));
        }
        q.add_term(qm, qc);
    }
    Some(q)
}

/// Reduced basis of `(I : f)`, via `I ∩ (f)` computed by eliminating an
/// auxiliary variable `t` from `t·I + (1 - t)·f` under lex.
pub fn colon_principal(gi: &GroebnerBasis, f: &Poly) -> Result<GroebnerBasis, IdealError> {
    if f.is_zero() {
        return Err(IdealError::ColonByZero);
    }
    let vars = gi.vars();
    if f.vars() != vars {
        return Err(crate::error::PolyError::ContextMismatch {
            left: vars.names().join(","),
            right: f.vars().names().join(","),
        }
        .into());
    }
    if gi.is_zero_ideal() {
        return buchberger(&[], vars, gi.order());
    }
    let ext = vars.with_leading("__t");
    let shift: Vec<usize> = (1..=vars.len()).collect();
    let t = Poly::var(&ext, 0).expect("t");
    let one = Poly::one(&ext);
    let mut gens: Vec<Poly> = gi.generators().iter().map(|g| &t * &g.remap(&ext, &shift)).collect();
    gens.push(&(&one - &t) * &f.remap(&ext, &shift));
    let elim = buchberger(&gens, &ext, &MonomialOrder::lex(ext.len()))?;
    let back: Vec<usize> = std::iter::once(0).chain(0..vars.len()).collect();
    let mut quotients = Vec::new();
    for g in elim.generators() {
        if g.terms().any(|(m, _)| m.exponent(0) > 0) {
            continue;
        }
        let h = g.remap(vars, &back);
        let q = divide_exact(&h, f, gi.order()).expect("intersection element is a multiple of f");
        quotients.push(q);
    }
    buchberger(&quotients, vars, gi.order())
}

/// Zero-divisor test in `ℚ[x]/I`: `(I : f)` strictly contains `I`.
pub fn is_zero_divisor(gi: &GroebnerBasis, f: &Poly) -> Result<bool, IdealError> {
    let c = colon_principal(gi, f)?;
    Ok(!c.is_subideal_of(gi))
}

/// Chain of colon ideals `(I : f^n)`, `n = 1..=n_max`.
#[derive(Clone, Debug)]
pub struct AnnChain {
    pub ideal: Vec<Poly>,
    pub element: Poly,
    pub chain: Vec<GroebnerBasis>,
    /// Smallest `n` with `(I : f^n) = (I : f^(n+1))`, if seen within the chain.
    pub stabilization: Option<usize>,
}

impl AnnChain {
    /// Checks `(I : f^n) ⊆ (I : f^(n+1))` by generator membership.
    pub fn is_ascending(&self) -> bool {
        self.chain.windows(2).all(|w| w[0].is_subideal_of(&w[1]))
    }
}

pub fn annihilator_chain(ideal: &[Poly], f: &Poly, n_max: usize, vars: &VarContext) -> Result<AnnChain, IdealError> {
    if n_max == 0 {
        return Err(IdealError::EmptyChain);
    }
    let gi = buchberger(ideal, vars, &MonomialOrder::grevlex(vars.len()))?;
    let mut chain = Vec::with_capacity(n_max);
    for n in 1..=n_max {
        chain.push(colon_principal(&gi, &f.pow(n as u32))?);
    }
    let stabilization = chain.windows(2).position(|w| w[0] == w[1]).map(|i| i + 1);
    Ok(AnnChain { ideal: ideal.to_vec(), element: f.clone(), chain, stabilization })
}

impl std::fmt::Display for GroebnerBasis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.generators.iter().map(|g| g.to_string()).collect();
        write!(f, "({})", if parts.is_empty() { "0".to_string() } else { parts.join(", ") })
    }
}

/// Monic leading coefficient check used by tests and invariants.
pub fn is_reduced(g: &GroebnerBasis) -> bool {
    g.sorted.iter().enumerate().all(|(i, p)| {
        p.lc().is_one()
            && p.terms.iter().all(|(m, _)| {
                g.sorted.iter().enumerate().all(|(j, q)| j == i || !q.lm().divides(m))
            })
    })
}
