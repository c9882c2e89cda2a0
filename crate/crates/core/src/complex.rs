//! Finite cochain complexes of exact rational matrices, obtained from graded
//! algebras by weight truncation, and their cohomology.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use crate::dg::{DGMorphism, DGPresentation};
use crate::error::StructureError;
use crate::gca::{Algebra, Element, Exps};
use crate::linalg::{dense_to_columns, nullspace, rank_ff, SparseMatrix};
use crate::poly::monomial_text;

/// Cochain complex `C^lo → C^(lo+1) → …` with `d` of degree +1.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatrixComplex {
    lo: i32,
    labels: Vec<Vec<String>>,
    diffs: Vec<SparseMatrix>,
}

impl MatrixComplex {
    /// `diffs[i]` maps degree `lo + i` to `lo + i + 1`; checks shapes and `d² = 0`.
    pub fn new(lo: i32, labels: Vec<Vec<String>>, diffs: Vec<SparseMatrix>) -> Result<Self, StructureError> {
        if diffs.len() + 1 != labels.len().max(1) {
            return Err(StructureError::Mismatch(format!(
                "{} degrees need {} differentials, got {}",
                labels.len(),
                labels.len().saturating_sub(1),
                diffs.len()
            )));
        }
        for (i, d) in diffs.iter().enumerate() {
            if d.ncols() != labels[i].len() || d.nrows() != labels[i + 1].len() {
                return Err(StructureError::Mismatch(format!("differential out of degree {} has the wrong shape", lo + i as i32)));
            }
        }
        let c = MatrixComplex { lo, labels, diffs };
        c.check_d_squared()?;
        Ok(c)
    }

    pub fn empty() -> Self {
        MatrixComplex { lo: 0, labels: Vec::new(), diffs: Vec::new() }
    }

    pub fn is_empty(&self) -> bool {
        self.labels.iter().all(Vec::is_empty)
    }

    pub fn lo(&self) -> i32 {
        self.lo
    }

    pub fn hi(&self) -> i32 {
        self.lo + self.labels.len() as i32 - 1
    }

    pub fn degrees(&self) -> std::ops::RangeInclusive<i32> {
        self.lo..=self.hi()
    }

    fn slot(&self, n: i32) -> Option<usize> {
        (n >= self.lo && n <= self.hi()).then(|| (n - self.lo) as usize)
    }

    pub fn dim(&self, n: i32) -> usize {
        self.slot(n).map_or(0, |i| self.labels[i].len())
    }

    pub fn labels(&self, n: i32) -> &[String] {
        self.slot(n).map_or(&[], |i| &self.labels[i])
    }

    /// `d^n : C^n → C^(n+1)`, a zero matrix outside the stored range.
    pub fn differential(&self, n: i32) -> SparseMatrix {
        match self.slot(n) {
            Some(i) if i < self.diffs.len() => self.diffs[i].clone(),
            _ => SparseMatrix::zero(self.dim(n + 1), self.dim(n)),
        }
    }

    pub fn check_d_squared(&self) -> Result<(), StructureError> {
        for w in self.diffs.windows(2) {
            if !w[1].mul(&w[0]).is_zero() {
                let degree = self.lo + self.diffs.iter().position(|d| d == &w[0]).unwrap_or(0) as i32;
                return Err(StructureError::NotAComplex { degree });
            }
        }
        Ok(())
    }

    pub fn ranks(&self) -> BTreeMap<i32, usize> {
        self.diffs.iter().enumerate().map(|(i, d)| (self.lo + i as i32, rank_ff(d))).collect()
    }

    /// `dim H^n = dim C^n - rank d^n - rank d^(n-1)`.
    pub fn cohomology(&self) -> BTreeMap<i32, usize> {
        let ranks = self.ranks();
        self.degrees()
            .map(|n| {
                let r_out = ranks.get(&n).copied().unwrap_or(0);
                let r_in = ranks.get(&(n - 1)).copied().unwrap_or(0);
                (n, self.dim(n) - r_out - r_in)
            })
            .collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.degrees().map(|n| sign(n) * self.dim(n) as i64).sum()
    }

    /// Conjugates every differential by the given basis permutations.
    pub fn permute_bases(&self, perms: &[Vec<usize>]) -> MatrixComplex {
        let labels = self.labels.iter().zip(perms).map(|(l, p)| p.iter().map(|&i| l[i].clone()).collect()).collect();
        let diffs = self
            .diffs
            .iter()
            .enumerate()
            .map(|(i, d)| {
                let mut inv = vec![0; perms[i + 1].len()];
                for (new, &old) in perms[i + 1].iter().enumerate() {
                    inv[old] = new;
                }
                let cols = perms[i]
                    .iter()
                    .map(|&old| d.column(old).iter().map(|(r, v)| (inv[*r], v.clone())).collect())
                    .collect();
                SparseMatrix::from_columns(d.nrows(), cols)
            })
            .collect();
        MatrixComplex { lo: self.lo, labels, diffs }
    }

    /// Shifts degrees by `k`, so that `C[k]^n = C^(n+k)`.
    pub fn shift(&self, k: i32) -> MatrixComplex {
        MatrixComplex { lo: self.lo - k, labels: self.labels.clone(), diffs: self.diffs.clone() }
    }

    /// Complex of the given dims with zero differentials.
    pub fn zero_maps(lo: i32, dims: &[usize]) -> MatrixComplex {
        let labels: Vec<Vec<String>> = dims.iter().enumerate().map(|(i, &d)| (0..d).map(|j| format!("e{i}_{j}")).collect()).collect();
        let diffs = dims.windows(2).map(|w| SparseMatrix::zero(w[1], w[0])).collect();
        MatrixComplex { lo, labels, diffs }
    }
}

pub(crate) fn sign(n: i32) -> i64 {
    if n.rem_euclid(2) == 0 {
        1
    } else {
        -1
    }
}

/// Cohomology dimensions with per-degree stability flags.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct CohomologyReport {
    pub dims: BTreeMap<i32, usize>,
    pub stable: BTreeMap<i32, bool>,
}

impl CohomologyReport {
    /// Pairs the dims at `W` with those at `W + 1`.
    pub fn compare(at_w: &BTreeMap<i32, usize>, at_next: &BTreeMap<i32, usize>) -> Self {
        let mut dims = BTreeMap::new();
        let mut stable = BTreeMap::new();
        for n in at_w.keys().chain(at_next.keys()) {
            let a = at_w.get(n).copied().unwrap_or(0);
            let b = at_next.get(n).copied().unwrap_or(0);
            dims.insert(*n, a);
            stable.insert(*n, a == b);
        }
        CohomologyReport { dims, stable }
    }

    pub fn dim(&self, n: i32) -> usize {
        self.dims.get(&n).copied().unwrap_or(0)
    }

    /// Degrees outside the report count as stable zeros.
    pub fn is_stable(&self, n: i32) -> bool {
        self.stable.get(&n).copied().unwrap_or(true)
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.dims.iter().map(|(n, d)| sign(*n) * *d as i64).sum()
    }

    /// Dims in stable degrees only.
    pub fn stable_dims(&self) -> BTreeMap<i32, usize> {
        self.dims.iter().filter(|(n, _)| self.is_stable(**n)).map(|(n, d)| (*n, *d)).collect()
    }

    /// Nonzero dims in stable degrees; zeros are dropped so tables of
    /// different ranges compare cleanly.
    pub fn stable_support(&self) -> BTreeMap<i32, usize> {
        self.stable_dims().into_iter().filter(|(_, d)| *d > 0).collect()
    }

    pub fn all_stable(&self) -> bool {
        self.stable.values().all(|s| *s)
    }
}

impl fmt::Display for CohomologyReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (n, d) in &self.dims {
            writeln!(f, "H^{{{n}}} dim={d} stable={}", self.is_stable(*n))?;
        }
        Ok(())
    }
}

pub fn cohomology_dims(c: &MatrixComplex) -> Result<CohomologyReport, StructureError> {
    c.check_d_squared()?;
    let dims = c.cohomology();
    Ok(CohomologyReport::compare(&dims, &dims))
}

/// Computes cohomology of `build(W)` and `build(W + 1)` and flags agreement.
/// Stable flags are evidence about the untruncated limit, not proof.
pub fn stability_report<F>(build: F, w: u32) -> Result<CohomologyReport, StructureError>
where
    F: Fn(u32) -> Result<MatrixComplex, StructureError>,
{
    let a = build(w)?.cohomology();
    let b = build(w + 1)?.cohomology();
    Ok(CohomologyReport::compare(&a, &b))
}

/// A complex spanned by algebra monomials, remembering which monomial each
/// basis vector is.
#[derive(Clone, Debug)]
pub struct TruncatedComplex {
    pub complex: MatrixComplex,
    pub basis: BTreeMap<i32, Vec<Exps>>,
    index: HashMap<Exps, (i32, usize)>,
}

impl TruncatedComplex {
    /// Builds the complex on `basis`, with `degree` grading it and `apply`
    /// computing the differential. Terms rejected by `in_window` are dropped
    /// (the quotient by the complement); any other term must be in the basis.
    pub fn build(
        algebra: &Algebra,
        basis: Vec<Exps>,
        degree: &dyn Fn(&Exps) -> i32,
        apply: &dyn Fn(&Exps) -> Element,
        in_window: &dyn Fn(&Exps) -> bool,
    ) -> Result<Self, StructureError> {
        let mut by_degree: BTreeMap<i32, Vec<Exps>> = BTreeMap::new();
        for m in basis {
            by_degree.entry(degree(&m)).or_default().push(m);
        }
        let (lo, hi) = match (by_degree.keys().next(), by_degree.keys().last()) {
            (Some(&lo), Some(&hi)) => (lo, hi),
            _ => return Ok(TruncatedComplex { complex: MatrixComplex::empty(), basis: by_degree, index: HashMap::new() }),
        };
        for n in lo..=hi {
            by_degree.entry(n).or_default();
        }
        let mut index = HashMap::new();
        for (n, ms) in &by_degree {
            for (i, m) in ms.iter().enumerate() {
                index.insert(m.clone(), (*n, i));
            }
        }
        let names = algebra.names();
        let labels: Vec<Vec<String>> = by_degree.values().map(|ms| ms.iter().map(|m| label(&names, m)).collect()).collect();
        let mut diffs = Vec::new();
        for n in lo..hi {
            let src = &by_degree[&n];
            let nrows = by_degree[&(n + 1)].len();
            let mut cols = Vec::with_capacity(src.len());
            for m in src {
                let mut col = Vec::new();
                for (t, c) in apply(m).terms() {
                    if !in_window(t) {
                        continue;
                    }
                    match index.get(t) {
                        Some(&(d, i)) if d == n + 1 => col.push((i, c.clone())),
                        _ => {
                            return Err(StructureError::Mismatch(format!(
                                "differential of {} has term {} outside the basis",
                                label(&names, m),
                                label(&names, t)
                            )))
                        }
                    }
                }
                cols.push(col);
            }
            diffs.push(SparseMatrix::from_columns(nrows, cols));
        }
        let complex = MatrixComplex::new(lo, labels, diffs)?;
        Ok(TruncatedComplex { complex, basis: by_degree, index })
    }

    pub fn position(&self, m: &[u32]) -> Option<(i32, usize)> {
        self.index.get(m).copied()
    }

    /// Matrix in degree `n` of a linear map given on basis monomials.
    pub fn map_matrix(&self, target: &TruncatedComplex, n: i32, map: &dyn Fn(&Exps) -> Element) -> SparseMatrix {
        let src = self.basis.get(&n).map_or(&[][..], Vec::as_slice);
        let nrows = target.complex.dim(n);
        let cols = src
            .iter()
            .map(|m| {
                map(m)
                    .terms()
                    .filter_map(|(t, c)| match target.position(t) {
                        Some((d, i)) if d == n => Some((i, c.clone())),
                        _ => None,
                    })
                    .collect()
            })
            .collect();
        SparseMatrix::from_columns(nrows, cols)
    }
}

fn label(names: &[String], m: &[u32]) -> String {
    let s = monomial_text(names, m);
    if s.is_empty() {
        "1".to_string()
    } else {
        s
    }
}

/// Rejects presentations whose differential would not preserve the
/// truncation window.
pub fn check_weights(p: &DGPresentation) -> Result<(), StructureError> {
    let a = p.algebra();
    for (g, img) in a.generators().iter().zip(p.differential_images()) {
        if !g.is_odd() && g.weight == 0 {
            return Err(StructureError::ZeroWeight(g.name.clone()));
        }
        if let Some((m, _)) = img.terms().find(|(m, _)| a.weight(m) < g.weight) {
            return Err(StructureError::WeightDecreasing { generator: g.name.clone(), weight: g.weight, term_weight: a.weight(m) });
        }
    }
    Ok(())
}

/// The presentation's own complex modulo elements of weight > `w`.
pub fn truncate_presentation(p: &DGPresentation, w: u32) -> Result<TruncatedComplex, StructureError> {
    check_weights(p)?;
    let a = p.algebra();
    let basis = a.monomials_up_to_weight(w, 0..=0, &|m| p.is_standard(m));
    TruncatedComplex::build(
        a,
        basis,
        &|m| a.degree(m),
        &|m| p.differential(&a.monomial_element(m.clone())),
        &|m| a.weight(m) <= w,
    )
}

pub fn weight_truncate(p: &DGPresentation, w: u32) -> Result<MatrixComplex, StructureError> {
    Ok(truncate_presentation(p, w)?.complex)
}

pub fn presentation_stability(p: &DGPresentation, w: u32) -> Result<CohomologyReport, StructureError> {
    stability_report(|w| weight_truncate(p, w), w)
}

/// Degree-wise matrices of a morphism between truncated presentations.
pub fn morphism_matrices(
    phi: &DGMorphism,
    src: &TruncatedComplex,
    tgt: &TruncatedComplex,
) -> BTreeMap<i32, SparseMatrix> {
    let a = phi.source.algebra();
    src.complex
        .degrees()
        .map(|n| (n, src.map_matrix(tgt, n, &|m| phi.apply(&a.monomial_element(m.clone())))))
        .collect()
}

/// Checks `φ d = d φ` as matrices at truncation `w`.
pub fn chain_map_check(phi: &DGMorphism, w: u32) -> Result<bool, StructureError> {
    if let Some(g) = phi.weight_violation() {
        return Err(StructureError::MorphismWeight(g));
    }
    let src = truncate_presentation(&phi.source, w)?;
    let tgt = truncate_presentation(&phi.target, w)?;
    let mats = morphism_matrices(phi, &src, &tgt);
    for n in src.complex.degrees() {
        let phi_n = &mats[&n];
        let lhs = tgt.complex.differential(n).mul(phi_n);
        let phi_next = mats.get(&(n + 1)).cloned().unwrap_or_else(|| SparseMatrix::zero(tgt.complex.dim(n + 1), src.complex.dim(n + 1)));
        let rhs = phi_next.mul(&src.complex.differential(n));
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Rank of `H^n(φ)`: `dim(φ(Z) + B) - dim B` in the target.
pub fn induced_rank(phi_n: &SparseMatrix, src: &MatrixComplex, tgt: &MatrixComplex, n: i32) -> usize {
    let z = nullspace(&src.differential(n));
    let z = dense_to_columns(&z, src.dim(n));
    let image = phi_n.mul(&z);
    let b = tgt.differential(n - 1);
    rank_ff(&b.hstack(&image)) - rank_ff(&b)
}

/// Rank of `H^n(φ)` for a morphism of presentations at truncation `w`.
pub fn induced_map_rank(phi: &DGMorphism, w: u32, n: i32) -> Result<usize, StructureError> {
    let src = truncate_presentation(&phi.source, w)?;
    let tgt = truncate_presentation(&phi.target, w)?;
    let mats = morphism_matrices(phi, &src, &tgt);
    let phi_n = mats.get(&n).cloned().unwrap_or_else(|| SparseMatrix::zero(tgt.complex.dim(n), 0));
    Ok(induced_rank(&phi_n, &src.complex, &tgt.complex, n))
}

/// For a complex `C` with a subcomplex `F` spanned by the flagged basis
/// vectors, returns the dimension of the image of `H^n(C) → H^n(C/F)`:
/// `dim Z^n(C) - dim Z^n(F) - rank d_(C/F)^(n-1)`.
pub fn quotient_image_dims(c: &MatrixComplex, in_sub: &BTreeMap<i32, Vec<bool>>) -> Result<BTreeMap<i32, usize>, StructureError> {
    let pick = |n: i32, want: bool| -> Vec<usize> {
        let flags = in_sub.get(&n);
        (0..c.dim(n)).filter(|&i| flags.map_or(false, |f| f[i]) == want).collect()
    };
    let mut out = BTreeMap::new();
    let mut rank_q_prev = 0usize;
    for n in c.degrees() {
        let d = c.differential(n);
        let (f_n, q_n) = (pick(n, true), pick(n, false));
        let (f_next, q_next) = (pick(n + 1, true), pick(n + 1, false));
        // F must be closed under d
        let leak = d.select_columns(&f_n).select_rows(&q_next);
        if !leak.is_zero() {
            return Err(StructureError::Mismatch(format!("flagged basis in degree {n} is not a subcomplex")));
        }
        let d_f = d.select_columns(&f_n).select_rows(&f_next);
        let d_q = d.select_columns(&q_n).select_rows(&q_next);
        let z_c = c.dim(n) - rank_ff(&d);
        let z_f = f_n.len() - rank_ff(&d_f);
        out.insert(n, z_c - z_f - rank_q_prev);
        rank_q_prev = rank_ff(&d_q);
    }
    Ok(out)
}
