//! Exact sparse linear algebra over ℚ.
//!
//! Ranks use fraction-free integer elimination: each column is scaled to a
//! primitive integer vector and reduced against the pivots found so far by
//! cross-multiplication, so no rational arithmetic happens inside the loop.

use std::collections::HashMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};

use crate::poly::Rational;

/// Column-major sparse matrix; entries within a column are sorted by row.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    cols: Vec<Vec<(usize, Rational)>>,
}

impl SparseMatrix {
    pub fn zero(nrows: usize, ncols: usize) -> Self {
        SparseMatrix { nrows, ncols, cols: vec![Vec::new(); ncols] }
    }

    pub fn identity(n: usize) -> Self {
        let cols = (0..n).map(|i| vec![(i, Rational::one())]).collect();
        SparseMatrix { nrows: n, ncols: n, cols }
    }

    /// Builds from columns; entries may be unsorted, repeated or zero.
    pub fn from_columns(nrows: usize, cols: Vec<Vec<(usize, Rational)>>) -> Self {
        let ncols = cols.len();
        let cols = cols.into_iter().map(|c| normalize_column(nrows, c)).collect();
        SparseMatrix { nrows, ncols, cols }
    }

    pub fn from_dense(rows: &[Vec<Rational>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, Vec::len);
        let mut cols = vec![Vec::new(); ncols];
        for (r, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "ragged dense matrix");
            for (c, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    cols[c].push((r, v.clone()));
                }
            }
        }
        SparseMatrix { nrows, ncols, cols }
    }

    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let dense: Vec<Vec<Rational>> =
            rows.iter().map(|r| r.iter().map(|&v| Rational::from_integer(v.into())).collect()).collect();
        Self::from_dense(&dense)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn column(&self, c: usize) -> &[(usize, Rational)] {
        &self.cols[c]
    }

    pub fn columns(&self) -> &[Vec<(usize, Rational)>] {
        &self.cols
    }

    pub fn nnz(&self) -> usize {
        self.cols.iter().map(Vec::len).sum()
    }

    pub fn is_zero(&self) -> bool {
        self.cols.iter().all(Vec::is_empty)
    }

    pub fn get(&self, r: usize, c: usize) -> Rational {
        match self.cols[c].binary_search_by_key(&r, |e| e.0) {
            Ok(i) => self.cols[c][i].1.clone(),
            Err(_) => Rational::zero(),
        }
    }

    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let mut out = vec![vec![Rational::zero(); self.ncols]; self.nrows];
        for (c, col) in self.cols.iter().enumerate() {
            for (r, v) in col {
                out[*r][c] = v.clone();
            }
        }
        out
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut cols = vec![Vec::new(); self.nrows];
        for (c, col) in self.cols.iter().enumerate() {
            for (r, v) in col {
                cols[*r].push((c, v.clone()));
            }
        }
        SparseMatrix { nrows: self.ncols, ncols: self.nrows, cols }
    }

    /// `self * other`.
    pub fn mul(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.ncols, other.nrows, "dimension mismatch in product");
        let cols = other
            .cols
            .iter()
            .map(|ocol| {
                let mut acc: HashMap<usize, Rational> = HashMap::new();
                for (k, v) in ocol {
                    for (r, w) in &self.cols[*k] {
                        *acc.entry(*r).or_insert_with(Rational::zero) += v * w;
                    }
                }
                normalize_column(self.nrows, acc.into_iter().collect())
            })
            .collect();
        SparseMatrix { nrows: self.nrows, ncols: other.ncols, cols }
    }

    pub fn mul_vec(&self, x: &[Rational]) -> Vec<Rational> {
        assert_eq!(x.len(), self.ncols);
        let mut out = vec![Rational::zero(); self.nrows];
        for (c, col) in self.cols.iter().enumerate() {
            if x[c].is_zero() {
                continue;
            }
            for (r, v) in col {
                out[*r] += v * &x[c];
            }
        }
        out
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!(self.nrows, other.nrows, "row mismatch in hstack");
        let mut cols = self.cols.clone();
        cols.extend(other.cols.iter().cloned());
        SparseMatrix { nrows: self.nrows, ncols: self.ncols + other.ncols, cols }
    }

    pub fn select_columns(&self, keep: &[usize]) -> SparseMatrix {
        SparseMatrix { nrows: self.nrows, ncols: keep.len(), cols: keep.iter().map(|&c| self.cols[c].clone()).collect() }
    }

    /// Keeps the listed rows, renumbered in the given order.
    pub fn select_rows(&self, keep: &[usize]) -> SparseMatrix {
        let mut map = vec![usize::MAX; self.nrows];
        for (i, &r) in keep.iter().enumerate() {
            map[r] = i;
        }
        let cols = self
            .cols
            .iter()
            .map(|col| {
                let c = col.iter().filter(|(r, _)| map[*r] != usize::MAX).map(|(r, v)| (map[*r], v.clone())).collect();
                normalize_column(keep.len(), c)
            })
            .collect();
        SparseMatrix { nrows: keep.len(), ncols: self.ncols, cols }
    }

    pub fn scale(&self, c: &Rational) -> SparseMatrix {
        if c.is_zero() {
            return SparseMatrix::zero(self.nrows, self.ncols);
        }
        let cols = self.cols.iter().map(|col| col.iter().map(|(r, v)| (*r, v * c)).collect()).collect();
        SparseMatrix { nrows: self.nrows, ncols: self.ncols, cols }
    }

    pub fn sub(&self, other: &SparseMatrix) -> SparseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let cols = self
            .cols
            .iter()
            .zip(&other.cols)
            .map(|(a, b)| {
                let mut c = a.clone();
                c.extend(b.iter().map(|(r, v)| (*r, -v)));
                normalize_column(self.nrows, c)
            })
            .collect();
        SparseMatrix { nrows: self.nrows, ncols: self.ncols, cols }
    }
}

fn normalize_column(nrows: usize, mut c: Vec<(usize, Rational)>) -> Vec<(usize, Rational)> {
    c.sort_by_key(|e| e.0);
    let mut out: Vec<(usize, Rational)> = Vec::with_capacity(c.len());
    for (r, v) in c {
        assert!(r < nrows, "row index {r} out of range {nrows}");
        match out.last_mut() {
            Some(last) if last.0 == r => last.1 += v,
            _ => out.push((r, v)),
        }
        if out.last().is_some_and(|e| e.1.is_zero()) {
            out.pop();
        }
    }
    out
}

type IVec = Vec<(usize, BigInt)>;

fn integer_column(col: &[(usize, Rational)]) -> IVec {
    let l = col.iter().fold(BigInt::one(), |acc, (_, v)| acc.lcm(v.denom()));
    let mut v: IVec = col.iter().map(|(r, x)| (*r, x.numer() * (&l / x.denom()))).collect();
    make_primitive(&mut v);
    v
}

fn make_primitive(v: &mut IVec) {
    let g = v.iter().fold(BigInt::zero(), |acc, (_, x)| acc.gcd(x));
    if !g.is_zero() && !g.is_one() {
        for e in v.iter_mut() {
            e.1 /= &g;
        }
    }
}

/// `a*v - b*p`, both sorted by row.
fn combine(a: &BigInt, v: &IVec, b: &BigInt, p: &IVec) -> IVec {
    let mut out = Vec::with_capacity(v.len() + p.len());
    let (mut i, mut j) = (0, 0);
    while i < v.len() || j < p.len() {
        let take_v = j >= p.len() || (i < v.len() && v[i].0 < p[j].0);
        let take_p = i >= v.len() || (j < p.len() && p[j].0 < v[i].0);
        let (r, x) = if take_v {
            i += 1;
            (v[i - 1].0, a * &v[i - 1].1)
        } else if take_p {
            j += 1;
            (p[j - 1].0, -(b * &p[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (v[i - 1].0, a * &v[i - 1].1 - b * &p[j - 1].1)
        };
        if !x.is_zero() {
            out.push((r, x));
        }
    }
    out
}

/// Incremental fraction-free echelon form of a set of column vectors.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    pivots: HashMap<usize, IVec>,
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.pivots.len()
    }

    fn reduce(&self, mut v: IVec) -> IVec {
        while let Some((lead, lv)) = v.first().cloned() {
            let Some(p) = self.pivots.get(&lead) else { break };
            let pv = &p[0].1;
            let g = pv.gcd(&lv);
            v = combine(&(pv / &g), &v, &(&lv / &g), p);
            make_primitive(&mut v);
        }
        v
    }

    /// Adds a column; returns true when it was independent of the previous ones.
    pub fn insert(&mut self, col: &[(usize, Rational)]) -> bool {
        let v = self.reduce(integer_column(col));
        match v.first() {
            Some(&(lead, _)) => {
                self.pivots.insert(lead, v);
                true
            }
            None => false,
        }
    }

    pub fn contains(&self, col: &[(usize, Rational)]) -> bool {
        self.reduce(integer_column(col)).is_empty()
    }
}

/// Exact rank by fraction-free elimination, pivoting on the first nonzero
/// entry of each reduced column in column order.
pub fn rank_ff(m: &SparseMatrix) -> usize {
    let mut e = Echelon::new();
    for c in m.columns() {
        e.insert(c);
    }
    e.rank()
}

/// Dense reduced row echelon form in place; returns pivot columns.
pub fn rref(rows: &mut [Vec<Rational>], ncols: usize) -> Vec<usize> {
    let mut pivots = Vec::new();
    let mut r = 0;
    for c in 0..ncols {
        if r == rows.len() {
            break;
        }
        let Some(p) = (r..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
        rows.swap(r, p);
        let inv = rows[r][c].recip();
        for v in rows[r].iter_mut() {
            *v *= &inv;
        }
        let pivot_row = rows[r].clone();
        for (i, row) in rows.iter_mut().enumerate() {
            if i != r && !row[c].is_zero() {
                let f = row[c].clone();
                for (v, pv) in row.iter_mut().zip(&pivot_row) {
                    if !pv.is_zero() {
                        *v -= &f * pv;
                    }
                }
            }
        }
        pivots.push(c);
        r += 1;
    }
    pivots
}

/// Basis of `{x : m x = 0}`, one dense vector per free column.
pub fn nullspace(m: &SparseMatrix) -> Vec<Vec<Rational>> {
    let n = m.ncols();
    let mut rows = m.to_dense();
    let pivots = rref(&mut rows, n);
    let mut is_pivot = vec![false; n];
    for &p in &pivots {
        is_pivot[p] = true;
    }
    (0..n)
        .filter(|&c| !is_pivot[c])
        .map(|free| {
            let mut x = vec![Rational::zero(); n];
            x[free] = Rational::one();
            for (i, &p) in pivots.iter().enumerate() {
                x[p] = -rows[i][free].clone();
            }
            x
        })
        .collect()
}

pub fn dense_to_columns(vectors: &[Vec<Rational>], nrows: usize) -> SparseMatrix {
    let cols = vectors
        .iter()
        .map(|v| v.iter().enumerate().filter(|(_, x)| !x.is_zero()).map(|(r, x)| (r, x.clone())).collect())
        .collect();
    SparseMatrix::from_columns(nrows, cols)
}

/// Outcome of solving `A x = b` exactly.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    /// A particular solution with free unknowns set to zero.
    Feasible(Vec<Rational>),
    /// Row multipliers `y` with `yᵀA = 0` and `yᵀb = 1`.
    Infeasible(Vec<Rational>),
}

/// Gaussian elimination on `[A | b | I]`, keeping the row combinations so
/// that an inconsistency comes with its certificate.
pub fn solve(a: &SparseMatrix, b: &[Rational]) -> Solution {
    let (m, n) = (a.nrows(), a.ncols());
    assert_eq!(b.len(), m);
    let dense = a.to_dense();
    let width = n + 1 + m;
    let mut rows: Vec<Vec<Rational>> = (0..m)
        .map(|i| {
            let mut row = dense[i].clone();
            row.push(b[i].clone());
            row.extend((0..m).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
            row
        })
        .collect();
    let pivots = rref(&mut rows, n);
    debug_assert!(rows.iter().all(|r| r.len() == width));
    for row in rows.iter().skip(pivots.len()) {
        if !row[n].is_zero() {
            let inv = row[n].recip();
            return Solution::Infeasible(row[n + 1..].iter().map(|v| v * &inv).collect());
        }
    }
    let mut x = vec![Rational::zero(); n];
    for (i, &p) in pivots.iter().enumerate() {
        x[p] = rows[i][n].clone();
    }
    Solution::Feasible(x)
}

/// Checks `yᵀA = 0` and `yᵀb = 1`.
pub fn verify_certificate(a: &SparseMatrix, b: &[Rational], y: &[Rational]) -> bool {
    let ya = a.transpose().mul_vec(y);
    let yb: Rational = y.iter().zip(b).map(|(u, v)| u * v).sum();
    ya.iter().all(Zero::is_zero) && yb.is_one()
}

/// Sign of a rational, as -1, 0 or 1.
pub fn signum(r: &Rational) -> i32 {
    if r.is_zero() {
        0
    } else if r.is_positive() {
        1
    } else {
        -1
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;
    use proptest::prelude::*;

    fn dense_rank(m: &SparseMatrix) -> usize {
        let mut rows = m.to_dense();
        let mut rank = 0;
        for c in 0..m.ncols() {
            let Some(p) = (rank..rows.len()).find(|&i| !rows[i][c].is_zero()) else { continue };
            rows.swap(rank, p);
            for i in rank + 1..rows.len() {
                let f = &rows[i][c] / &rows[rank][c];
                for k in c..m.ncols() {
                    let d = &f * &rows[rank][k];
                    rows[i][k] -= d;
                }
            }
            rank += 1;
        }
        rank
    }

    #[test]
    fn small_ranks() {
        assert_eq!(rank_ff(&SparseMatrix::identity(3)), 3);
        assert_eq!(rank_ff(&SparseMatrix::zero(2, 5)), 0);
        let a = SparseMatrix::from_i64(&[&[5, 1], &[1, 6], &[2, 5]]);
        assert_eq!(rank_ff(&a), 2);
        let ab = SparseMatrix::from_i64(&[&[5, 1, 1], &[1, 6, 1], &[2, 5, 1]]);
        assert_eq!(rank_ff(&ab), 3);
    }

    #[test]
    fn three_row_system_is_inconsistent() {
        let a = SparseMatrix::from_i64(&[&[5, 1], &[1, 6], &[2, 5]]);
        let b = vec![rat(1), rat(1), rat(1)];
        match solve(&a, &b) {
            Solution::Infeasible(y) => assert!(verify_certificate(&a, &b, &y)),
            other => panic!("expected infeasible, got {other:?}"),
        }
    }

    #[test]
    fn consistent_system_has_witness() {
        let a = SparseMatrix::from_i64(&[&[1, 1], &[1, -1], &[2, 0]]);
        let b = vec![rat(3), rat(1), rat(4)];
        match solve(&a, &b) {
            Solution::Feasible(x) => assert_eq!(a.mul_vec(&x), b),
            other => panic!("expected feasible, got {other:?}"),
        }
    }

    #[test]
    fn nullspace_is_kernel() {
        let a = SparseMatrix::from_i64(&[&[1, 2, 3], &[2, 4, 6]]);
        let k = nullspace(&a);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!(a.mul_vec(v).iter().all(Zero::is_zero));
        }
    }

    #[test]
    fn products_and_selection() {
        let a = SparseMatrix::from_i64(&[&[1, 2], &[3, 4]]);
        let i = SparseMatrix::identity(2);
        assert_eq!(a.mul(&i), a);
        assert_eq!(a.mul(&a), SparseMatrix::from_i64(&[&[7, 10], &[15, 22]]));
        assert_eq!(a.transpose().transpose(), a);
        assert_eq!(a.select_rows(&[1]), SparseMatrix::from_i64(&[&[3, 4]]));
        assert_eq!(a.select_columns(&[1]), SparseMatrix::from_i64(&[&[2], &[4]]));
        assert!(a.sub(&a).is_zero());
    }

    fn small_matrix() -> impl Strategy<Value = SparseMatrix> {
        (1usize..=12, 1usize..=12).prop_flat_map(|(r, c)| {
            proptest::collection::vec(proptest::collection::vec(-3i64..=3, c), r).prop_map(|rows| {
                let dense: Vec<Vec<Rational>> =
                    rows.into_iter().map(|row| row.into_iter().map(rat).collect()).collect();
                SparseMatrix::from_dense(&dense)
            })
        })
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]
        #[test]
        fn rank_matches_dense_oracle(m in small_matrix()) {
            prop_assert_eq!(rank_ff(&m), dense_rank(&m));
            prop_assert_eq!(rank_ff(&m.transpose()), rank_ff(&m));
        }
    }
}
