//! Exact sparse matrices over the rationals.
//!
//! Every operator, vertical map and pairing in the crate is an [`ExactMatrix`].
//! Ranks are computed by fraction-free elimination on integer-scaled rows, so
//! no floating point ever enters a zero test.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::{Error, Result};

/// Exact rational scalar used throughout the crate.
pub type Rational = BigRational;

/// Integer-valued rational.
pub fn q(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Rational `n / d`; panics if `d == 0`.
pub fn qf(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

/// Sparse matrix over the rationals with no stored zeros.
#[derive(Clone, PartialEq, Eq)]
pub struct ExactMatrix {
    rows: usize,
    cols: usize,
    data: Vec<BTreeMap<usize, Rational>>,
}

impl fmt::Debug for ExactMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ExactMatrix {}x{} ({} nonzeros)", self.rows, self.cols, self.nnz())?;
        for (i, row) in self.data.iter().enumerate() {
            for (j, v) in row {
                writeln!(f, "  ({i}, {j}) = {v}")?;
            }
        }
        Ok(())
    }
}

impl ExactMatrix {
    /// The `rows × cols` zero matrix.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![BTreeMap::new(); rows] }
    }

    /// The `n × n` identity.
    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i].insert(i, Rational::one());
        }
        m
    }

    /// Builds a matrix from `(row, col, value)` triplets, summing duplicates.
    pub fn from_triplets(
        rows: usize,
        cols: usize,
        triplets: impl IntoIterator<Item = (usize, usize, Rational)>,
    ) -> Result<Self> {
        let mut m = Self::zeros(rows, cols);
        for (i, j, v) in triplets {
            m.add_to(i, j, &v)?;
        }
        Ok(m)
    }

    /// Builds a matrix from dense rows; all rows must have length `cols`.
    pub fn from_dense(cols: usize, dense: &[Vec<Rational>]) -> Result<Self> {
        let mut m = Self::zeros(dense.len(), cols);
        for (i, row) in dense.iter().enumerate() {
            if row.len() != cols {
                return Err(Error::Dimension(format!("dense row {i} has length {}, expected {cols}", row.len())));
            }
            for (j, v) in row.iter().enumerate() {
                if !v.is_zero() {
                    m.data[i].insert(j, v.clone());
                }
            }
        }
        Ok(m)
    }

    /// Builds a matrix from small integer rows; convenient in tests.
    pub fn from_i64(rows: &[&[i64]]) -> Self {
        let cols = rows.first().map_or(0, |r| r.len());
        let dense: Vec<Vec<Rational>> = rows.iter().map(|r| r.iter().map(|&v| q(v)).collect()).collect();
        Self::from_dense(cols, &dense).expect("rows of equal length")
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of stored (nonzero) entries.
    pub fn nnz(&self) -> usize {
        self.data.iter().map(BTreeMap::len).sum()
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> Rational {
        self.data.get(i).and_then(|r| r.get(&j)).cloned().unwrap_or_else(Rational::zero)
    }

    /// Nonzero entries of row `i` in increasing column order.
    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, &Rational)> {
        self.data[i].iter().map(|(j, v)| (*j, v))
    }

    /// All nonzero entries in row-major order.
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, &Rational)> {
        self.data.iter().enumerate().flat_map(|(i, r)| r.iter().map(move |(j, v)| (i, *j, v)))
    }

    fn check_index(&self, i: usize, j: usize) -> Result<()> {
        if i >= self.rows || j >= self.cols {
            return Err(Error::Dimension(format!("index ({i}, {j}) outside {}x{} matrix", self.rows, self.cols)));
        }
        Ok(())
    }

    /// Sets entry `(i, j)`; storing zero removes the entry.
    pub fn set(&mut self, i: usize, j: usize, v: Rational) -> Result<()> {
        self.check_index(i, j)?;
        if v.is_zero() {
            self.data[i].remove(&j);
        } else {
            self.data[i].insert(j, v);
        }
        Ok(())
    }

    /// Adds `v` to entry `(i, j)`.
    pub fn add_to(&mut self, i: usize, j: usize, v: &Rational) -> Result<()> {
        self.check_index(i, j)?;
        if v.is_zero() {
            return Ok(());
        }
        let row = &mut self.data[i];
        let sum = row.get(&j).map_or_else(|| v.clone(), |old| old + v);
        if sum.is_zero() {
            row.remove(&j);
        } else {
            row.insert(j, sum);
        }
        Ok(())
    }

    /// Transposed copy.
    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for (i, j, v) in self.entries() {
            t.data[j].insert(i, v.clone());
        }
        t
    }

    /// Exact product `self · other`.
    pub fn compose(&self, other: &ExactMatrix) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::Dimension(format!(
                "cannot compose {}x{} with {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for (i, row) in self.data.iter().enumerate() {
            let mut acc: BTreeMap<usize, Rational> = BTreeMap::new();
            for (k, a) in row {
                for (j, b) in &other.data[*k] {
                    let term = a * b;
                    match acc.get_mut(j) {
                        Some(x) => *x += term,
                        None => {
                            acc.insert(*j, term);
                        }
                    }
                }
            }
            acc.retain(|_, v| !v.is_zero());
            out.data[i] = acc;
        }
        Ok(out)
    }

    /// Exact sum `self + other`.
    pub fn add(&self, other: &ExactMatrix) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (i, j, v) in other.entries() {
            out.add_to(i, j, v)?;
        }
        Ok(out)
    }

    /// Exact difference `self − other`.
    pub fn sub(&self, other: &ExactMatrix) -> Result<Self> {
        self.add(&other.scale(&-Rational::one()))
    }

    fn check_same_shape(&self, other: &ExactMatrix) -> Result<()> {
        if self.rows != other.rows || self.cols != other.cols {
            return Err(Error::Dimension(format!(
                "shape {}x{} differs from {}x{}",
                self.rows, self.cols, other.rows, other.cols
            )));
        }
        Ok(())
    }

    /// Scalar multiple.
    pub fn scale(&self, s: &Rational) -> Self {
        if s.is_zero() {
            return Self::zeros(self.rows, self.cols);
        }
        let data = self.data.iter().map(|r| r.iter().map(|(j, v)| (*j, v * s)).collect()).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Stacks `self` on top of `other`.
    pub fn vstack(&self, other: &ExactMatrix) -> Result<Self> {
        if self.cols != other.cols {
            return Err(Error::Dimension(format!("vstack of {} and {} columns", self.cols, other.cols)));
        }
        let mut data = self.data.clone();
        data.extend(other.data.iter().cloned());
        Ok(Self { rows: self.rows + other.rows, cols: self.cols, data })
    }

    /// Submatrix keeping the listed rows and columns, in the given order.
    pub fn select(&self, rows: &[usize], cols: &[usize]) -> Self {
        let col_pos: BTreeMap<usize, usize> = cols.iter().enumerate().map(|(p, c)| (*c, p)).collect();
        let mut out = Self::zeros(rows.len(), cols.len());
        for (p, r) in rows.iter().enumerate() {
            for (j, v) in &self.data[*r] {
                if let Some(&c) = col_pos.get(j) {
                    out.data[p].insert(c, v.clone());
                }
            }
        }
        out
    }

    /// Dense copy, row-major.
    pub fn to_dense(&self) -> Vec<Vec<Rational>> {
        let mut d = vec![vec![Rational::zero(); self.cols]; self.rows];
        for (i, j, v) in self.entries() {
            d[i][j] = v.clone();
        }
        d
    }

    /// Matrix-vector product.
    pub fn apply(&self, x: &[Rational]) -> Result<Vec<Rational>> {
        if x.len() != self.cols {
            return Err(Error::Dimension(format!(
                "vector of length {} applied to {}x{} matrix",
                x.len(),
                self.rows,
                self.cols
            )));
        }
        Ok(self.data.iter().map(|r| r.iter().fold(Rational::zero(), |acc, (j, v)| acc + v * &x[*j])).collect())
    }

    /// True iff every entry is zero.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(BTreeMap::is_empty)
    }

    /// Exact rank over the rationals.
    ///
    /// Rows are scaled to primitive integer vectors and eliminated in index
    /// order; each row is reduced against existing pivots (keyed by leading
    /// column) until it vanishes or contributes a new pivot at its smallest
    /// remaining column. Combinations are `b·r − a·p` divided by the row
    /// content, so no fractions appear.
    pub fn rank(&self) -> usize {
        let mut pivots: BTreeMap<usize, Vec<(usize, BigInt)>> = BTreeMap::new();
        // Sparse rows first keeps fill-in low.
        let mut order: Vec<&BTreeMap<usize, Rational>> = self.data.iter().collect();
        order.sort_by_key(|r| r.len());
        for row in order {
            let mut r = integer_row(row);
            while let Some((c, a)) = r.first().cloned() {
                match pivots.get(&c) {
                    Some(p) => {
                        let b = &p[0].1;
                        let g = a.gcd(b);
                        r = combine(&r, &(b / &g), p, &(&a / &g));
                    }
                    None => {
                        pivots.insert(c, r);
                        break;
                    }
                }
            }
        }
        pivots.len()
    }

    /// `cols − rank`.
    pub fn kernel_dim(&self) -> usize {
        self.cols - self.rank()
    }

    /// True iff the square matrix has full rank.
    pub fn is_nondegenerate(&self) -> Result<bool> {
        if self.rows != self.cols {
            return Err(Error::Dimension(format!(
                "nondegeneracy needs a square matrix, got {}x{}",
                self.rows, self.cols
            )));
        }
        Ok(self.rank() == self.rows)
    }

    /// Conjugation `left · self · right` by diagonal matrices given as vectors.
    pub fn scale_diag(&self, left: &[Rational], right: &[Rational]) -> Result<Self> {
        if left.len() != self.rows || right.len() != self.cols {
            return Err(Error::Dimension("diagonal scaling length mismatch".into()));
        }
        let mut out = Self::zeros(self.rows, self.cols);
        for (i, j, v) in self.entries() {
            out.data[i].insert(j, v * &left[i] * &right[j]);
        }
        Ok(out)
    }
}

fn integer_row(row: &BTreeMap<usize, Rational>) -> Vec<(usize, BigInt)> {
    let lcm = row.values().fold(BigInt::one(), |acc, v| acc.lcm(v.denom()));
    let mut out: Vec<(usize, BigInt)> = row.iter().map(|(j, v)| (*j, v.numer() * (&lcm / v.denom()))).collect();
    make_primitive(&mut out);
    out
}

fn make_primitive(r: &mut [(usize, BigInt)]) {
    let g = r.iter().fold(BigInt::zero(), |acc, (_, v)| acc.gcd(v));
    if !g.is_zero() && !g.is_one() {
        for (_, v) in r.iter_mut() {
            *v = &*v / &g;
        }
    }
}

/// Returns the primitive part of `s·r − t·p` for sorted sparse integer rows.
fn combine(r: &[(usize, BigInt)], s: &BigInt, p: &[(usize, BigInt)], t: &BigInt) -> Vec<(usize, BigInt)> {
    let mut out = Vec::with_capacity(r.len() + p.len());
    let (mut i, mut j) = (0, 0);
    while i < r.len() || j < p.len() {
        let ci = r.get(i).map_or(usize::MAX, |e| e.0);
        let cj = p.get(j).map_or(usize::MAX, |e| e.0);
        let (c, v) = if ci < cj {
            i += 1;
            (ci, s * &r[i - 1].1)
        } else if cj < ci {
            j += 1;
            (cj, -(t * &p[j - 1].1))
        } else {
            i += 1;
            j += 1;
            (ci, s * &r[i - 1].1 - t * &p[j - 1].1)
        };
        if !v.is_zero() {
            out.push((c, v));
        }
    }
    make_primitive(&mut out);
    if out.first().is_some_and(|e| e.1.is_negative()) {
        for (_, v) in out.iter_mut() {
            *v = -&*v;
        }
    }
    out
}

/// Dense helpers for the small local systems of element construction.
pub mod dense {
    use super::Rational;
    use num_traits::{One, Zero};

    /// Reduced row echelon form in place; returns the pivot columns.
    pub fn rref(m: &mut [Vec<Rational>]) -> Vec<usize> {
        let rows = m.len();
        let cols = m.first().map_or(0, Vec::len);
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..cols {
            if r == rows {
                break;
            }
            let Some(p) = (r..rows).find(|&i| !m[i][c].is_zero()) else { continue };
            m.swap(r, p);
            let inv = Rational::one() / &m[r][c];
            for v in m[r].iter_mut() {
                *v = &*v * &inv;
            }
            for i in 0..rows {
                if i != r && !m[i][c].is_zero() {
                    let f = m[i][c].clone();
                    for k in 0..cols {
                        let d = &f * &m[r][k];
                        m[i][k] -= d;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        pivots
    }

    /// Basis of the right nullspace, one vector per free column, in
    /// increasing free-column order.
    pub fn nullspace(m: &[Vec<Rational>], cols: usize) -> Vec<Vec<Rational>> {
        let mut a = m.to_vec();
        let pivots = rref(&mut a);
        let free: Vec<usize> = (0..cols).filter(|c| !pivots.contains(c)).collect();
        free.iter()
            .map(|&f| {
                let mut v = vec![Rational::zero(); cols];
                v[f] = Rational::one();
                for (r, &pc) in pivots.iter().enumerate() {
                    v[pc] = -a[r][f].clone();
                }
                v
            })
            .collect()
    }

    /// Inverse of a square matrix, `None` when singular.
    pub fn inverse(m: &[Vec<Rational>]) -> Option<Vec<Vec<Rational>>> {
        let n = m.len();
        let mut a: Vec<Vec<Rational>> = m
            .iter()
            .enumerate()
            .map(|(i, row)| {
                let mut r = row.clone();
                r.extend((0..n).map(|j| if i == j { Rational::one() } else { Rational::zero() }));
                r
            })
            .collect();
        let pivots = rref(&mut a);
        if pivots.len() < n || pivots.iter().enumerate().any(|(i, &p)| i != p) {
            return None;
        }
        Some(a.into_iter().map(|r| r[n..].to_vec()).collect())
    }

    /// Solves `m x = b` for square nonsingular `m`.
    pub fn solve(m: &[Vec<Rational>], b: &[Rational]) -> Option<Vec<Rational>> {
        let inv = inverse(m)?;
        Some(inv.iter().map(|r| r.iter().zip(b).fold(Rational::zero(), |acc, (x, y)| acc + x * y)).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_matrix_has_rank_zero() {
        assert_eq!(ExactMatrix::zeros(0, 7).rank(), 0);
        assert_eq!(ExactMatrix::zeros(3, 0).rank(), 0);
    }

    #[test]
    fn proportional_rows_have_rank_one() {
        assert_eq!(ExactMatrix::from_i64(&[&[1, 2], &[2, 4]]).rank(), 1);
    }

    #[test]
    fn identity_is_nondegenerate() {
        assert!(ExactMatrix::identity(5).is_nondegenerate().unwrap());
    }

    #[test]
    fn nondegeneracy_rejects_rectangular_input() {
        assert!(ExactMatrix::zeros(2, 3).is_nondegenerate().is_err());
    }

    #[test]
    fn compose_with_identity_is_identity_map() {
        let a = ExactMatrix::from_i64(&[&[1, 0, 3], &[0, -2, 5]]);
        assert_eq!(a.compose(&ExactMatrix::identity(3)).unwrap(), a);
        assert!(a.compose(&ExactMatrix::identity(2)).is_err());
    }

    #[test]
    fn fractional_entries_rank() {
        let m = ExactMatrix::from_dense(2, &[vec![qf(1, 3), qf(2, 7)], vec![qf(7, 3), q(2)]]).unwrap();
        assert_eq!(m.rank(), 1);
    }

    #[test]
    fn no_stored_zeros_after_cancellation() {
        let mut m = ExactMatrix::zeros(2, 2);
        m.add_to(0, 1, &q(3)).unwrap();
        m.add_to(0, 1, &q(-3)).unwrap();
        assert_eq!(m.nnz(), 0);
        assert!(m.is_zero());
    }

    #[test]
    fn dense_inverse_roundtrip() {
        let m = vec![vec![q(2), q(1)], vec![q(1), q(1)]];
        let inv = dense::inverse(&m).unwrap();
        assert_eq!(inv, vec![vec![q(1), q(-1)], vec![q(-1), q(2)]]);
        assert!(dense::inverse(&[vec![q(1), q(2)], vec![q(2), q(4)]]).is_none());
    }

    #[test]
    fn dense_nullspace_spans_kernel() {
        let m = vec![vec![q(1), q(1), q(0)], vec![q(0), q(1), q(1)]];
        let ns = dense::nullspace(&m, 3);
        assert_eq!(ns, vec![vec![q(1), q(-1), q(1)]]);
    }
}
