//! Exact rational matrices and integer lattices.
//!
//! Everything here is arbitrary precision; the torus pipeline relies on it
//! to state θ ↔ θ⁻¹ without roundoff.

use std::fmt;
use std::ops::{Index, IndexMut};

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(num: i64, den: i64) -> Q {
    Q::new(BigInt::from(num), BigInt::from(den))
}

/// Parse "3", "-1/2" or a finite decimal such as "0.25" into an exact rational.
pub fn parse_rational(text: &str) -> Result<Q> {
    let t = text.trim();
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| Error::Parse(format!("bad numerator in `{t}`")))?;
        let d: BigInt = d.trim().parse().map_err(|_| Error::Parse(format!("bad denominator in `{t}`")))?;
        if d.is_zero() {
            return Err(Error::Parse(format!("zero denominator in `{t}`")));
        }
        return Ok(Q::new(n, d));
    }
    if let Some((ip, fp)) = t.split_once('.') {
        let neg = ip.starts_with('-');
        let digits = format!("{}{}", ip.trim_start_matches(['-', '+']), fp);
        let n: BigInt = digits.parse().map_err(|_| Error::Parse(format!("bad decimal `{t}`")))?;
        let d = num_traits::pow(BigInt::from(10), fp.len());
        let v = Q::new(n, d);
        return Ok(if neg { -v } else { v });
    }
    let n: BigInt = t.parse().map_err(|_| Error::Parse(format!("bad rational `{t}`")))?;
    Ok(Q::from_integer(n))
}

/// Exact binary value of a finite float.
pub fn from_f64(x: f64) -> Result<Q> {
    Q::from_float(x).ok_or_else(|| Error::Parse(format!("non-finite value {x}")))
}

pub fn to_f64(x: &Q) -> f64 {
    x.to_f64().unwrap_or(f64::NAN)
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct QMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Q>,
}

impl Index<(usize, usize)> for QMatrix {
    type Output = Q;
    fn index(&self, (i, j): (usize, usize)) -> &Q {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for QMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Q {
        &mut self.data[i * self.cols + j]
    }
}

impl fmt::Display for QMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols).map(|j| self[(i, j)].to_string()).collect();
            writeln!(f, "[{}]", row.join(", "))?;
        }
        Ok(())
    }
}

impl QMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        QMatrix { rows, cols, data: vec![Q::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_fn(n, n, |i, j| if i == j { Q::one() } else { Q::zero() })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Q) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        QMatrix { rows, cols, data }
    }

    pub fn from_rows(rows: &[Vec<Q>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        Self::from_fn(r, c, |i, j| rows[i][j].clone())
    }

    pub fn from_i64(rows: usize, cols: usize, entries: &[i64]) -> Self {
        Self::from_fn(rows, cols, |i, j| q(entries[i * cols + j]))
    }

    pub fn from_integer_rows(rows: &[Vec<BigInt>], cols: usize) -> Self {
        Self::from_fn(rows.len(), cols, |i, j| Q::from_integer(rows[i][j].clone()))
    }

    pub fn nrows(&self) -> usize {
        self.rows
    }

    pub fn ncols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> Vec<Q> {
        self.data[i * self.cols..(i + 1) * self.cols].to_vec()
    }

    pub fn column(&self, j: usize) -> Vec<Q> {
        (0..self.rows).map(|i| self[(i, j)].clone()).collect()
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].clone())
    }

    pub fn mul(&self, other: &QMatrix) -> Self {
        assert_eq!(self.cols, other.rows, "QMatrix::mul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = &self[(i, k)];
                if a.is_zero() {
                    continue;
                }
                for j in 0..other.cols {
                    let b = &other[(k, j)];
                    if !b.is_zero() {
                        out[(i, j)] += a * b;
                    }
                }
            }
        }
        out
    }

    pub fn add(&self, other: &QMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] + &other[(i, j)])
    }

    pub fn sub(&self, other: &QMatrix) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] - &other[(i, j)])
    }

    pub fn neg(&self) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| -self[(i, j)].clone())
    }

    pub fn scale(&self, s: &Q) -> Self {
        Self::from_fn(self.rows, self.cols, |i, j| &self[(i, j)] * s)
    }

    pub fn hstack(&self, other: &QMatrix) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self[(i, j)].clone()
            } else {
                other[(i, j - self.cols)].clone()
            }
        })
    }

    pub fn vstack(&self, other: &QMatrix) -> Self {
        assert_eq!(self.cols, other.cols);
        Self::from_fn(self.rows + other.rows, self.cols, |i, j| {
            if i < self.rows {
                self[(i, j)].clone()
            } else {
                other[(i - self.rows, j)].clone()
            }
        })
    }

    pub fn select_columns(&self, cols: &[usize]) -> Self {
        Self::from_fn(self.rows, cols.len(), |i, j| self[(i, cols[j])].clone())
    }

    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)].clone())
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(Zero::is_zero)
    }

    pub fn is_integer(&self) -> bool {
        self.data.iter().all(|x| x.is_integer())
    }

    pub fn is_skew(&self) -> bool {
        self.rows == self.cols && *self == self.transpose().neg()
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.rows, self.cols, |i, j| to_f64(&self[(i, j)]))
    }

    /// Reduced row echelon form and the pivot columns.
    pub fn rref(&self) -> (QMatrix, Vec<usize>) {
        let mut m = self.clone();
        let mut pivots = Vec::new();
        let mut r = 0;
        for c in 0..m.cols {
            if r == m.rows {
                break;
            }
            let Some(p) = (r..m.rows).find(|&i| !m[(i, c)].is_zero()) else { continue };
            m.swap_rows(r, p);
            let inv = m[(r, c)].recip();
            for j in c..m.cols {
                let v = &m[(r, j)] * &inv;
                m[(r, j)] = v;
            }
            for i in 0..m.rows {
                if i != r && !m[(i, c)].is_zero() {
                    let f = m[(i, c)].clone();
                    for j in c..m.cols {
                        let v = &m[(r, j)] * &f;
                        m[(i, j)] -= v;
                    }
                }
            }
            pivots.push(c);
            r += 1;
        }
        (m, pivots)
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    pub fn rank(&self) -> usize {
        self.rref().1.len()
    }

    /// Basis of the right nullspace, as the columns of the result.
    pub fn nullspace(&self) -> QMatrix {
        let (r, pivots) = self.rref();
        let free: Vec<usize> = (0..self.cols).filter(|c| !pivots.contains(c)).collect();
        let mut out = QMatrix::zeros(self.cols, free.len());
        for (k, &f) in free.iter().enumerate() {
            out[(f, k)] = Q::one();
            for (row, &p) in pivots.iter().enumerate() {
                out[(p, k)] = -r[(row, f)].clone();
            }
        }
        out
    }

    pub fn inverse(&self) -> Result<QMatrix> {
        if self.rows != self.cols {
            return Err(Error::DimensionMismatch { expected: self.rows, got: self.cols });
        }
        let n = self.rows;
        let (r, pivots) = self.hstack(&QMatrix::identity(n)).rref();
        if pivots.len() < n || pivots[n - 1] != n - 1 {
            return Err(Error::Singular("rational matrix is not invertible".into()));
        }
        Ok(r.block(0, n, n, n))
    }

    /// A particular solution of `self · x = b` for a single column `b`, if consistent.
    pub fn solve(&self, b: &QMatrix) -> Option<QMatrix> {
        let n = self.cols;
        let (r, pivots) = self.hstack(b).rref();
        if pivots.last() == Some(&n) {
            return None;
        }
        let mut x = QMatrix::zeros(n, 1);
        for (row, &p) in pivots.iter().enumerate() {
            x[(p, 0)] = r[(row, n)].clone();
        }
        Some(x)
    }

    pub fn max_abs_diff(&self, other: &DMatrix<f64>) -> f64 {
        let f = self.to_f64();
        (f - other).abs().max()
    }
}

/// Multiply a rational vector by the lcm of its denominators.
pub fn clear_denominators(row: &[Q]) -> Vec<BigInt> {
    let l = row.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
    row.iter().map(|x| (x * Q::from_integer(l.clone())).to_integer()).collect()
}

/// Row Hermite normal form of the integer span of `gens`; zero rows dropped.
/// Pivots are positive and entries above each pivot are reduced into [0, pivot).
pub fn hnf_rows(gens: &[Vec<BigInt>], cols: usize) -> Vec<Vec<BigInt>> {
    let mut m: Vec<Vec<BigInt>> = gens.to_vec();
    let mut r = 0;
    for c in 0..cols {
        if r == m.len() {
            break;
        }
        // gcd-eliminate column c below row r
        loop {
            let nz: Vec<usize> = (r..m.len()).filter(|&i| !m[i][c].is_zero()).collect();
            if nz.is_empty() {
                break;
            }
            let p = *nz.iter().min_by_key(|&&i| m[i][c].abs()).expect("nonempty");
            m.swap(r, p);
            let mut done = true;
            for i in r + 1..m.len() {
                if m[i][c].is_zero() {
                    continue;
                }
                let f = m[i][c].div_floor(&m[r][c]);
                let pivot_row = m[r].clone();
                for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                    *x -= &f * y;
                }
                if !m[i][c].is_zero() {
                    done = false;
                }
            }
            if done {
                break;
            }
        }
        if r < m.len() && !m[r][c].is_zero() {
            if m[r][c].is_negative() {
                for x in m[r].iter_mut() {
                    *x = -x.clone();
                }
            }
            for i in 0..r {
                let f = m[i][c].div_floor(&m[r][c]);
                if !f.is_zero() {
                    let pivot_row = m[r].clone();
                    for (x, y) in m[i].iter_mut().zip(&pivot_row) {
                        *x -= &f * y;
                    }
                }
            }
            r += 1;
        }
    }
    m.truncate(r);
    m
}

/// Basis (in Hermite normal form) of {x ∈ ℤⁿ : A x = 0} for an integer matrix A
/// given by its rows.
pub fn integer_kernel(a: &[Vec<BigInt>], n: usize) -> Vec<Vec<BigInt>> {
    let m = a.len();
    // rows (column i of A | e_i); unimodular row operations keep the right block a basis of ℤⁿ
    let aug: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut row: Vec<BigInt> = (0..m).map(|k| a[k][i].clone()).collect();
            row.extend((0..n).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }));
            row
        })
        .collect();
    let h = hnf_rows(&aug, m + n);
    let kernel: Vec<Vec<BigInt>> = h.iter().filter(|row| row[..m].iter().all(Zero::is_zero)).map(|row| row[m..].to_vec()).collect();
    hnf_rows(&kernel, n)
}

/// Integer kernel of a rational matrix (rows scaled to integers first).
pub fn rational_integer_kernel(a: &QMatrix) -> Vec<Vec<BigInt>> {
    let rows: Vec<Vec<BigInt>> = (0..a.nrows()).map(|i| clear_denominators(&a.row(i))).collect();
    integer_kernel(&rows, a.ncols())
}

pub fn int_vec(v: &[i64]) -> Vec<BigInt> {
    v.iter().map(|&x| BigInt::from(x)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rref_rank_and_nullspace() {
        let a = QMatrix::from_i64(2, 3, &[1, 2, 3, 2, 4, 6]);
        assert_eq!(a.rank(), 1);
        let n = a.nullspace();
        assert_eq!(n.ncols(), 2);
        assert!(a.mul(&n).is_zero());
    }

    #[test]
    fn inverse_roundtrip() {
        let a = QMatrix::from_rows(&[vec![q(0), qf(1, 2)], vec![qf(-1, 2), q(0)]]);
        let inv = a.inverse().unwrap();
        assert_eq!(inv, QMatrix::from_i64(2, 2, &[0, -2, 2, 0]));
        assert!(QMatrix::from_i64(2, 2, &[1, 2, 2, 4]).inverse().is_err());
    }

    #[test]
    fn parses_rationals() {
        assert_eq!(parse_rational("-1/2").unwrap(), qf(-1, 2));
        assert_eq!(parse_rational(" 0.25").unwrap(), qf(1, 4));
        assert_eq!(parse_rational("-1.5").unwrap(), qf(-3, 2));
        assert_eq!(parse_rational("7").unwrap(), q(7));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
    }

    #[test]
    fn hnf_of_redundant_generators() {
        let h = hnf_rows(&[int_vec(&[4, 6]), int_vec(&[6, 9]), int_vec(&[2, 0])], 2);
        // span is {(2a, 3b)}: generated by (2,0), (0,3)
        assert_eq!(h, vec![int_vec(&[2, 0]), int_vec(&[0, 3])]);
    }

    #[test]
    fn integer_kernel_small() {
        // x + 2y - 2z = 0
        let k = integer_kernel(&[int_vec(&[1, 2, -2])], 3);
        assert_eq!(k.len(), 2);
        for v in &k {
            assert!((&v[0] + BigInt::from(2) * &v[1] - BigInt::from(2) * &v[2]).is_zero());
        }
        // the kernel lattice has index 1 in its saturation: determinant of Gram is minimal
        let full = integer_kernel(&[int_vec(&[0, 0])], 2);
        assert_eq!(full, vec![int_vec(&[1, 0]), int_vec(&[0, 1])]);
    }
}
