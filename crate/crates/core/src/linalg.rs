//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector};

/// Relative singular-value cutoff used for rank decisions.
pub const RANK_RTOL: f64 = 1e-9;

pub fn singular_values(a: &DMatrix<f64>) -> DVector<f64> {
    if a.nrows() == 0 || a.ncols() == 0 {
        return DVector::zeros(0);
    }
    a.clone().svd(false, false).singular_values
}

/// Largest singular value.
pub fn norm2(a: &DMatrix<f64>) -> f64 {
    singular_values(a).iter().cloned().fold(0.0, f64::max)
}

pub fn rank(a: &DMatrix<f64>, rtol: f64) -> usize {
    let s = singular_values(a);
    let smax = s.iter().cloned().fold(0.0, f64::max);
    if smax == 0.0 {
        return 0;
    }
    s.iter().filter(|&&v| v > rtol * smax.max(1.0)).count()
}

/// Moore-Penrose pseudo-inverse.
pub fn pinv(a: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if m == 0 || n == 0 {
        return DMatrix::zeros(n, m);
    }
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let vt = svd.v_t.as_ref().expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let mut out = DMatrix::zeros(n, m);
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s > rtol * smax.max(1.0) {
            out += vt.row(k).transpose() * u.column(k).transpose() / s;
        }
    }
    out
}

/// Orthonormal basis (as columns) of the right nullspace of `a`.
pub fn nullspace(a: &DMatrix<f64>, rtol: f64) -> DMatrix<f64> {
    let (m, n) = a.shape();
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    // pad to at least n rows so the SVD returns a full set of right singular vectors
    let rows = m.max(n);
    let mut padded = DMatrix::zeros(rows, n);
    padded.view_mut((0, 0), (m, n)).copy_from(a);
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("v_t requested");
    let smax = svd.singular_values.iter().cloned().fold(0.0, f64::max);
    let cols: Vec<DVector<f64>> = svd
        .singular_values
        .iter()
        .enumerate()
        .filter(|(_, &s)| s <= rtol * smax.max(1.0))
        .map(|(k, _)| vt.row(k).transpose())
        .collect();
    if cols.is_empty() {
        DMatrix::zeros(n, 0)
    } else {
        DMatrix::from_columns(&cols)
    }
}

pub fn max_abs(a: &DMatrix<f64>) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

pub fn skew_residual(a: &DMatrix<f64>) -> f64 {
    max_abs(&(a + a.transpose()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nullspace_of_wide_matrix() {
        let a = DMatrix::from_row_slice(1, 3, &[1.0, 1.0, 0.0]);
        let k = nullspace(&a, RANK_RTOL);
        assert_eq!(k.ncols(), 2);
        assert!(max_abs(&(&a * &k)) < 1e-14);
        assert!(max_abs(&(k.transpose() * &k - DMatrix::identity(2, 2))) < 1e-14);
    }

    #[test]
    fn pinv_solves_full_row_rank_system() {
        let a = DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, 0.0, 1.0, 1.0]);
        let p = pinv(&a, RANK_RTOL);
        assert!(max_abs(&(&a * &p - DMatrix::identity(2, 2))) < 1e-13);
        assert_eq!(rank(&a, RANK_RTOL), 2);
    }
}
