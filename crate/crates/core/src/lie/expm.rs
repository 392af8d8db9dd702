//! Dense matrix exponential, square root and principal logarithm.

use crate::error::{Error, Result};
use nalgebra::{DMatrix, Schur};

const SCHUR_SWEEPS: usize = 500;

/// Scaling-and-squaring exponential with a Taylor core.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.norm();
    let squarings = if norm > 0.5 { (norm / 0.5).log2().ceil() as u32 } else { 0 };
    let scaled = a / 2f64.powi(squarings as i32);
    let mut sum = DMatrix::identity(n, n);
    let mut term = DMatrix::identity(n, n);
    for k in 1..=40 {
        term = &term * &scaled / k as f64;
        if term.iter().all(|v| *v == 0.0) {
            break;
        }
        sum += &term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Principal square root by the Denman-Beavers iteration.
pub fn sqrtm(a: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    let mut y = a.clone();
    let mut z = DMatrix::identity(n, n);
    for _ in 0..60 {
        let yi = y.clone().try_inverse().ok_or_else(|| Error::Branch("singular iterate in square root".into()))?;
        let zi = z.clone().try_inverse().ok_or_else(|| Error::Branch("singular iterate in square root".into()))?;
        let y_next = (&y + zi) * 0.5;
        let z_next = (&z + yi) * 0.5;
        let step = (&y_next - &y).norm();
        y = y_next;
        z = z_next;
        if step <= 1e-15 * y.norm() {
            return Ok(y);
        }
    }
    Err(Error::Branch("square root iteration did not converge".into()))
}

/// Principal logarithm by inverse scaling and squaring.
///
/// Fails with a branch error when the matrix has a spectrum point on the
/// closed negative real axis.
pub fn logm(g: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = g.nrows();
    let ident = DMatrix::identity(n, n);
    let shifted = g - &ident;
    if (&shifted * &shifted).iter().all(|v| *v == 0.0) {
        return Ok(shifted);
    }
    let mut a = g.clone();
    let mut roots = 0u32;
    if (&a - &ident).norm() > 0.25 {
        // unbounded Schur sweeps can cycle; without a spectrum the square roots still catch the branch cut
        let spectrum = Schur::try_new(g.clone(), f64::EPSILON, SCHUR_SWEEPS).map(|s| s.complex_eigenvalues());
        for ev in spectrum.iter().flat_map(|s| s.iter()) {
            let scale = ev.norm().max(1e-300);
            if ev.re <= 0.0 && ev.im.abs() <= 1e-9 * scale.max(1.0) {
                return Err(Error::Branch(format!("eigenvalue {ev} on the closed negative real axis")));
            }
        }
        while (&a - &ident).norm() > 0.25 {
            a = sqrtm(&a)?;
            roots += 1;
            if roots > 40 {
                return Err(Error::Branch("too many square roots".into()));
            }
        }
    }
    let x = &a - &ident;
    let mut sum = DMatrix::zeros(n, n);
    let mut power = x.clone();
    for k in 1..=80 {
        if power.iter().all(|v| *v == 0.0) {
            break;
        }
        let term = &power / k as f64;
        if k % 2 == 1 {
            sum += &term;
        } else {
            sum -= &term;
        }
        if term.norm() < 1e-18 * sum.norm().max(1e-300) {
            break;
        }
        power = &power * &x;
    }
    Ok(sum * 2f64.powi(roots as i32))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exp_of_rotation_generator() {
        let t = 0.7f64;
        let a = DMatrix::from_row_slice(2, 2, &[0.0, -t, t, 0.0]);
        let r = expm(&a);
        let expected = DMatrix::from_row_slice(2, 2, &[t.cos(), -t.sin(), t.sin(), t.cos()]);
        assert!((r - expected).norm() < 1e-15);
    }

    #[test]
    fn log_inverts_exp_beyond_small_norm() {
        let a = DMatrix::from_row_slice(3, 3, &[0.1, -1.2, 0.3, 1.1, 0.0, -0.4, -0.2, 0.5, -0.1]);
        let l = logm(&expm(&a)).unwrap();
        assert!((l - a).norm() < 1e-12);
    }

    #[test]
    fn log_rejects_negative_eigenvalue() {
        let g = DMatrix::from_row_slice(2, 2, &[-1.0, 0.0, 0.0, 1.0]);
        assert!(matches!(logm(&g), Err(Error::Branch(_))));
    }

    #[test]
    fn nilpotent_exp_is_exact() {
        let mut a = DMatrix::zeros(3, 3);
        a[(0, 2)] = 0.3;
        a[(1, 2)] = -0.7;
        let g = expm(&a);
        assert_eq!(g[(0, 2)], 0.3);
        assert_eq!(g[(1, 2)], -0.7);
        assert_eq!(logm(&g).unwrap(), a);
    }

    #[test]
    fn near_identity_unipotent_does_not_stall_schur() {
        #[rustfmt::skip]
        let g = DMatrix::from_column_slice(4, 4, &[
            1.0000000000000002, 1.8214596497756474e-15, 2.3037127760972e-15, 0.0,
            -1.908195823574488e-15, 1.0, -4.0245584642661925e-15, 0.0,
            -2.3869795029440866e-15, 4.052314039881821e-15, 1.0000000000000002, 0.0,
            -0.33312749860706353, -0.15240269097758438, -0.009892670735827905, 1.0000000000000002,
        ]);
        let l = logm(&g).unwrap();
        assert!((expm(&l) - g).norm() < 1e-12);
    }
}
