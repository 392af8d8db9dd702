use super::{AlgebraVector, QuadraticLieAlgebra};
use crate::error::{Error, Result};
use crate::linalg;
use nalgebra::DMatrix;
use serde::Serialize;

/// Relative residual for subalgebra membership after least-squares projection.
pub const MEMBERSHIP_TOL: f64 = 1e-9;

/// A subalgebra given by a row basis in algebra coordinates.
#[derive(Debug, Clone)]
pub struct LagrangianSubalgebra {
    label: String,
    span: DMatrix<f64>,
    columns: DMatrix<f64>,
    coeff_map: DMatrix<f64>,
}

impl LagrangianSubalgebra {
    pub fn new(label: &str, span: DMatrix<f64>) -> Result<Self> {
        let k = span.nrows();
        if linalg::rank(&span, linalg::RANK_RTOL) != k {
            return Err(Error::NotLie(format!("span of `{label}` has dependent rows")));
        }
        let columns = span.transpose();
        let coeff_map = linalg::pinv(&columns, linalg::RANK_RTOL);
        Ok(LagrangianSubalgebra { label: label.to_string(), span, columns, coeff_map })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    /// Rows form a basis of the subalgebra.
    pub fn span(&self) -> &DMatrix<f64> {
        &self.span
    }

    pub fn dim(&self) -> usize {
        self.span.nrows()
    }

    pub fn ambient_dim(&self) -> usize {
        self.span.ncols()
    }

    /// `d x k` matrix sending subalgebra coefficients to algebra coordinates.
    pub fn embedding(&self) -> &DMatrix<f64> {
        &self.columns
    }

    /// `k x d` left inverse of [`embedding`](Self::embedding).
    pub fn coefficient_map(&self) -> &DMatrix<f64> {
        &self.coeff_map
    }

    pub fn embed(&self, coeffs: &AlgebraVector) -> AlgebraVector {
        &self.columns * coeffs
    }

    pub fn coefficients(&self, x: &AlgebraVector) -> (AlgebraVector, f64) {
        let c = &self.coeff_map * x;
        let r = (&self.columns * &c - x).norm();
        (c, r)
    }

    pub fn contains(&self, x: &AlgebraVector) -> bool {
        let (_, r) = self.coefficients(x);
        r <= MEMBERSHIP_TOL * (1.0 + x.norm())
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct LagrangianReport {
    pub label: String,
    pub isotropy_residual: f64,
    pub rank: usize,
    pub half_dim: usize,
    pub closure_residual: f64,
    pub pass: bool,
}

/// Isotropy, half dimension and closure under the bracket.
pub fn is_lagrangian(alg: &QuadraticLieAlgebra, h: &LagrangianSubalgebra) -> LagrangianReport {
    let d = alg.dim();
    let rows: Vec<AlgebraVector> = (0..h.dim()).map(|i| h.span.row(i).transpose()).collect();
    let mut iso: f64 = 0.0;
    let mut closure: f64 = 0.0;
    let wrong_ambient = h.ambient_dim() != d;
    if !wrong_ambient {
        for a in &rows {
            for b in &rows {
                iso = iso.max(alg.inner_unchecked(a, b).abs());
                let c = alg.bracket_unchecked(a, b);
                let (_, r) = h.coefficients(&c);
                closure = closure.max(r / (1.0 + c.norm()));
            }
        }
    }
    let rank = linalg::rank(&h.span, linalg::RANK_RTOL);
    let pass = !wrong_ambient && d % 2 == 0 && rank == d / 2 && iso <= 1e-10 && closure <= MEMBERSHIP_TOL;
    LagrangianReport {
        label: h.label.clone(),
        isotropy_residual: iso,
        rank,
        half_dim: d / 2,
        closure_residual: closure,
        pass,
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TransversalityReport {
    pub first: String,
    pub second: String,
    pub stacked_rank: usize,
    pub dim: usize,
    pub min_singular_value: f64,
    pub pass: bool,
}

/// `h1 ∩ h2 = 0` and `h1 + h2 = g`, decided by the rank of the stacked spans.
pub fn are_transverse(alg: &QuadraticLieAlgebra, h1: &LagrangianSubalgebra, h2: &LagrangianSubalgebra) -> TransversalityReport {
    let d = alg.dim();
    let mut stacked = DMatrix::zeros(h1.dim() + h2.dim(), d);
    if h1.ambient_dim() == d && h2.ambient_dim() == d {
        stacked.view_mut((0, 0), (h1.dim(), d)).copy_from(&h1.span);
        stacked.view_mut((h1.dim(), 0), (h2.dim(), d)).copy_from(&h2.span);
    }
    let rank = linalg::rank(&stacked, linalg::RANK_RTOL);
    let smin = linalg::singular_values(&stacked).iter().cloned().fold(f64::INFINITY, f64::min);
    TransversalityReport {
        first: h1.label.clone(),
        second: h2.label.clone(),
        stacked_rank: rank,
        dim: d,
        min_singular_value: smin,
        pass: rank == d && h1.dim() + h2.dim() == d,
    }
}
