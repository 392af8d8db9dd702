//! Matrix Lie algebras with an invariant inner product, their groups, and
//! Lagrangian subalgebras.
//!
//! An algebra is fixed by a list of real representing matrices (complex
//! representations are realified). Algebra vectors are coordinate vectors in
//! that basis; matrices are converted back to coordinates through the
//! pseudo-inverse of the basis-flattening map.

mod catalog;
mod expm;
mod subalgebra;

pub use catalog::{catalog, Backend, CatalogSpec, CATALOG, SL2C_PAIRING_SCALE};
pub use expm::{expm, logm, sqrtm};
pub use subalgebra::{are_transverse, is_lagrangian, LagrangianReport, LagrangianSubalgebra, TransversalityReport};

use crate::error::{Error, Result};
use crate::linalg;
use nalgebra::{DMatrix, DVector};

/// Coordinates of an element of the Lie algebra.
pub type AlgebraVector = DVector<f64>;

/// Residual allowed when a matrix is re-expressed in algebra coordinates.
pub const PROJECTION_TOL: f64 = 1e-10;

/// Group element, stored as its representing matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement(pub DMatrix<f64>);

impl GroupElement {
    pub fn identity(n: usize) -> Self {
        GroupElement(DMatrix::identity(n, n))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement(&self.0 * &other.0)
    }

    pub fn inverse(&self) -> GroupElement {
        GroupElement(self.0.clone().try_inverse().expect("group elements are invertible"))
    }

    /// Frobenius distance between the representing matrices.
    pub fn distance(&self, other: &GroupElement) -> f64 {
        (&self.0 - &other.0).norm()
    }

    pub fn distance_to_identity(&self) -> f64 {
        (&self.0 - DMatrix::identity(self.0.nrows(), self.0.ncols())).norm()
    }
}

/// A real matrix Lie algebra together with an Ad-invariant inner product of
/// any signature.
#[derive(Debug, Clone)]
pub struct QuadraticLieAlgebra {
    name: String,
    basis: Vec<DMatrix<f64>>,
    metric: DMatrix<f64>,
    /// `structure[(i * d + j) * d + k]` is the coefficient of `e_k` in `[e_i, e_j]`.
    structure: Vec<f64>,
    flatten: DMatrix<f64>,
    flatten_pinv: DMatrix<f64>,
    abelian: bool,
}

impl QuadraticLieAlgebra {
    /// Build an algebra from representing matrices and the Gram matrix of the
    /// inner product in that basis. Structure constants are read off from the
    /// commutators.
    pub fn from_matrices(name: &str, basis: Vec<DMatrix<f64>>, metric: DMatrix<f64>) -> Result<Self> {
        let d = basis.len();
        if d == 0 {
            return Err(Error::NotLie("empty basis".into()));
        }
        let n = basis[0].nrows();
        if basis.iter().any(|b| b.nrows() != n || b.ncols() != n) {
            return Err(Error::NotLie("basis matrices must be square of equal size".into()));
        }
        if metric.shape() != (d, d) {
            return Err(Error::DimensionMismatch { expected: d, got: metric.nrows() });
        }
        let cols: Vec<DVector<f64>> =
            basis.iter().map(|b| DVector::from_column_slice(b.as_slice())).collect();
        let flatten = DMatrix::from_columns(&cols);
        if linalg::rank(&flatten, linalg::RANK_RTOL) != d {
            return Err(Error::NotLie("basis matrices are linearly dependent".into()));
        }
        let flatten_pinv = linalg::pinv(&flatten, linalg::RANK_RTOL);
        let mut structure = vec![0.0; d * d * d];
        let mut abelian = true;
        for i in 0..d {
            for j in 0..d {
                let c = &basis[i] * &basis[j] - &basis[j] * &basis[i];
                let v = DVector::from_column_slice(c.as_slice());
                let coeffs = &flatten_pinv * &v;
                let residual = (&flatten * &coeffs - &v).norm();
                if residual > 1e-9 * (1.0 + v.norm()) {
                    return Err(Error::NotLie(format!(
                        "commutator of basis elements {i},{j} leaves the span (residual {residual:e})"
                    )));
                }
                for k in 0..d {
                    let value = if coeffs[k].abs() < 1e-14 { 0.0 } else { coeffs[k] };
                    if value != 0.0 {
                        abelian = false;
                    }
                    structure[(i * d + j) * d + k] = value;
                }
            }
        }
        let alg = QuadraticLieAlgebra { name: name.to_string(), basis, metric, structure, flatten, flatten_pinv, abelian };
        alg.check_metric()?;
        Ok(alg)
    }

    fn check_metric(&self) -> Result<()> {
        let asym = linalg::max_abs(&(&self.metric - self.metric.transpose()));
        if asym > 1e-12 {
            return Err(Error::NotLie(format!("metric is not symmetric (residual {asym:e})")));
        }
        let smin = linalg::singular_values(&self.metric).iter().cloned().fold(f64::INFINITY, f64::min);
        if smin < 1e-10 {
            return Err(Error::NotLie("metric is degenerate".into()));
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    /// Size of the representing matrices.
    pub fn rep_dim(&self) -> usize {
        self.basis[0].nrows()
    }

    pub fn basis(&self) -> &[DMatrix<f64>] {
        &self.basis
    }

    pub fn metric(&self) -> &DMatrix<f64> {
        &self.metric
    }

    pub fn is_abelian(&self) -> bool {
        self.abelian
    }

    pub fn structure_constant(&self, i: usize, j: usize, k: usize) -> f64 {
        let d = self.dim();
        self.structure[(i * d + j) * d + k]
    }

    fn check_len(&self, x: &AlgebraVector) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: x.len() });
        }
        Ok(())
    }

    pub fn bracket(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<AlgebraVector> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.bracket_unchecked(x, y))
    }

    pub(crate) fn bracket_unchecked(&self, x: &AlgebraVector, y: &AlgebraVector) -> AlgebraVector {
        let d = self.dim();
        let mut out = DVector::zeros(d);
        if self.abelian {
            return out;
        }
        for i in 0..d {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..d {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                for k in 0..d {
                    out[k] += w * self.structure[(i * d + j) * d + k];
                }
            }
        }
        out
    }

    /// Matrix of `ad_x` acting on coordinates.
    pub fn ad_matrix(&self, x: &AlgebraVector) -> DMatrix<f64> {
        let d = self.dim();
        let mut m = DMatrix::zeros(d, d);
        for j in 0..d {
            let mut e = DVector::zeros(d);
            e[j] = 1.0;
            m.set_column(j, &self.bracket_unchecked(x, &e));
        }
        m
    }

    pub fn inner(&self, x: &AlgebraVector, y: &AlgebraVector) -> Result<f64> {
        self.check_len(x)?;
        self.check_len(y)?;
        Ok(self.inner_unchecked(x, y))
    }

    pub(crate) fn inner_unchecked(&self, x: &AlgebraVector, y: &AlgebraVector) -> f64 {
        (x.transpose() * &self.metric * y)[(0, 0)]
    }

    /// The invariant 3-form `eta(x, y, z) = <[x, y], z>`.
    pub fn eta3(&self, x: &AlgebraVector, y: &AlgebraVector, z: &AlgebraVector) -> Result<f64> {
        self.check_len(z)?;
        let b = self.bracket(x, y)?;
        Ok(self.inner_unchecked(&b, z))
    }

    pub fn to_matrix(&self, x: &AlgebraVector) -> DMatrix<f64> {
        let n = self.rep_dim();
        let mut m = DMatrix::zeros(n, n);
        for (c, b) in x.iter().zip(&self.basis) {
            if *c != 0.0 {
                m += b * *c;
            }
        }
        m
    }

    /// Least-squares coordinates of a matrix together with the projection residual.
    pub fn coords_with_residual(&self, m: &DMatrix<f64>) -> (AlgebraVector, f64) {
        let v = DVector::from_column_slice(m.as_slice());
        let c = &self.flatten_pinv * &v;
        let r = (&self.flatten * &c - &v).norm();
        (c, r)
    }

    pub fn coords(&self, m: &DMatrix<f64>) -> Result<AlgebraVector> {
        let (c, r) = self.coords_with_residual(m);
        if r > PROJECTION_TOL * (1.0 + m.norm()) {
            return Err(Error::NotInAlgebra(r));
        }
        Ok(c)
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity(self.rep_dim())
    }

    pub fn exp(&self, x: &AlgebraVector) -> Result<GroupElement> {
        self.check_len(x)?;
        Ok(GroupElement(expm(&self.to_matrix(x))))
    }

    pub fn log(&self, g: &GroupElement) -> Result<AlgebraVector> {
        if g.0.nrows() != self.rep_dim() {
            return Err(Error::DimensionMismatch { expected: self.rep_dim(), got: g.0.nrows() });
        }
        let l = logm(&g.0)?;
        self.coords(&l)
    }

    /// `Ad(g) x = g x g^-1` in algebra coordinates.
    pub fn ad_group(&self, g: &GroupElement, x: &AlgebraVector) -> Result<AlgebraVector> {
        self.check_len(x)?;
        if self.abelian {
            return Ok(x.clone());
        }
        let m = &g.0 * self.to_matrix(x) * g.inverse().0;
        self.coords(&m)
    }

    /// Matrix of `Ad(g)` on coordinates (columns are `Ad(g) e_i`).
    pub fn adjoint(&self, g: &GroupElement) -> DMatrix<f64> {
        let d = self.dim();
        if self.abelian {
            return DMatrix::identity(d, d);
        }
        let ginv = g.inverse();
        let mut out = DMatrix::zeros(d, d);
        for (i, b) in self.basis.iter().enumerate() {
            let (c, _) = self.coords_with_residual(&(&g.0 * b * &ginv.0));
            out.set_column(i, &c);
        }
        out
    }

    /// Largest residual of antisymmetry and the Jacobi identity over basis triples.
    pub fn jacobi_residual(&self) -> f64 {
        let d = self.dim();
        let e = |i: usize| {
            let mut v = DVector::zeros(d);
            v[i] = 1.0;
            v
        };
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let a = self.bracket_unchecked(&e(i), &e(j)) + self.bracket_unchecked(&e(j), &e(i));
                worst = worst.max(a.amax());
                for k in 0..d {
                    let jac = self.bracket_unchecked(&e(i), &self.bracket_unchecked(&e(j), &e(k)))
                        + self.bracket_unchecked(&e(j), &self.bracket_unchecked(&e(k), &e(i)))
                        + self.bracket_unchecked(&e(k), &self.bracket_unchecked(&e(i), &e(j)));
                    worst = worst.max(jac.amax());
                }
            }
        }
        worst
    }

    /// Largest value of `<[x,y],z> + <y,[x,z]>` over basis triples.
    pub fn invariance_residual(&self) -> f64 {
        let d = self.dim();
        let e = |i: usize| {
            let mut v = DVector::zeros(d);
            v[i] = 1.0;
            v
        };
        let mut worst: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                let xy = self.bracket_unchecked(&e(i), &e(j));
                for k in 0..d {
                    let xz = self.bracket_unchecked(&e(i), &e(k));
                    let r = self.inner_unchecked(&xy, &e(k)) + self.inner_unchecked(&e(j), &xz);
                    worst = worst.max(r.abs());
                }
            }
        }
        worst
    }
}

/// Antisymmetry and Jacobi for abstract structure constants.
pub(crate) fn check_structure(d: usize, c: &[f64]) -> Result<()> {
    let at = |i: usize, j: usize, k: usize| c[(i * d + j) * d + k];
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                if (at(i, j, k) + at(j, i, k)).abs() > 1e-12 {
                    return Err(Error::NotLie(format!("bracket not antisymmetric at ({i},{j})")));
                }
            }
        }
    }
    for i in 0..d {
        for j in 0..d {
            for k in 0..d {
                for l in 0..d {
                    let mut s = 0.0;
                    for m in 0..d {
                        s += at(j, k, m) * at(i, m, l) + at(k, i, m) * at(j, m, l) + at(i, j, m) * at(k, m, l);
                    }
                    if s.abs() > 1e-10 {
                        return Err(Error::NotLie(format!("Jacobi identity fails on ({i},{j},{k})")));
                    }
                }
            }
        }
    }
    Ok(())
}

pub fn unit_vector(d: usize, i: usize) -> AlgebraVector {
    let mut v = DVector::zeros(d);
    v[i] = 1.0;
    v
}

#[cfg(test)]
mod tests;
