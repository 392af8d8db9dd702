//! The quantum torus: finite sums of `W(p)` with `W(p)W(q) = exp(πi pᵀθq) W(p+q)`.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::Serialize;

use super::{box_points, graph_lattice_intersection, SkewTheta, ThetaEntries};
use crate::{Error, Result};

/// Tolerance used when a float θa is tested for integrality.
const INTEGRALITY_TOL: f64 = 1e-9;

#[derive(Clone, Debug, PartialEq)]
pub struct TorusAlgebraElement {
    pub n: usize,
    pub terms: BTreeMap<Vec<i64>, Complex64>,
}

impl TorusAlgebraElement {
    pub fn zero(n: usize) -> Self {
        TorusAlgebraElement { n, terms: BTreeMap::new() }
    }

    pub fn monomial(a: &[i64], c: Complex64) -> Self {
        let mut terms = BTreeMap::new();
        terms.insert(a.to_vec(), c);
        TorusAlgebraElement { n: a.len(), terms }
    }

    pub fn unit(n: usize) -> Self {
        Self::monomial(&vec![0; n], Complex64::new(1.0, 0.0))
    }

    /// `uᵢ = W(eᵢ)`; `inverse` gives `W(−eᵢ)`.
    pub fn generator(n: usize, i: usize, inverse: bool) -> Self {
        let mut a = vec![0; n];
        a[i] = if inverse { -1 } else { 1 };
        Self::monomial(&a, Complex64::new(1.0, 0.0))
    }

    pub fn coefficient(&self, a: &[i64]) -> Complex64 {
        self.terms.get(a).copied().unwrap_or_default()
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        let mut out = self.clone();
        for (k, c) in &other.terms {
            *out.terms.entry(k.clone()).or_default() += c;
        }
        Ok(out)
    }

    /// Largest coefficient difference.
    pub fn distance(&self, other: &Self) -> f64 {
        let keys: std::collections::BTreeSet<&Vec<i64>> = self.terms.keys().chain(other.terms.keys()).collect();
        keys.into_iter().map(|k| (self.coefficient(k) - other.coefficient(k)).norm()).fold(0.0, f64::max)
    }
}

fn phase(p: &[i64], q: &[i64], theta: &DMatrix<f64>) -> Complex64 {
    let mut s = 0.0;
    for i in 0..p.len() {
        for j in 0..q.len() {
            s += p[i] as f64 * theta[(i, j)] * q[j] as f64;
        }
    }
    Complex64::from_polar(1.0, std::f64::consts::PI * s)
}

pub fn qt_multiply(a: &TorusAlgebraElement, b: &TorusAlgebraElement, theta: &DMatrix<f64>) -> Result<TorusAlgebraElement> {
    if a.n != b.n || theta.nrows() != a.n {
        return Err(Error::DimensionMismatch { expected: a.n, got: if a.n != b.n { b.n } else { theta.nrows() } });
    }
    let mut out = TorusAlgebraElement::zero(a.n);
    for (p, ca) in &a.terms {
        for (q, cb) in &b.terms {
            let k: Vec<i64> = p.iter().zip(q).map(|(x, y)| x + y).collect();
            *out.terms.entry(k).or_default() += ca * cb * phase(p, q, theta);
        }
    }
    Ok(out)
}

/// The scalar `uᵢuⱼuᵢ⁻¹uⱼ⁻¹`.
pub fn qt_commutator_phase(i: usize, j: usize, theta: &DMatrix<f64>) -> Result<Complex64> {
    let n = theta.nrows();
    if i >= n || j >= n {
        return Err(Error::DimensionMismatch { expected: n, got: i.max(j) + 1 });
    }
    let g = |k, inv| TorusAlgebraElement::generator(n, k, inv);
    let mut x = qt_multiply(&g(i, false), &g(j, false), theta)?;
    x = qt_multiply(&x, &g(i, true), theta)?;
    x = qt_multiply(&x, &g(j, true), theta)?;
    if x.terms.len() != 1 {
        return Err(Error::Structural("commutator is not a scalar".into()));
    }
    Ok(x.coefficient(&vec![0; n]))
}

#[derive(Clone, Debug, Serialize)]
pub struct CenterReport {
    /// Exponents `a` of central monomials `W(a)` generating the center.
    pub generators: Vec<Vec<String>>,
    /// Set when θ is irrational and a bounded search found nothing.
    pub empty_within_bound: Option<i64>,
}

/// Generators of `{a : θa ∈ ℤⁿ}`: `W(a)` is central iff `θa` is integral.
pub fn qt_center(theta: &SkewTheta, bound: i64) -> Result<CenterReport> {
    match &theta.entries {
        ThetaEntries::Rational(_) => {
            let gens = graph_lattice_intersection(theta)?;
            Ok(CenterReport { generators: gens.iter().map(|g| g.iter().map(|x| x.to_string()).collect()).collect(), empty_within_bound: None })
        }
        ThetaEntries::Irrational(t) => {
            let found: Vec<Vec<i64>> = box_points(theta.n, bound)
                .into_iter()
                .filter(|a| a.iter().any(|&x| x != 0))
                .filter(|a| {
                    (0..theta.n).all(|i| {
                        let s: f64 = (0..theta.n).map(|j| t[(i, j)] * a[j] as f64).sum();
                        (s - s.round()).abs() < INTEGRALITY_TOL
                    })
                })
                .collect();
            let empty = found.is_empty();
            Ok(CenterReport {
                generators: found.iter().map(|a| a.iter().map(|x| x.to_string()).collect()).collect(),
                empty_within_bound: empty.then_some(bound),
            })
        }
        ThetaEntries::Float(_) => Err(Error::ExactRequired("the center needs exact theta".into())),
    }
}

/// All nonzero `a` with `|a|∞ ≤ bound` such that `W(a)` commutes with every
/// generator, checked by multiplying in the algebra.
pub fn brute_force_center(theta: &DMatrix<f64>, bound: i64) -> Result<Vec<Vec<i64>>> {
    let n = theta.nrows();
    let one = Complex64::new(1.0, 0.0);
    let mut out = Vec::new();
    for a in box_points(n, bound) {
        if a.iter().all(|&x| x == 0) {
            continue;
        }
        let w = TorusAlgebraElement::monomial(&a, one);
        let mut central = true;
        for j in 0..n {
            let u = TorusAlgebraElement::generator(n, j, false);
            if qt_multiply(&w, &u, theta)?.distance(&qt_multiply(&u, &w, theta)?) > 1e-12 {
                central = false;
                break;
            }
        }
        if central {
            out.push(a);
        }
    }
    Ok(out)
}
