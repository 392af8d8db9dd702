//! Named quadratic Lie algebras with marked Manin triples.

use super::subalgebra::LagrangianSubalgebra;
use super::{expm, QuadraticLieAlgebra};
use crate::error::{Error, Result};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Scale of the pairing `<x, y> = scale * Im tr(xy)` on sl(2,C).
pub const SL2C_PAIRING_SCALE: f64 = 1.0;

/// Short names of every catalog entry with default parameters.
pub const CATALOG: &[&str] = &[
    "abelian_double(1)",
    "abelian_double(2)",
    "cotangent_double(su(2))",
    "cotangent_double(so(3))",
    "cotangent_double(sl2r)",
    "cotangent_double(aff1)",
    "sl2c_iwasawa",
];

/// Catalog entry, as written in scenario files.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum CatalogSpec {
    /// `V ⊕ V*` with the hyperbolic pairing; `theta` defines the extra
    /// Lagrangian `v = graph(theta)`.
    AbelianDouble {
        n: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        theta: Option<Vec<Vec<f64>>>,
    },
    /// `h ⋉ h*` with the canonical pairing; `mu` twists `h` into the extra
    /// Lagrangian `v = {(x, ad*_x mu)}`.
    CotangentDouble {
        h: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        mu: Option<Vec<f64>>,
    },
    /// sl(2,C) as a real Lie algebra, `r = su(2)`, `b` = upper triangular with real diagonal.
    Sl2cIwasawa {},
}

impl CatalogSpec {
    /// Parse short forms such as `abelian_double(2)`, `cotangent_double(su(2))`, `sl2c_iwasawa`.
    pub fn parse(text: &str) -> Result<Self> {
        let t = text.trim();
        let (name, arg) = match t.find('(') {
            Some(i) if t.ends_with(')') => (&t[..i], Some(&t[i + 1..t.len() - 1])),
            _ => (t, None),
        };
        match (name, arg) {
            ("abelian_double", Some(a)) => {
                let n = a.trim().parse().map_err(|_| Error::Parse(format!("bad dimension in `{t}`")))?;
                Ok(CatalogSpec::AbelianDouble { n, theta: None })
            }
            ("cotangent_double", Some(a)) => Ok(CatalogSpec::CotangentDouble { h: a.trim().to_string(), mu: None }),
            ("sl2c_iwasawa", None) => Ok(CatalogSpec::Sl2cIwasawa {}),
            _ => Err(Error::UnknownCatalog(t.to_string())),
        }
    }

    pub fn display_name(&self) -> String {
        match self {
            CatalogSpec::AbelianDouble { n, .. } => format!("abelian_double({n})"),
            CatalogSpec::CotangentDouble { h, .. } => format!("cotangent_double({h})"),
            CatalogSpec::Sl2cIwasawa {} => "sl2c_iwasawa".to_string(),
        }
    }
}

/// An algebra together with its named Lagrangian subalgebras (`r`, `b`, and `v` when available).
#[derive(Debug, Clone)]
pub struct Backend {
    pub spec: CatalogSpec,
    pub algebra: Arc<QuadraticLieAlgebra>,
    pub subalgebras: Vec<LagrangianSubalgebra>,
}

impl Backend {
    pub fn get(&self, label: &str) -> Option<&LagrangianSubalgebra> {
        self.subalgebras.iter().find(|h| h.label() == label)
    }

    pub fn name(&self) -> String {
        self.spec.display_name()
    }
}

pub fn catalog(spec: &CatalogSpec) -> Result<Backend> {
    let (algebra, subalgebras) = match spec {
        CatalogSpec::AbelianDouble { n, theta } => abelian_double(*n, theta.as_ref())?,
        CatalogSpec::CotangentDouble { h, mu } => cotangent_double(h, mu.as_ref())?,
        CatalogSpec::Sl2cIwasawa {} => sl2c_iwasawa()?,
    };
    Ok(Backend { spec: spec.clone(), algebra: Arc::new(algebra), subalgebras })
}

fn default_theta(n: usize) -> Option<DMatrix<f64>> {
    if n % 2 == 1 {
        return None;
    }
    let mut t = DMatrix::zeros(n, n);
    for b in 0..n / 2 {
        let value = 1.0 / (b as f64 + 2.0);
        t[(2 * b, 2 * b + 1)] = value;
        t[(2 * b + 1, 2 * b)] = -value;
    }
    Some(t)
}

/// Rows `(theta e_j, e_j)` spanning `graph(theta)` inside `V ⊕ V*`.
pub(crate) fn theta_graph_span(theta: &DMatrix<f64>) -> DMatrix<f64> {
    let n = theta.nrows();
    DMatrix::from_fn(n, 2 * n, |j, c| if c < n { theta[(c, j)] } else if c - n == j { 1.0 } else { 0.0 })
}

fn abelian_double(n: usize, theta: Option<&Vec<Vec<f64>>>) -> Result<(QuadraticLieAlgebra, Vec<LagrangianSubalgebra>)> {
    if n == 0 {
        return Err(Error::UnknownCatalog("abelian_double(0)".into()));
    }
    let d = 2 * n;
    // translations of R^{2n}: x ↦ [[0, x], [0, 0]]
    let basis: Vec<DMatrix<f64>> = (0..d)
        .map(|i| {
            let mut m = DMatrix::zeros(d + 1, d + 1);
            m[(i, d)] = 1.0;
            m
        })
        .collect();
    let metric = DMatrix::from_fn(d, d, |i, j| if (i + n == j) || (j + n == i) { 1.0 } else { 0.0 });
    let alg = QuadraticLieAlgebra::from_matrices(&format!("abelian_double({n})"), basis, metric)?;
    let r = LagrangianSubalgebra::new("r", DMatrix::from_fn(n, d, |i, j| if i == j { 1.0 } else { 0.0 }))?;
    let b = LagrangianSubalgebra::new("b", DMatrix::from_fn(n, d, |i, j| if i + n == j { 1.0 } else { 0.0 }))?;
    let theta = match theta {
        Some(rows) => {
            if rows.len() != n || rows.iter().any(|r| r.len() != n) {
                return Err(Error::DimensionMismatch { expected: n, got: rows.len() });
            }
            let t = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
            if crate::linalg::skew_residual(&t) > 1e-14 {
                return Err(Error::Parse("theta must be skew-symmetric".into()));
            }
            Some(t)
        }
        None => default_theta(n),
    };
    let mut subs = vec![r, b];
    if let Some(t) = theta {
        subs.push(LagrangianSubalgebra::new("v", theta_graph_span(&t))?);
    }
    Ok((alg, subs))
}

fn lie_structure(h: &str) -> Result<(usize, Vec<f64>)> {
    match h.to_ascii_lowercase().replace(['(', ')', ','], "").as_str() {
        "su2" | "so3" => {
            let mut c = vec![0.0; 27];
            for (i, j, k, s) in [(0, 1, 2, 1.0), (1, 2, 0, 1.0), (2, 0, 1, 1.0), (1, 0, 2, -1.0), (2, 1, 0, -1.0), (0, 2, 1, -1.0)] {
                c[(i * 3 + j) * 3 + k] = s;
            }
            Ok((3, c))
        }
        "sl2r" => {
            // basis H, E, F
            let mut c = vec![0.0; 27];
            let mut set = |i: usize, j: usize, k: usize, v: f64| {
                c[(i * 3 + j) * 3 + k] = v;
                c[(j * 3 + i) * 3 + k] = -v;
            };
            set(0, 1, 1, 2.0);
            set(0, 2, 2, -2.0);
            set(1, 2, 0, 1.0);
            Ok((3, c))
        }
        "aff1" => {
            // basis X, Y with [X, Y] = Y
            let mut c = vec![0.0; 8];
            c[(0 * 2 + 1) * 2 + 1] = 1.0;
            c[(1 * 2 + 0) * 2 + 1] = -1.0;
            Ok((2, c))
        }
        _ => Err(Error::UnknownCatalog(format!("cotangent_double({h})"))),
    }
}

/// Structure constants of `h ⋉ h*` from those of `h`.
pub(crate) fn semidirect_structure(m: usize, c: &[f64]) -> Vec<f64> {
    let d = 2 * m;
    let hc = |i: usize, j: usize, k: usize| c[(i * m + j) * m + k];
    let mut out = vec![0.0; d * d * d];
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                out[(i * d + j) * d + k] = hc(i, j, k);
                // [e_i, f_j] = ad*_{e_i} f_j = -sum_k c_{ikj} f_k
                out[(i * d + (m + j)) * d + (m + k)] = -hc(i, k, j);
                out[((m + j) * d + i) * d + (m + k)] = hc(i, k, j);
            }
        }
    }
    out
}

/// Cotangent double of a Lie algebra given by structure constants.
pub fn cotangent_double_from_structure(
    name: &str,
    m: usize,
    c: &[f64],
    mu: Option<&[f64]>,
) -> Result<(QuadraticLieAlgebra, Vec<LagrangianSubalgebra>)> {
    if c.len() != m * m * m {
        return Err(Error::DimensionMismatch { expected: m * m * m, got: c.len() });
    }
    super::check_structure(m, c)?;
    let d = 2 * m;
    // affine representation on h* ⊕ R: x acts by ad*_x, xi by translation
    let mut basis = Vec::with_capacity(d);
    for i in 0..m {
        basis.push(DMatrix::from_fn(m + 1, m + 1, |k, j| if k < m && j < m { -c[(i * m + k) * m + j] } else { 0.0 }));
    }
    for j in 0..m {
        let mut t = DMatrix::zeros(m + 1, m + 1);
        t[(j, m)] = 1.0;
        basis.push(t);
    }
    let flat: Vec<DVector<f64>> = basis[..m].iter().map(|b| DVector::from_column_slice(b.as_slice())).collect();
    if crate::linalg::rank(&DMatrix::from_columns(&flat), crate::linalg::RANK_RTOL) != m {
        return Err(Error::NotLie(format!("{name}: coadjoint representation is not faithful (h has a center)")));
    }
    let metric = DMatrix::from_fn(d, d, |i, j| if (i + m == j) || (j + m == i) { 1.0 } else { 0.0 });
    let alg = QuadraticLieAlgebra::from_matrices(name, basis, metric)?;
    let expected = semidirect_structure(m, c);
    for (idx, want) in expected.iter().enumerate() {
        let (ij, k) = (idx / d, idx % d);
        if (alg.structure_constant(ij / d, ij % d, k) - want).abs() > 1e-12 {
            return Err(Error::NotLie(format!("{name}: representation does not reproduce the semidirect bracket")));
        }
    }
    let r = LagrangianSubalgebra::new("r", DMatrix::from_fn(m, d, |i, j| if i == j { 1.0 } else { 0.0 }))?;
    let b = LagrangianSubalgebra::new("b", DMatrix::from_fn(m, d, |i, j| if i + m == j { 1.0 } else { 0.0 }))?;
    let default_mu: Vec<f64> = (0..m).map(|i| [0.6, -0.3, 0.4, 0.25][i % 4]).collect();
    let default_mu = if m == 2 { vec![0.25, 1.0] } else { default_mu };
    let mu = mu.unwrap_or(&default_mu);
    if mu.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: mu.len() });
    }
    let v_span = DMatrix::from_fn(m, d, |i, col| {
        if col < m {
            if col == i {
                1.0
            } else {
                0.0
            }
        } else {
            let k = col - m;
            -(0..m).map(|j| mu[j] * c[(i * m + k) * m + j]).sum::<f64>()
        }
    });
    let v = LagrangianSubalgebra::new("v", v_span)?;
    Ok((alg, vec![r, b, v]))
}

fn cotangent_double(h: &str, mu: Option<&Vec<f64>>) -> Result<(QuadraticLieAlgebra, Vec<LagrangianSubalgebra>)> {
    let (m, c) = lie_structure(h)?;
    cotangent_double_from_structure(&format!("cotangent_double({h})"), m, &c, mu.map(|v| v.as_slice()))
}

fn realify(re: &DMatrix<f64>, im: &DMatrix<f64>) -> DMatrix<f64> {
    let n = re.nrows();
    let mut out = DMatrix::zeros(2 * n, 2 * n);
    out.view_mut((0, 0), (n, n)).copy_from(re);
    out.view_mut((n, n), (n, n)).copy_from(re);
    out.view_mut((0, n), (n, n)).copy_from(&(-im));
    out.view_mut((n, 0), (n, n)).copy_from(im);
    out
}

fn sl2c_iwasawa() -> Result<(QuadraticLieAlgebra, Vec<LagrangianSubalgebra>)> {
    let z = DMatrix::zeros(2, 2);
    let h = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
    let e = DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0]);
    let f = DMatrix::from_row_slice(2, 2, &[0.0, 0.0, 1.0, 0.0]);
    // real basis H, E, F, iH, iE, iF
    let complex: Vec<(DMatrix<f64>, DMatrix<f64>)> = vec![
        (h.clone(), z.clone()),
        (e.clone(), z.clone()),
        (f.clone(), z.clone()),
        (z.clone(), h),
        (z.clone(), e),
        (z, f),
    ];
    let metric = DMatrix::from_fn(6, 6, |i, j| {
        let (a, b) = &complex[i];
        let (c, d) = &complex[j];
        SL2C_PAIRING_SCALE * ((a * d).trace() + (b * c).trace())
    });
    let basis = complex.iter().map(|(re, im)| realify(re, im)).collect();
    let alg = QuadraticLieAlgebra::from_matrices("sl2c_iwasawa", basis, metric)?;
    let r = LagrangianSubalgebra::new(
        "r",
        DMatrix::from_row_slice(3, 6, &[0., 0., 0., 1., 0., 0., 0., 1., -1., 0., 0., 0., 0., 0., 0., 0., 1., 1.]),
    )?;
    let b_span = DMatrix::from_row_slice(3, 6, &[1., 0., 0., 0., 0., 0., 0., 1., 0., 0., 0., 0., 0., 0., 0., 0., 1., 0.]);
    let b = LagrangianSubalgebra::new("b", b_span)?;
    // v = Ad_g(su(2)) for a fixed g; a conjugate compact form contains no
    // nilpotents, so it is transverse to b (it always meets r nontrivially)
    let mut x = DVector::zeros(6);
    x[0] = 0.7;
    x[2] = 0.8;
    x[4] = -0.4;
    let g = expm(&alg.to_matrix(&x));
    let ginv = g.clone().try_inverse().expect("exp is invertible");
    let mut v_span = DMatrix::zeros(3, 6);
    for i in 0..3 {
        let m = &g * alg.to_matrix(&r.span().row(i).transpose()) * &ginv;
        v_span.set_row(i, &alg.coords(&m)?.transpose());
    }
    let v = LagrangianSubalgebra::new("v", v_span)?;
    Ok((alg, vec![r, b, v]))
}
