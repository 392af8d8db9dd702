//! Python bindings for `holoform`.
//!
//! Matrices cross the boundary as nested lists of floats; reports as plain
//! dicts (built from their JSON form).
//!
//! ```python
//! import holoform_py as hf
//! be = hf.Backend("sl2c_iwasawa")
//! sp = hf.ModuliSpace(be, hf.Surface.builtin("square"))
//! pt = sp.random_point(seed=3)
//! sp.omega(pt)
//! ```

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;
use pyo3::types::{PyComplex, PyDict, PyTuple};

use holoform::lie::{catalog, CatalogSpec, CATALOG};
use holoform::moduli::{ModuliPoint, ModuliSpace, DEFAULT_SCALE};
use holoform::surface::{moduli_dimension, validate, ColoredPolygon, Labels, BUILTINS};
use holoform::symplectic as sy;
use holoform::torus_morita as tm;
use holoform::Error;

fn err(e: Error) -> PyErr {
    match e {
        Error::Parse(_)
        | Error::UnknownCatalog(_)
        | Error::Surface(_)
        | Error::UnresolvedLabel(_)
        | Error::DimensionMismatch { .. }
        | Error::Singular(_)
        | Error::ExactRequired(_)
        | Error::InvalidPoint(_)
        | Error::Glue(_) => PyValueError::new_err(e.to_string()),
        _ => PyRuntimeError::new_err(e.to_string()),
    }
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect()).collect()
}

fn to_dict<'py>(py: Python<'py>, value: &impl serde::Serialize) -> PyResult<Bound<'py, PyAny>> {
    let text = serde_json::to_string(value).map_err(|e| PyRuntimeError::new_err(e.to_string()))?;
    py.import("json")?.call_method1("loads", (text,))
}

#[pyclass(name = "Backend", frozen)]
struct PyBackend {
    inner: holoform::lie::Backend,
}

#[pymethods]
impl PyBackend {
    /// Catalog entry, e.g. "abelian_double(2)", "cotangent_double(su(2))", "sl2c_iwasawa".
    #[new]
    fn new(spec: &str) -> PyResult<Self> {
        let inner = catalog(&CatalogSpec::parse(spec).map_err(err)?).map_err(err)?;
        Ok(PyBackend { inner })
    }

    /// Abelian double with an explicit float θ.
    #[staticmethod]
    fn abelian(theta: Vec<Vec<f64>>) -> PyResult<Self> {
        let inner = catalog(&CatalogSpec::AbelianDouble { n: theta.len(), theta: Some(theta) }).map_err(err)?;
        Ok(PyBackend { inner })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name()
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.algebra.dim()
    }

    fn labels(&self) -> Vec<String> {
        self.inner.subalgebras.iter().map(|h| h.label().to_string()).collect()
    }

    fn is_abelian(&self) -> bool {
        self.inner.algebra.is_abelian()
    }

    fn jacobi_residual(&self) -> f64 {
        self.inner.algebra.jacobi_residual()
    }

    fn invariance_residual(&self) -> f64 {
        self.inner.algebra.invariance_residual()
    }

    fn is_lagrangian<'py>(&self, py: Python<'py>, label: &str) -> PyResult<Bound<'py, PyAny>> {
        let h = self.inner.get(label).ok_or_else(|| PyValueError::new_err(format!("no subalgebra `{label}`")))?;
        to_dict(py, &holoform::lie::is_lagrangian(&self.inner.algebra, h))
    }

    fn are_transverse<'py>(&self, py: Python<'py>, first: &str, second: &str) -> PyResult<Bound<'py, PyAny>> {
        let get = |l: &str| self.inner.get(l).ok_or_else(|| PyValueError::new_err(format!("no subalgebra `{l}`")));
        to_dict(py, &holoform::lie::are_transverse(&self.inner.algebra, get(first)?, get(second)?))
    }

    fn __repr__(&self) -> String {
        format!("Backend({:?})", self.inner.name())
    }
}

#[pyclass(name = "Surface", frozen)]
struct PySurface {
    inner: ColoredPolygon,
}

#[pymethods]
impl PySurface {
    #[staticmethod]
    #[pyo3(signature = (name, r="r", b="b", v="v"))]
    fn builtin(name: &str, r: &str, b: &str, v: &str) -> PyResult<Self> {
        let labels = Labels { r: r.into(), b: b.into(), v: v.into() };
        Ok(PySurface { inner: ColoredPolygon::builtin(name, &labels).map_err(err)? })
    }

    /// Side tokens such as "r1", "b^-1", "#c"; `coloring` maps arc names to labels.
    #[staticmethod]
    #[pyo3(signature = (tokens, coloring=None, name="word"))]
    fn from_tokens(tokens: Vec<String>, coloring: Option<BTreeMap<String, String>>, name: &str) -> PyResult<Self> {
        let toks: Vec<&str> = tokens.iter().map(String::as_str).collect();
        Ok(PySurface { inner: ColoredPolygon::from_tokens(name, &toks, &coloring.unwrap_or_default()).map_err(err)? })
    }

    #[getter]
    fn name(&self) -> String {
        self.inner.name.clone()
    }

    fn tokens(&self) -> Vec<String> {
        self.inner.tokens()
    }

    fn validate<'py>(&self, py: Python<'py>, backend: &PyBackend) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &validate(&self.inner, &backend.inner).map_err(err)?)
    }

    fn dimension(&self, backend: &PyBackend) -> PyResult<usize> {
        moduli_dimension(&self.inner, &backend.inner).map_err(err)
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    fn __repr__(&self) -> String {
        format!("Surface({})", self.inner)
    }
}

/// A point of a moduli space: one holonomy per slot.
#[pyclass(name = "Point", frozen)]
struct PyPoint {
    inner: ModuliPoint,
}

#[pymethods]
impl PyPoint {
    fn holonomies(&self) -> Vec<Vec<Vec<f64>>> {
        self.inner.holonomies.iter().map(|g| rows(g.matrix())).collect()
    }

    fn distance(&self, other: &PyPoint) -> f64 {
        self.inner.distance(&other.inner)
    }
}

#[pyclass(name = "ModuliSpace", frozen)]
struct PyModuliSpace {
    inner: ModuliSpace,
}

#[pymethods]
impl PyModuliSpace {
    #[new]
    fn new(backend: &PyBackend, surface: &PySurface) -> PyResult<Self> {
        Ok(PyModuliSpace { inner: ModuliSpace::new(&backend.inner, &surface.inner).map_err(err)? })
    }

    #[getter]
    fn dimension(&self) -> usize {
        self.inner.dimension()
    }

    #[getter]
    fn param_dim(&self) -> usize {
        self.inner.param_dim()
    }

    #[pyo3(signature = (seed=0, scale=DEFAULT_SCALE))]
    fn random_point(&self, seed: u64, scale: f64) -> PyResult<PyPoint> {
        Ok(PyPoint { inner: self.inner.random_point(seed, scale).map_err(err)? })
    }

    /// Norm of the log of the boundary product.
    fn constraint_residual(&self, pt: &PyPoint) -> PyResult<f64> {
        Ok(self.inner.constraint_residual(&pt.inner).map_err(err)?.norm())
    }

    /// Tangent basis as a `param_dim x dimension` matrix.
    fn tangent_matrix(&self, pt: &PyPoint) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&self.inner.tangent_matrix(&pt.inner).map_err(err)?))
    }

    /// Gram matrix of ω on the tangent basis.
    fn omega(&self, pt: &PyPoint) -> PyResult<Vec<Vec<f64>>> {
        Ok(rows(&sy::omega_on_basis(&self.inner, &pt.inner).map_err(err)?.1))
    }

    /// Gram matrix with the fold started at side `start`.
    fn omega_from(&self, pt: &PyPoint, start: usize) -> PyResult<Vec<Vec<f64>>> {
        let t = self.inner.tangent_matrix(&pt.inner).map_err(err)?;
        Ok(rows(&sy::omega_matrix_from(&self.inner, &pt.inner, &t, start).map_err(err)?))
    }

    /// Closed-form Gram matrix when the surface is one of the worked examples.
    fn closed_form(&self, pt: &PyPoint) -> PyResult<Option<Vec<Vec<f64>>>> {
        let Some(kind) = sy::ClosedFormKind::detect(self.inner.polygon()) else { return Ok(None) };
        let t = self.inner.tangent_matrix(&pt.inner).map_err(err)?;
        Ok(Some(rows(&sy::closed_form(kind, &self.inner, &pt.inner, &t).map_err(err)?)))
    }

    #[pyo3(signature = (pt, h=sy::FD_STEP, tol=sy::CLOSED_TOL))]
    fn check_closed<'py>(&self, py: Python<'py>, pt: &PyPoint, h: f64, tol: f64) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &sy::check_closed(&self.inner, &pt.inner, h, tol).map_err(err)?)
    }

    fn check_nondegenerate<'py>(&self, py: Python<'py>, pt: &PyPoint) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &sy::check_nondegenerate(&self.inner, &pt.inner).map_err(err)?)
    }

    #[pyo3(signature = (pt, seed=0))]
    fn invariance<'py>(&self, py: Python<'py>, pt: &PyPoint, seed: u64) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &sy::invariance_checks(&self.inner, &pt.inner, seed).map_err(err)?)
    }

    /// Lu–Weinstein groupoid axioms on a random composable triple (square only).
    #[pyo3(signature = (seed=0, scale=DEFAULT_SCALE))]
    fn check_groupoid<'py>(&self, py: Python<'py>, seed: u64, scale: f64) -> PyResult<Bound<'py, PyAny>> {
        to_dict(py, &sy::check_groupoid(&self.inner, seed, scale).map_err(err)?)
    }

    fn __repr__(&self) -> String {
        format!("ModuliSpace({} over {}, dim {})", self.inner.polygon(), self.inner.backend().name(), self.inner.dimension())
    }
}

/// Glue `seam1` of `first` to `seam2` of `second`, sample a composable point
/// of `second` and test that the composition graph is Lagrangian.
#[pyfunction]
#[pyo3(signature = (first, pt, second, seam1, seam2, seed=0, scale=DEFAULT_SCALE))]
fn lagrangian_graph<'py>(
    py: Python<'py>,
    first: &PyModuliSpace,
    pt: &PyPoint,
    second: &PyModuliSpace,
    seam1: Vec<usize>,
    seam2: Vec<usize>,
    seed: u64,
    scale: f64,
) -> PyResult<Bound<'py, PyAny>> {
    let (sp1, sp2) = (&first.inner, &second.inner);
    let gs = sy::GluedSpace::new(sp1, sp2, &seam1, &seam2).map_err(err)?;
    let pt2 = sy::sample_composable(sp1, &pt.inner, sp2, &gs, seed, scale).map_err(err)?;
    to_dict(py, &sy::check_lagrangian_graph(sp1, &pt.inner, sp2, &pt2, &gs).map_err(err)?)
}

#[pyfunction]
fn lw_product(square: &PyModuliSpace, p: &PyPoint, q: &PyPoint) -> PyResult<PyPoint> {
    Ok(PyPoint { inner: sy::lw_product(&square.inner, &p.inner, &q.inner).map_err(err)? })
}

#[pyfunction]
fn lw_inverse(p: &PyPoint) -> PyPoint {
    PyPoint { inner: sy::lw_inverse(&p.inner) }
}

/// Skew θ with entries such as "1/2", "0.25" or "irr:1.4142".
#[pyclass(name = "Theta", frozen)]
struct PyTheta {
    inner: tm::SkewTheta,
}

fn entry_text(x: &Bound<'_, PyAny>) -> PyResult<String> {
    if let Ok(s) = x.extract::<String>() {
        return Ok(s);
    }
    if let Ok(i) = x.extract::<i64>() {
        return Ok(i.to_string());
    }
    Ok(format!("{}", x.extract::<f64>()?))
}

#[pymethods]
impl PyTheta {
    #[new]
    #[pyo3(signature = (rows, mode="exact"))]
    fn new(rows: Vec<Vec<Bound<'_, PyAny>>>, mode: &str) -> PyResult<Self> {
        let mode = match mode {
            "exact" => tm::Mode::Exact,
            "float" => tm::Mode::Float,
            _ => return Err(PyValueError::new_err("mode must be 'exact' or 'float'")),
        };
        let text = rows.iter().map(|r| r.iter().map(entry_text).collect::<PyResult<Vec<_>>>()).collect::<PyResult<Vec<_>>>()?;
        Ok(PyTheta { inner: tm::SkewTheta::parse(&text, mode).map_err(err)? })
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n
    }

    fn to_list(&self) -> Vec<Vec<f64>> {
        rows(&self.inner.to_f64())
    }

    fn negated(&self) -> Self {
        PyTheta { inner: self.inner.negated() }
    }

    fn backend(&self) -> PyResult<PyBackend> {
        Ok(PyBackend { inner: self.inner.backend().map_err(err)? })
    }
}

/// Basis of `{k : θk ∈ ℤⁿ}`.
#[pyfunction]
fn graph_lattice_intersection(theta: &PyTheta) -> PyResult<Vec<Vec<i64>>> {
    let basis = tm::graph_lattice_intersection(&theta.inner).map_err(err)?;
    basis
        .iter()
        .map(|v| v.iter().map(|x| x.to_string().parse::<i64>().map_err(|_| PyRuntimeError::new_err("lattice entry exceeds i64"))).collect())
        .collect()
}

/// The exact Γ pipeline: bivectors, surjectivity, integrality at `planck`.
#[pyfunction]
#[pyo3(signature = (theta, planck="1"))]
fn torus_morita<'py>(py: Python<'py>, theta: &PyTheta, planck: &str) -> PyResult<Bound<'py, PyAny>> {
    let t = &theta.inner;
    let h = holoform::exact::parse_rational(planck).map_err(err)?;
    let spaces = tm::gamma_spaces(t).map_err(err)?;
    let poisson = tm::poisson_report(t, &spaces).map_err(err)?;
    let morita = tm::morita_surjectivity(&spaces);
    let mut integrality = BTreeMap::new();
    for g in [&spaces.g00, &spaces.g01, &spaces.g10, &spaces.g11, &spaces.g11_swapped] {
        integrality.insert(g.name.clone(), tm::integrality_check(g, &h).map_err(err)?);
    }
    let value = serde_json::json!({"poisson": poisson, "morita": morita, "integrality": integrality});
    to_dict(py, &value)
}

#[pyfunction]
#[pyo3(signature = (theta, bound=4))]
fn qt_center<'py>(py: Python<'py>, theta: &PyTheta, bound: i64) -> PyResult<Bound<'py, PyAny>> {
    to_dict(py, &tm::qt_center(&theta.inner, bound).map_err(err)?)
}

/// The scalar `uᵢuⱼuᵢ⁻¹uⱼ⁻¹`.
#[pyfunction]
fn qt_commutator_phase<'py>(py: Python<'py>, theta: &PyTheta, i: usize, j: usize) -> PyResult<Bound<'py, PyComplex>> {
    let z = tm::qt_commutator_phase(i, j, &theta.inner.to_f64()).map_err(err)?;
    Ok(PyComplex::from_doubles(py, z.re, z.im))
}

/// Product of two finite sums `{exponent tuple: complex}`.
#[pyfunction]
fn qt_multiply<'py>(py: Python<'py>, theta: &PyTheta, a: BTreeMap<Vec<i64>, (f64, f64)>, b: BTreeMap<Vec<i64>, (f64, f64)>) -> PyResult<Bound<'py, PyDict>> {
    let n = theta.inner.n;
    let lift = |m: BTreeMap<Vec<i64>, (f64, f64)>| -> PyResult<tm::TorusAlgebraElement> {
        let mut e = tm::TorusAlgebraElement::zero(n);
        for (k, (re, im)) in m {
            if k.len() != n {
                return Err(PyValueError::new_err(format!("exponent {k:?} has length {}, expected {n}", k.len())));
            }
            e = e.add(&tm::TorusAlgebraElement::monomial(&k, num_complex::Complex64::new(re, im))).map_err(err)?;
        }
        Ok(e)
    };
    let p = tm::qt_multiply(&lift(a)?, &lift(b)?, &theta.inner.to_f64()).map_err(err)?;
    let out = PyDict::new(py);
    for (k, z) in p.terms {
        out.set_item(PyTuple::new(py, k)?, (z.re, z.im))?;
    }
    Ok(out)
}

#[pymodule]
fn holoform_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyBackend>()?;
    m.add_class::<PySurface>()?;
    m.add_class::<PyPoint>()?;
    m.add_class::<PyModuliSpace>()?;
    m.add_class::<PyTheta>()?;
    m.add_function(wrap_pyfunction!(lagrangian_graph, m)?)?;
    m.add_function(wrap_pyfunction!(lw_product, m)?)?;
    m.add_function(wrap_pyfunction!(lw_inverse, m)?)?;
    m.add_function(wrap_pyfunction!(graph_lattice_intersection, m)?)?;
    m.add_function(wrap_pyfunction!(torus_morita, m)?)?;
    m.add_function(wrap_pyfunction!(qt_center, m)?)?;
    m.add_function(wrap_pyfunction!(qt_commutator_phase, m)?)?;
    m.add_function(wrap_pyfunction!(qt_multiply, m)?)?;
    m.add("CATALOG", CATALOG.to_vec())?;
    m.add("BUILTINS", BUILTINS.to_vec())?;
    Ok(())
}
