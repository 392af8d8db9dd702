//! Exact abelian specialization over `R = V/ℤⁿ`, `B = V*/ℤⁿ`: lattice
//! symplectic tori, the four Γ spaces, base Poisson bivectors, integrality,
//! and the quantum torus.
//!
//! Parameters follow the float machinery: an `r` or `b` arc carries its
//! coefficients in the standard basis, a `v` arc the coefficients `ξ` of
//! `(θξ, ξ)`, a cut its `2n` coordinates. Everything here is a rational
//! linear computation.

mod qt;

pub use qt::{brute_force_center, qt_center, qt_commutator_phase, qt_multiply, CenterReport, TorusAlgebraElement};

use std::collections::BTreeSet;

use nalgebra::DMatrix;
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::exact::{parse_rational, q, rational_integer_kernel, to_f64, QMatrix, Q};
use crate::lie::{catalog, Backend, CatalogSpec};
use crate::surface::{glue_chain, validate, ColoredPolygon, Glued, Labels, Slot};
use crate::{Error, Result};

/// Entries of θ: exact rationals, floats, or irrational values known only
/// through a float approximation (exact mode, but no rational arithmetic).
#[derive(Clone, Debug, PartialEq)]
pub enum ThetaEntries {
    Rational(QMatrix),
    Float(DMatrix<f64>),
    Irrational(DMatrix<f64>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    Exact,
    Float,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SkewTheta {
    pub n: usize,
    pub entries: ThetaEntries,
}

/// Prefix of an entry marking an irrational placeholder, e.g. `"irr:1.41421356"`.
pub const IRRATIONAL_PREFIX: &str = "irr:";

impl SkewTheta {
    pub fn exact(m: QMatrix) -> Result<Self> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        if !m.is_skew() {
            return Err(Error::Parse("theta must be skew-symmetric".into()));
        }
        Ok(SkewTheta { n: m.nrows(), entries: ThetaEntries::Rational(m) })
    }

    pub fn float(m: DMatrix<f64>) -> Result<Self> {
        Self::check_float(&m)?;
        Ok(SkewTheta { n: m.nrows(), entries: ThetaEntries::Float(m) })
    }

    pub fn irrational(m: DMatrix<f64>) -> Result<Self> {
        Self::check_float(&m)?;
        Ok(SkewTheta { n: m.nrows(), entries: ThetaEntries::Irrational(m) })
    }

    fn check_float(m: &DMatrix<f64>) -> Result<()> {
        if m.nrows() != m.ncols() {
            return Err(Error::DimensionMismatch { expected: m.nrows(), got: m.ncols() });
        }
        if crate::linalg::skew_residual(m) > 1e-14 {
            return Err(Error::Parse("theta must be skew-symmetric".into()));
        }
        Ok(())
    }

    /// Parse textual entries (`"1/2"`, `"-0.25"`, `"irr:1.4142"`).
    pub fn parse(rows: &[Vec<String>], mode: Mode) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Parse("theta must be a square matrix".into()));
        }
        let irrational = rows.iter().flatten().any(|e| e.trim().starts_with(IRRATIONAL_PREFIX));
        let float_of = |e: &str| -> Result<f64> {
            let t = e.trim().trim_start_matches(IRRATIONAL_PREFIX);
            match parse_rational(t) {
                Ok(x) => Ok(to_f64(&x)),
                Err(_) => t.parse::<f64>().map_err(|_| Error::Parse(format!("bad theta entry `{e}`"))),
            }
        };
        if mode == Mode::Float || irrational {
            let mut m = DMatrix::zeros(n, n);
            for (i, row) in rows.iter().enumerate() {
                for (j, e) in row.iter().enumerate() {
                    m[(i, j)] = float_of(e)?;
                }
            }
            return if mode == Mode::Float { Self::float(m) } else { Self::irrational(m) };
        }
        let mut m = QMatrix::zeros(n, n);
        for (i, row) in rows.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                m[(i, j)] = parse_rational(e)?;
            }
        }
        Self::exact(m)
    }

    /// Exact version of the default abelian θ: blocks `1/(b+2)`; `None` for odd `n`.
    pub fn default_exact(n: usize) -> Option<Self> {
        if n == 0 || n % 2 == 1 {
            return None;
        }
        let mut m = QMatrix::zeros(n, n);
        for b in 0..n / 2 {
            let v = crate::exact::qf(1, b as i64 + 2);
            m[(2 * b + 1, 2 * b)] = -v.clone();
            m[(2 * b, 2 * b + 1)] = v;
        }
        Self::exact(m).ok()
    }

    pub fn mode(&self) -> Mode {
        match self.entries {
            ThetaEntries::Float(_) => Mode::Float,
            _ => Mode::Exact,
        }
    }

    pub fn rational(&self) -> Result<&QMatrix> {
        match &self.entries {
            ThetaEntries::Rational(m) => Ok(m),
            ThetaEntries::Float(_) => Err(Error::ExactRequired("theta is given in float mode".into())),
            ThetaEntries::Irrational(_) => Err(Error::ExactRequired("theta has irrational entries".into())),
        }
    }

    pub fn to_f64(&self) -> DMatrix<f64> {
        match &self.entries {
            ThetaEntries::Rational(m) => m.to_f64(),
            ThetaEntries::Float(m) | ThetaEntries::Irrational(m) => m.clone(),
        }
    }

    pub fn negated(&self) -> Self {
        let entries = match &self.entries {
            ThetaEntries::Rational(m) => ThetaEntries::Rational(m.neg()),
            ThetaEntries::Float(m) => ThetaEntries::Float(-m),
            ThetaEntries::Irrational(m) => ThetaEntries::Irrational(-m),
        };
        SkewTheta { n: self.n, entries }
    }

    pub fn is_invertible(&self) -> bool {
        match &self.entries {
            ThetaEntries::Rational(m) => m.rank() == self.n,
            _ => crate::linalg::rank(&self.to_f64(), crate::linalg::RANK_RTOL) == self.n,
        }
    }

    /// The abelian double `V ⊕ V*` with `v = graph(θ)`.
    pub fn backend(&self) -> Result<Backend> {
        let t = self.to_f64();
        let rows = (0..self.n).map(|i| (0..self.n).map(|j| t[(i, j)]).collect()).collect();
        catalog(&CatalogSpec::AbelianDouble { n: self.n, theta: Some(rows) })
    }
}

#[derive(Clone, Debug)]
pub struct ThetaGraph {
    pub subalgebra: crate::lie::LagrangianSubalgebra,
    pub lagrangian: bool,
    pub transverse_to_r: bool,
    pub transverse_to_b: bool,
}

/// `𝔳 = span{(θeⱼ, eⱼ)}` inside `abelian_double(n)`.
pub fn lagrangian_graph(theta: &SkewTheta) -> Result<ThetaGraph> {
    let be = theta.backend()?;
    let v = be.get("v").expect("abelian double with theta has v").clone();
    let alg = &be.algebra;
    let lagrangian = crate::lie::is_lagrangian(alg, &v).pass;
    let transverse_to_r = crate::lie::are_transverse(alg, &v, be.get("r").expect("r")).pass;
    let transverse_to_b = crate::lie::are_transverse(alg, &v, be.get("b").expect("b")).pass;
    Ok(ThetaGraph { subalgebra: v, lagrangian, transverse_to_r, transverse_to_b })
}

/// Clear the common denominator: `θ = N / d`.
fn integer_form(theta: &QMatrix) -> (Vec<Vec<BigInt>>, BigInt) {
    use num_integer::Integer;
    let n = theta.nrows();
    let d = (0..n).flat_map(|i| (0..n).map(move |j| (i, j))).fold(BigInt::one(), |acc, (i, j)| acc.lcm(theta[(i, j)].denom()));
    let dq = Q::from_integer(d.clone());
    let rows = (0..n).map(|i| (0..n).map(|j| (&theta[(i, j)] * &dq).to_integer()).collect()).collect();
    (rows, d)
}

/// HNF basis of `{k ∈ ℤⁿ : θk ∈ ℤⁿ}`, i.e. of `graph(θ) ∩ ℤ²ⁿ` projected to
/// the `V*` factor. Empty iff the intersection is `{0}`.
pub fn graph_lattice_intersection(theta: &SkewTheta) -> Result<Vec<Vec<BigInt>>> {
    let t = theta.rational()?;
    let n = theta.n;
    let (nrows, d) = integer_form(t);
    // N k − d y = 0 over ℤ²ⁿ, then keep k
    let a: Vec<Vec<BigInt>> = (0..n)
        .map(|i| {
            let mut row = nrows[i].clone();
            row.extend((0..n).map(|j| if i == j { -d.clone() } else { BigInt::zero() }));
            row
        })
        .collect();
    let ker = crate::exact::integer_kernel(&a, 2 * n);
    let proj: Vec<Vec<BigInt>> = ker.into_iter().map(|v| v[..n].to_vec()).collect();
    Ok(crate::exact::hnf_rows(&proj, n))
}

/// All `k` with `|k|∞ ≤ bound`, `k ≠ 0` and `θk ∈ ℤⁿ`, by direct enumeration.
pub fn brute_force_graph_lattice(theta: &QMatrix, bound: i64) -> Vec<Vec<i64>> {
    let n = theta.nrows();
    let mut out = Vec::new();
    for k in box_points(n, bound) {
        if k.iter().all(|&x| x == 0) {
            continue;
        }
        let integral = (0..n).all(|i| (0..n).fold(Q::zero(), |acc, j| acc + &theta[(i, j)] * q(k[j])).is_integer());
        if integral {
            out.push(k);
        }
    }
    out
}

pub(crate) fn box_points(n: usize, bound: i64) -> Vec<Vec<i64>> {
    let mut pts = vec![vec![]];
    for _ in 0..n {
        pts = pts.into_iter().flat_map(|p: Vec<i64>| (-bound..=bound).map(move |x| [p.clone(), vec![x]].concat())).collect();
    }
    pts
}

/// Lattice points with `|x|∞ ≤ bound` of the lattice spanned by `basis` (rank = dimension).
pub fn lattice_points_in_box(basis: &[Vec<BigInt>], n: usize, bound: i64) -> Result<BTreeSet<Vec<i64>>> {
    if basis.len() != n {
        return Err(Error::Structural("lattice is not full rank".into()));
    }
    let b = QMatrix::from_integer_rows(basis, n);
    let inv = b.transpose().inverse()?;
    let mut out = BTreeSet::new();
    for p in box_points(n, bound) {
        let x = QMatrix::from_fn(n, 1, |i, _| q(p[i]));
        if inv.mul(&x).is_integer() && p.iter().any(|&v| v != 0) {
            out.insert(p);
        }
    }
    Ok(out)
}

/// Exact linear model of a surface over the abelian double.
#[derive(Clone, Debug)]
pub struct AbelianModel {
    pub n: usize,
    pub polygon: ColoredPolygon,
    pub slots: Vec<Slot>,
    pub side_slot: Vec<usize>,
    pub offsets: Vec<usize>,
    /// `2n x p_s` slot embeddings.
    pub embeddings: Vec<QMatrix>,
    /// `p_s x r_s` integer generators of the slot's period lattice.
    pub periods: Vec<QMatrix>,
    /// `2n x P` linearized (here: exact) boundary relation.
    pub constraint: QMatrix,
    /// `P x P` skew form from the holonomy fold.
    pub omega: QMatrix,
}

fn metric(n: usize) -> QMatrix {
    QMatrix::from_fn(2 * n, 2 * n, |i, j| if i + n == j || j + n == i { Q::one() } else { Q::zero() })
}

impl AbelianModel {
    pub fn new(theta: &SkewTheta, polygon: &ColoredPolygon) -> Result<Self> {
        let t = theta.rational()?;
        let n = theta.n;
        let report = validate(polygon, &theta.backend()?)?;
        if !report.pass {
            return Err(Error::Surface(report.problems.join("; ")));
        }
        let (slots, side_slot) = polygon.slots()?;
        let lattice_v = graph_lattice_intersection(theta)?;
        let mut embeddings = Vec::new();
        let mut periods = Vec::new();
        for slot in &slots {
            let (e, p) = match slot {
                Slot::Arc { side } => match polygon.sides[*side].color().unwrap_or_default() {
                    "r" => (QMatrix::identity(n).vstack(&QMatrix::zeros(n, n)), QMatrix::identity(n)),
                    "b" => (QMatrix::zeros(n, n).vstack(&QMatrix::identity(n)), QMatrix::identity(n)),
                    "v" => {
                        let gens = if lattice_v.is_empty() { QMatrix::zeros(n, 0) } else { QMatrix::from_integer_rows(&lattice_v, n).transpose() };
                        (t.vstack(&QMatrix::identity(n)), gens)
                    }
                    c => return Err(Error::UnresolvedLabel(c.to_string())),
                },
                Slot::Cut { .. } => (QMatrix::identity(2 * n), QMatrix::identity(2 * n)),
            };
            embeddings.push(e);
            periods.push(p);
        }
        let mut offsets = Vec::with_capacity(slots.len());
        let mut total = 0;
        for e in &embeddings {
            offsets.push(total);
            total += e.ncols();
        }
        // signed selections S_k = σ_k E_s Sel_s
        let signed: Vec<QMatrix> = (0..polygon.len())
            .map(|k| {
                let s = side_slot[k];
                let e = &embeddings[s];
                let sign = if polygon.sides[k].orientation.is_reversed() { q(-1) } else { q(1) };
                let mut m = QMatrix::zeros(2 * n, total);
                for i in 0..2 * n {
                    for j in 0..e.ncols() {
                        m[(i, offsets[s] + j)] = &e[(i, j)] * &sign;
                    }
                }
                m
            })
            .collect();
        let mut constraint = QMatrix::zeros(2 * n, total);
        for s in &signed {
            constraint = constraint.add(s);
        }
        // ½ Σ_{k<l} (S_kᵀ M S_l − S_lᵀ M S_k)
        let g = metric(n);
        let mut prefix = QMatrix::zeros(2 * n, total);
        let mut omega = QMatrix::zeros(total, total);
        for s in &signed {
            let c = prefix.transpose().mul(&g).mul(s);
            omega = omega.add(&c.sub(&c.transpose()));
            prefix = prefix.add(s);
        }
        let omega = omega.scale(&crate::exact::qf(1, 2));
        Ok(AbelianModel { n, polygon: polygon.clone(), slots, side_slot, offsets, embeddings, periods, constraint, omega })
    }

    pub fn param_dim(&self) -> usize {
        self.omega.nrows()
    }

    pub fn slot_dim(&self, s: usize) -> usize {
        self.embeddings[s].ncols()
    }

    /// `p_s x P` selection of the parameters of side `i`'s slot.
    pub fn side_selection(&self, i: usize) -> QMatrix {
        let s = self.side_slot[i];
        QMatrix::from_fn(self.slot_dim(s), self.param_dim(), |a, b| if b == self.offsets[s] + a { Q::one() } else { Q::zero() })
    }

    /// `P x r` generators of the product of the slot period lattices.
    pub fn period_lattice(&self) -> QMatrix {
        let cols: usize = self.periods.iter().map(|p| p.ncols()).sum();
        let mut g = QMatrix::zeros(self.param_dim(), cols);
        let mut c0 = 0;
        for (s, p) in self.periods.iter().enumerate() {
            for i in 0..p.nrows() {
                for j in 0..p.ncols() {
                    g[(self.offsets[s] + i, c0 + j)] = p[(i, j)].clone();
                }
            }
            c0 += p.ncols();
        }
        g
    }
}

/// `ℝ^{2m}` modulo an integer lattice with a constant symplectic structure.
#[derive(Clone, Debug)]
pub struct AffineSymplecticTorus {
    pub name: String,
    pub model: AbelianModel,
    pub param_dim: usize,
    /// `k x 2m` lattice generators in torus coordinates.
    pub lattice: Vec<Vec<BigInt>>,
    /// `2m x 2m` form in torus coordinates.
    pub form: QMatrix,
    /// `P x 2m`: torus coordinates to slot parameters.
    pub basis: QMatrix,
}

impl AffineSymplecticTorus {
    /// Moduli space `ker C / (ker C ∩ L)` with `L` the slot period lattice.
    /// Coordinates start with an HNF basis of the lattice so that generators
    /// are unit vectors.
    pub fn from_model(name: &str, model: AbelianModel) -> Result<Self> {
        let kernel = model.constraint.nullspace();
        let g = model.period_lattice();
        let z = rational_integer_kernel(&model.constraint.mul(&g));
        let mut cols: Vec<Vec<Q>> = z.iter().map(|zv| (0..g.nrows()).map(|i| (0..g.ncols()).fold(Q::zero(), |acc, j| acc + &g[(i, j)] * Q::from_integer(zv[j].clone()))).collect()).collect();
        let k = cols.len();
        let mut rank = k;
        for j in 0..kernel.ncols() {
            let mut trial = cols.clone();
            trial.push(kernel.column(j));
            let m = QMatrix::from_rows(&trial);
            if m.rank() > rank {
                cols = trial;
                rank += 1;
            }
        }
        let basis = QMatrix::from_rows(&cols).transpose();
        let m = basis.ncols();
        if m != kernel.ncols() {
            return Err(Error::Structural("lattice-adapted basis does not span the moduli space".into()));
        }
        let lattice = (0..k).map(|i| (0..m).map(|j| if i == j { BigInt::one() } else { BigInt::zero() }).collect()).collect();
        let form = basis.transpose().mul(&model.omega).mul(&basis);
        Ok(AffineSymplecticTorus { name: name.into(), model, param_dim: m, lattice, form, basis })
    }

    pub fn is_nondegenerate(&self) -> bool {
        self.form.rank() == self.param_dim
    }

    /// Parameters of side `i`'s slot as a linear map of torus coordinates.
    pub fn side_map(&self, i: usize) -> QMatrix {
        self.model.side_selection(i).mul(&self.basis)
    }

    /// Stacked side maps for a set of legs.
    pub fn legs_map(&self, sides: &[usize]) -> QMatrix {
        sides.iter().map(|&i| self.side_map(i)).reduce(|a, b| a.vstack(&b)).unwrap_or_else(|| QMatrix::zeros(0, self.param_dim))
    }
}

pub fn gamma_space(theta: &SkewTheta, builtin: &str, labels: &Labels) -> Result<AffineSymplecticTorus> {
    let p = ColoredPolygon::builtin(builtin, labels)?;
    let name = if labels == &Labels::default() { builtin.to_string() } else { format!("{builtin}_swapped") };
    AffineSymplecticTorus::from_model(&name, AbelianModel::new(theta, &p)?)
}

#[derive(Clone, Debug)]
pub struct GammaSpaces {
    pub g00: AffineSymplecticTorus,
    pub g01: AffineSymplecticTorus,
    pub g10: AffineSymplecticTorus,
    /// b-verticals: base `B`.
    pub g11: AffineSymplecticTorus,
    /// r-verticals: base `R`.
    pub g11_swapped: AffineSymplecticTorus,
}

pub fn gamma_spaces(theta: &SkewTheta) -> Result<GammaSpaces> {
    theta.rational()?;
    if !theta.is_invertible() {
        return Err(Error::Singular("theta must be invertible for v to be transverse to b".into()));
    }
    let d = Labels::default();
    Ok(GammaSpaces {
        g00: gamma_space(theta, "gamma00", &d)?,
        g01: gamma_space(theta, "gamma01", &d)?,
        g10: gamma_space(theta, "gamma10", &d)?,
        g11: gamma_space(theta, "gamma11", &d)?,
        g11_swapped: gamma_space(theta, "gamma11", &d.swapped())?,
    })
}

/// Left vertical arc of the Γ₁₁ squares.
pub const GAMMA11_TARGET: usize = 3;

/// `π = T Ω⁻¹ Tᵀ` for the target differential `T` of side `target`.
pub fn base_poisson(gamma: &AffineSymplecticTorus, target: usize) -> Result<QMatrix> {
    let t = gamma.side_map(target);
    if t.rank() < t.nrows() {
        return Err(Error::RankDeficient { rank: t.rank(), expected: t.nrows() });
    }
    let winv = gamma.form.inverse()?;
    Ok(t.mul(&winv).mul(&t.transpose()))
}

/// Same pushforward from the general float machinery at a given point.
pub fn base_poisson_float(space: &crate::moduli::ModuliSpace, pt: &crate::moduli::ModuliPoint, target: usize) -> Result<DMatrix<f64>> {
    let tm = space.tangent_matrix(pt)?;
    let w = crate::symplectic::omega_matrix(space, pt, &tm)?;
    let s = space.slot_of_side(target);
    let t = tm.rows(space.slot_offset(s), space.slot_param_dim(s)).into_owned();
    let winv = w.try_inverse().ok_or_else(|| Error::Singular("omega is singular".into()))?;
    Ok(&t * winv * t.transpose())
}

/// `Some(±1)` if `pi = ±target`.
pub fn sign_relating(pi: &QMatrix, target: &QMatrix) -> Option<i32> {
    if pi == target {
        Some(1)
    } else if pi == &target.neg() {
        Some(-1)
    } else {
        None
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct PoissonReport {
    pub pi_r: Vec<Vec<String>>,
    pub pi_b: Vec<Vec<String>>,
    pub theta: Vec<Vec<String>>,
    pub theta_inverse: Vec<Vec<String>>,
    pub epsilon_r: Option<i32>,
    pub epsilon_b: Option<i32>,
    /// The shared sign, when both bases agree.
    pub epsilon: Option<i32>,
    pub pass: bool,
}

pub fn q_rows(m: &QMatrix) -> Vec<Vec<String>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| m[(i, j)].to_string()).collect()).collect()
}

pub fn poisson_report(theta: &SkewTheta, spaces: &GammaSpaces) -> Result<PoissonReport> {
    let t = theta.rational()?;
    let tinv = t.inverse()?;
    let pi_r = base_poisson(&spaces.g11_swapped, GAMMA11_TARGET)?;
    let pi_b = base_poisson(&spaces.g11, GAMMA11_TARGET)?;
    let epsilon_r = sign_relating(&pi_r, t);
    let epsilon_b = sign_relating(&pi_b, &tinv);
    let epsilon = if epsilon_r.is_some() && epsilon_r == epsilon_b { epsilon_r } else { None };
    Ok(PoissonReport { pi_r: q_rows(&pi_r), pi_b: q_rows(&pi_b), theta: q_rows(t), theta_inverse: q_rows(&tinv), epsilon_r, epsilon_b, epsilon, pass: epsilon.is_some() })
}

/// `(1/planck)·L Ω Lᵀ` is an integer matrix.
pub fn integrality_of(form: &QMatrix, lattice: &[Vec<BigInt>], planck: &Q) -> Result<bool> {
    if planck <= &Q::zero() {
        return Err(Error::Parse("planck must be positive".into()));
    }
    if lattice.is_empty() {
        return Ok(true);
    }
    let l = QMatrix::from_integer_rows(lattice, form.nrows());
    Ok(l.mul(form).mul(&l.transpose()).scale(&planck.recip()).is_integer())
}

pub fn integrality_check(gamma: &AffineSymplecticTorus, planck: &Q) -> Result<bool> {
    integrality_of(&gamma.form, &gamma.lattice, planck)
}

#[derive(Clone, Debug, Serialize)]
pub struct MoritaReport {
    /// Rank of `Γ₀₁ → M₁` (its single vertical arc) and the base dimension.
    pub g01_rank: usize,
    pub g01_base_dim: usize,
    /// Rank of `Γ₁₀ → M₀` (its two-arc vertical leg) and the base dimension.
    pub g10_rank: usize,
    pub g10_base_dim: usize,
    pub pass: bool,
}

/// Single vertical leg and two-arc vertical leg of the pentagons.
pub const PENTAGON_SINGLE_LEG: [usize; 1] = [1];
pub const PENTAGON_DOUBLE_LEG: [usize; 2] = [3, 4];

pub fn morita_surjectivity(spaces: &GammaSpaces) -> MoritaReport {
    let a = spaces.g01.legs_map(&PENTAGON_SINGLE_LEG);
    let b = spaces.g10.legs_map(&PENTAGON_DOUBLE_LEG);
    let (g01_rank, g10_rank) = (a.rank(), b.rank());
    MoritaReport { g01_rank, g01_base_dim: a.nrows(), g10_rank, g10_base_dim: b.nrows(), pass: g01_rank == a.nrows() && g10_rank == b.nrows() }
}

/// `θ ↦ −θ` through `σ(x, ξ) = (x, −ξ)`: σ maps `graph(θ)` to `graph(−θ)`,
/// fixes `V` and `V*` and negates the pairing, so it identifies the moduli
/// spaces with ω ↦ −ω. Returns whether `Dᵀ Ω₋θ D = −Ω_θ` on `ker C_θ`
/// and `D ker C_θ ⊂ ker C₋θ`.
pub fn theta_negation_holds(theta: &SkewTheta, polygon: &ColoredPolygon) -> Result<bool> {
    let plus = AbelianModel::new(theta, polygon)?;
    let minus = AbelianModel::new(&theta.negated(), polygon)?;
    let n = plus.n;
    let mut d = QMatrix::zeros(plus.param_dim(), plus.param_dim());
    for (s, slot) in plus.slots.iter().enumerate() {
        let signs: Vec<i64> = match slot {
            Slot::Arc { side } => {
                let c = polygon.sides[*side].color().unwrap_or_default();
                vec![if c == "r" { 1 } else { -1 }; n]
            }
            Slot::Cut { .. } => [vec![1; n], vec![-1; n]].concat(),
        };
        for (i, sg) in signs.into_iter().enumerate() {
            d[(plus.offsets[s] + i, plus.offsets[s] + i)] = q(sg);
        }
    }
    let k = plus.constraint.nullspace();
    let dk = d.mul(&k);
    let maps_kernel = minus.constraint.mul(&dk).is_zero();
    let lhs = dk.transpose().mul(&minus.omega).mul(&dk);
    let rhs = k.transpose().mul(&plus.omega).mul(&k).neg();
    Ok(maps_kernel && lhs == rhs)
}

/// Largest difference between the exact form and the float machinery on the
/// same tangent vectors at a random point.
pub fn float_cross_check(gamma: &AffineSymplecticTorus, theta: &SkewTheta, seed: u64) -> Result<f64> {
    let space = crate::moduli::ModuliSpace::new(&theta.backend()?, &gamma.model.polygon)?;
    let pt = space.random_point(seed, crate::moduli::DEFAULT_SCALE)?;
    let t = gamma.basis.to_f64();
    let w = crate::symplectic::omega_matrix(&space, &pt, &t)?;
    Ok(gamma.form.max_abs_diff(&w))
}

/// Groupoid glued horizontally: `right[k]` of `p` meets `left[L-1-k]` of `q`.
#[derive(Clone, Debug)]
pub struct HorizontalGroupoid {
    pub theta: SkewTheta,
    pub model: AbelianModel,
    pub right: Vec<usize>,
    pub left: Vec<usize>,
}

#[derive(Clone, Debug, Serialize)]
pub struct ExactGroupoidReport {
    pub surface: String,
    pub associativity: bool,
    pub left_unit: bool,
    pub right_unit: bool,
    pub left_inverse: bool,
    pub right_inverse: bool,
    pub pass: bool,
}

impl HorizontalGroupoid {
    pub fn square(theta: &SkewTheta) -> Result<Self> {
        let p = ColoredPolygon::builtin("square", &Labels::default())?;
        Ok(HorizontalGroupoid { theta: theta.clone(), model: AbelianModel::new(theta, &p)?, right: vec![1], left: vec![3] })
    }

    pub fn gamma00(theta: &SkewTheta) -> Result<Self> {
        let p = ColoredPolygon::builtin("gamma00", &Labels::default())?;
        Ok(HorizontalGroupoid { theta: theta.clone(), model: AbelianModel::new(theta, &p)?, right: vec![1, 2], left: vec![4, 5] })
    }

    fn glued(&self) -> Result<(Glued, AbelianModel, usize)> {
        let p = &self.model.polygon;
        let g = glue_chain(p, &self.right, p, &self.left)?;
        let k = g.polygon.rotation_to(p).ok_or_else(|| Error::Glue("composite is not of the same shape".into()))?;
        let m12 = AbelianModel::new(&self.theta, &g.polygon)?;
        Ok((g, m12, k))
    }

    fn side_params(&self, c: &QMatrix, side: usize) -> QMatrix {
        self.model.side_selection(side).mul(c)
    }

    pub fn is_point(&self, c: &QMatrix) -> bool {
        self.model.constraint.mul(c).is_zero()
    }

    pub fn composable(&self, p: &QMatrix, q: &QMatrix) -> bool {
        let l = self.right.len();
        (0..l).all(|k| self.side_params(p, self.right[k]) == self.side_params(q, self.left[l - 1 - k]))
    }

    pub fn compose(&self, p: &QMatrix, qv: &QMatrix) -> Result<QMatrix> {
        if !self.composable(p, qv) {
            return Err(Error::InvalidPoint("legs do not match".into()));
        }
        let (g, m12, k) = self.glued()?;
        let src = [p, qv];
        let mut c12 = QMatrix::zeros(m12.param_dim(), 1);
        let mut done = vec![false; m12.slots.len()];
        for (i, origin) in g.origins.iter().enumerate() {
            let s = m12.side_slot[i];
            if done[s] {
                continue;
            }
            done[s] = true;
            let mut acc = QMatrix::zeros(m12.slot_dim(s), 1);
            for &(poly, side) in &origin.parts {
                let part = self.side_params(src[poly], side);
                acc = if self.model.polygon.sides[side].orientation.is_reversed() { acc.sub(&part) } else { acc.add(&part) };
            }
            if g.polygon.sides[i].orientation.is_reversed() {
                acc = acc.neg();
            }
            for a in 0..acc.nrows() {
                c12[(m12.offsets[s] + a, 0)] = acc[(a, 0)].clone();
            }
        }
        // realign: side j of the original is side (j + k) of the composite
        let n = self.model.polygon.len();
        let mut out = QMatrix::zeros(self.model.param_dim(), 1);
        for j in 0..n {
            let (s, s12) = (self.model.side_slot[j], m12.side_slot[(j + k) % n]);
            for a in 0..self.model.slot_dim(s) {
                out[(self.model.offsets[s] + a, 0)] = c12[(m12.offsets[s12] + a, 0)].clone();
            }
        }
        Ok(out)
    }

    fn horizontal(&self, side: usize) -> bool {
        !self.right.contains(&side) && !self.left.contains(&side)
    }

    /// Unit at the left leg of `p`.
    pub fn unit_left_of(&self, p: &QMatrix) -> QMatrix {
        let l = self.left.len();
        let mut u = QMatrix::zeros(self.model.param_dim(), 1);
        for k in 0..l {
            let x = self.side_params(p, self.left[k]);
            self.write(&mut u, self.left[k], &x);
            self.write(&mut u, self.right[l - 1 - k], &x);
        }
        u
    }

    pub fn unit_right_of(&self, p: &QMatrix) -> QMatrix {
        let l = self.right.len();
        let mut u = QMatrix::zeros(self.model.param_dim(), 1);
        for k in 0..l {
            let x = self.side_params(p, self.right[k]);
            self.write(&mut u, self.right[k], &x);
            self.write(&mut u, self.left[l - 1 - k], &x);
        }
        u
    }

    /// Mirror image: legs exchanged, horizontal arcs negated.
    pub fn inverse(&self, p: &QMatrix) -> QMatrix {
        let l = self.right.len();
        let mut u = QMatrix::zeros(self.model.param_dim(), 1);
        for k in 0..l {
            self.write(&mut u, self.right[k], &self.side_params(p, self.left[l - 1 - k]));
            self.write(&mut u, self.left[k], &self.side_params(p, self.right[l - 1 - k]));
        }
        for side in 0..self.model.polygon.len() {
            if self.horizontal(side) {
                self.write(&mut u, side, &self.side_params(p, side).neg());
            }
        }
        u
    }

    fn write(&self, c: &mut QMatrix, side: usize, x: &QMatrix) {
        let s = self.model.side_slot[side];
        for a in 0..x.nrows() {
            c[(self.model.offsets[s] + a, 0)] = x[(a, 0)].clone();
        }
    }

    /// Random point with small integer coordinates on `ker C`.
    pub fn random_point(&self, rng: &mut ChaCha8Rng) -> QMatrix {
        let k = self.model.constraint.nullspace();
        let z = QMatrix::from_fn(k.ncols(), 1, |_, _| q(rng.gen_range(-3..=3)));
        k.mul(&z)
    }

    /// Random point whose left leg matches the right leg of `p`.
    pub fn random_after(&self, p: &QMatrix, rng: &mut ChaCha8Rng) -> Result<QMatrix> {
        let l = self.right.len();
        let mut a = self.model.constraint.clone();
        let mut b = QMatrix::zeros(a.nrows(), 1);
        for k in 0..l {
            a = a.vstack(&self.model.side_selection(self.left[l - 1 - k]));
            b = b.vstack(&self.side_params(p, self.right[k]));
        }
        let x0 = a.solve(&b).ok_or_else(|| Error::Structural("no composable partner".into()))?;
        let ker = a.nullspace();
        let z = QMatrix::from_fn(ker.ncols(), 1, |_, _| q(rng.gen_range(-3..=3)));
        Ok(x0.add(&ker.mul(&z)))
    }

    pub fn check(&self, seed: u64) -> Result<ExactGroupoidReport> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = self.random_point(&mut rng);
        let qv = self.random_after(&p, &mut rng)?;
        let s = self.random_after(&qv, &mut rng)?;
        let associativity = self.compose(&self.compose(&p, &qv)?, &s)? == self.compose(&p, &self.compose(&qv, &s)?)?;
        let left_unit = self.compose(&self.unit_left_of(&p), &p)? == p;
        let right_unit = self.compose(&p, &self.unit_right_of(&p))? == p;
        let pinv = self.inverse(&p);
        let right_inverse = self.is_point(&pinv) && self.compose(&p, &pinv)? == self.unit_left_of(&p);
        let left_inverse = self.compose(&pinv, &p)? == self.unit_right_of(&p);
        let pass = associativity && left_unit && right_unit && left_inverse && right_inverse;
        Ok(ExactGroupoidReport { surface: self.model.polygon.name.clone(), associativity, left_unit, right_unit, left_inverse, right_inverse, pass })
    }
}
