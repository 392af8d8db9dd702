//! The holonomy formula for the symplectic form and its structural checks.
//!
//! A factor `(g, ω)` of the central extension is represented at jet level by
//! [`ExtJet`]: the value, the left-trivialized derivative along `m` tangent
//! directions, and the 2-form evaluated on pairs of those directions. The
//! form of a moduli point is the form part of the ordered product of the
//! side factors `(g_s, 0)`.

mod closed_forms;
mod gluing;

pub use closed_forms::{closed_form, closed_form_annulus, closed_form_square_rb, closed_form_square_rbv, closed_form_triangle, ClosedFormKind};
pub use gluing::{
    check_groupoid, check_lagrangian_graph, compose, composed_tangents, lw_inverse, lw_product, lw_unit, realign, sample_composable, GluedSpace, GroupoidReport,
    LagrangianGraphReport,
};

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::lie::{GroupElement, QuadraticLieAlgebra};
use crate::linalg;
use crate::moduli::{ModuliPoint, ModuliSpace, TangentVector};
use crate::surface::{ColoredPolygon, Labels, Side, SideKind, Slot};
use crate::{Error, Result};

/// Distance from the identity tolerated for the folded value.
pub const FOLD_TOL: f64 = 1e-9;
pub const NONDEGENERACY_TOL: f64 = 1e-6;
pub const FD_STEP: f64 = 1e-4;
pub const CLOSED_TOL: f64 = 1e-4;

#[derive(Clone, Debug)]
pub struct ExtJet {
    pub value: GroupElement,
    /// `d x m` left-trivialized derivatives.
    pub dlog: DMatrix<f64>,
    /// `m x m` skew 2-form coefficients.
    pub form: DMatrix<f64>,
}

impl ExtJet {
    pub fn identity(alg: &QuadraticLieAlgebra, m: usize) -> Self {
        ExtJet { value: alg.identity(), dlog: DMatrix::zeros(alg.dim(), m), form: DMatrix::zeros(m, m) }
    }

    pub fn new(value: GroupElement, dlog: DMatrix<f64>) -> Self {
        let m = dlog.ncols();
        ExtJet { value, dlog, form: DMatrix::zeros(m, m) }
    }

    pub fn directions(&self) -> usize {
        self.dlog.ncols()
    }
}

/// `½ [αᵀ M ρ − (αᵀ M ρ)ᵀ]`, the cocycle of the product with `ρ` right-trivialized.
fn cross_term(alg: &QuadraticLieAlgebra, alpha: &DMatrix<f64>, b: &ExtJet) -> DMatrix<f64> {
    let rho = alg.adjoint(&b.value) * &b.dlog;
    let c = alpha.transpose() * alg.metric() * rho;
    (&c - c.transpose()) * 0.5
}

pub fn ext_mul(alg: &QuadraticLieAlgebra, a: &ExtJet, b: &ExtJet) -> Result<ExtJet> {
    if a.directions() != b.directions() {
        return Err(Error::DimensionMismatch { expected: a.directions(), got: b.directions() });
    }
    if a.dlog.nrows() != alg.dim() || b.dlog.nrows() != alg.dim() {
        return Err(Error::DimensionMismatch { expected: alg.dim(), got: a.dlog.nrows().min(b.dlog.nrows()) });
    }
    let binv = b.value.inverse();
    let dlog = alg.adjoint(&binv) * &a.dlog + &b.dlog;
    let form = &a.form + &b.form + cross_term(alg, &a.dlog, b);
    Ok(ExtJet { value: a.value.mul(&b.value), dlog, form })
}

pub fn ext_inv(alg: &QuadraticLieAlgebra, a: &ExtJet) -> ExtJet {
    ExtJet { value: a.value.inverse(), dlog: -(alg.adjoint(&a.value) * &a.dlog), form: -&a.form }
}

/// Ordered product of jets. The central parts are summed in their own
/// accumulator, so a form β on one factor and −β on another cancel exactly.
pub fn fold_product(alg: &QuadraticLieAlgebra, jets: &[ExtJet]) -> Result<ExtJet> {
    let Some(first) = jets.first() else {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    };
    let m = first.directions();
    let mut central = DMatrix::zeros(m, m);
    let mut cocycle = DMatrix::zeros(m, m);
    let mut value = alg.identity();
    let mut dlog = DMatrix::zeros(alg.dim(), m);
    for j in jets {
        if j.directions() != m {
            return Err(Error::DimensionMismatch { expected: m, got: j.directions() });
        }
        central += &j.form;
        cocycle += cross_term(alg, &dlog, j);
        dlog = alg.adjoint(&j.value.inverse()) * dlog + &j.dlog;
        value = value.mul(&j.value);
    }
    Ok(ExtJet { value, dlog, form: central + cocycle })
}

/// Jet of the factor contributed by side `i`; `beta` is added to the form of
/// the cut slot named in it before orientation is applied.
pub fn side_jet(space: &ModuliSpace, pt: &ModuliPoint, tangents: &DMatrix<f64>, i: usize, beta: Option<(&str, &DMatrix<f64>)>) -> ExtJet {
    let alg = space.algebra();
    let s = space.slot_of_side(i);
    let o = space.slot_offset(s);
    let dlog = space.slot_embedding(s) * tangents.rows(o, space.slot_param_dim(s));
    let mut jet = ExtJet::new(pt.holonomies[s].clone(), dlog);
    let side = &space.polygon().sides[i];
    if let (Some((id, b)), SideKind::Cut { id: cid }) = (beta, &side.kind) {
        if id == cid {
            jet.form = b.clone();
        }
    }
    if side.orientation.is_reversed() {
        ext_inv(alg, &jet)
    } else {
        jet
    }
}

fn fold_word(space: &ModuliSpace, pt: &ModuliPoint, tangents: &DMatrix<f64>, start: usize, beta: Option<(&str, &DMatrix<f64>)>) -> Result<ExtJet> {
    if tangents.nrows() != space.param_dim() {
        return Err(Error::DimensionMismatch { expected: space.param_dim(), got: tangents.nrows() });
    }
    let n = space.polygon().len();
    let jets: Vec<ExtJet> = (0..n).map(|k| side_jet(space, pt, tangents, (start + k) % n, beta)).collect();
    let out = fold_product(space.algebra(), &jets)?;
    let dist = out.value.distance_to_identity();
    if dist > FOLD_TOL {
        return Err(Error::InvalidPoint(format!("boundary product is {dist:e} away from the identity")));
    }
    Ok(out)
}

/// Gram matrix of ω on the given tangent columns (`P x m` parameter matrix).
pub fn omega_matrix(space: &ModuliSpace, pt: &ModuliPoint, tangents: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    omega_matrix_from(space, pt, tangents, 0)
}

/// Same, folding from base corner `start`.
pub fn omega_matrix_from(space: &ModuliSpace, pt: &ModuliPoint, tangents: &DMatrix<f64>, start: usize) -> Result<DMatrix<f64>> {
    Ok(fold_word(space, pt, tangents, start, None)?.form)
}

/// ω on the orthonormal tangent basis from [`ModuliSpace::tangent_matrix`].
pub fn omega_on_basis(space: &ModuliSpace, pt: &ModuliPoint) -> Result<(DMatrix<f64>, DMatrix<f64>)> {
    let t = space.tangent_matrix(pt)?;
    let w = omega_matrix(space, pt, &t)?;
    Ok((t, w))
}

pub fn omega_pair(space: &ModuliSpace, pt: &ModuliPoint, xi: &TangentVector, eta: &TangentVector) -> Result<f64> {
    let t = DMatrix::from_columns(&[xi.params.clone(), eta.params.clone()]);
    Ok(omega_matrix(space, pt, &t)?[(0, 1)])
}

#[derive(Clone, Debug, Serialize)]
pub struct ClosedReport {
    pub h: f64,
    pub tolerance: f64,
    pub dimension: usize,
    pub max_residual: f64,
    pub pass: bool,
}

/// Central finite differences of the chart coefficients `ω_jk(c)` assembled into dω.
pub fn check_closed(space: &ModuliSpace, pt: &ModuliPoint, h: f64, tol: f64) -> Result<ClosedReport> {
    let chart = space.chart_at(pt)?;
    let m = chart.dim();
    let mut deriv = Vec::with_capacity(m);
    for i in 0..m {
        let mut c = nalgebra::DVector::zeros(m);
        c[i] = h;
        let (pp, tp) = chart.point_and_tangents(space, &c)?;
        let (pm, tm) = chart.point_and_tangents(space, &(-&c))?;
        let wp = omega_matrix(space, &pp, &tp)?;
        let wm = omega_matrix(space, &pm, &tm)?;
        deriv.push((wp - wm) / (2.0 * h));
    }
    let mut worst: f64 = 0.0;
    for i in 0..m {
        for j in i + 1..m {
            for k in j + 1..m {
                let d = deriv[i][(j, k)] - deriv[j][(i, k)] + deriv[k][(i, j)];
                worst = worst.max(d.abs());
            }
        }
    }
    Ok(ClosedReport { h, tolerance: tol, dimension: m, max_residual: worst, pass: worst <= tol })
}

#[derive(Clone, Debug, Serialize)]
pub struct NondegeneracyReport {
    pub dimension: usize,
    pub singular_values: Vec<f64>,
    pub min_singular_value: f64,
    pub skew_residual: f64,
    pub pass: bool,
}

pub fn check_nondegenerate(space: &ModuliSpace, pt: &ModuliPoint) -> Result<NondegeneracyReport> {
    let (_, w) = omega_on_basis(space, pt)?;
    let m = w.nrows();
    if m % 2 == 1 {
        return Err(Error::Structural(format!("tangent space has odd dimension {m}")));
    }
    let mut sv: Vec<f64> = linalg::singular_values(&w).iter().cloned().collect();
    sv.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
    let min = sv.first().copied().unwrap_or(f64::INFINITY);
    Ok(NondegeneracyReport { dimension: m, skew_residual: linalg::skew_residual(&w), singular_values: sv, min_singular_value: min, pass: min > NONDEGENERACY_TOL })
}

#[derive(Clone, Debug, Serialize)]
pub struct InvarianceReport {
    /// Largest change of ω over all base corners.
    pub rotation_residual: f64,
    /// Change of ω after re-cutting the annulus (annulus only).
    pub recut_residual: Option<f64>,
    /// Change of the folded form after adding β / −β to the two cut occurrences.
    pub cut_cancellation_residual: Option<f64>,
    pub tolerance: f64,
    pub pass: bool,
}

pub const INVARIANCE_TOL: f64 = 1e-10;

pub fn invariance_checks(space: &ModuliSpace, pt: &ModuliPoint, seed: u64) -> Result<InvarianceReport> {
    let (t, w0) = omega_on_basis(space, pt)?;
    let mut rot: f64 = 0.0;
    for k in 1..space.polygon().len() {
        rot = rot.max(linalg::max_abs(&(omega_matrix_from(space, pt, &t, k)? - &w0)));
    }
    let recut = if space.polygon().rotation_to(&ColoredPolygon::builtin("annulus_with_cut", &Labels::default())?) == Some(0) {
        let (sp2, pt2, map) = recut_annulus(space, pt)?;
        let w2 = omega_matrix(&sp2, &pt2, &(&map * &t))?;
        Some(linalg::max_abs(&(w2 - &w0)))
    } else {
        None
    };
    let cancel = cut_cancellation_residual(space, pt, &t, seed)?;
    let pass = rot <= INVARIANCE_TOL && recut.is_none_or(|r| r <= INVARIANCE_TOL) && cancel.is_none_or(|r| r == 0.0);
    Ok(InvarianceReport { rotation_residual: rot, recut_residual: recut, cut_cancellation_residual: cancel, tolerance: INVARIANCE_TOL, pass })
}

/// Largest change of the folded form when every cut pair gets a random skew
/// β on one occurrence and −β on the other. `None` without cuts.
pub fn cut_cancellation_residual(space: &ModuliSpace, pt: &ModuliPoint, tangents: &DMatrix<f64>, seed: u64) -> Result<Option<f64>> {
    let base = fold_word(space, pt, tangents, 0, None)?.form;
    let m = tangents.ncols();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: Option<f64> = None;
    for slot in space.slots() {
        if let Slot::Cut { id, .. } = slot {
            let raw = DMatrix::from_fn(m, m, |_, _| rng.gen_range(-1.0..1.0));
            let beta = &raw - raw.transpose();
            let f = fold_word(space, pt, tangents, 0, Some((id, &beta)))?.form;
            let r = linalg::max_abs(&(f - &base));
            worst = Some(worst.map_or(r, |w: f64| w.max(r)));
        }
    }
    Ok(worst)
}

/// Re-cut the annulus along `g' = r₁⁻¹ g`: word `[b1, r1, #g, b2⁻¹, r2⁻¹, #g⁻¹]`.
/// Returns the new space, the corresponding point, and the tangent map
/// from old to new parameters.
pub fn recut_annulus(space: &ModuliSpace, pt: &ModuliPoint) -> Result<(ModuliSpace, ModuliPoint, DMatrix<f64>)> {
    use crate::surface::Orientation::{Forward as F, Reversed as R};
    let sides = &space.polygon().sides;
    let (rc, bc) = (sides[0].color().unwrap_or("r"), sides[1].color().unwrap_or("b"));
    let poly = ColoredPolygon::new(
        "annulus_recut",
        vec![Side::arc("b1", bc, F), Side::arc("r1", rc, F), Side::cut("g", F), Side::arc("b2", bc, R), Side::arc("r2", rc, R), Side::cut("g", R)],
    );
    let sp2 = ModuliSpace::new(space.backend(), &poly)?;
    let alg = space.algebra();
    // old slots: r1, b1, g, b2, r2; new slots: b1, r1, g', b2, r2
    let old = |side: usize| space.slot_of_side(side);
    let new = |side: usize| sp2.slot_of_side(side);
    let (r1, g) = (&pt.holonomies[old(0)], &pt.holonomies[old(2)]);
    let g_new = r1.inverse().mul(g);
    let holonomies = vec![pt.holonomies[old(1)].clone(), r1.clone(), g_new.clone(), pt.holonomies[old(3)].clone(), pt.holonomies[old(4)].clone()];
    let pt2 = ModuliPoint { holonomies };
    let pairs = [(1, 0), (0, 1), (3, 3), (4, 4)];
    let mut map = DMatrix::zeros(sp2.param_dim(), space.param_dim());
    for (old_side, new_side) in pairs {
        let (so, sn) = (old(old_side), new(new_side));
        let p = space.slot_param_dim(so);
        map.view_mut((sp2.slot_offset(sn), space.slot_offset(so)), (p, p)).copy_from(&DMatrix::identity(p, p));
    }
    // λ_{g'} = −Ad(g⁻¹ r₁) λ_{r₁} + λ_g
    let d = alg.dim();
    let (sg_old, sg_new, sr1) = (old(2), new(2), old(0));
    map.view_mut((sp2.slot_offset(sg_new), space.slot_offset(sg_old)), (d, d)).copy_from(&DMatrix::identity(d, d));
    let ad = -(alg.adjoint(&g.inverse().mul(r1)) * space.slot_embedding(sr1));
    map.view_mut((sp2.slot_offset(sg_new), space.slot_offset(sr1)), (d, ad.ncols())).copy_from(&ad);
    Ok((sp2, pt2, map))
}
