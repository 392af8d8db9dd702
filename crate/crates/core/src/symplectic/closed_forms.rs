//! Explicit formulas for ω on the basic surfaces, written directly in terms
//! of the left-trivialized arc and cut variations. These are independent of
//! the jet fold and serve as its oracle.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::lie::{GroupElement, QuadraticLieAlgebra};
use crate::moduli::{ModuliPoint, ModuliSpace};
use crate::surface::{ColoredPolygon, Labels};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClosedFormKind {
    SquareRb,
    SquareRbv,
    Triangle,
    Annulus,
}

impl ClosedFormKind {
    fn builtin(self) -> &'static str {
        match self {
            ClosedFormKind::SquareRb => "square",
            ClosedFormKind::SquareRbv => "gamma11",
            ClosedFormKind::Triangle => "triangle",
            ClosedFormKind::Annulus => "annulus_with_cut",
        }
    }

    /// The kind whose builtin word matches the polygon as given (no rotation).
    pub fn detect(p: &ColoredPolygon) -> Option<Self> {
        [ClosedFormKind::SquareRb, ClosedFormKind::SquareRbv, ClosedFormKind::Triangle, ClosedFormKind::Annulus]
            .into_iter()
            .find(|k| ColoredPolygon::builtin(k.builtin(), &Labels::default()).is_ok_and(|b| p.rotation_to(&b) == Some(0)))
    }
}

/// `⟨α ∧ β⟩` on column pairs: `αᵀMβ − (αᵀMβ)ᵀ`.
fn wedge(alg: &QuadraticLieAlgebra, a: &DMatrix<f64>, b: &DMatrix<f64>) -> DMatrix<f64> {
    let c = a.transpose() * alg.metric() * b;
    &c - c.transpose()
}

struct Vars<'a> {
    alg: &'a QuadraticLieAlgebra,
    lam: Vec<DMatrix<f64>>,
    hol: Vec<GroupElement>,
}

impl Vars<'_> {
    /// λ of side i (left-trivialized, `g⁻¹dg` of the stored holonomy).
    fn l(&self, i: usize) -> &DMatrix<f64> {
        &self.lam[i]
    }
    /// `dg g⁻¹ = Ad(g) λ`.
    fn r(&self, i: usize) -> DMatrix<f64> {
        self.alg.adjoint(&self.hol[i]) * &self.lam[i]
    }
    fn ad(&self, g: &GroupElement, m: &DMatrix<f64>) -> DMatrix<f64> {
        self.alg.adjoint(g) * m
    }
}

fn vars<'a>(space: &'a ModuliSpace, pt: &ModuliPoint, tangents: &DMatrix<f64>) -> Result<Vars<'a>> {
    if tangents.nrows() != space.param_dim() {
        return Err(Error::DimensionMismatch { expected: space.param_dim(), got: tangents.nrows() });
    }
    let n = space.polygon().len();
    let mut lam = Vec::with_capacity(n);
    let mut hol = Vec::with_capacity(n);
    for i in 0..n {
        let s = space.slot_of_side(i);
        lam.push(space.slot_embedding(s) * tangents.rows(space.slot_offset(s), space.slot_param_dim(s)));
        hol.push(pt.holonomies[s].clone());
    }
    Ok(Vars { alg: space.algebra(), lam, hol })
}

fn expect(space: &ModuliSpace, kind: ClosedFormKind) -> Result<()> {
    if ClosedFormKind::detect(space.polygon()) == Some(kind) {
        Ok(())
    } else {
        Err(Error::Surface(format!("closed form {kind:?} needs the word of '{}'", kind.builtin())))
    }
}

/// `[r1, b1, r2⁻¹, b2⁻¹]`: `½⟨r₁⁻¹dr₁ ∧ db₁b₁⁻¹⟩ − ½⟨b₂⁻¹db₂ ∧ dr₂r₂⁻¹⟩`.
pub fn closed_form_square_rb(space: &ModuliSpace, pt: &ModuliPoint, tangents: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    expect(space, ClosedFormKind::SquareRb)?;
    let v = vars(space, pt, tangents)?;
    Ok((wedge(v.alg, v.l(0), &v.r(1)) - wedge(v.alg, v.l(3), &v.r(2))) * 0.5)
}

/// `[r, b1, v⁻¹, b2⁻¹]`: `½⟨r⁻¹dr ∧ db₁b₁⁻¹⟩ − ½⟨b₂⁻¹db₂ ∧ dv v⁻¹⟩`.
pub fn closed_form_square_rbv(space: &ModuliSpace, pt: &ModuliPoint, tangents: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    expect(space, ClosedFormKind::SquareRbv)?;
    let v = vars(space, pt, tangents)?;
    Ok((wedge(v.alg, v.l(0), &v.r(1)) - wedge(v.alg, v.l(3), &v.r(2))) * 0.5)
}

/// `[r, v, b]`: `½⟨v⁻¹dv ∧ db b⁻¹⟩`.
pub fn closed_form_triangle(space: &ModuliSpace, pt: &ModuliPoint, tangents: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    expect(space, ClosedFormKind::Triangle)?;
    let v = vars(space, pt, tangents)?;
    Ok(wedge(v.alg, v.l(1), &v.r(2)) * 0.5)
}

/// `[r1, b1, #g, b2⁻¹, r2⁻¹, #g⁻¹]` encoding `r₁b₁g = g r₂b₂`: `ω_A − ω_C` with
/// `ω_A = ½⟨λ_{r₁} ∧ Ad(b₁)λ_{b₁}⟩ + ½⟨Ad(b₁⁻¹)λ_{r₁} + λ_{b₁} ∧ Ad(g)λ_g⟩`,
/// `ω_C = ½⟨λ_g ∧ Ad(r₂)λ_{r₂}⟩ + ½⟨Ad(r₂⁻¹)λ_g + λ_{r₂} ∧ Ad(b₂)λ_{b₂}⟩`.
pub fn closed_form_annulus(space: &ModuliSpace, pt: &ModuliPoint, tangents: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    expect(space, ClosedFormKind::Annulus)?;
    let v = vars(space, pt, tangents)?;
    let a = v.alg;
    let (r1, b1, g, b2, r2) = (0, 1, 2, 3, 4);
    let omega_a = wedge(a, v.l(r1), &v.r(b1)) + wedge(a, &(v.ad(&v.hol[b1].inverse(), v.l(r1)) + v.l(b1)), &v.r(g));
    let omega_c = wedge(a, v.l(g), &v.r(r2)) + wedge(a, &(v.ad(&v.hol[r2].inverse(), v.l(g)) + v.l(r2)), &v.r(b2));
    Ok((omega_a - omega_c) * 0.5)
}

pub fn closed_form(kind: ClosedFormKind, space: &ModuliSpace, pt: &ModuliPoint, tangents: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    match kind {
        ClosedFormKind::SquareRb => closed_form_square_rb(space, pt, tangents),
        ClosedFormKind::SquareRbv => closed_form_square_rbv(space, pt, tangents),
        ClosedFormKind::Triangle => closed_form_triangle(space, pt, tangents),
        ClosedFormKind::Annulus => closed_form_annulus(space, pt, tangents),
    }
}
