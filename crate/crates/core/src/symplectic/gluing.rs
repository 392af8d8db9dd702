//! Composition of moduli points along glued seams, the Lagrangian graph of
//! that composition, and the Lu–Weinstein groupoid of the square.

use nalgebra::DMatrix;
use serde::Serialize;

use super::{ext_inv, ext_mul, omega_matrix, side_jet, ClosedFormKind, ExtJet};
use crate::lie::GroupElement;
use crate::linalg;
use crate::moduli::{ModuliPoint, ModuliSpace, CONSTRAINT_TOL};
use crate::surface::{glue_chain, Glued};
use crate::{Error, Result};

/// Largest seam holonomy mismatch accepted by [`compose`].
pub const SEAM_TOL: f64 = 1e-10;
pub const GRAPH_TOL: f64 = 1e-10;
pub const GROUPOID_TOL: f64 = 1e-10;

/// A gluing of two surfaces together with the moduli space of the result.
#[derive(Clone, Debug)]
pub struct GluedSpace {
    pub glued: Glued,
    pub space: ModuliSpace,
}

impl GluedSpace {
    pub fn new(sp1: &ModuliSpace, sp2: &ModuliSpace, seam1: &[usize], seam2: &[usize]) -> Result<Self> {
        if sp1.backend().name() != sp2.backend().name() {
            return Err(Error::Glue(format!("backends differ: {} vs {}", sp1.backend().name(), sp2.backend().name())));
        }
        let glued = glue_chain(sp1.polygon(), seam1, sp2.polygon(), seam2)?;
        let space = ModuliSpace::new(sp1.backend(), &glued.polygon)?;
        let want = glued.expected_dimension(sp1.polygon(), sp2.polygon(), sp1.backend())?;
        if space.dimension() != want {
            return Err(Error::Structural(format!("glued dimension {} differs from the gluing identity {want}", space.dimension())));
        }
        Ok(GluedSpace { glued, space })
    }

    fn seam_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let l = self.glued.seam1.len();
        (0..l).map(move |k| (self.glued.seam1[k], self.glued.seam2[l - 1 - k]))
    }

    /// Largest distance between the holonomies identified along the seam.
    pub fn seam_mismatch(&self, sp1: &ModuliSpace, pt1: &ModuliPoint, sp2: &ModuliSpace, pt2: &ModuliPoint) -> f64 {
        self.seam_pairs()
            .map(|(a, b)| pt1.holonomies[sp1.slot_of_side(a)].distance(&pt2.holonomies[sp2.slot_of_side(b)]))
            .fold(0.0, f64::max)
    }

    fn sources<'a>(&self, sp1: &'a ModuliSpace, sp2: &'a ModuliSpace) -> [&'a ModuliSpace; 2] {
        [sp1, sp2]
    }
}

/// The composite point: unchanged sides are copied, merged arcs multiply in
/// traversal order.
pub fn compose(sp1: &ModuliSpace, pt1: &ModuliPoint, sp2: &ModuliSpace, pt2: &ModuliPoint, gs: &GluedSpace) -> Result<ModuliPoint> {
    let mismatch = gs.seam_mismatch(sp1, pt1, sp2, pt2);
    if mismatch > SEAM_TOL {
        return Err(Error::InvalidPoint(format!("seam holonomies differ by {mismatch:e}")));
    }
    let src = gs.sources(sp1, sp2);
    let pts = [pt1, pt2];
    let out = &gs.space;
    let mut hol: Vec<Option<GroupElement>> = vec![None; out.slots().len()];
    for (i, origin) in gs.glued.origins.iter().enumerate() {
        let s = out.slot_of_side(i);
        if hol[s].is_some() {
            continue;
        }
        let mut t = out.algebra().identity();
        for &(k, side) in &origin.parts {
            t = t.mul(&src[k].contribution(pts[k], side));
        }
        hol[s] = Some(if out.polygon().sides[i].orientation.is_reversed() { t.inverse() } else { t });
    }
    let pt = ModuliPoint { holonomies: hol.into_iter().map(|h| h.expect("every slot has a side")).collect() };
    if out.constraint_residual(&pt)?.norm() > CONSTRAINT_TOL {
        return out.project(pt.holonomies);
    }
    Ok(pt)
}

/// Push pairs of tangent columns (`P₁ x k`, `P₂ x k`) through [`compose`].
pub fn composed_tangents(
    sp1: &ModuliSpace,
    pt1: &ModuliPoint,
    t1: &DMatrix<f64>,
    sp2: &ModuliSpace,
    pt2: &ModuliPoint,
    t2: &DMatrix<f64>,
    gs: &GluedSpace,
) -> Result<DMatrix<f64>> {
    if t1.ncols() != t2.ncols() {
        return Err(Error::DimensionMismatch { expected: t1.ncols(), got: t2.ncols() });
    }
    let src = gs.sources(sp1, sp2);
    let pts = [pt1, pt2];
    let ts = [t1, t2];
    let out = &gs.space;
    let alg = out.algebra();
    let k = t1.ncols();
    let mut res = DMatrix::zeros(out.param_dim(), k);
    let mut done = vec![false; out.slots().len()];
    for (i, origin) in gs.glued.origins.iter().enumerate() {
        let s = out.slot_of_side(i);
        if done[s] {
            continue;
        }
        done[s] = true;
        let mut jet = ExtJet::identity(alg, k);
        for &(p, side) in &origin.parts {
            jet = ext_mul(alg, &jet, &side_jet(src[p], pts[p], ts[p], side, None))?;
        }
        if out.polygon().sides[i].orientation.is_reversed() {
            jet = ext_inv(alg, &jet);
        }
        let coeff = linalg::pinv(out.slot_embedding(s), linalg::RANK_RTOL) * &jet.dlog;
        res.view_mut((out.slot_offset(s), 0), (out.slot_param_dim(s), k)).copy_from(&coeff);
    }
    Ok(res)
}

#[derive(Clone, Debug, Serialize)]
pub struct LagrangianGraphReport {
    pub dimension: usize,
    pub expected_dimension: usize,
    /// `max |−ω₁ − ω₂ + ω₁₂|` on the graph tangent space.
    pub isotropy_residual: f64,
    /// Largest linearized constraint of the composed tangents.
    pub tangency_residual: f64,
    pub tolerance: f64,
    pub pass: bool,
}

/// The graph of composition in `M₁ × M₂ × M₁₂` is Lagrangian for `−ω₁ − ω₂ + ω₁₂`.
pub fn check_lagrangian_graph(sp1: &ModuliSpace, pt1: &ModuliPoint, sp2: &ModuliSpace, pt2: &ModuliPoint, gs: &GluedSpace) -> Result<LagrangianGraphReport> {
    let pt12 = compose(sp1, pt1, sp2, pt2, gs)?;
    let (b1, b2) = (sp1.tangent_matrix(pt1)?, sp2.tangent_matrix(pt2)?);
    let (m1, m2) = (b1.ncols(), b2.ncols());
    let d = sp1.algebra().dim();
    let pairs: Vec<(usize, usize)> = gs.seam_pairs().collect();
    let mut matching = DMatrix::zeros(d * pairs.len(), m1 + m2);
    for (row, &(a, b)) in pairs.iter().enumerate() {
        let (s1, s2) = (sp1.slot_of_side(a), sp2.slot_of_side(b));
        let l1 = sp1.slot_embedding(s1) * b1.rows(sp1.slot_offset(s1), sp1.slot_param_dim(s1));
        let l2 = sp2.slot_embedding(s2) * b2.rows(sp2.slot_offset(s2), sp2.slot_param_dim(s2));
        matching.view_mut((row * d, 0), (d, m1)).copy_from(&l1);
        matching.view_mut((row * d, m1), (d, m2)).copy_from(&(-l2));
    }
    let kernel = linalg::nullspace(&matching, linalg::RANK_RTOL);
    let t1 = &b1 * kernel.rows(0, m1);
    let t2 = &b2 * kernel.rows(m1, m2);
    let t12 = composed_tangents(sp1, pt1, &t1, sp2, pt2, &t2, gs)?;
    let w = -omega_matrix(sp1, pt1, &t1)? - omega_matrix(sp2, pt2, &t2)? + omega_matrix(&gs.space, &pt12, &t12)?;
    let isotropy = linalg::max_abs(&w);
    let tangency = if t12.ncols() == 0 { 0.0 } else { linalg::max_abs(&(gs.space.jacobian(&pt12) * &t12)) };
    let m12 = gs.space.dimension();
    let expected = (m1 + m2 + m12) / 2;
    let dimension = kernel.ncols();
    let pass = dimension == expected && (m1 + m2 + m12) % 2 == 0 && isotropy <= GRAPH_TOL && tangency <= 1e-9;
    Ok(LagrangianGraphReport { dimension, expected_dimension: expected, isotropy_residual: isotropy, tangency_residual: tangency, tolerance: GRAPH_TOL, pass })
}

/// Point of `to` read off from a point of `from` whose polygon is a rotation of it.
pub fn realign(from: &ModuliSpace, pt: &ModuliPoint, to: &ModuliSpace) -> Result<ModuliPoint> {
    let n = from.polygon().len();
    let k = from
        .polygon()
        .rotation_to(to.polygon())
        .ok_or_else(|| Error::Surface(format!("'{}' is not a rotation of '{}'", from.polygon().name, to.polygon().name)))?;
    let mut hol: Vec<Option<GroupElement>> = vec![None; to.slots().len()];
    for j in 0..n {
        let s = to.slot_of_side(j);
        if hol[s].is_none() {
            hol[s] = Some(pt.holonomies[from.slot_of_side((j + k) % n)].clone());
        }
    }
    Ok(ModuliPoint { holonomies: hol.into_iter().map(|h| h.expect("every slot has a side")).collect() })
}

fn expect_square(sq: &ModuliSpace) -> Result<()> {
    if ClosedFormKind::detect(sq.polygon()) == Some(ClosedFormKind::SquareRb) {
        Ok(())
    } else {
        Err(Error::Surface("the groupoid lives on the rb square".into()))
    }
}

// square slots in word order: r1, b1, r2, b2
const R1: usize = 0;
const B1: usize = 1;
const R2: usize = 2;
const B2: usize = 3;

/// Horizontal product: `p`'s right side `b1` is glued to `q`'s left side `b2`.
pub fn lw_product(sq: &ModuliSpace, p: &ModuliPoint, q: &ModuliPoint) -> Result<ModuliPoint> {
    expect_square(sq)?;
    let gs = GluedSpace::new(sq, sq, &[1], &[3])?;
    let pq = compose(sq, p, sq, q, &gs)?;
    realign(&gs.space, &pq, sq)
}

pub fn lw_unit(sq: &ModuliSpace, b: &GroupElement) -> ModuliPoint {
    let e = sq.algebra().identity();
    ModuliPoint { holonomies: vec![e.clone(), b.clone(), e, b.clone()] }
}

/// Mirror image: `(r₁⁻¹, b₂, r₂⁻¹, b₁)`.
pub fn lw_inverse(p: &ModuliPoint) -> ModuliPoint {
    let h = &p.holonomies;
    ModuliPoint { holonomies: vec![h[R1].inverse(), h[B2].clone(), h[R2].inverse(), h[B1].clone()] }
}

#[derive(Clone, Debug, Serialize)]
pub struct GroupoidReport {
    pub associativity: f64,
    pub left_unit: f64,
    pub right_unit: f64,
    pub left_inverse: f64,
    pub right_inverse: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl GroupoidReport {
    pub fn max_residual(&self) -> f64 {
        [self.associativity, self.left_unit, self.right_unit, self.left_inverse, self.right_inverse].into_iter().fold(0.0, f64::max)
    }
}

/// A random point whose left side `b2` equals `left`.
fn composable_after(sq: &ModuliSpace, left: &GroupElement, seed: u64, scale: f64) -> Result<ModuliPoint> {
    let raw = sq.random_point(seed, scale)?;
    let mut hol = raw.holonomies;
    hol[B2] = left.clone();
    Ok(sq.project_fixing(hol, &[B2])?.0)
}

/// Groupoid axioms on a random composable triple.
pub fn check_groupoid(sq: &ModuliSpace, seed: u64, scale: f64) -> Result<GroupoidReport> {
    expect_square(sq)?;
    let p = sq.random_point(seed, scale)?;
    let q = composable_after(sq, &p.holonomies[B1], seed.wrapping_add(1), scale)?;
    let s = composable_after(sq, &q.holonomies[B1], seed.wrapping_add(2), scale)?;
    let mul = |a: &ModuliPoint, b: &ModuliPoint| lw_product(sq, a, b);
    let associativity = mul(&mul(&p, &q)?, &s)?.distance(&mul(&p, &mul(&q, &s)?)?);
    let left_unit = mul(&lw_unit(sq, &p.holonomies[B2]), &p)?.distance(&p);
    let right_unit = mul(&p, &lw_unit(sq, &p.holonomies[B1]))?.distance(&p);
    let pinv = lw_inverse(&p);
    let right_inverse = mul(&p, &pinv)?.distance(&lw_unit(sq, &p.holonomies[B2]));
    let left_inverse = mul(&pinv, &p)?.distance(&lw_unit(sq, &p.holonomies[B1]));
    let mut r = GroupoidReport { associativity, left_unit, right_unit, left_inverse, right_inverse, tolerance: GROUPOID_TOL, pass: false };
    r.pass = r.max_residual() <= GROUPOID_TOL;
    Ok(r)
}

/// A random point of `sp2` that can be composed with `pt1` across `gs`.
pub fn sample_composable(sp1: &ModuliSpace, pt1: &ModuliPoint, sp2: &ModuliSpace, gs: &GluedSpace, seed: u64, scale: f64) -> Result<ModuliPoint> {
    let mut hol = sp2.random_point(seed, scale)?.holonomies;
    let mut fixed = Vec::new();
    for (a, b) in gs.seam_pairs() {
        let s2 = sp2.slot_of_side(b);
        hol[s2] = pt1.holonomies[sp1.slot_of_side(a)].clone();
        fixed.push(s2);
    }
    Ok(sp2.project_fixing(hol, &fixed)?.0)
}
