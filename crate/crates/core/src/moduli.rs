//! Moduli points as holonomy tuples with product one, their tangent spaces
//! and local charts.
//!
//! Conventions: every slot holds a group element `g_s`; a side traversed
//! reversed contributes `g_s^-1`. Variations are left-trivialized,
//! `λ_s = g_s^-1 δg_s`, and the reversed contribution varies by `-Ad(g_s) λ_s`.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::lie::{catalog, AlgebraVector, Backend, CatalogSpec, GroupElement, QuadraticLieAlgebra};
use crate::linalg;
use crate::surface::{moduli_dimension, validate, ColoredPolygon, Slot, ValidationReport};
use crate::{Error, Result};

/// Newton target for the boundary product residual.
pub const CONSTRAINT_TOL: f64 = 1e-12;
pub const MAX_NEWTON: usize = 50;
pub const DEFAULT_SCALE: f64 = 0.2;
pub const MAX_SCALE: f64 = 0.3;
/// Largest chart coordinate norm accepted.
pub const CHART_RADIUS: f64 = 0.1;

#[derive(Clone, Debug)]
pub struct ModuliPoint {
    pub holonomies: Vec<GroupElement>,
}

impl ModuliPoint {
    /// Largest matrix distance between corresponding holonomies.
    pub fn distance(&self, other: &ModuliPoint) -> f64 {
        self.holonomies.iter().zip(&other.holonomies).map(|(a, b)| a.distance(b)).fold(0.0, f64::max)
    }
}

/// Tangent vector in flat parameter coordinates (subalgebra coefficients for
/// arcs, algebra coordinates for cuts), left-trivialized.
#[derive(Clone, Debug)]
pub struct TangentVector {
    pub params: DVector<f64>,
}

#[derive(Clone, Debug)]
pub struct ProjectionStats {
    pub iterations: usize,
    pub residual: f64,
    /// Sum of the Newton step norms in parameter space.
    pub displacement: f64,
}

/// A validated colored polygon over a backend, with its slot layout.
#[derive(Clone, Debug)]
pub struct ModuliSpace {
    backend: Backend,
    polygon: ColoredPolygon,
    slots: Vec<Slot>,
    side_slot: Vec<usize>,
    embeddings: Vec<DMatrix<f64>>,
    coeff_maps: Vec<DMatrix<f64>>,
    offsets: Vec<usize>,
    params: usize,
    dimension: usize,
    report: ValidationReport,
}

impl ModuliSpace {
    pub fn new(backend: &Backend, polygon: &ColoredPolygon) -> Result<Self> {
        let report = validate(polygon, backend)?;
        if !report.pass {
            return Err(Error::Surface(format!("{polygon} is not a valid colored surface: {}", report.problems.join("; "))));
        }
        let (slots, side_slot) = polygon.slots()?;
        let d = backend.algebra.dim();
        let mut embeddings = Vec::new();
        let mut coeff_maps = Vec::new();
        let mut offsets = Vec::new();
        let mut params = 0;
        for s in &slots {
            let (e, c) = match s {
                Slot::Arc { side } => {
                    let h = backend.get(polygon.sides[*side].color().expect("arc")).expect("validated");
                    (h.embedding().clone(), h.coefficient_map().clone())
                }
                Slot::Cut { .. } => (DMatrix::identity(d, d), DMatrix::identity(d, d)),
            };
            offsets.push(params);
            params += e.ncols();
            embeddings.push(e);
            coeff_maps.push(c);
        }
        let dimension = moduli_dimension(polygon, backend)?;
        Ok(ModuliSpace { backend: backend.clone(), polygon: polygon.clone(), slots, side_slot, embeddings, coeff_maps, offsets, params, dimension, report })
    }

    pub fn backend(&self) -> &Backend {
        &self.backend
    }

    pub fn algebra(&self) -> &Arc<QuadraticLieAlgebra> {
        &self.backend.algebra
    }

    pub fn polygon(&self) -> &ColoredPolygon {
        &self.polygon
    }

    pub fn slots(&self) -> &[Slot] {
        &self.slots
    }

    pub fn slot_of_side(&self, side: usize) -> usize {
        self.side_slot[side]
    }

    pub fn validation(&self) -> &ValidationReport {
        &self.report
    }

    /// Theoretical dimension of the moduli space.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn param_dim(&self) -> usize {
        self.params
    }

    pub fn slot_offset(&self, s: usize) -> usize {
        self.offsets[s]
    }

    pub fn slot_param_dim(&self, s: usize) -> usize {
        self.embeddings[s].ncols()
    }

    /// `d x p_s` map from slot parameters to algebra coordinates.
    pub fn slot_embedding(&self, s: usize) -> &DMatrix<f64> {
        &self.embeddings[s]
    }

    /// Algebra vector of slot `s` for a flat parameter vector.
    pub fn slot_component(&self, params: &DVector<f64>, s: usize) -> AlgebraVector {
        let p = params.rows(self.offsets[s], self.slot_param_dim(s)).into_owned();
        &self.embeddings[s] * p
    }

    pub fn components(&self, v: &TangentVector) -> Vec<AlgebraVector> {
        (0..self.slots.len()).map(|s| self.slot_component(&v.params, s)).collect()
    }

    fn check_shape(&self, pt: &ModuliPoint) -> Result<()> {
        if pt.holonomies.len() != self.slots.len() {
            return Err(Error::DimensionMismatch { expected: self.slots.len(), got: pt.holonomies.len() });
        }
        Ok(())
    }

    /// Group element contributed by side `i` in the boundary word.
    pub fn contribution(&self, pt: &ModuliPoint, i: usize) -> GroupElement {
        let g = &pt.holonomies[self.side_slot[i]];
        if self.polygon.sides[i].orientation.is_reversed() {
            g.inverse()
        } else {
            g.clone()
        }
    }

    /// Ordered product of all contributions starting at side `start`.
    pub fn boundary_product_from(&self, pt: &ModuliPoint, start: usize) -> GroupElement {
        let n = self.polygon.len();
        let mut acc = self.algebra().identity();
        for k in 0..n {
            acc = acc.mul(&self.contribution(pt, (start + k) % n));
        }
        acc
    }

    pub fn boundary_product(&self, pt: &ModuliPoint) -> GroupElement {
        self.boundary_product_from(pt, 0)
    }

    /// Logarithm of the boundary product in algebra coordinates.
    pub fn constraint_residual(&self, pt: &ModuliPoint) -> Result<AlgebraVector> {
        self.check_shape(pt)?;
        self.algebra().log(&self.boundary_product(pt))
    }

    /// `d x P` differential of `P^-1 δP` with respect to left-trivialized slot parameters:
    /// `Σ_k Ad(suffix_k)^-1 μ_k`.
    pub fn jacobian(&self, pt: &ModuliPoint) -> DMatrix<f64> {
        let alg = self.algebra();
        let d = alg.dim();
        let n = self.polygon.len();
        let mut j = DMatrix::zeros(d, self.params);
        let mut suffix = alg.identity();
        for k in (0..n).rev() {
            let s = self.side_slot[k];
            let e = &self.embeddings[s];
            let transport = alg.adjoint(&suffix.inverse());
            let block = if self.polygon.sides[k].orientation.is_reversed() {
                -(&transport * alg.adjoint(&pt.holonomies[s]) * e)
            } else {
                &transport * e
            };
            let mut view = j.columns_mut(self.offsets[s], e.ncols());
            view += block;
            suffix = self.contribution(pt, k).mul(&suffix);
        }
        j
    }

    /// Norm of the linearized constraint on a tangent vector.
    pub fn linearized_residual(&self, pt: &ModuliPoint, v: &TangentVector) -> f64 {
        (self.jacobian(pt) * &v.params).norm()
    }

    /// Raw holonomies `exp(E_s c_s)`.
    pub fn exp_params(&self, params: &DVector<f64>) -> Result<Vec<GroupElement>> {
        if params.len() != self.params {
            return Err(Error::DimensionMismatch { expected: self.params, got: params.len() });
        }
        (0..self.slots.len()).map(|s| self.algebra().exp(&self.slot_component(params, s))).collect()
    }

    fn step(&self, pt: &mut ModuliPoint, delta: &DVector<f64>) -> Result<()> {
        for s in 0..self.slots.len() {
            let x = self.slot_component(delta, s);
            if x.iter().any(|&v| v != 0.0) {
                pt.holonomies[s] = pt.holonomies[s].mul(&self.algebra().exp(&x)?);
            }
        }
        Ok(())
    }

    /// Newton projection with minimal-norm corrections onto the constraint set.
    pub fn project_with_stats(&self, raw: Vec<GroupElement>) -> Result<(ModuliPoint, ProjectionStats)> {
        self.project_fixing(raw, &[])
    }

    /// Newton projection that leaves the slots in `fixed` untouched.
    pub fn project_fixing(&self, raw: Vec<GroupElement>, fixed: &[usize]) -> Result<(ModuliPoint, ProjectionStats)> {
        let mut pt = ModuliPoint { holonomies: raw };
        self.check_shape(&pt)?;
        let d = self.algebra().dim();
        let mut displacement = 0.0;
        for it in 0..=MAX_NEWTON {
            let res = self.constraint_residual(&pt)?;
            let rn = res.norm();
            if rn <= CONSTRAINT_TOL {
                return Ok((pt, ProjectionStats { iterations: it, residual: rn, displacement }));
            }
            if it == MAX_NEWTON {
                return Err(Error::NoConvergence { iterations: MAX_NEWTON, residual: rn });
            }
            let mut j = self.jacobian(&pt);
            for &s in fixed {
                j.columns_mut(self.offsets[s], self.slot_param_dim(s)).fill(0.0);
            }
            let rank = linalg::rank(&j, linalg::RANK_RTOL);
            if rank < d {
                return Err(Error::RankDeficient { rank, expected: d });
            }
            let delta = -(linalg::pinv(&j, linalg::RANK_RTOL) * res);
            displacement += delta.norm();
            self.step(&mut pt, &delta)?;
        }
        unreachable!()
    }

    pub fn project(&self, raw: Vec<GroupElement>) -> Result<ModuliPoint> {
        Ok(self.project_with_stats(raw)?.0)
    }

    /// Seeded sample: uniform slot parameters in `[-scale, scale]`, then projected.
    pub fn random_point(&self, seed: u64, scale: f64) -> Result<ModuliPoint> {
        if !(0.0..=MAX_SCALE).contains(&scale) {
            return Err(Error::InvalidPoint(format!("sampling scale {scale} outside [0, {MAX_SCALE}]")));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let params = DVector::from_fn(self.params, |_, _| if scale == 0.0 { 0.0 } else { rng.gen_range(-scale..=scale) });
        self.project(self.exp_params(&params)?)
    }

    /// Orthonormal basis (as columns, `P x m`) of the kernel of the linearized constraint.
    pub fn tangent_matrix(&self, pt: &ModuliPoint) -> Result<DMatrix<f64>> {
        self.check_shape(pt)?;
        let basis = linalg::nullspace(&self.jacobian(pt), linalg::RANK_RTOL);
        if basis.ncols() != self.dimension {
            return Err(Error::Structural(format!(
                "tangent space has dimension {} but the dimension formula gives {}",
                basis.ncols(),
                self.dimension
            )));
        }
        Ok(basis)
    }

    pub fn tangent_basis(&self, pt: &ModuliPoint) -> Result<Vec<TangentVector>> {
        let m = self.tangent_matrix(pt)?;
        Ok(m.column_iter().map(|c| TangentVector { params: c.into_owned() }).collect())
    }

    /// Membership of arc holonomies in their subgroups (largest residual).
    pub fn arc_membership_residual(&self, pt: &ModuliPoint) -> Result<f64> {
        let mut worst: f64 = 0.0;
        for (s, slot) in self.slots.iter().enumerate() {
            if let Slot::Arc { .. } = slot {
                let x = self.algebra().log(&pt.holonomies[s])?;
                let c = &self.coeff_maps[s] * &x;
                worst = worst.max((&self.embeddings[s] * c - &x).norm());
            }
        }
        Ok(worst)
    }

    /// `p_s x p_s` matrix of the left-trivialized differential of `a ↦ exp(E_s a)`.
    fn dexp_block(&self, s: usize, a: &DVector<f64>) -> DMatrix<f64> {
        let alg = self.algebra();
        let e = &self.embeddings[s];
        if alg.is_abelian() || a.iter().all(|&x| x == 0.0) {
            return DMatrix::identity(e.ncols(), e.ncols());
        }
        let x = e * a;
        let ad = alg.ad_matrix(&x);
        let d = alg.dim();
        // Σ (-1)^k / (k+1)! ad_x^k
        let mut term = DMatrix::<f64>::identity(d, d);
        let mut sum = term.clone();
        for k in 1..60 {
            term = &ad * &term * (-1.0 / (k as f64 + 1.0));
            sum += &term;
            if term.norm() < 1e-18 {
                break;
            }
        }
        &self.coeff_maps[s] * sum * e
    }

    fn dexp(&self, a: &DVector<f64>) -> DMatrix<f64> {
        let mut out = DMatrix::zeros(self.params, self.params);
        for s in 0..self.slots.len() {
            let (o, p) = (self.offsets[s], self.slot_param_dim(s));
            let block = self.dexp_block(s, &a.rows(o, p).into_owned());
            out.view_mut((o, o), (p, p)).copy_from(&block);
        }
        out
    }

    /// Chart centered at a valid point.
    pub fn chart_at(&self, pt: &ModuliPoint) -> Result<Chart> {
        let res = self.constraint_residual(pt)?.norm();
        if res > CONSTRAINT_TOL {
            return Err(Error::InvalidPoint(format!("chart base has residual {res:e}")));
        }
        let basis = self.tangent_matrix(pt)?;
        let j = self.jacobian(pt);
        // orthonormal basis of the row space of J; complement to the tangent space
        let svd = j.clone().svd(false, true);
        let vt = svd.v_t.expect("v_t requested");
        let d = self.algebra().dim();
        let complement = vt.rows(0, d).transpose();
        Ok(Chart { base: pt.clone(), basis, complement })
    }

    pub fn to_document(&self, pt: &ModuliPoint) -> Result<PointDocument> {
        self.check_shape(pt)?;
        let slots = pt.holonomies.iter().map(|g| self.algebra().log(g).map(|x| x.iter().cloned().collect())).collect::<Result<Vec<Vec<f64>>>>()?;
        Ok(PointDocument { backend: self.backend.spec.clone(), surface: self.polygon.clone(), slots })
    }
}

/// Implicit-function chart: `c ↦ g_s⁰ exp(E_s a_s)` with `a = Λ c + U w(c)`,
/// where `Λ` is the tangent basis, `U` spans the row space of the constraint
/// differential at the base, and `w(c)` solves the constraint.
#[derive(Clone, Debug)]
pub struct Chart {
    pub base: ModuliPoint,
    pub basis: DMatrix<f64>,
    pub complement: DMatrix<f64>,
}

impl Chart {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    fn point_at(&self, space: &ModuliSpace, a: &DVector<f64>) -> Result<ModuliPoint> {
        let mut pt = self.base.clone();
        for s in 0..space.slots.len() {
            let x = space.slot_component(a, s);
            if x.iter().any(|&v| v != 0.0) {
                pt.holonomies[s] = pt.holonomies[s].mul(&space.algebra().exp(&x)?);
            }
        }
        Ok(pt)
    }

    fn solve(&self, space: &ModuliSpace, c: &DVector<f64>) -> Result<(DVector<f64>, ModuliPoint)> {
        if c.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), got: c.len() });
        }
        if c.norm() > CHART_RADIUS {
            return Err(Error::InvalidPoint(format!("chart coordinates of norm {} exceed {CHART_RADIUS}", c.norm())));
        }
        let lin = &self.basis * c;
        let mut w = DVector::zeros(self.complement.ncols());
        let mut a = lin.clone();
        let mut pt = self.point_at(space, &a)?;
        let mut res = space.constraint_residual(&pt)?;
        let mut best = res.norm();
        for _ in 0..MAX_NEWTON {
            if best <= 1e-15 {
                break;
            }
            let m = space.jacobian(&pt) * space.dexp(&a) * &self.complement;
            let dw = m.lu().solve(&(-&res)).ok_or_else(|| Error::Singular("chart Newton system".into()))?;
            let w_new = &w + dw;
            let a_new = &lin + &self.complement * &w_new;
            let pt_new = self.point_at(space, &a_new)?;
            let res_new = space.constraint_residual(&pt_new)?;
            if res_new.norm() >= best {
                break;
            }
            best = res_new.norm();
            (w, a, pt, res) = (w_new, a_new, pt_new, res_new);
        }
        if best > CONSTRAINT_TOL {
            return Err(Error::NoConvergence { iterations: MAX_NEWTON, residual: best });
        }
        Ok((a, pt))
    }

    pub fn point(&self, space: &ModuliSpace, c: &DVector<f64>) -> Result<ModuliPoint> {
        if c.iter().all(|&x| x == 0.0) {
            return Ok(self.base.clone());
        }
        Ok(self.solve(space, c)?.1)
    }

    /// Chart point and the left-trivialized images of the coordinate vectors
    /// (`P x m`, obtained from the implicit function theorem).
    pub fn point_and_tangents(&self, space: &ModuliSpace, c: &DVector<f64>) -> Result<(ModuliPoint, DMatrix<f64>)> {
        if c.iter().all(|&x| x == 0.0) {
            return Ok((self.base.clone(), self.basis.clone()));
        }
        let (a, pt) = self.solve(space, c)?;
        let dexp = space.dexp(&a);
        let jd = space.jacobian(&pt) * &dexp;
        let fw = &jd * &self.complement;
        let fc = &jd * &self.basis;
        let dw = fw.lu().solve(&(-fc)).ok_or_else(|| Error::Singular("chart tangent system".into()))?;
        let da = &self.basis + &self.complement * dw;
        Ok((pt, dexp * da))
    }
}

/// Backend-independent JSON form of a point: per-slot algebra coordinates.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PointDocument {
    pub backend: CatalogSpec,
    pub surface: ColoredPolygon,
    pub slots: Vec<Vec<f64>>,
}

impl PointDocument {
    /// Rebuild the space and the point (re-projected onto the constraint set).
    pub fn load(&self) -> Result<(ModuliSpace, ModuliPoint)> {
        let backend = catalog(&self.backend)?;
        let space = ModuliSpace::new(&backend, &self.surface)?;
        if self.slots.len() != space.slots.len() {
            return Err(Error::DimensionMismatch { expected: space.slots.len(), got: self.slots.len() });
        }
        let raw = self
            .slots
            .iter()
            .map(|x| space.algebra().exp(&DVector::from_column_slice(x)))
            .collect::<Result<Vec<_>>>()?;
        let pt = space.project(raw)?;
        Ok((space, pt))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface::Labels;
    use proptest::prelude::{any, prop_assert, prop_assert_eq, proptest, ProptestConfig};

    fn space(spec: CatalogSpec, name: &str) -> ModuliSpace {
        let be = catalog(&spec).unwrap();
        ModuliSpace::new(&be, &ColoredPolygon::builtin(name, &Labels::default()).unwrap()).unwrap()
    }

    fn abelian(n: usize) -> CatalogSpec {
        CatalogSpec::AbelianDouble { n, theta: None }
    }

    #[test]
    fn identity_point_has_zero_residual() {
        let sp = space(CatalogSpec::Sl2cIwasawa {}, "square");
        let pt = sp.random_point(3, 0.0).unwrap();
        assert_eq!(sp.constraint_residual(&pt).unwrap().norm(), 0.0);
    }

    #[test]
    fn abelian_residual_is_signed_sum() {
        let sp = space(abelian(1), "square");
        let params = DVector::from_vec(vec![0.3, -0.1, 0.2, 0.05]);
        let raw = sp.exp_params(&params).unwrap();
        let res = sp.constraint_residual(&ModuliPoint { holonomies: raw }).unwrap();
        // r1 + b1 - r2 - b2 in (V, V*) coordinates
        assert!((res[0] - (0.3 - 0.2)).abs() < 1e-15);
        assert!((res[1] - (-0.1 - 0.05)).abs() < 1e-15);
    }

    #[test]
    fn perturbation_is_first_order() {
        let sp = space(CatalogSpec::Sl2cIwasawa {}, "square");
        let mut pt = sp.random_point(11, 0.2).unwrap();
        let z = DVector::from_vec(vec![0.6e-3, 0.0, -0.8e-3]);
        let x = sp.slot_embedding(1) * &z;
        pt.holonomies[1] = pt.holonomies[1].mul(&sp.algebra().exp(&x).unwrap());
        let r = sp.constraint_residual(&pt).unwrap().norm();
        assert!((0.5e-3..=2e-3).contains(&r), "{r}");
    }

    #[test]
    fn sl2c_square_newton_converges_fast() {
        let sp = space(CatalogSpec::Sl2cIwasawa {}, "square");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let params = DVector::from_fn(sp.param_dim(), |_, _| rng.gen_range(-0.2..=0.2));
        let (pt, stats) = sp.project_with_stats(sp.exp_params(&params).unwrap()).unwrap();
        assert!(stats.iterations <= 10, "{stats:?}");
        assert!(sp.constraint_residual(&pt).unwrap().norm() <= 1e-12);
    }

    #[test]
    fn abelian_projection_is_one_step() {
        let sp = space(abelian(2), "triangle");
        let params = DVector::from_fn(sp.param_dim(), |i, _| 0.05 * i as f64 - 0.1);
        let (_, stats) = sp.project_with_stats(sp.exp_params(&params).unwrap()).unwrap();
        assert_eq!(stats.iterations, 1);
    }

    #[test]
    fn projection_returns_nearby() {
        let sp = space(CatalogSpec::Sl2cIwasawa {}, "square");
        let pt = sp.random_point(8, 0.2).unwrap();
        let mut raw = pt.holonomies.clone();
        for (s, g) in raw.iter_mut().enumerate() {
            let z = DVector::from_element(sp.slot_param_dim(s), 1e-2 / (sp.slot_param_dim(s) as f64).sqrt());
            *g = g.mul(&sp.algebra().exp(&(sp.slot_embedding(s) * z)).unwrap());
        }
        let (q, stats) = sp.project_with_stats(raw).unwrap();
        assert!(stats.residual <= 1e-12);
        assert!(stats.displacement <= 5e-2, "{stats:?}");
        let (q2, s2) = sp.project_with_stats(q.holonomies.clone()).unwrap();
        assert_eq!(s2.iterations, 0);
        assert_eq!(q.distance(&q2), 0.0);
    }

    #[test]
    fn tangent_dimensions() {
        let sp = space(abelian(1), "square");
        let pt = sp.random_point(1, 0.2).unwrap();
        assert_eq!(sp.tangent_basis(&pt).unwrap().len(), 2);
        let sp = space(abelian(2), "triangle");
        let pt = sp.random_point(1, 0.2).unwrap();
        let basis = sp.tangent_basis(&pt).unwrap();
        assert_eq!(basis.len(), 2);
        for v in &basis {
            assert!(sp.linearized_residual(&pt, v) <= 1e-10);
        }
    }

    #[test]
    fn arc_holonomies_stay_in_subgroups() {
        let sp = space(CatalogSpec::Sl2cIwasawa {}, "annulus_with_cut");
        let pt = sp.random_point(2, 0.2).unwrap();
        assert!(sp.arc_membership_residual(&pt).unwrap() <= 1e-9);
    }

    #[test]
    fn cut_pair_consistency() {
        let sp = space(CatalogSpec::Sl2cIwasawa {}, "annulus_with_cut");
        let pt = sp.random_point(4, 0.2).unwrap();
        let g = &pt.holonomies[sp.slot_of_side(2)];
        let explicit = [0, 1].iter().map(|&i| sp.contribution(&pt, i)).chain([g.clone()]).chain([3, 4].iter().map(|&i| sp.contribution(&pt, i))).chain([g.inverse()]);
        let prod = explicit.fold(sp.algebra().identity(), |a, b| a.mul(&b));
        let direct = sp.boundary_product(&pt);
        assert!(prod.distance(&direct) <= 1e-15);
    }

    #[test]
    fn scale_precondition() {
        let sp = space(abelian(1), "square");
        assert!(matches!(sp.random_point(0, 0.5), Err(Error::InvalidPoint(_))));
    }

    #[test]
    fn chart_zero_and_derivative() {
        let sp = space(CatalogSpec::Sl2cIwasawa {}, "square");
        let pt = sp.random_point(21, 0.2).unwrap();
        let chart = sp.chart_at(&pt).unwrap();
        assert_eq!(chart.point(&sp, &DVector::zeros(chart.dim())).unwrap().distance(&pt), 0.0);
        let h = 1e-4;
        for i in 0..chart.dim() {
            let mut c = DVector::zeros(chart.dim());
            c[i] = h;
            let plus = chart.point(&sp, &c).unwrap();
            let minus = chart.point(&sp, &(-&c)).unwrap();
            for s in 0..sp.slots().len() {
                let dp = sp.algebra().log(&pt.holonomies[s].inverse().mul(&plus.holonomies[s])).unwrap();
                let dm = sp.algebra().log(&pt.holonomies[s].inverse().mul(&minus.holonomies[s])).unwrap();
                let fd = (dp - dm) / (2.0 * h);
                let want = sp.slot_component(&chart.basis.column(i).into_owned(), s);
                assert!((fd - want).norm() <= 1e-7);
            }
        }
    }

    #[test]
    fn chart_tangents_match_finite_differences() {
        let sp = space(CatalogSpec::CotangentDouble { h: "su2".into(), mu: None }, "gamma11");
        let pt = sp.random_point(9, 0.2).unwrap();
        let chart = sp.chart_at(&pt).unwrap();
        let c0 = DVector::from_fn(chart.dim(), |i, _| 0.02 * ((i % 3) as f64 - 1.0));
        let (p0, tangents) = chart.point_and_tangents(&sp, &c0).unwrap();
        let h = 1e-5;
        for i in 0..chart.dim() {
            let mut e = DVector::zeros(chart.dim());
            e[i] = h;
            let plus = chart.point(&sp, &(&c0 + &e)).unwrap();
            let minus = chart.point(&sp, &(&c0 - &e)).unwrap();
            for s in 0..sp.slots().len() {
                let dp = sp.algebra().log(&p0.holonomies[s].inverse().mul(&plus.holonomies[s])).unwrap();
                let dm = sp.algebra().log(&p0.holonomies[s].inverse().mul(&minus.holonomies[s])).unwrap();
                let fd = (dp - dm) / (2.0 * h);
                let want = sp.slot_component(&tangents.column(i).into_owned(), s);
                let err = (fd - want).norm();
                assert!(err <= 1e-7, "{err}");
            }
            let v = TangentVector { params: tangents.column(i).into_owned() };
            assert!(sp.linearized_residual(&p0, &v) <= 1e-10);
        }
    }

    #[test]
    fn abelian_chart_is_affine() {
        let sp = space(abelian(2), "gamma11");
        let pt = sp.random_point(3, 0.2).unwrap();
        let chart = sp.chart_at(&pt).unwrap();
        let c = DVector::from_fn(chart.dim(), |i, _| 0.005 * (i as f64 + 1.0));
        let q1 = chart.point(&sp, &c).unwrap();
        let q2 = chart.point(&sp, &(&c * 2.0)).unwrap();
        for s in 0..sp.slots().len() {
            let g0 = sp.algebra().log(&pt.holonomies[s]).unwrap();
            let d1 = sp.algebra().log(&q1.holonomies[s]).unwrap() - &g0;
            let d2 = sp.algebra().log(&q2.holonomies[s]).unwrap() - &g0;
            assert!((d2 - d1 * 2.0).norm() <= 1e-14);
        }
    }

    #[test]
    fn document_roundtrip() {
        let sp = space(CatalogSpec::Sl2cIwasawa {}, "annulus_with_cut");
        let pt = sp.random_point(6, 0.2).unwrap();
        let doc = sp.to_document(&pt).unwrap();
        let text = serde_json::to_string(&doc).unwrap();
        let back: PointDocument = serde_json::from_str(&text).unwrap();
        let (sp2, pt2) = back.load().unwrap();
        assert_eq!(sp2.polygon(), sp.polygon());
        assert!(pt.distance(&pt2) <= 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]
        #[test]
        fn random_points_satisfy_constraint(seed in any::<u64>(), which in 0usize..3) {
            let (spec, name) = match which {
                0 => (CatalogSpec::Sl2cIwasawa {}, "annulus_with_cut"),
                1 => (CatalogSpec::CotangentDouble { h: "su2".into(), mu: None }, "gamma00"),
                _ => (CatalogSpec::CotangentDouble { h: "aff1".into(), mu: None }, "triangle"),
            };
            let sp = space(spec, name);
            let pt = sp.random_point(seed, 0.2).unwrap();
            prop_assert!(sp.constraint_residual(&pt).unwrap().norm() <= 1e-12);
            prop_assert_eq!(sp.tangent_basis(&pt).unwrap().len(), sp.dimension());
        }
    }
}
