//! Acceptance suite: one line per criterion, nonzero exit if any fails.

use std::collections::BTreeSet;
use std::time::{Duration, Instant};

use holoform::exact::{int_vec, q, qf, to_f64, QMatrix};
use holoform::lie::{are_transverse, catalog, is_lagrangian, Backend, CatalogSpec, CATALOG};
use holoform::linalg;
use holoform::moduli::ModuliSpace;
use holoform::surface::{moduli_dimension, ColoredPolygon, Labels, BUILTINS};
use holoform::symplectic::*;
use holoform::torus_morita::*;
use holoform::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const BACKENDS: [&str; 3] = ["abelian_double(2)", "cotangent_double(su(2))", "sl2c_iwasawa"];
const EXAMPLES: [(&str, ClosedFormKind); 4] = [
    ("square", ClosedFormKind::SquareRb),
    ("gamma11", ClosedFormKind::SquareRbv),
    ("triangle", ClosedFormKind::Triangle),
    ("annulus_with_cut", ClosedFormKind::Annulus),
];
const SCALE: f64 = 0.25;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn backend(spec: &str) -> Backend {
    catalog(&CatalogSpec::parse(spec).expect("catalog name")).expect("catalog entry")
}

/// `None` when the backend lacks a label or a corner is not transverse.
fn space(be: &Backend, surface: &str) -> Option<ModuliSpace> {
    let p = ColoredPolygon::builtin(surface, &Labels::default()).expect("builtin");
    match ModuliSpace::new(be, &p) {
        Ok(sp) => Some(sp),
        Err(Error::UnresolvedLabel(_) | Error::Surface(_)) => None,
        Err(e) => panic!("{} over {}: {e}", surface, be.name()),
    }
}

fn all_spaces() -> Vec<ModuliSpace> {
    let mut out = Vec::new();
    for spec in BACKENDS {
        let be = backend(spec);
        for s in BUILTINS {
            out.extend(space(&be, s));
        }
    }
    out
}

fn label(sp: &ModuliSpace) -> String {
    format!("{}/{}", sp.backend().name(), sp.polygon().name)
}

fn oracle_equivalence() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut points = 0;
    let mut cases = Vec::new();
    for spec in BACKENDS {
        let be = backend(spec);
        for (surface, kind) in EXAMPLES {
            let Some(sp) = space(&be, surface) else { continue };
            for seed in 0..100 {
                let pt = sp.random_point(seed, SCALE).unwrap();
                let t = sp.tangent_matrix(&pt).unwrap();
                let d = linalg::max_abs(&(omega_matrix(&sp, &pt, &t).unwrap() - closed_form(kind, &sp, &pt, &t).unwrap()));
                worst = worst.max(d);
                points += 1;
            }
            cases.push(label(&sp));
        }
    }
    outcome(worst <= 1e-9, format!("max |fold - closed form| = {worst:.2e} over {points} points in {} cases, tol 1e-9", cases.len()))
}

fn closedness() -> Outcome {
    let (mut worst_abelian, mut worst_nonabelian): (f64, f64) = (0.0, 0.0);
    let mut fails = Vec::new();
    for sp in all_spaces() {
        let abelian = sp.algebra().is_abelian();
        let tol = if abelian { 1e-12 } else { 1e-4 };
        for seed in 0..10 {
            let pt = sp.random_point(100 + seed, SCALE).unwrap();
            let r = check_closed(&sp, &pt, FD_STEP, tol).unwrap();
            if abelian {
                worst_abelian = worst_abelian.max(r.max_residual);
            } else {
                worst_nonabelian = worst_nonabelian.max(r.max_residual);
            }
            if !r.pass {
                fails.push(format!("{} seed {seed}", label(&sp)));
            }
        }
    }
    outcome(fails.is_empty(), format!("max |dω| abelian {worst_abelian:.2e} (tol 1e-12), nonabelian {worst_nonabelian:.2e} (tol 1e-4), h = 1e-4; failures {fails:?}"))
}

fn nondegeneracy() -> Outcome {
    let mut smallest = f64::INFINITY;
    let mut points = 0;
    for sp in all_spaces() {
        for seed in 0..10 {
            let pt = sp.random_point(200 + seed, SCALE).unwrap();
            smallest = smallest.min(check_nondegenerate(&sp, &pt).unwrap().min_singular_value);
            points += 1;
        }
    }
    outcome(smallest > 1e-6, format!("min singular value {smallest:.3e} over {points} points, threshold 1e-6"))
}

fn presentation_invariance() -> Outcome {
    let (mut rot, mut recut): (f64, f64) = (0.0, 0.0);
    let mut cancel_exact = true;
    let mut recuts = 0;
    for sp in all_spaces() {
        for seed in 0..5 {
            let pt = sp.random_point(300 + seed, SCALE).unwrap();
            let r = invariance_checks(&sp, &pt, seed).unwrap();
            rot = rot.max(r.rotation_residual);
            if let Some(x) = r.recut_residual {
                recut = recut.max(x);
                recuts += 1;
            }
            if let Some(x) = r.cut_cancellation_residual {
                cancel_exact &= x == 0.0;
            }
        }
    }
    let pass = rot <= 1e-10 && recut <= 1e-10 && recuts > 0 && cancel_exact;
    outcome(pass, format!("rotation {rot:.2e}, re-cut {recut:.2e} ({recuts} points), tol 1e-10; cut-pair cancellation exact: {cancel_exact}"))
}

fn lagrangian_gluing() -> Outcome {
    let (mut iso, mut tangency): (f64, f64) = (0.0, 0.0);
    let mut half = true;
    let mut pairs = 0;
    for spec in BACKENDS {
        let be = backend(spec);
        let sq = space(&be, "square").unwrap();
        let g11 = space(&be, "gamma11").unwrap();
        for (sp1, seam1, seam2) in [(&sq, [1], [3]), (&g11, [0], [2])] {
            let gs = GluedSpace::new(sp1, &sq, &seam1, &seam2).unwrap();
            for seed in 0..20 {
                let pt1 = sp1.random_point(400 + seed, SCALE).unwrap();
                let pt2 = sample_composable(sp1, &pt1, &sq, &gs, 500 + seed, SCALE).unwrap();
                let r = check_lagrangian_graph(sp1, &pt1, &sq, &pt2, &gs).unwrap();
                iso = iso.max(r.isotropy_residual);
                tangency = tangency.max(r.tangency_residual);
                half &= r.dimension == r.expected_dimension && 2 * r.expected_dimension == sp1.dimension() + sq.dimension() + gs.space.dimension();
                pairs += 1;
            }
        }
    }
    outcome(iso <= 1e-8 && half, format!("isotropy {iso:.2e} (tol 1e-8), tangency {tangency:.2e}, half dimension at every pair: {half}; {pairs} pairs"))
}

fn half_theta() -> SkewTheta {
    SkewTheta::exact(QMatrix::from_rows(&[vec![q(0), qf(1, 2)], vec![qf(-1, 2), q(0)]])).unwrap()
}

fn block_theta() -> SkewTheta {
    let mut m = QMatrix::zeros(4, 4);
    m[(0, 1)] = qf(1, 2);
    m[(1, 0)] = qf(-1, 2);
    m[(2, 3)] = qf(1, 3);
    m[(3, 2)] = qf(-1, 3);
    SkewTheta::exact(m).unwrap()
}

fn groupoid_axioms() -> Outcome {
    let mut worst: f64 = 0.0;
    for spec in BACKENDS {
        let sq = space(&backend(spec), "square").unwrap();
        for seed in 0..20 {
            worst = worst.max(check_groupoid(&sq, 600 + seed, SCALE).unwrap().max_residual());
        }
    }
    let mut exact = true;
    for theta in [half_theta(), block_theta()] {
        for g in [HorizontalGroupoid::square(&theta).unwrap(), HorizontalGroupoid::gamma00(&theta).unwrap()] {
            for seed in 0..5 {
                exact &= g.check(seed).unwrap().pass;
            }
        }
    }
    outcome(worst <= 1e-10 && exact, format!("float axioms max residual {worst:.2e} (tol 1e-10); exact abelian square and gamma00 groupoids: {exact}"))
}

fn dimension_formula() -> Outcome {
    let mut checked = 0;
    let mut skipped = 0;
    let mut mismatches = Vec::new();
    for spec in CATALOG {
        let be = backend(spec);
        for s in BUILTINS {
            let Some(sp) = space(&be, s) else {
                skipped += 1;
                continue;
            };
            let formula = moduli_dimension(sp.polygon(), &be).unwrap();
            for seed in 0..3 {
                let pt = sp.random_point(700 + seed, SCALE).unwrap();
                let rank = linalg::rank(&sp.tangent_matrix(&pt).unwrap(), linalg::RANK_RTOL);
                if rank != formula {
                    mismatches.push(format!("{}: formula {formula}, rank {rank}", label(&sp)));
                }
            }
            checked += 1;
        }
    }
    outcome(mismatches.is_empty(), format!("{checked} builtin x backend pairs agree exactly ({skipped} unavailable); mismatches {mismatches:?}"))
}

/// `ω(ℓᵢ, ℓⱼ)/planck` rounded from the float machinery on lattice generators.
fn hand_integrality(g: &AffineSymplecticTorus, theta: &SkewTheta, planck: f64) -> bool {
    let sp = ModuliSpace::new(&theta.backend().unwrap(), &g.model.polygon).unwrap();
    let pt = sp.random_point(5, 0.1).unwrap();
    let l = QMatrix::from_integer_rows(&g.lattice, g.param_dim);
    let w = omega_matrix(&sp, &pt, &g.basis.mul(&l.transpose()).to_f64()).unwrap();
    w.iter().all(|x| ((x / planck) - (x / planck).round()).abs() < 1e-9)
}

fn torus_morita() -> Outcome {
    let mut eps = BTreeSet::new();
    let mut all = true;
    let mut notes = Vec::new();
    for theta in [half_theta(), block_theta(), half_theta().negated(), block_theta().negated()] {
        let spaces = gamma_spaces(&theta).unwrap();
        let p = poisson_report(&theta, &spaces).unwrap();
        all &= p.pass;
        eps.extend([p.epsilon_r, p.epsilon_b]);
        let m = morita_surjectivity(&spaces);
        all &= m.pass;
        for g in [&spaces.g00, &spaces.g01, &spaces.g10, &spaces.g11, &spaces.g11_swapped] {
            for planck in [q(1), qf(1, 6), qf(4, 1)] {
                let verdict = integrality_check(g, &planck).unwrap();
                if verdict != hand_integrality(g, &theta, to_f64(&planck)) {
                    all = false;
                    notes.push(format!("{} planck {planck}", g.name));
                }
            }
        }
    }
    // ℤ² with the standard form: integral for ħ = 1 and 1/3, not for a halved form
    let std = QMatrix::from_i64(2, 2, &[0, 1, -1, 0]);
    let z2 = vec![int_vec(&[1, 0]), int_vec(&[0, 1])];
    all &= integrality_of(&std, &z2, &q(1)).unwrap() && integrality_of(&std, &z2, &qf(1, 3)).unwrap() && !integrality_of(&std.scale(&qf(1, 2)), &z2, &q(1)).unwrap();
    let shared = eps.len() == 1 && !eps.contains(&None);
    outcome(all && shared, format!("π_R = εθ, π_B = εθ⁻¹ with ε in {eps:?}; surjective legs and integrality verdicts match: {all}; mismatches {notes:?}"))
}

fn random_element(rng: &mut ChaCha8Rng, n: usize) -> TorusAlgebraElement {
    let mut e = TorusAlgebraElement::zero(n);
    for _ in 0..3 {
        let a: Vec<i64> = (0..n).map(|_| rng.gen_range(-2..=2)).collect();
        e = e.add(&TorusAlgebraElement::monomial(&a, Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))).unwrap();
    }
    e
}

fn quantum_torus() -> Outcome {
    let mut phase: f64 = 0.0;
    let mut assoc: f64 = 0.0;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let irrational = DMatrix::from_row_slice(3, 3, &[0.0, 2f64.sqrt(), 0.3, -(2f64.sqrt()), 0.0, std::f64::consts::E, -0.3, -std::f64::consts::E, 0.0]);
    for t in [half_theta().to_f64(), block_theta().to_f64(), irrational] {
        let n = t.nrows();
        for i in 0..n {
            for j in 0..n {
                let z = qt_commutator_phase(i, j, &t).unwrap();
                phase = phase.max((z - Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * t[(i, j)])).norm());
            }
        }
        for _ in 0..50 {
            let (a, b, c) = (random_element(&mut rng, n), random_element(&mut rng, n), random_element(&mut rng, n));
            let l = qt_multiply(&qt_multiply(&a, &b, &t).unwrap(), &c, &t).unwrap();
            let r = qt_multiply(&a, &qt_multiply(&b, &c, &t).unwrap(), &t).unwrap();
            assoc = assoc.max(l.distance(&r));
        }
    }
    let half = half_theta();
    let lattice = graph_lattice_intersection(&half).unwrap();
    let lattice_ok = lattice == vec![int_vec(&[2, 0]), int_vec(&[0, 2])];
    let center = qt_center(&half, 4).unwrap();
    let center_ok = center.generators == vec![vec!["2", "0"], vec!["0", "2"]];
    let brute: BTreeSet<Vec<i64>> = brute_force_center(&half.to_f64(), 4).unwrap().into_iter().collect();
    let mut from_lattice = lattice_points_in_box(&lattice, 2, 4).unwrap();
    from_lattice.remove(&vec![0, 0]);
    let brute_ok = brute == from_lattice;
    let pass = phase <= 1e-12 && assoc <= 1e-12 && lattice_ok && center_ok && brute_ok;
    outcome(
        pass,
        format!("commutator phase {phase:.2e}, associativity {assoc:.2e} (tol 1e-12); center <u1^2, u2^2>: {center_ok}, brute force |a| <= 4 agrees: {brute_ok}; lattice {{(2,0),(0,2)}}: {lattice_ok}"),
    )
}

fn catalog_self_tests() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut failed = Vec::new();
    for spec in CATALOG {
        let be = backend(spec);
        let alg = &be.algebra;
        worst = worst.max(alg.jacobi_residual()).max(alg.invariance_residual());
        for h in &be.subalgebras {
            let r = is_lagrangian(alg, h);
            worst = worst.max(r.isotropy_residual).max(r.closure_residual);
            if !r.pass {
                failed.push(format!("{spec} {} not Lagrangian", h.label()));
            }
        }
        for (a, b) in [("r", "b"), ("b", "v")] {
            if let (Some(x), Some(y)) = (be.get(a), be.get(b)) {
                if !are_transverse(alg, x, y).pass {
                    failed.push(format!("{spec} {a}|{b} not transverse"));
                }
            }
        }
    }
    outcome(worst <= 1e-10 && failed.is_empty(), format!("{} entries, worst residual {worst:.2e} (tol 1e-10); failures {failed:?}", CATALOG.len()))
}

fn main() {
    // (number, name, check, time budget)
    let criteria: [(u32, &str, fn() -> Outcome, Option<u64>); 10] = [
        (1, "oracle equivalence", oracle_equivalence, Some(60)),
        (2, "closedness", closedness, Some(120)),
        (3, "nondegeneracy", nondegeneracy, None),
        (4, "presentation invariance", presentation_invariance, None),
        (5, "lagrangian gluing", lagrangian_gluing, None),
        (6, "groupoid axioms", groupoid_axioms, None),
        (7, "dimension formula", dimension_formula, None),
        (8, "torus morita", torus_morita, Some(10)),
        (9, "quantum torus", quantum_torus, None),
        (10, "catalog self-tests", catalog_self_tests, None),
    ];
    let mut failures = 0;
    for (n, name, check, budget) in criteria {
        let start = Instant::now();
        let o = check();
        let elapsed = start.elapsed();
        let in_time = budget.is_none_or(|b| elapsed <= Duration::from_secs(b));
        let pass = o.pass && in_time;
        if !pass {
            failures += 1;
        }
        let budget = budget.map(|b| format!(", budget {b} s")).unwrap_or_default();
        println!("criterion {n:>2} {name}: {} | {} | {:.2} s{budget}", if pass { "PASS" } else { "FAIL" }, o.detail, elapsed.as_secs_f64());
    }
    println!("acceptance: {} of 10 criteria pass", 10 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
