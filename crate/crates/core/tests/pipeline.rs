use holoform::exact::{q, qf, QMatrix};
use holoform::lie::{catalog, CatalogSpec};
use holoform::linalg;
use holoform::moduli::ModuliSpace;
use holoform::surface::{moduli_dimension, ColoredPolygon, Labels};
use holoform::symplectic::*;
use holoform::torus_morita::*;
use proptest::prelude::*;

fn square(spec: &str) -> ModuliSpace {
    let be = catalog(&CatalogSpec::parse(spec).unwrap()).unwrap();
    ModuliSpace::new(&be, &ColoredPolygon::builtin("square", &Labels::default()).unwrap()).unwrap()
}

#[test]
fn square_has_the_formula_dimension() {
    for spec in ["abelian_double(2)", "cotangent_double(su(2))", "sl2c_iwasawa"] {
        let sp = square(spec);
        let pt = sp.random_point(1, 0.2).unwrap();
        assert_eq!(linalg::rank(&sp.tangent_matrix(&pt).unwrap(), linalg::RANK_RTOL), moduli_dimension(sp.polygon(), sp.backend()).unwrap());
    }
}

#[test]
fn lw_inverse_is_an_involution() {
    let sq = square("sl2c_iwasawa");
    let p = sq.random_point(3, 0.2).unwrap();
    let back = lw_inverse(&lw_inverse(&p));
    assert!(p.distance(&back) < 1e-12);
}

#[test]
fn negated_theta_flips_both_brackets() {
    let theta = SkewTheta::exact(QMatrix::from_rows(&[vec![q(0), qf(2, 5)], vec![qf(-2, 5), q(0)]])).unwrap();
    for name in ["gamma00", "gamma11"] {
        assert!(theta_negation_holds(&theta, &ColoredPolygon::builtin(name, &Labels::default()).unwrap()).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn omega_agrees_with_the_square_oracle(seed in 0u64..10_000, scale in 0.01f64..0.3) {
        let sp = square("cotangent_double(su(2))");
        let pt = sp.random_point(seed, scale).unwrap();
        let t = sp.tangent_matrix(&pt).unwrap();
        let d = omega_matrix(&sp, &pt, &t).unwrap() - closed_form(ClosedFormKind::SquareRb, &sp, &pt, &t).unwrap();
        prop_assert!(linalg::max_abs(&d) <= 1e-9);
    }

    #[test]
    fn rational_theta_center_is_the_graph_lattice(a in 1i64..6, b in 2i64..7) {
        prop_assume!(a < b);
        let theta = SkewTheta::exact(QMatrix::from_rows(&[vec![q(0), qf(a, b)], vec![qf(-a, b), q(0)]])).unwrap();
        let lattice = graph_lattice_intersection(&theta).unwrap();
        let mut expected = lattice_points_in_box(&lattice, 2, 6).unwrap();
        expected.remove(&vec![0, 0]);
        let brute: std::collections::BTreeSet<Vec<i64>> = brute_force_center(&theta.to_f64(), 6).unwrap().into_iter().collect();
        prop_assert_eq!(brute, expected);
    }
}
