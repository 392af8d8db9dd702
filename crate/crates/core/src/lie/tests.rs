use super::*;
use crate::lie::catalog::cotangent_double_from_structure;
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn all_backends() -> Vec<Backend> {
    [
        CatalogSpec::AbelianDouble { n: 1, theta: None },
        CatalogSpec::AbelianDouble { n: 2, theta: None },
        CatalogSpec::CotangentDouble { h: "su2".into(), mu: None },
        CatalogSpec::CotangentDouble { h: "sl2r".into(), mu: None },
        CatalogSpec::CotangentDouble { h: "aff1".into(), mu: None },
        CatalogSpec::Sl2cIwasawa {},
    ]
    .iter()
    .map(|s| catalog(s).unwrap())
    .collect()
}

fn random_vector(rng: &mut ChaCha8Rng, d: usize, radius: f64) -> AlgebraVector {
    let v = DVector::from_fn(d, |_, _| rng.gen_range(-1.0..1.0));
    let norm = v.norm();
    v * (radius * rng.gen_range(0.0..1.0) / norm)
}

#[test]
fn abelian_bracket_and_pairing() {
    let b = catalog(&CatalogSpec::AbelianDouble { n: 1, theta: None }).unwrap();
    let alg = &b.algebra;
    assert_eq!(alg.dim(), 2);
    assert_eq!(alg.metric(), &DMatrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]));
    let x = DVector::from_vec(vec![0.3, -1.5]);
    let y = DVector::from_vec(vec![2.0, 0.7]);
    assert_eq!(alg.bracket(&x, &y).unwrap().amax(), 0.0);
    // <(x, xi), (y, eta)> = xi(y) + eta(x)
    assert_eq!(alg.inner(&x, &y).unwrap(), -1.5 * 2.0 + 0.7 * 0.3);
    assert_eq!(alg.inner(&x, &y).unwrap() - alg.inner(&y, &x).unwrap(), 0.0);
    assert_eq!(alg.eta3(&x, &y, &x).unwrap(), 0.0);
}

#[test]
fn abelian_exp_is_translation() {
    let b = catalog(&CatalogSpec::AbelianDouble { n: 2, theta: None }).unwrap();
    let alg = &b.algebra;
    let x = DVector::from_vec(vec![0.1, 0.2, -0.3, 0.4]);
    let y = DVector::from_vec(vec![-0.5, 0.25, 0.125, 1.0]);
    let g = alg.exp(&x).unwrap().mul(&alg.exp(&y).unwrap());
    assert!((alg.log(&g).unwrap() - (&x + &y)).amax() < 1e-15);
    assert_eq!(alg.ad_group(&g, &x).unwrap(), x);
}

#[test]
fn bracket_is_antisymmetric() {
    for b in all_backends() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let d = b.algebra.dim();
        let x = random_vector(&mut rng, d, 1.0);
        assert!(b.algebra.bracket(&x, &x).unwrap().amax() < 1e-15);
    }
}

#[test]
fn sl2c_bracket_e_f_is_h() {
    let b = catalog(&CatalogSpec::Sl2cIwasawa {}).unwrap();
    let alg = &b.algebra;
    let (h, e, f) = (unit_vector(6, 0), unit_vector(6, 1), unit_vector(6, 2));
    assert!((alg.bracket(&e, &f).unwrap() - &h).amax() < 1e-14);
    // <[E,F], H> = <H, H>, and against iH the pairing is Im tr(H·iH) = 2
    assert!((alg.eta3(&e, &f, &h).unwrap() - alg.inner(&h, &h).unwrap()).abs() < 1e-14);
    let ih = unit_vector(6, 3);
    assert!((alg.eta3(&e, &f, &ih).unwrap() - 2.0 * SL2C_PAIRING_SCALE).abs() < 1e-14);
}

#[test]
fn eta3_is_fully_antisymmetric() {
    for b in all_backends() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let d = b.algebra.dim();
        let (x, y, z) = (random_vector(&mut rng, d, 1.0), random_vector(&mut rng, d, 1.0), random_vector(&mut rng, d, 1.0));
        let a = &b.algebra;
        let base = a.eta3(&x, &y, &z).unwrap();
        for other in [a.eta3(&y, &x, &z).unwrap(), a.eta3(&x, &z, &y).unwrap(), a.eta3(&z, &y, &x).unwrap()] {
            assert!((base + other).abs() < 1e-12);
        }
        assert!(a.eta3(&x, &x, &z).unwrap().abs() < 1e-15);
    }
}

#[test]
fn dimension_mismatch_is_reported() {
    let b = catalog(&CatalogSpec::Sl2cIwasawa {}).unwrap();
    let x = DVector::zeros(6);
    let y = DVector::zeros(4);
    assert!(matches!(b.algebra.bracket(&x, &y), Err(Error::DimensionMismatch { .. })));
    assert!(matches!(b.algebra.inner(&x, &y), Err(Error::DimensionMismatch { .. })));
}

#[test]
fn catalog_certificates() {
    for b in all_backends() {
        let a = &b.algebra;
        assert!(a.jacobi_residual() <= 1e-10, "{}", a.name());
        assert!(a.invariance_residual() <= 1e-10, "{}", a.name());
        let r = b.get("r").unwrap();
        let bb = b.get("b").unwrap();
        assert!(is_lagrangian(a, r).pass);
        assert!(is_lagrangian(a, bb).pass);
        assert!(are_transverse(a, r, bb).pass);
        assert!(!are_transverse(a, r, r).pass);
        if let Some(v) = b.get("v") {
            let rep = is_lagrangian(a, v);
            assert!(rep.pass, "{} v: {:?}", a.name(), rep);
            assert!(are_transverse(a, v, bb).pass, "{}", a.name());
        }
    }
}

#[test]
fn sl2c_v_is_transverse_to_b_only() {
    let b = catalog(&CatalogSpec::Sl2cIwasawa {}).unwrap();
    let v = b.get("v").unwrap();
    let rep_r = are_transverse(&b.algebra, v, b.get("r").unwrap());
    let rep_b = are_transverse(&b.algebra, v, b.get("b").unwrap());
    assert!(!rep_r.pass);
    assert!(rep_b.pass && rep_b.min_singular_value > 1e-2);
}

#[test]
fn aff1_v_is_transverse_to_both() {
    let b = catalog(&CatalogSpec::CotangentDouble { h: "aff1".into(), mu: None }).unwrap();
    let v = b.get("v").unwrap();
    assert!(are_transverse(&b.algebra, v, b.get("r").unwrap()).pass);
    assert!(are_transverse(&b.algebra, v, b.get("b").unwrap()).pass);
}

#[test]
fn theta_graph_is_lagrangian_and_transverse() {
    let theta = vec![vec![0.0, 0.5], vec![-0.5, 0.0]];
    let b = catalog(&CatalogSpec::AbelianDouble { n: 2, theta: Some(theta) }).unwrap();
    let v = b.get("v").unwrap();
    assert!(is_lagrangian(&b.algebra, v).pass);
    assert!(are_transverse(&b.algebra, v, b.get("r").unwrap()).pass);
    assert!(are_transverse(&b.algebra, v, b.get("b").unwrap()).pass);
}

#[test]
fn abelian_double_one_has_no_transverse_v() {
    let b = catalog(&CatalogSpec::AbelianDouble { n: 1, theta: None }).unwrap();
    assert!(b.get("v").is_none());
    // an explicit (necessarily zero) theta gives v = b
    let b = catalog(&CatalogSpec::AbelianDouble { n: 1, theta: Some(vec![vec![0.0]]) }).unwrap();
    assert!(!are_transverse(&b.algebra, b.get("v").unwrap(), b.get("b").unwrap()).pass);
}

#[test]
fn cotangent_su2_shape() {
    let b = catalog(&CatalogSpec::CotangentDouble { h: "su(2)".into(), mu: None }).unwrap();
    assert_eq!(b.algebra.dim(), 6);
    let bb = b.get("b").unwrap();
    for i in 0..3 {
        for j in 0..3 {
            let c = b.algebra.bracket(&bb.span().row(i).transpose(), &bb.span().row(j).transpose()).unwrap();
            assert_eq!(c.amax(), 0.0);
        }
    }
    // v meets r in the stabilizer of mu, so the pair is not transverse
    assert!(!are_transverse(&b.algebra, b.get("v").unwrap(), b.get("r").unwrap()).pass);
}

#[test]
fn non_lie_input_is_rejected() {
    // antisymmetric but violates Jacobi
    let mut c = vec![0.0; 27];
    c[(0 * 3 + 1) * 3 + 0] = 1.0;
    c[(1 * 3 + 0) * 3 + 0] = -1.0;
    c[(1 * 3 + 2) * 3 + 1] = 1.0;
    c[(2 * 3 + 1) * 3 + 1] = -1.0;
    c[(0 * 3 + 2) * 3 + 2] = 5.0;
    c[(2 * 3 + 0) * 3 + 2] = -5.0;
    c[(0 * 3 + 2) * 3 + 1] = 1.0;
    c[(2 * 3 + 0) * 3 + 1] = -1.0;
    assert!(matches!(cotangent_double_from_structure("bad", 3, &c, None), Err(Error::NotLie(_))));
    assert!(matches!(CatalogSpec::parse("e8_double"), Err(Error::UnknownCatalog(_))));
    assert!(matches!(catalog(&CatalogSpec::CotangentDouble { h: "g2".into(), mu: None }), Err(Error::UnknownCatalog(_))));
}

#[test]
fn catalog_spec_parsing() {
    assert_eq!(CatalogSpec::parse("abelian_double(2)").unwrap(), CatalogSpec::AbelianDouble { n: 2, theta: None });
    assert_eq!(CatalogSpec::parse("cotangent_double(su2)").unwrap(), CatalogSpec::CotangentDouble { h: "su2".into(), mu: None });
    assert_eq!(CatalogSpec::parse("sl2c_iwasawa").unwrap(), CatalogSpec::Sl2cIwasawa {});
    let json = r#"{"name":"abelian_double","n":2,"theta":[[0,0.5],[-0.5,0]]}"#;
    let spec: CatalogSpec = serde_json::from_str(json).unwrap();
    assert!(matches!(spec, CatalogSpec::AbelianDouble { n: 2, theta: Some(_) }));
    assert!(serde_json::from_str::<CatalogSpec>(r#"{"name":"sl2c_iwasawa","extra":1}"#).is_err());
}

#[test]
fn exp_log_roundtrip() {
    for b in all_backends() {
        let a = &b.algebra;
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let x = random_vector(&mut rng, a.dim(), 1.0);
            let g = a.exp(&x).unwrap();
            let back = a.log(&g).unwrap();
            assert!((back - &x).amax() <= 1e-11, "{}", a.name());
            let inv = a.exp(&(-&x)).unwrap();
            assert!(g.mul(&inv).distance_to_identity() < 1e-13);
        }
        assert_eq!(a.exp(&DVector::zeros(a.dim())).unwrap(), a.identity());
    }
}

#[test]
fn log_branch_error() {
    let b = catalog(&CatalogSpec::Sl2cIwasawa {}).unwrap();
    // exp(i*pi*H) = -1
    let mut x = DVector::zeros(6);
    x[3] = std::f64::consts::PI;
    let g = b.algebra.exp(&x).unwrap();
    assert!(matches!(b.algebra.log(&g), Err(Error::Branch(_))));
}

#[test]
fn adjoint_preserves_metric() {
    for b in all_backends() {
        let a = &b.algebra;
        let mut rng = ChaCha8Rng::seed_from_u64(19);
        for _ in 0..100 {
            let g = a.exp(&random_vector(&mut rng, a.dim(), 1.0)).unwrap();
            let x = random_vector(&mut rng, a.dim(), 1.0);
            let y = random_vector(&mut rng, a.dim(), 1.0);
            let gx = a.ad_group(&g, &x).unwrap();
            let gy = a.ad_group(&g, &y).unwrap();
            assert!((a.inner(&gx, &gy).unwrap() - a.inner(&x, &y).unwrap()).abs() <= 1e-9);
            let m = a.adjoint(&g);
            assert!((&m * &x - &gx).amax() < 1e-12);
        }
        let x = random_vector(&mut rng, a.dim(), 1.0);
        assert!((a.ad_group(&a.identity(), &x).unwrap() - &x).amax() < 1e-15);
    }
}

#[test]
fn adjoint_first_order_expansion() {
    // Ad(exp z) x = x + [z, x] + O(|z|^2)
    for b in all_backends() {
        let a = &b.algebra;
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let mut z = random_vector(&mut rng, a.dim(), 1.0);
        z *= 1e-4 / z.norm();
        let x = random_vector(&mut rng, a.dim(), 1.0);
        let lhs = a.ad_group(&a.exp(&z).unwrap(), &x).unwrap();
        let rhs = &x + a.bracket(&z, &x).unwrap();
        assert!((lhs - rhs).amax() < 1e-7);
    }
}

#[test]
fn coords_reject_matrices_outside_the_algebra() {
    let b = catalog(&CatalogSpec::Sl2cIwasawa {}).unwrap();
    let m = DMatrix::identity(4, 4);
    assert!(matches!(b.algebra.coords(&m), Err(Error::NotInAlgebra(_))));
}
