//! Property tests for the structural invariants of the geometry tower.

use finslerkit::connection::{linear_connection, nonlinear_connection};
use finslerkit::curvature::gravity_action_density;
use finslerkit::evaluate_jet;
use finslerkit::fd::{finite_difference_jet, FdOptions};
use finslerkit::finsler::{classify_ray, finsler_function, finsler_metric_gf};
use finslerkit::geodesic::geodesic_vector_field;
use finslerkit::{FundamentalModel, TangentPoint};
use nalgebra::{Matrix4, Vector4};
use proptest::prelude::*;

fn model(k: usize) -> FundamentalModel {
    match k {
        0 => FundamentalModel::minkowski(),
        1 => FundamentalModel::flrw(),
        2 => FundamentalModel::bimetric_flat(),
        _ => FundamentalModel::bimetric_curved(),
    }
}

fn coords() -> impl Strategy<Value = [f64; 4]> {
    prop::array::uniform4(-1.0f64..1.0)
}

fn point() -> impl Strategy<Value = TangentPoint> {
    (coords(), coords()).prop_map(|(x, y)| TangentPoint::from_arrays(x, y))
}

/// Keeps points a safe distance from the null and degeneracy sets.
fn regular(m: &FundamentalModel, p: &TangentPoint) -> bool {
    let Ok(ray) = classify_ray(m, p) else { return false };
    let scale = p.y.norm().powf(m.n());
    let gscale = p.y.norm().powf(m.n() - 2.0);
    ray.l.abs() > 1e-3 * scale && ray.det.abs() > 1e-6 * gscale.powi(4) && p.y.norm() > 0.1
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn l_is_homogeneous_and_reversible(k in 0usize..4, p in point(), lambda in 0.1f64..10.0) {
        let m = model(k);
        let l = m.value(&p).unwrap();
        let ln = lambda.powf(m.n()) * l;
        prop_assert!((m.value(&p.scaled(lambda)).unwrap() - ln).abs() <= 1e-10 * ln.abs().max(1e-300));
        prop_assert!((m.value(&p.scaled(-1.0)).unwrap().abs() - l.abs()).abs() <= 1e-12 * l.abs().max(1e-300));
    }

    #[test]
    fn euler_identities_hold_at_every_order(k in 0usize..4, p in point()) {
        let m = model(k);
        let n = m.n();
        let jv = evaluate_jet(&m, &p, 0, 4).unwrap();
        // every multi-index of length ≤ 3 in y, one representative per sort order
        let mut idx: Vec<Vec<usize>> = vec![vec![]];
        for len in 1..=3 {
            let mut next = Vec::new();
            for base in idx.iter().filter(|v| v.len() == len - 1) {
                let start = base.last().copied().unwrap_or(0);
                for a in start..4 {
                    let mut v = base.clone();
                    v.push(a);
                    next.push(v);
                }
            }
            idx.extend(next);
        }
        for beta in &idx {
            let d = jv.partial(&[], beta).unwrap();
            let euler: f64 = (0..4)
                .map(|a| {
                    let mut b = beta.clone();
                    b.push(a);
                    p.y[a] * jv.partial(&[], &b).unwrap()
                })
                .sum();
            let want = (n - beta.len() as f64) * d;
            let scale = p.y.norm().powf(n - beta.len() as f64) * 10.0;
            prop_assert!((euler - want).abs() <= 1e-9 * scale.max(want.abs()), "{beta:?}: {euler} vs {want}");
        }
    }

    #[test]
    fn jet_partials_ignore_index_order(k in 0usize..4, p in point()) {
        let m = model(k);
        let jv = evaluate_jet(&m, &p, 1, 3).unwrap();
        let a = jv.partial(&[2], &[0, 1, 3]).unwrap();
        let b = jv.partial(&[2], &[3, 0, 1]).unwrap();
        let c = jv.partial(&[2], &[1, 3, 0]).unwrap();
        prop_assert_eq!(a.to_bits(), b.to_bits());
        prop_assert_eq!(a.to_bits(), c.to_bits());
    }

    #[test]
    fn finsler_metric_is_degree_zero(k in 0usize..4, p in point(), lambda in 0.1f64..10.0) {
        let m = model(k);
        prop_assume!(regular(&m, &p));
        let g0 = finsler_metric_gf(&m, &p).unwrap().components;
        let g1 = finsler_metric_gf(&m, &p.scaled(lambda)).unwrap().components;
        prop_assert!((g1 - g0).norm() <= 1e-9 * g0.norm());
        // |g^F(y, y)| = F²
        let f = finsler_function(&m, &p).unwrap();
        let gyy = (p.y.transpose() * g0 * p.y)[(0, 0)];
        prop_assert!((gyy.abs() - f * f).abs() <= 1e-9 * f * f);
    }

    #[test]
    fn metric_models_have_signed_metric(p in point()) {
        let m = FundamentalModel::flrw();
        prop_assume!(regular(&m, &p));
        let g = m.metric_field().unwrap().eval(&p.x);
        let gf = finsler_metric_gf(&m, &p).unwrap().components;
        let timelike = m.value(&p).unwrap() < 0.0;
        let want = if timelike { -g } else { g };
        prop_assert!((gf - want).amax() <= 1e-10 * g.amax());
    }

    #[test]
    fn ray_classification_is_scale_covariant(k in 0usize..4, p in point(), lambda in 0.1f64..10.0) {
        let m = model(k);
        prop_assume!(regular(&m, &p));
        let a = classify_ray(&m, &p).unwrap();
        let b = classify_ray(&m, &p.scaled(lambda)).unwrap();
        prop_assert_eq!(a.sign_l, b.sign_l);
        prop_assert_eq!(a.degenerate, b.degenerate);
        prop_assert_eq!(a.signature, b.signature);
    }

    #[test]
    fn connection_coefficients_scale_correctly(k in 0usize..4, p in point(), lambda in 0.1f64..10.0) {
        let m = model(k);
        prop_assume!(regular(&m, &p));
        let q = p.scaled(lambda);
        let n0 = nonlinear_connection(&m, &p).unwrap();
        let n1 = nonlinear_connection(&m, &q).unwrap();
        let tol = 1e-9 * (n0.amax() * lambda).max(1e-12);
        prop_assert!((n1 - n0 * lambda).amax() <= tol);

        let l0 = linear_connection(&m, &p).unwrap();
        let l1 = linear_connection(&m, &q).unwrap();
        let fmax = l0.f.iter().flatten().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
        let cmax = l0.c.iter().flatten().flatten().fold(0.0f64, |a, v| a.max(v.abs())).max(1e-12);
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    prop_assert!((l1.f[a][b][c] - l0.f[a][b][c]).abs() <= 1e-9 * fmax);
                    // C has degree −1
                    prop_assert!((l1.c[a][b][c] * lambda - l0.c[a][b][c]).abs() <= 1e-9 * cmax);
                }
            }
        }
        // C(y, ·) = 0 and F(·, y) = N
        for a in 0..4 {
            for b in 0..4 {
                let cy: f64 = (0..4).map(|c| l0.c[a][b][c] * p.y[c]).sum();
                prop_assert!(cy.abs() <= 1e-9 * cmax * p.y.norm());
                let fy: f64 = (0..4).map(|c| l0.f[a][b][c] * p.y[c]).sum();
                prop_assert!((fy - n0[(a, b)]).abs() <= 1e-9 * n0.amax().max(1e-12));
            }
        }
    }

    #[test]
    fn density_has_degree_two(k in 0usize..4, p in point(), lambda in 0.1f64..10.0) {
        let m = model(k);
        prop_assume!(regular(&m, &p));
        let d0 = gravity_action_density(&m, &p).unwrap();
        let d1 = gravity_action_density(&m, &p.scaled(lambda)).unwrap();
        let scale = (lambda * lambda * d0.abs()).max(1e-9 * lambda * lambda * p.y.norm_squared());
        prop_assert!((d1 - lambda * lambda * d0).abs() <= 1e-9 * scale);
    }

    #[test]
    fn spray_field_is_y_and_minus_n_y(k in 0usize..4, p in point()) {
        let m = model(k);
        prop_assume!(regular(&m, &p));
        let (dx, dy) = geodesic_vector_field(&m, &p).unwrap();
        prop_assert_eq!(dx, p.y);
        let n = nonlinear_connection(&m, &p).unwrap();
        prop_assert!((dy + n * p.y).amax() <= 1e-12 * (n * p.y).amax().max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn jets_agree_with_finite_differences(k in 0usize..4, p in point()) {
        let m = model(k);
        prop_assume!(regular(&m, &p));
        let jv = evaluate_jet(&m, &p, 1, 1).unwrap();
        let fd = finite_difference_jet(&m, &p, 1, 1, &FdOptions::default()).unwrap();
        for (key, exact) in jv.partials() {
            let e = fd.get(key.0, key.1).unwrap();
            prop_assert!((e.value - exact).abs() <= 1e-6 * exact.abs().max(1.0), "{key:?}: {} vs {exact}", e.value);
        }
    }
}

#[test]
fn minkowski_metric_is_exact() {
    let m = FundamentalModel::minkowski();
    let p = TangentPoint::new(Vector4::zeros(), Vector4::new(2.0, 0.5, 0.0, 0.0));
    let gf = finsler_metric_gf(&m, &p).unwrap().components;
    assert_eq!(gf, -Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, 1.0)));
}
