use finslerkit::algebra::*;
use finslerkit::cartan::*;
use finslerkit::finsler::normalize_to_shell;
use finslerkit::frame::axis_frame;
use finslerkit::model::{Coeff, MetricField};
use finslerkit::observer::reeb_and_contact;
use finslerkit::oracle::riemann_oracle;
use finslerkit::{FundamentalModel, TangentPoint};
use nalgebra::{SVector, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn observer(model: &FundamentalModel, x: [f64; 4], y: [f64; 4]) -> TangentPoint {
    normalize_to_shell(model, &TangentPoint::from_arrays(x, y)).unwrap()
}

fn models() -> Vec<FundamentalModel> {
    vec![
        FundamentalModel::minkowski(),
        FundamentalModel::flrw(),
        FundamentalModel::bimetric_flat(),
        FundamentalModel::bimetric_curved(),
    ]
}

fn de_sitter_like() -> FundamentalModel {
    // a(t) = exp(0.2 t): constant Hubble rate, nonzero Gauss–Bonnet density
    let a = Coeff::Exp(Box::new(Coeff::Var(0).times(0.2)));
    FundamentalModel::metric(MetricField::diag_scale(a, Coeff::Const(1.0)))
}

#[test]
fn jacobi_identity_and_rotation_invariance() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    for grp in ModelGroup::all() {
        for _ in 0..200 {
            let (a, b, c) = (AlgebraElement::random(&mut rng), AlgebraElement::random(&mut rng), AlgebraElement::random(&mut rng));
            let br = |u: &AlgebraElement, v: &AlgebraElement| algebra_bracket(u, v, grp);
            let jac = br(&a, &br(&b, &c)).add(&br(&b, &br(&c, &a))).add(&br(&c, &br(&a, &b)));
            assert!(jac.amax() <= 1e-12, "{} {}", grp.name(), jac.amax());
            assert!(br(&a, &b).antisymmetry_defect() <= 1e-12);
            assert!(br(&a, &b).add(&br(&b, &a)).amax() <= 1e-12);

            let axis = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
            let r = rotation_matrix(&axis, rng.gen_range(-3.0..3.0));
            let lhs = adjoint_rotation(&r, &br(&a, &b));
            let rhs = br(&adjoint_rotation(&r, &a), &adjoint_rotation(&r, &b));
            assert!(lhs.sub(&rhs).amax() <= 1e-12);
        }
    }
}

#[test]
fn cartan_conditions_hold_on_all_models() {
    for m in models() {
        let p = observer(&m, [0.3, 0.1, -0.2, 0.1], [1.0, 0.2, 0.1, 0.05]);
        let fr = axis_frame(&m, &p).unwrap();
        for grp in ModelGroup::all() {
            let r = verify_cartan_conditions(&m, &fr, grp, 50).unwrap();
            assert!(r.all_pass(), "{r:?}");
        }
    }
}

#[test]
fn corrupted_connection_fails_the_round_trip() {
    let m = FundamentalModel::bimetric_curved();
    let p = observer(&m, [0.1, 0.0, 0.0, 0.2], [1.0, 0.1, 0.0, 0.0]);
    let fr = axis_frame(&m, &p).unwrap();
    let opts = CartanOptions { seed: 3, omega_scale: 1.01 };
    let r = verify_cartan_conditions_with(&m, &fr, ModelGroup::DE_SITTER, 20, &opts).unwrap();
    assert!(!r.c1_pass, "{r:?}");
}

#[test]
fn analytic_bracket_matches_finite_differences() {
    let m = FundamentalModel::bimetric_curved();
    let p = observer(&m, [0.2, -0.1, 0.1, 0.0], [1.0, 0.15, -0.05, 0.1]);
    let fr = axis_frame(&m, &p).unwrap();
    let cp = CartanPoint::new(&m, &fr).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(22);
    for _ in 0..5 {
        let a = AlgebraElement::random(&mut rng);
        let b = AlgebraElement::random(&mut rng);
        let field_at = |v: &AlgebraElement, dir: &Ambient, t: f64| {
            let x = fr.x + ambient_dx(dir) * t;
            let f = fr.f + ambient_df(dir) * t;
            CartanPoint::ambient(&m, x, f).unwrap().fundamental(v)
        };
        let deriv = |v: &AlgebraElement, dir: &Ambient| {
            let h = 1e-4;
            let c = |h: f64| (field_at(v, dir, h) - field_at(v, dir, -h)) / (2.0 * h);
            (c(h / 2.0) * 4.0 - c(h)) / 3.0
        };
        let xa = cp.fundamental(&a);
        let xb = cp.fundamental(&b);
        let fd = deriv(&b, &xa) - deriv(&a, &xb);
        let an = cp.field_bracket(&a, &b);
        assert!((fd - an).amax() <= 1e-7 * (1.0 + an.amax()), "{}", (fd - an).amax());
    }
}

#[test]
fn flat_spacetime_is_flat_for_poincare() {
    let m = FundamentalModel::minkowski();
    let p = observer(&m, [0.0; 4], [1.0, 0.3, 0.0, -0.2]);
    let cp = CartanPoint::new(&m, &axis_frame(&m, &p).unwrap()).unwrap();
    for i in 0..10 {
        for j in 0..10 {
            let (a, b) = (AlgebraElement::generator(i), AlgebraElement::generator(j));
            assert!(cp.curvature(&a, &b, ModelGroup::POINCARE).amax() <= 1e-12);
            // With Λ ≠ 0 only the translation bracket survives.
            let ds = cp.curvature(&a, &b, ModelGroup::DE_SITTER);
            let want = algebra_bracket(&a, &b, ModelGroup::DE_SITTER).sub(&algebra_bracket(&a, &b, ModelGroup::POINCARE));
            assert!(ds.sub(&want).amax() <= 1e-12);
        }
    }
}

#[test]
fn boost_curvature_equals_the_gravity_density() {
    let mut rng = ChaCha8Rng::seed_from_u64(23);
    for m in [FundamentalModel::flrw(), FundamentalModel::bimetric_curved()] {
        for _ in 0..10 {
            let x = std::array::from_fn(|_| rng.gen_range(-0.5..0.5));
            let y = [1.0, rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2), rng.gen_range(-0.2..0.2)];
            let p = observer(&m, x, y);
            let cp = CartanPoint::new(&m, &axis_frame(&m, &p).unwrap()).unwrap();
            let (c, f) = (cp.cartan_density(), cp.finsler_density());
            assert!((c - f).abs() <= 1e-9 * (1.0 + f.abs()), "{c} vs {f}");
        }
    }
}

#[test]
fn curvature_is_tensorial_under_rotations() {
    let m = FundamentalModel::bimetric_curved();
    let p = observer(&m, [0.1, 0.2, 0.0, -0.1], [1.0, 0.1, 0.1, 0.0]);
    let cp = CartanPoint::new(&m, &axis_frame(&m, &p).unwrap()).unwrap();
    let r = rotation_matrix(&Vector3::new(0.3, -0.5, 1.0), 0.7);
    let rot = cp.rotated(&r);
    let mut rng = ChaCha8Rng::seed_from_u64(24);
    for _ in 0..10 {
        let a = AlgebraElement::random(&mut rng);
        let b = AlgebraElement::random(&mut rng);
        // F_{fk}(a, b) = Ad(k⁻¹) F_f(Ad(k) a, Ad(k) b)
        let lhs = rot.curvature(&a, &b, ModelGroup::ANTI_DE_SITTER);
        let rhs = adjoint_rotation(
            &r.transpose(),
            &cp.curvature(&adjoint_rotation(&r, &a), &adjoint_rotation(&r, &b), ModelGroup::ANTI_DE_SITTER),
        );
        assert!(lhs.sub(&rhs).amax() <= 1e-10, "{}", lhs.sub(&rhs).amax());
    }
}

#[test]
fn mm_densities_match_metric_invariants() {
    for m in [FundamentalModel::flrw(), de_sitter_like()] {
        let g = m.metric_field().unwrap().clone();
        let p = observer(&m, [0.3, 0.1, 0.0, -0.2], [1.0, 0.1, 0.0, 0.0]);
        let o = riemann_oracle(|x| g.eval(x), &p.x).unwrap();
        let ginv = o.metric.try_inverse().unwrap();
        let low = o.lowered();
        let mut riem2 = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    for d in 0..4 {
                        let mut up = 0.0;
                        for e in 0..4 {
                            for f in 0..4 {
                                for h in 0..4 {
                                    for k in 0..4 {
                                        up += ginv[(a, e)] * ginv[(b, f)] * ginv[(c, h)] * ginv[(d, k)] * low[e][f][h][k];
                                    }
                                }
                            }
                        }
                        riem2 += low[a][b][c][d] * up;
                    }
                }
            }
        }
        let ric_up = ginv * o.ricci * ginv;
        let ric2 = ric_up.component_mul(&o.ricci).sum();
        let rs = o.ricci_scalar();
        let gb = rs * rs - 4.0 * ric2 + riem2;

        let fr = axis_frame(&m, &p).unwrap();
        for grp in ModelGroup::all() {
            let d = mm_density(&m, &fr, grp).unwrap();
            let s = grp.sign_lambda as f64;
            assert_eq!(d.cosmological, -s * s);
            assert!((d.curvature_term - s * rs / 6.0).abs() <= 1e-6, "{} vs {}", d.curvature_term, s * rs / 6.0);
            assert!((d.gauss_bonnet - gb / 24.0).abs() <= 1e-6, "{} vs {}", d.gauss_bonnet, gb / 24.0);
        }
    }
    // a sanity anchor for the test metric itself: GB = 24 H⁴
    let m = de_sitter_like();
    let fr = axis_frame(&m, &observer(&m, [0.0; 4], [1.0, 0.0, 0.0, 0.0])).unwrap();
    let d = mm_density(&m, &fr, ModelGroup::DE_SITTER).unwrap();
    assert!((d.gauss_bonnet - 0.2f64.powi(4)).abs() <= 1e-6, "{}", d.gauss_bonnet);
}

#[test]
fn translations_project_to_the_reeb_field_and_contact_form() {
    for m in models() {
        let p = observer(&m, [0.1, -0.2, 0.0, 0.3], [1.0, 0.05, 0.2, -0.1]);
        let fr = axis_frame(&m, &p).unwrap();
        let cp = CartanPoint::new(&m, &fr).unwrap();
        let rc = reeb_and_contact(&m, &p).unwrap();
        let v = cp.fundamental(&AlgebraElement::generator(9));
        let dx = ambient_dx(&v);
        let dy = ambient_df(&v).column(0).into_owned();
        for a in 0..4 {
            assert!((dx[a] - rc.r[a]).abs() <= 1e-9);
            assert!((dy[a] - rc.r[4 + a]).abs() <= 1e-9);
        }
        // e^0 restricted to x-directions is α
        let alpha: Vector4<f64> = Vector4::from_fn(|a, _| rc.alpha[a]);
        assert!((fr.finv.row(0).transpose() - alpha).amax() <= 1e-9);
    }
}

#[test]
fn observer_space_integrates_to_spacetime() {
    for m in [FundamentalModel::flrw(), FundamentalModel::bimetric_curved()] {
        let r = integrability_check(&m, &Vector4::new(0.1, 0.0, 0.2, -0.1), 6).unwrap();
        assert!(r.frobenius_residual <= 1e-7, "{r:?}");
        assert!(r.embedding_residual <= 1e-10, "{r:?}");
    }
}

#[test]
fn tilted_vertical_fields_are_detected() {
    let m = FundamentalModel::minkowski();
    let pert = |alpha: usize, q: &TangentPoint| {
        let mut v = SVector::<f64, 8>::zeros();
        v[1 + alpha] = 0.1 * q.y[1 + (alpha + 1) % 3];
        v
    };
    let r = integrability_check_with(&m, &Vector4::zeros(), 4, Some(&pert)).unwrap();
    assert!(r.frobenius_residual > 1e-3, "{r:?}");
}

#[test]
fn rejects_non_orthonormal_frames() {
    let m = FundamentalModel::minkowski();
    let p = observer(&m, [0.0; 4], [1.0, 0.0, 0.0, 0.0]);
    let mut fr = axis_frame(&m, &p).unwrap();
    fr.f *= 1.1;
    fr.finv = fr.f.try_inverse().unwrap();
    assert!(matches!(CartanPoint::new(&m, &fr), Err(finslerkit::Error::FrameNotOrthonormal(_))));
}
