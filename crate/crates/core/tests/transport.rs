use finslerkit::frame::{axis_frame, build_orthonormal_frame, eta, FrameAtPoint};
use finslerkit::transport::{generalized_lorentz, transport_along, vertical_autoparallel};
use finslerkit::{Error, FundamentalModel, TangentPoint};
use finslerkit::finsler::{finsler_metric_gf, normalize_to_shell};
use nalgebra::{Matrix4, Vector4};

fn boost_matrix(rapidity: f64) -> Matrix4<f64> {
    let (c, s) = (rapidity.cosh(), rapidity.sinh());
    let mut b = Matrix4::identity();
    b[(0, 0)] = c;
    b[(1, 1)] = c;
    b[(0, 1)] = s;
    b[(1, 0)] = s;
    b
}

fn observer(model: &FundamentalModel, x: [f64; 4], y: [f64; 4]) -> TangentPoint {
    normalize_to_shell(model, &TangentPoint::from_arrays(x, y)).unwrap()
}

#[test]
fn same_frame_gives_identity() {
    let m = FundamentalModel::bimetric_curved();
    let p = observer(&m, [0.1, 0.2, -0.1, 0.0], [1.0, 0.1, 0.05, 0.0]);
    let f = axis_frame(&m, &p).unwrap();
    let t = generalized_lorentz(&m, &f, &f).unwrap();
    assert_eq!(t.iterations, 0);
    assert!((t.lambda - Matrix4::identity()).amax() <= 1e-10);
}

#[test]
fn minkowski_reproduces_boost() {
    let m = FundamentalModel::minkowski();
    let x = Vector4::zeros();
    let f = FrameAtPoint::new(&m, x, Matrix4::identity()).unwrap();
    let b = boost_matrix(0.4);
    let fp = FrameAtPoint::new(&m, x, b).unwrap();
    let t = generalized_lorentz(&m, &f, &fp).unwrap();
    assert!((t.lambda - b).amax() <= 1e-8, "{}", t.lambda);
}

#[test]
fn bimetric_transport_preserves_orthonormality() {
    let m = FundamentalModel::bimetric_curved();
    let p = observer(&m, [0.2, -0.1, 0.3, 0.1], [1.0, 0.05, 0.0, 0.02]);
    let q = observer(&m, [0.2, -0.1, 0.3, 0.1], [1.0, 0.15, -0.04, 0.05]);
    let f = axis_frame(&m, &p).unwrap();
    let seeds = [Vector4::new(0.1, 1.0, 0.2, 0.0), Vector4::new(0.0, 0.0, 1.0, 0.3), Vector4::new(0.0, 0.1, 0.0, 1.0)];
    let fp = build_orthonormal_frame(&m, &q, &seeds).unwrap();
    let t = generalized_lorentz(&m, &f, &fp).unwrap();
    assert!(t.orthonormality_residual <= 1e-7, "{}", t.orthonormality_residual);
    assert!(t.lorentz_residual <= 1e-7, "{}", t.lorentz_residual);
    assert!(t.iterations > 0);
}

#[test]
fn reversed_endpoints_trace_the_same_path() {
    let m = FundamentalModel::bimetric_curved();
    let x = Vector4::new(0.1, 0.0, 0.2, 0.0);
    let y0 = Vector4::new(1.0, 0.1, 0.0, 0.0);
    let y1 = Vector4::new(1.05, 0.25, 0.05, -0.02);
    let fwd = vertical_autoparallel(&m, &x, &y0, &y1).unwrap();
    let bwd = vertical_autoparallel(&m, &x, &y1, &y0).unwrap();
    for s in [0.25, 0.5, 0.75] {
        let a = fwd.at(&m, s).unwrap();
        let b = bwd.at(&m, 1.0 - s).unwrap();
        assert!((a - b).amax() <= 1e-8, "s = {s}: {}", (a - b).amax());
    }
}

#[test]
fn transported_inner_products_are_constant() {
    let m = FundamentalModel::bimetric_flat();
    let x = Vector4::zeros();
    let y0 = Vector4::new(1.0, 0.1, 0.0, 0.0);
    let y1 = Vector4::new(1.0, -0.1, 0.1, 0.05);
    let curve = vertical_autoparallel(&m, &x, &y0, &y1).unwrap();
    let w0 = Matrix4::new(1.0, 0.2, 0.0, 0.3, 0.1, 1.0, 0.0, 0.0, 0.0, 0.4, 1.0, 0.0, 0.2, 0.0, 0.1, 1.0);
    let w1 = transport_along(&m, &curve, &w0).unwrap();
    let g0 = finsler_metric_gf(&m, &TangentPoint::new(x, y0)).unwrap().components;
    let g1 = finsler_metric_gf(&m, &TangentPoint::new(x, y1)).unwrap().components;
    let d = w0.transpose() * g0 * w0 - w1.transpose() * g1 * w1;
    assert!(d.amax() <= 1e-7, "{}", d.amax());
    let _ = eta();
}

#[test]
fn crossing_the_null_structure_is_reported() {
    let m = FundamentalModel::minkowski();
    let x = Vector4::zeros();
    // The straight segment passes through the light cone.
    let r = vertical_autoparallel(&m, &x, &Vector4::new(1.0, 0.0, 0.0, 0.0), &Vector4::new(1.0, 2.0, 0.0, 0.0));
    assert!(matches!(r, Err(Error::NullCrossing(_))), "{r:?}");
}
