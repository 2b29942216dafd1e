//! Observer frames: bases `f_i` of `T_xM` with `f_0` on the unit shell and
//! `g^F(x, f_0)_ab f_i^a f_j^b = −η_ij`.

use nalgebra::{Matrix3, Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::finsler::{classify_ray, finsler_metric_gf, SHELL_TOL};
use crate::model::{FundamentalModel, TangentPoint};

/// Orthonormality tolerance used when a frame is handed in from outside.
pub const FRAME_TOL: f64 = 1e-8;

/// `η = diag(−1, 1, 1, 1)`.
pub fn eta() -> Matrix4<f64> {
    Matrix4::from_diagonal(&Vector4::new(-1.0, 1.0, 1.0, 1.0))
}

/// A frame at `x`. Column `i` of `f` holds the components `f_i^a`; `finv`
/// holds `f^{-1 i}_a` with row `i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrameAtPoint {
    pub x: Vector4<f64>,
    pub f: Matrix4<f64>,
    pub finv: Matrix4<f64>,
}

impl FrameAtPoint {
    /// Wraps a frame matrix after checking invertibility and orthonormality
    /// against `g^F(x, f_0)`.
    pub fn new(model: &FundamentalModel, x: Vector4<f64>, f: Matrix4<f64>) -> Result<Self> {
        let finv = f.try_inverse().ok_or(Error::FrameNotOrthonormal(f64::INFINITY))?;
        let fr = Self { x, f, finv };
        let res = fr.orthonormality_residual(model)?;
        if res > FRAME_TOL {
            return Err(Error::FrameNotOrthonormal(res));
        }
        Ok(fr)
    }

    pub fn y(&self) -> Vector4<f64> {
        self.f.column(0).into_owned()
    }

    pub fn point(&self) -> TangentPoint {
        TangentPoint::new(self.x, self.y())
    }

    /// `max |fᵀ g^F(x, f_0) f + η|`.
    pub fn orthonormality_residual(&self, model: &FundamentalModel) -> Result<f64> {
        let g = finsler_metric_gf(model, &self.point())?.components;
        Ok((self.f.transpose() * g * self.f + eta()).amax())
    }

    /// The frame `f·k` for a spatial rotation `k = diag(1, R)`.
    pub fn rotated(&self, r: &Matrix3<f64>) -> Self {
        let k = rotation4(r);
        let kinv = rotation4(&r.transpose());
        Self { x: self.x, f: self.f * k, finv: kinv * self.finv }
    }
}

/// `diag(1, R)`.
pub fn rotation4(r: &Matrix3<f64>) -> Matrix4<f64> {
    let mut k = Matrix4::identity();
    k.fixed_view_mut::<3, 3>(1, 1).copy_from(r);
    k
}

/// Checks that `p` lies on the unit shell of a ray satisfying the signature
/// condition.
pub fn require_observer_point(model: &FundamentalModel, p: &TangentPoint) -> Result<()> {
    let ray = classify_ray(model, p)?;
    if !ray.is_observer_ray() || (ray.l.abs() - 1.0).abs() > SHELL_TOL {
        return Err(Error::NotObserverPoint);
    }
    Ok(())
}

/// Gram–Schmidt of `y` and three seeds with respect to `g^F(x, y)`, aiming at
/// `−η`. Deterministic in the seeds.
pub fn build_orthonormal_frame(
    model: &FundamentalModel,
    p: &TangentPoint,
    seeds: &[Vector4<f64>; 3],
) -> Result<FrameAtPoint> {
    require_observer_point(model, p)?;
    let g = finsler_metric_gf(model, p)?.components;
    let ip = |u: &Vector4<f64>, v: &Vector4<f64>| (u.transpose() * g * v)[(0, 0)];
    let mut cols: Vec<Vector4<f64>> = vec![p.y / ip(&p.y, &p.y).sqrt()];
    for s in seeds {
        let scale = s.norm();
        let mut v = *s;
        // Two passes keep the residual at rounding level.
        for _ in 0..2 {
            for c in &cols {
                v -= c * (ip(&v, c) / ip(c, c));
            }
        }
        let q = ip(&v, &v);
        if !(q < -1e-12 * scale * scale * g.amax()) {
            return Err(Error::SeedDegenerate);
        }
        cols.push(v / (-q).sqrt());
    }
    let f = Matrix4::from_columns(&cols);
    let finv = f.try_inverse().ok_or(Error::SeedDegenerate)?;
    Ok(FrameAtPoint { x: p.x, f, finv })
}

/// The frame built from the coordinate axes `e_1, e_2, e_3`.
pub fn axis_frame(model: &FundamentalModel, p: &TangentPoint) -> Result<FrameAtPoint> {
    let e = |i: usize| Vector4::from_fn(|a, _| if a == i { 1.0 } else { 0.0 });
    build_orthonormal_frame(model, p, &[e(1), e(2), e(3)])
}
