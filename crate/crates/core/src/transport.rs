//! Vertical autoparallels in a single fiber, parallel transport of frames
//! along them, and generalized Lorentz transforms between observers.

use nalgebra::{Matrix4, SVector, Vector4};

use crate::error::{Error, Result};
use crate::frame::{eta, FrameAtPoint};
use crate::geometry::{ConnectionJets, Tensor3};
use crate::model::{FundamentalModel, TangentPoint};
use crate::ode::{dopri5, OdeOptions};

pub const MAX_NEWTON: usize = 50;
/// Local error tolerance of the fiber integrations.
pub const FIBER_ODE_TOL: f64 = 1e-12;
/// Shooting converges once `‖y(1) − y1‖ ≤ SHOOTING_TOL·‖y1‖`.
pub const SHOOTING_TOL: f64 = 1e-9;

/// A solution of `ÿ + C(x, y)(ẏ, ẏ) = 0` in the fiber over `x`.
#[derive(Debug, Clone, PartialEq)]
pub struct FiberCurve {
    pub x: Vector4<f64>,
    pub y0: Vector4<f64>,
    pub velocity0: Vector4<f64>,
    /// `(s, y(s))` at every accepted step on `s ∈ [0, 1]`.
    pub samples: Vec<(f64, Vector4<f64>)>,
    pub iterations: usize,
    pub residual: f64,
}

impl FiberCurve {
    /// Re-integrates from `s = 0` to `s` and returns `y(s)`.
    pub fn at(&self, model: &FundamentalModel, s: f64) -> Result<Vector4<f64>> {
        let (y, _) = fiber_flow(model, &self.x, &self.y0, &self.velocity0, s, |_, _| Ok(()))?;
        Ok(y)
    }
}

fn c_tensor(model: &FundamentalModel, x: &Vector4<f64>, y: &Vector4<f64>, s: f64) -> Result<Tensor3> {
    match ConnectionJets::new(model, &TangentPoint::new(*x, *y), 3) {
        Ok(cj) => Ok(cj.value().c),
        Err(Error::NullVectorError(_)) | Err(Error::DegenerateHessian) => Err(Error::NullCrossing(s)),
        Err(e) => Err(e),
    }
}

fn contract(c: &Tensor3, u: &Vector4<f64>, w: &Vector4<f64>) -> Vector4<f64> {
    Vector4::from_fn(|a, _| {
        let mut acc = 0.0;
        for b in 0..4 {
            for d in 0..4 {
                acc += c[a][b][d] * u[b] * w[d];
            }
        }
        acc
    })
}

fn fiber_opts() -> OdeOptions {
    OdeOptions::with_tol(FIBER_ODE_TOL)
}

fn fiber_flow(
    model: &FundamentalModel,
    x: &Vector4<f64>,
    y0: &Vector4<f64>,
    v0: &Vector4<f64>,
    s1: f64,
    mut on_accept: impl FnMut(f64, &Vector4<f64>) -> Result<()>,
) -> Result<(Vector4<f64>, Vector4<f64>)> {
    let u0 = SVector::<f64, 8>::from_fn(|i, _| if i < 4 { y0[i] } else { v0[i - 4] });
    let rhs = |s: f64, u: &SVector<f64, 8>| -> Result<SVector<f64, 8>> {
        let y = u.fixed_rows::<4>(0).into_owned();
        let v = u.fixed_rows::<4>(4).into_owned();
        let acc = -contract(&c_tensor(model, x, &y, s)?, &v, &v);
        Ok(SVector::<f64, 8>::from_fn(|i, _| if i < 4 { v[i] } else { acc[i - 4] }))
    };
    let sign0 = model.value(&TangentPoint::new(*x, *y0))?.signum();
    let (u, _) = dopri5(rhs, 0.0, s1, u0, &fiber_opts(), |s, u| {
        let y = u.fixed_rows::<4>(0).into_owned();
        // A step may jump over the null structure without landing on it.
        if model.value(&TangentPoint::new(*x, y))?.signum() != sign0 {
            return Err(Error::NullCrossing(s));
        }
        on_accept(s, &y)
    })?;
    Ok((u.fixed_rows::<4>(0).into_owned(), u.fixed_rows::<4>(4).into_owned()))
}

/// Shoots for the initial velocity of the vertical autoparallel from `y0` to
/// `y1` (Newton with a central-difference Jacobian and step halving).
pub fn vertical_autoparallel(
    model: &FundamentalModel,
    x: &Vector4<f64>,
    y0: &Vector4<f64>,
    y1: &Vector4<f64>,
) -> Result<FiberCurve> {
    c_tensor(model, x, y0, 0.0)?;
    c_tensor(model, x, y1, 1.0)?;
    let target = SHOOTING_TOL * y1.norm();
    let end = |v: &Vector4<f64>| -> Result<Vector4<f64>> { Ok(fiber_flow(model, x, y0, v, 1.0, |_, _| Ok(()))?.0) };

    let mut v = y1 - y0;
    let mut r = end(&v)? - y1;
    let mut iterations = 0;
    while r.norm() > target {
        if iterations >= MAX_NEWTON {
            return Err(Error::ShootingDiverged { iterations, residual: r.norm() });
        }
        iterations += 1;
        let h = 1e-6 * v.norm().max(1e-3 * y0.norm());
        let mut jac = Matrix4::zeros();
        for k in 0..4 {
            let mut dv = Vector4::zeros();
            dv[k] = h;
            let col = (end(&(v + dv))? - end(&(v - dv))?) / (2.0 * h);
            jac.set_column(k, &col);
        }
        let step = jac.lu().solve(&r).ok_or(Error::ShootingDiverged { iterations, residual: r.norm() })?;
        let mut lambda = 1.0;
        loop {
            let cand = v - step * lambda;
            match end(&cand) {
                Ok(e) if (e - y1).norm() < r.norm() || lambda < 1e-3 => {
                    v = cand;
                    r = e - y1;
                    break;
                }
                Ok(_) | Err(Error::NullCrossing(_)) if lambda >= 1e-3 => lambda *= 0.5,
                Ok(e) => {
                    v = cand;
                    r = e - y1;
                    break;
                }
                Err(e) => return Err(e),
            }
        }
        if !r.norm().is_finite() {
            return Err(Error::ShootingDiverged { iterations, residual: r.norm() });
        }
    }
    let mut samples = Vec::new();
    if iterations == 0 && v == Vector4::zeros() {
        samples.push((0.0, *y0));
        samples.push((1.0, *y0));
    } else {
        fiber_flow(model, x, y0, &v, 1.0, |s, y| {
            samples.push((s, *y));
            Ok(())
        })?;
    }
    Ok(FiberCurve { x: *x, y0: *y0, velocity0: v, samples, iterations, residual: r.norm() })
}

/// Parallel transport of the columns of `w0` along a fiber curve with the
/// vertical coefficients `C`: `ẇ^a = −C^a_bc ẏ^b w^c`.
pub fn transport_along(model: &FundamentalModel, curve: &FiberCurve, w0: &Matrix4<f64>) -> Result<Matrix4<f64>> {
    if curve.velocity0 == Vector4::zeros() {
        return Ok(*w0);
    }
    let x = curve.x;
    let mut u0 = SVector::<f64, 24>::zeros();
    for i in 0..4 {
        u0[i] = curve.y0[i];
        u0[4 + i] = curve.velocity0[i];
    }
    for j in 0..4 {
        for a in 0..4 {
            u0[8 + 4 * j + a] = w0[(a, j)];
        }
    }
    let rhs = |s: f64, u: &SVector<f64, 24>| -> Result<SVector<f64, 24>> {
        let y = u.fixed_rows::<4>(0).into_owned();
        let v = u.fixed_rows::<4>(4).into_owned();
        let c = c_tensor(model, &x, &y, s)?;
        let mut out = SVector::<f64, 24>::zeros();
        let acc = -contract(&c, &v, &v);
        for i in 0..4 {
            out[i] = v[i];
            out[4 + i] = acc[i];
        }
        for j in 0..4 {
            let w = u.fixed_rows::<4>(8 + 4 * j).into_owned();
            let dw = -contract(&c, &v, &w);
            for a in 0..4 {
                out[8 + 4 * j + a] = dw[a];
            }
        }
        Ok(out)
    };
    let (u, _) = dopri5(rhs, 0.0, 1.0, u0, &fiber_opts(), |_, _| Ok(()))?;
    Ok(Matrix4::from_fn(|a, j| u[8 + 4 * j + a]))
}

/// Result of a generalized Lorentz transform between two observer frames.
#[derive(Debug, Clone)]
pub struct LorentzTransform {
    /// Components of the transported frame `P_v f` (columns).
    pub transported: Matrix4<f64>,
    /// `Λ` with `f′_j = (P_v f)_i Λ^i_j`.
    pub lambda: Matrix4<f64>,
    /// `max |(P_v f)ᵀ g^F(x, f′_0) (P_v f) + η|`.
    pub orthonormality_residual: f64,
    /// `max |Λᵀ η Λ − η|`.
    pub lorentz_residual: f64,
    pub iterations: usize,
    pub shooting_residual: f64,
}

pub fn generalized_lorentz(
    model: &FundamentalModel,
    f: &FrameAtPoint,
    f_prime: &FrameAtPoint,
) -> Result<LorentzTransform> {
    for fr in [f, f_prime] {
        let res = fr.orthonormality_residual(model)?;
        if res > crate::frame::FRAME_TOL {
            return Err(Error::FrameNotOrthonormal(res));
        }
    }
    let curve = vertical_autoparallel(model, &f.x, &f.y(), &f_prime.y())?;
    let transported = transport_along(model, &curve, &f.f)?;
    let g1 = crate::finsler::finsler_metric_gf(model, &f_prime.point())?.components;
    let orthonormality_residual = (transported.transpose() * g1 * transported + eta()).amax();
    let lambda = transported
        .try_inverse()
        .ok_or(Error::FrameNotOrthonormal(f64::INFINITY))?
        * f_prime.f;
    let lorentz_residual = (lambda.transpose() * eta() * lambda - eta()).amax();
    Ok(LorentzTransform {
        transported,
        lambda,
        orthonormality_residual,
        lorentz_residual,
        iterations: curve.iterations,
        shooting_residual: curve.residual,
    })
}
