//! Cartan non-linear and linear connections at a point, the Berwald basis
//! and covariant derivatives.

use nalgebra::{Matrix4, Vector4};

use crate::error::Result;
use crate::geometry::{delta, ConnectionJets, LinearConnectionValue, SprayJets};
use crate::jet::Jet;
use crate::model::{FundamentalModel, TangentPoint};

/// `N^a_b` as the matrix with row `a` and column `b`. Defined wherever
/// `g^L` is non-degenerate, including on the null structure.
pub fn nonlinear_connection(model: &FundamentalModel, p: &TangentPoint) -> Result<Matrix4<f64>> {
    Ok(SprayJets::new(model, p, 3)?.n_value())
}

/// `δ_a f = ∂_a f − N^b_a ∂̄_b f` for a scalar given by its jet at `p`
/// (degree ≥ 1 in the eight coordinates).
pub fn berwald_delta_apply(model: &FundamentalModel, p: &TangentPoint, f: &Jet) -> Result<Vector4<f64>> {
    let n = nonlinear_connection(model, p)?;
    Ok(Vector4::from_fn(|a, _| {
        let mut v = f.dx(a).value();
        for b in 0..4 {
            v -= n[(b, a)] * f.dy(b).value();
        }
        v
    }))
}

/// Berwald derivative of a scalar jet when `N` is available as a jet.
pub fn berwald_delta_jet(spray: &SprayJets, f: &Jet, a: usize) -> Jet {
    delta(f, &spray.n, a)
}

/// Coefficients of the Cartan linear connection.
pub fn linear_connection(model: &FundamentalModel, p: &TangentPoint) -> Result<LinearConnectionValue> {
    Ok(ConnectionJets::new(model, p, 3)?.value())
}

/// A vector on `TM` in the Berwald basis: `h^a δ_a + v^a ∂̄_a`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitVector {
    pub h: Vector4<f64>,
    pub v: Vector4<f64>,
}

/// A vector field near `p` given by jets of its Berwald components.
#[derive(Debug, Clone)]
pub struct SplitField {
    pub h: [Jet; 4],
    pub v: [Jet; 4],
}

/// `∇_X W` for the Cartan linear connection, which acts by `F` along
/// horizontal and by `C` along vertical directions, identically on the
/// horizontal and vertical parts of `W`.
pub fn covariant_derivative(
    model: &FundamentalModel,
    p: &TangentPoint,
    dir: &SplitVector,
    field: &SplitField,
) -> Result<SplitVector> {
    let cj = ConnectionJets::new(model, p, 3)?;
    let lc = cj.value();
    let n = cj.spray.n_value();
    let deriv = |w: &Jet| -> f64 {
        let mut acc = 0.0;
        for b in 0..4 {
            // δ_b w and ∂̄_b w
            let mut d = w.dx(b).value();
            for e in 0..4 {
                d -= n[(e, b)] * w.dy(e).value();
            }
            acc += dir.h[b] * d + dir.v[b] * w.dy(b).value();
        }
        acc
    };
    let part = |comp: &[Jet; 4]| -> Vector4<f64> {
        Vector4::from_fn(|a, _| {
            let mut acc = deriv(&comp[a]);
            for b in 0..4 {
                for c in 0..4 {
                    let w = comp[c].value();
                    acc += (dir.h[b] * lc.f[a][b][c] + dir.v[b] * lc.c[a][b][c]) * w;
                }
            }
            acc
        })
    };
    Ok(SplitVector { h: part(&field.h), v: part(&field.v) })
}

/// `(∇_X g^F)_ab` along a Berwald direction; zero for the Cartan connection.
pub fn metricity_residual(model: &FundamentalModel, p: &TangentPoint, dir: &SplitVector) -> Result<Matrix4<f64>> {
    let cj = ConnectionJets::new(model, p, 3)?;
    let lc = cj.value();
    let g = crate::jet::mat_value(&cj.gf);
    Ok(Matrix4::from_fn(|a, b| {
        let mut acc = 0.0;
        for c in 0..4 {
            acc += dir.h[c] * cj.dh[c][a][b].value() + dir.v[c] * cj.dv[c][a][b].value();
            for d in 0..4 {
                let k = dir.h[c] * lc.f[d][c][a] + dir.v[c] * lc.c[d][c][a];
                let l = dir.h[c] * lc.f[d][c][b] + dir.v[c] * lc.c[d][c][b];
                acc -= k * g[(d, b)] + l * g[(a, d)];
            }
        }
        acc
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minkowski_connection_vanishes() {
        let m = FundamentalModel::minkowski();
        let p = TangentPoint::from_arrays([1.0, 2.0, 0.0, 0.0], [1.0, 0.3, 0.0, 0.0]);
        assert_eq!(nonlinear_connection(&m, &p).unwrap(), Matrix4::zeros());
        // f(x) = x0 x1: δ_a f = ∂_a f
        let x0 = Jet::variable(2, 0, 1.0);
        let x1 = Jet::variable(2, 1, 2.0);
        let d = berwald_delta_apply(&m, &p, &(&x0 * &x1)).unwrap();
        assert_eq!(d, Vector4::new(2.0, 1.0, 0.0, 0.0));
    }

    #[test]
    fn constant_field_is_parallel_in_minkowski() {
        let m = FundamentalModel::minkowski();
        let p = TangentPoint::from_arrays([0.0; 4], [1.0, 0.1, 0.2, 0.0]);
        let c = |v: f64| Jet::constant(2, v);
        let field = SplitField { h: [c(1.0), c(2.0), c(0.0), c(-1.0)], v: [c(0.5), c(0.0), c(0.0), c(3.0)] };
        let dir = SplitVector { h: Vector4::new(1.0, 2.0, 3.0, 4.0), v: Vector4::new(-1.0, 0.0, 1.0, 0.5) };
        let r = covariant_derivative(&m, &p, &dir, &field).unwrap();
        assert!(r.h.amax() < 1e-15 && r.v.amax() < 1e-15);
    }
}
