//! Independent metric-limit oracles: Christoffel symbols and Riemann tensor
//! of a Lorentzian metric by finite differences, and a fixed-step geodesic
//! integrator built on them.

use nalgebra::{Matrix4, Vector4};

use crate::error::{Error, Result};
use crate::geometry::{tensor3, tensor4, Tensor3, Tensor4};

const INNER_STEP: f64 = 1e-5;
const OUTER_STEP: f64 = 1e-3;

fn richardson_derivative(f: impl Fn(f64) -> Matrix4<f64>, h: f64) -> Matrix4<f64> {
    let d = |s: f64| (f(s) - f(-s)) / (2.0 * s);
    (d(h / 2.0) * 4.0 - d(h)) / 3.0
}

/// `Γ^a_bc` stored as `[a][b][c]`.
pub fn christoffel_fd(metric: &impl Fn(&Vector4<f64>) -> Matrix4<f64>, x: &Vector4<f64>) -> Result<Tensor3> {
    christoffel_with_step(metric, x, INNER_STEP)
}

fn christoffel_with_step(metric: &impl Fn(&Vector4<f64>) -> Matrix4<f64>, x: &Vector4<f64>, h: f64) -> Result<Tensor3> {
    let g = metric(x);
    let ginv = g.try_inverse().ok_or(Error::DegenerateHessian)?;
    let dg: Vec<Matrix4<f64>> = (0..4)
        .map(|c| {
            richardson_derivative(
                |s| {
                    let mut xs = *x;
                    xs[c] += s;
                    metric(&xs)
                },
                h,
            )
        })
        .collect();
    Ok(tensor3(|a, b, c| {
        let mut acc = 0.0;
        for d in 0..4 {
            acc += ginv[(a, d)] * (dg[b][(d, c)] + dg[c][(d, b)] - dg[d][(b, c)]);
        }
        0.5 * acc
    }))
}

/// Christoffel symbols, Riemann tensor `Riem^ρ_σμν` (as `[ρ][σ][μ][ν]`,
/// `Riem^ρ_σμν = ∂_μ Γ^ρ_νσ − ∂_ν Γ^ρ_μσ + Γ^ρ_μλ Γ^λ_νσ − Γ^ρ_νλ Γ^λ_μσ`)
/// and Ricci tensor `Ric_σν = Riem^ρ_σρν`.
#[derive(Debug, Clone)]
pub struct RiemannOracle {
    pub metric: Matrix4<f64>,
    pub christoffel: Tensor3,
    pub riemann: Tensor4,
    pub ricci: Matrix4<f64>,
}

impl RiemannOracle {
    /// `Ric_ab y^a y^b`
    pub fn ricci_contraction(&self, y: &Vector4<f64>) -> f64 {
        (y.transpose() * self.ricci * y)[(0, 0)]
    }

    /// `g^ab Ric_ab`
    pub fn ricci_scalar(&self) -> f64 {
        let ginv = self.metric.try_inverse().unwrap_or_else(Matrix4::zeros);
        (ginv.component_mul(&self.ricci)).sum()
    }

    /// `R_ρσμν = g_ρλ Riem^λ_σμν`
    pub fn lowered(&self) -> Tensor4 {
        tensor4(|r, s, m, n| (0..4).map(|l| self.metric[(r, l)] * self.riemann[l][s][m][n]).sum())
    }
}

/// Tolerance for the oracle's own symmetry checks.
pub const ORACLE_SYMMETRY_TOL: f64 = 1e-6;

pub fn riemann_oracle(metric: impl Fn(&Vector4<f64>) -> Matrix4<f64>, x: &Vector4<f64>) -> Result<RiemannOracle> {
    let gamma = christoffel_fd(&metric, x)?;
    let shifted = |c: usize, s: f64| -> Result<Tensor3> {
        let mut xs = *x;
        xs[c] += s;
        christoffel_fd(&metric, &xs)
    };
    // ∂_c Γ^a_bd as dgamma[c][a][b][d], central differences + Richardson.
    let mut dgamma = [[[[0.0; 4]; 4]; 4]; 4];
    for c in 0..4 {
        let h = OUTER_STEP;
        let (p1, m1, p2, m2) = (shifted(c, h)?, shifted(c, -h)?, shifted(c, h / 2.0)?, shifted(c, -h / 2.0)?);
        for a in 0..4 {
            for b in 0..4 {
                for d in 0..4 {
                    let d1 = (p1[a][b][d] - m1[a][b][d]) / (2.0 * h);
                    let d2 = (p2[a][b][d] - m2[a][b][d]) / h;
                    dgamma[c][a][b][d] = (4.0 * d2 - d1) / 3.0;
                }
            }
        }
    }
    let riemann = tensor4(|r, s, m, n| {
        let mut v = dgamma[m][r][n][s] - dgamma[n][r][m][s];
        for l in 0..4 {
            v += gamma[r][m][l] * gamma[l][n][s] - gamma[r][n][l] * gamma[l][m][s];
        }
        v
    });
    let ricci = Matrix4::from_fn(|s, n| (0..4).map(|r| riemann[r][s][r][n]).sum());
    let oracle = RiemannOracle { metric: metric(x), christoffel: gamma, riemann, ricci };

    // Pair antisymmetry and the first Bianchi identity.
    let low = oracle.lowered();
    let scale = low.iter().flatten().flatten().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let mut worst = 0.0f64;
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    worst = worst.max((low[a][b][c][d] + low[b][a][c][d]).abs());
                    worst = worst.max((low[a][b][c][d] + low[a][c][d][b] + low[a][d][b][c]).abs());
                }
            }
        }
    }
    if worst > ORACLE_SYMMETRY_TOL * scale {
        return Err(Error::OracleInconsistent(worst));
    }
    Ok(oracle)
}

/// Solves `ẍ + Γ(ẋ, ẋ) = 0` with classical fixed-step RK4 and returns
/// `(τ, x, ẋ)` after every step.
pub fn christoffel_geodesic(
    metric: impl Fn(&Vector4<f64>) -> Matrix4<f64>,
    x0: Vector4<f64>,
    v0: Vector4<f64>,
    span: f64,
    steps: usize,
) -> Result<Vec<(f64, Vector4<f64>, Vector4<f64>)>> {
    let acc = |x: &Vector4<f64>, v: &Vector4<f64>| -> Result<Vector4<f64>> {
        let g = christoffel_fd(&metric, x)?;
        Ok(Vector4::from_fn(|a, _| {
            let mut s = 0.0;
            for b in 0..4 {
                for c in 0..4 {
                    s -= g[a][b][c] * v[b] * v[c];
                }
            }
            s
        }))
    };
    let h = span / steps as f64;
    let (mut x, mut v) = (x0, v0);
    let mut out = vec![(0.0, x, v)];
    for i in 0..steps {
        let k1x = v;
        let k1v = acc(&x, &v)?;
        let k2x = v + k1v * (h / 2.0);
        let k2v = acc(&(x + k1x * (h / 2.0)), &k2x)?;
        let k3x = v + k2v * (h / 2.0);
        let k3v = acc(&(x + k2x * (h / 2.0)), &k3x)?;
        let k4x = v + k3v * h;
        let k4v = acc(&(x + k3x * h), &k4x)?;
        x += (k1x + k2x * 2.0 + k3x * 2.0 + k4x) * (h / 6.0);
        v += (k1v + k2v * 2.0 + k3v * 2.0 + k4v) * (h / 6.0);
        out.push(((i + 1) as f64 * h, x, v));
    }
    Ok(out)
}
