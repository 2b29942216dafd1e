//! Non-linear curvature, curvature of the Cartan linear connection and the
//! Finsler gravity action density.
//!
//! Index conventions: `R^c_ab = δ_b N^c_a − δ_a N^c_b`, and the linear
//! curvature `R^d_cab` is stored as `r[d][c][a][b]`. In the metric limit
//! `R^d_cab` equals the standard Riemann tensor with its last two indices
//! swapped, `R^d_cab = Riem^d_cba` where
//! `Riem^ρ_σμν = ∂_μ Γ^ρ_νσ − ∂_ν Γ^ρ_μσ + Γ^ρ_μλ Γ^λ_νσ − Γ^ρ_νλ Γ^λ_μσ`,
//! and `R^c_ab = y^d R^c_dab`. The gravity density `R^a_ab y^b` then equals
//! `−Ric(y, y)`.

use serde::Serialize;

use crate::error::Result;
use crate::geometry::{delta, tensor3, tensor4, ConnectionJets, SprayJets, Tensor3, Tensor4};
use crate::model::{FundamentalModel, TangentPoint};

/// `R^c_ab` stored as `r[c][a][b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearCurvatureValue {
    pub r: Tensor3,
}

/// Curvature of the Cartan linear connection, each stored as `[d][c][a][b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearCurvatureValue {
    pub r: Tensor4,
    pub p: Tensor4,
    pub s: Tensor4,
}

pub fn nonlinear_curvature_from(spray: &SprayJets) -> NonlinearCurvatureValue {
    let n = &spray.n;
    let dn = |c: usize, a: usize, b: usize| delta(&n[c][a], n, b).value();
    NonlinearCurvatureValue { r: tensor3(|c, a, b| dn(c, a, b) - dn(c, b, a)) }
}

pub fn nonlinear_curvature(model: &FundamentalModel, p: &TangentPoint) -> Result<NonlinearCurvatureValue> {
    Ok(nonlinear_curvature_from(&SprayJets::new(model, p, 4)?))
}

pub fn linear_curvature_from(cj: &ConnectionJets) -> LinearCurvatureValue {
    let n = &cj.spray.n;
    let f0 = tensor3(|c, a, b| cj.f[c][a][b].value());
    let c0 = tensor3(|c, a, b| cj.c[c][a][b].value());
    // δ_e F^d_ca as dhf[e][d][c][a], and the analogous derivatives.
    let dhf = tensor4(|e, d, c, a| delta(&cj.f[d][c][a], n, e).value());
    let dvf = tensor4(|e, d, c, a| cj.f[d][c][a].dy(e).value());
    let dhc = tensor4(|e, d, c, a| delta(&cj.c[d][c][a], n, e).value());
    let dvc = tensor4(|e, d, c, a| cj.c[d][c][a].dy(e).value());
    let dhn = tensor3(|b, e, a| delta(&n[e][a], n, b).value());
    let dvn = tensor3(|b, e, a| n[e][a].dy(b).value());

    let r = tensor4(|d, c, a, b| {
        let mut v = dhf[b][d][c][a] - dhf[a][d][c][b];
        for e in 0..4 {
            v += f0[e][c][a] * f0[d][e][b] - f0[e][c][b] * f0[d][e][a];
            v += c0[d][c][e] * (dhn[b][e][a] - dhn[a][e][b]);
        }
        v
    });
    let p = tensor4(|d, c, a, b| {
        let mut v = dvf[b][d][c][a] - dhc[a][d][c][b];
        for e in 0..4 {
            v += f0[e][c][a] * c0[d][e][b] - c0[e][c][b] * f0[d][e][a];
            v += c0[d][c][e] * dvn[b][e][a];
        }
        v
    });
    let s = tensor4(|d, c, a, b| {
        let mut v = dvc[b][d][c][a] - dvc[a][d][c][b];
        for e in 0..4 {
            v += c0[e][c][a] * c0[d][e][b] - c0[e][c][b] * c0[d][e][a];
        }
        v
    });
    LinearCurvatureValue { r, p, s }
}

pub fn linear_curvature(model: &FundamentalModel, p: &TangentPoint) -> Result<LinearCurvatureValue> {
    Ok(linear_curvature_from(&ConnectionJets::new(model, p, 4)?))
}

/// `R^a_ab y^b`, homogeneous of degree 2 in `y`.
pub fn gravity_density_from(r: &NonlinearCurvatureValue, p: &TangentPoint) -> f64 {
    let mut acc = 0.0;
    for a in 0..4 {
        for b in 0..4 {
            acc += r.r[a][a][b] * p.y[b];
        }
    }
    acc
}

pub fn gravity_action_density(model: &FundamentalModel, p: &TangentPoint) -> Result<f64> {
    Ok(gravity_density_from(&nonlinear_curvature(model, p)?, p))
}

pub fn tensor4_norm(t: &Tensor4) -> f64 {
    t.iter().flatten().flatten().flatten().map(|v| v * v).sum::<f64>().sqrt()
}

/// Everything the curvature report needs at one point.
#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub x: [f64; 4],
    pub y: [f64; 4],
    pub nonlinear_r: Vec<f64>,
    pub rlin_norm: f64,
    pub plin_norm: f64,
    pub slin_norm: f64,
    pub density: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleResiduals>,
}

/// Residuals against the finite-difference Riemann oracle for metric models.
#[derive(Debug, Clone, Serialize)]
pub struct OracleResiduals {
    pub rlin_vs_riemann: f64,
    pub density_vs_ricci: f64,
}

pub fn curvature_report(model: &FundamentalModel, p: &TangentPoint) -> Result<CurvatureReport> {
    let cj = ConnectionJets::new(model, p, 4)?;
    let nl = nonlinear_curvature_from(&cj.spray);
    let lin = linear_curvature_from(&cj);
    let density = gravity_density_from(&nl, p);
    let oracle = match model.metric_field() {
        Some(g) => {
            let o = crate::oracle::riemann_oracle(|x| g.eval(x), &p.x)?;
            let mut res: f64 = 0.0;
            for d in 0..4 {
                for c in 0..4 {
                    for a in 0..4 {
                        for b in 0..4 {
                            res = res.max((lin.r[d][c][a][b] - o.riemann[d][c][b][a]).abs());
                        }
                    }
                }
            }
            let ric = o.ricci_contraction(&p.y);
            Some(OracleResiduals { rlin_vs_riemann: res, density_vs_ricci: (density + ric).abs() })
        }
        None => None,
    };
    Ok(CurvatureReport {
        x: p.x.into(),
        y: p.y.into(),
        nonlinear_r: nl.r.iter().flatten().flatten().copied().collect(),
        rlin_norm: tensor4_norm(&lin.r),
        plin_norm: tensor4_norm(&lin.p),
        slin_norm: tensor4_norm(&lin.s),
        density,
        oracle,
    })
}
