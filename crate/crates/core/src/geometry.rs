//! Jet-level assembly of the Finsler geometry at one tangent point.
//!
//! Everything is built from a single Taylor jet of `L`: the Hessian metric,
//! the geodesic spray, the Cartan non-linear connection, the Finsler metric
//! and the coefficients of the Cartan linear connection. Each stage loses
//! one or two orders of the jet, so a degree-3 jet of `L` yields the
//! connection values and a degree-4 jet yields one more derivative of them,
//! enough for every curvature tensor.

use nalgebra::{Matrix4, SymmetricEigen};

use crate::error::{Error, Result};
use crate::jet::{jet_mat, mat_inverse, mat_value, Jet, JetMat};
use crate::model::{FundamentalModel, TangentPoint};

pub type Tensor3 = [[[f64; 4]; 4]; 4];
pub type Tensor4 = [[[[f64; 4]; 4]; 4]; 4];
pub type JetTensor3 = [[[Jet; 4]; 4]; 4];

/// Relative threshold on `|L|` below which a direction counts as null.
pub const EPS_NULL: f64 = 1e-10;
/// Relative threshold on the Hessian determinant for degeneracy.
pub const EPS_DET: f64 = 1e-10;
/// Eigenvalues below this (relative to the largest) get sign zero.
pub const EPS_SIG: f64 = 1e-8;

pub fn tensor3(f: impl Fn(usize, usize, usize) -> f64) -> Tensor3 {
    std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| f(i, j, k))))
}

pub fn tensor4(f: impl Fn(usize, usize, usize, usize) -> f64) -> Tensor4 {
    std::array::from_fn(|i| {
        std::array::from_fn(|j| std::array::from_fn(|k| std::array::from_fn(|l| f(i, j, k, l))))
    })
}

pub(crate) fn jet_tensor3(f: impl Fn(usize, usize, usize) -> Jet) -> JetTensor3 {
    std::array::from_fn(|i| std::array::from_fn(|j| std::array::from_fn(|k| f(i, j, k))))
}

/// `|det|` small compared with the largest eigenvalue to the fourth power.
pub fn is_degenerate(m: &Matrix4<f64>) -> bool {
    let eig = SymmetricEigen::new(*m).eigenvalues;
    let scale = eig.amax();
    if scale == 0.0 || !scale.is_finite() {
        return true;
    }
    m.determinant().abs() < EPS_DET * scale.powi(4)
}

/// `|L| < ε_null · |y|ⁿ`
pub fn is_null(l: f64, p: &TangentPoint, n: f64) -> bool {
    l.abs() < EPS_NULL * p.y.norm().powf(n)
}

/// Horizontal derivative `δ_a f = ∂_a f − N^e_a ∂̄_e f` of a scalar jet.
pub fn delta(f: &Jet, n: &JetMat, a: usize) -> Jet {
    let mut out = f.dx(a);
    for (e, row) in n.iter().enumerate() {
        out -= &row[a].mul_jet(&f.dy(e));
    }
    out
}

/// Hessian-metric stage: `g^L`, its inverse, the spray and `N`.
#[derive(Debug, Clone)]
pub struct SprayJets {
    pub order: usize,
    pub l: Jet,
    /// `g^L_ab`, degree `order − 2`.
    pub gl: JetMat,
    pub gl_inv: JetMat,
    /// `G^a`, degree `order − 2`.
    pub spray: [Jet; 4],
    /// `N^a_b` stored as `n[a][b]`, degree `order − 3`.
    pub n: JetMat,
}

impl SprayJets {
    pub fn new(model: &FundamentalModel, p: &TangentPoint, order: usize) -> Result<Self> {
        assert!((3..=4).contains(&order), "spray jets need order 3 or 4");
        let l = model.l_jet(p, order)?;
        let ly: [Jet; 4] = std::array::from_fn(|a| l.dy(a));
        let gl = jet_mat(|a, b| ly[a].dy(b).scale(0.5));
        let gl0 = mat_value(&gl);
        if is_degenerate(&gl0) {
            return Err(Error::DegenerateHessian);
        }
        let gl_inv = mat_inverse(&gl).ok_or(Error::DegenerateHessian)?;
        // y^d ∂_d ∂̄_c L − ∂_c L
        let y: [Jet; 4] = std::array::from_fn(|d| Jet::variable(order, 4 + d, p.y[d]));
        let rhs: [Jet; 4] = std::array::from_fn(|c| {
            let mut acc = -l.dx(c).truncate(order - 2);
            for (d, yd) in y.iter().enumerate() {
                acc += &ly[c].dx(d).mul_jet(yd);
            }
            acc
        });
        let spray: [Jet; 4] = std::array::from_fn(|a| {
            let mut acc = Jet::zero(order - 2);
            for (c, r) in rhs.iter().enumerate() {
                acc += &gl_inv[a][c].mul_jet(r);
            }
            acc.scale(0.25)
        });
        let n = jet_mat(|a, b| spray[a].dy(b));
        Ok(Self { order, l, gl, gl_inv, spray, n })
    }

    pub fn n_value(&self) -> Matrix4<f64> {
        mat_value(&self.n)
    }
}

/// Finsler-metric stage: `g^F`, its derivatives and the linear connection.
#[derive(Debug, Clone)]
pub struct ConnectionJets {
    pub spray: SprayJets,
    /// `g^F_ab`, degree `order − 2`.
    pub gf: JetMat,
    pub gf_inv: JetMat,
    /// `δ_a g^F_bc` as `dh[a][b][c]`, degree `order − 3`.
    pub dh: JetTensor3,
    /// `∂̄_a g^F_bc` as `dv[a][b][c]`, degree `order − 3`.
    pub dv: JetTensor3,
    /// `F^c_ab` as `f[c][a][b]`, degree `order − 3`.
    pub f: JetTensor3,
    /// `C^c_ab` as `c[c][a][b]`, degree `order − 3`.
    pub c: JetTensor3,
}

impl ConnectionJets {
    pub fn new(model: &FundamentalModel, p: &TangentPoint, order: usize) -> Result<Self> {
        let spray = SprayJets::new(model, p, order)?;
        Self::from_spray(model, p, spray)
    }

    pub fn from_spray(model: &FundamentalModel, p: &TangentPoint, spray: SprayJets) -> Result<Self> {
        let l0 = spray.l.value();
        if is_null(l0, p, model.n()) {
            return Err(Error::NullVectorError(l0));
        }
        let f2 = spray.l.abs().powf(2.0 / model.n());
        let gf = jet_mat(|a, b| f2.dy(a).dy(b).scale(0.5));
        if is_degenerate(&mat_value(&gf)) {
            return Err(Error::DegenerateHessian);
        }
        let gf_inv = mat_inverse(&gf).ok_or(Error::DegenerateHessian)?;
        let n = &spray.n;
        let dh = jet_tensor3(|a, b, c| delta(&gf[b][c], n, a));
        let dv = jet_tensor3(|a, b, c| gf[b][c].dy(a));
        let christoffel = |d: &JetTensor3| {
            // ½ g^{cd}(d_a g_bd + d_b g_ad − d_d g_ab)
            let low = jet_tensor3(|dd, a, b| &(&d[a][b][dd] + &d[b][a][dd]) - &d[dd][a][b]);
            jet_tensor3(|c, a, b| {
                let mut acc = Jet::zero(low[0][0][0].degree());
                for (dd, l) in low.iter().enumerate() {
                    acc += &gf_inv[c][dd].mul_jet(&l[a][b]);
                }
                acc.scale(0.5)
            })
        };
        let f = christoffel(&dh);
        let c = christoffel(&dv);
        Ok(Self { spray, gf, gf_inv, dh, dv, f, c })
    }

    pub fn value(&self) -> LinearConnectionValue {
        LinearConnectionValue {
            f: tensor3(|c, a, b| self.f[c][a][b].value()),
            c: tensor3(|c, a, b| self.c[c][a][b].value()),
        }
    }
}

/// Coefficients `F^c_ab` and `C^c_ab` of the Cartan linear connection,
/// stored as `f[c][a][b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearConnectionValue {
    pub f: Tensor3,
    pub c: Tensor3,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minkowski_is_flat() {
        let m = FundamentalModel::minkowski();
        let p = TangentPoint::from_arrays([0.1, 0.2, 0.3, 0.4], [1.0, 0.2, 0.1, 0.0]);
        let cj = ConnectionJets::new(&m, &p, 4).unwrap();
        let v = cj.value();
        for c in 0..4 {
            for a in 0..4 {
                for b in 0..4 {
                    assert_eq!(v.f[c][a][b], 0.0);
                    assert!(v.c[c][a][b].abs() < 1e-15);
                }
            }
        }
        let gf = mat_value(&cj.gf);
        let eta = Matrix4::from_diagonal(&nalgebra::Vector4::new(-1.0, 1.0, 1.0, 1.0));
        assert!((gf + eta).amax() < 1e-14);
    }

    #[test]
    fn null_direction_has_no_finsler_metric() {
        let m = FundamentalModel::minkowski();
        let p = TangentPoint::from_arrays([0.0; 4], [1.0, 1.0, 0.0, 0.0]);
        assert!(SprayJets::new(&m, &p, 3).is_ok());
        assert!(matches!(ConnectionJets::new(&m, &p, 3), Err(Error::NullVectorError(_))));
    }
}
