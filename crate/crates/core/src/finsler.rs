//! Finsler function, Hessian and Finsler metrics, and pointwise causal
//! classification.

use nalgebra::{Matrix4, SymmetricEigen};
use serde::Serialize;

use crate::causal::CausalStructure;
use crate::error::{Error, Result};
use crate::geometry::{is_degenerate, is_null, EPS_SIG};
use crate::jet::mat_value;
use crate::model::{FundamentalModel, TangentPoint};

/// Tolerance on `||L| − 1|` for membership in the unit shell.
pub const SHELL_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MetricKind {
    GL,
    GF,
    InputLorentzian,
}

/// A symmetric 4×4 metric value with its eigenvalue sign pattern.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MetricValue {
    pub components: Matrix4<f64>,
    pub kind: MetricKind,
    /// Signs of the eigenvalues in ascending order.
    pub signature: [i8; 4],
}

impl MetricValue {
    pub fn new(m: Matrix4<f64>, kind: MetricKind) -> Self {
        // Symmetrize so downstream consumers see an exactly symmetric matrix.
        let components = (m + m.transpose()) * 0.5;
        Self { components, kind, signature: signature(&components) }
    }

    pub fn det(&self) -> f64 {
        self.components.determinant()
    }
}

/// Eigenvalue signs in ascending order; eigenvalues smaller than
/// `ε_sig · max|λ|` count as zero.
pub fn signature(m: &Matrix4<f64>) -> [i8; 4] {
    let mut eig: Vec<f64> = SymmetricEigen::new(*m).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    let scale = eig.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    let mut out = [0i8; 4];
    for (o, v) in out.iter_mut().zip(&eig) {
        *o = if v.abs() <= EPS_SIG * scale { 0 } else { v.signum() as i8 };
    }
    out
}

/// Does the sign pattern read `(ε, −ε, −ε, −ε)` up to ordering?
pub fn has_observer_signature(sign_l: i8, sig: &[i8; 4]) -> bool {
    if sign_l == 0 {
        return false;
    }
    let eps = sign_l;
    let same = sig.iter().filter(|&&s| s == eps).count();
    let opposite = sig.iter().filter(|&&s| s == -eps).count();
    same == 1 && opposite == 3
}

/// `F = |L|^{1/n}`.
pub fn finsler_function(model: &FundamentalModel, p: &TangentPoint) -> Result<f64> {
    Ok(model.value(p)?.abs().powf(1.0 / model.n()))
}

/// `g^L_ab = ½ ∂̄_a ∂̄_b L`.
pub fn hessian_metric_gl(model: &FundamentalModel, p: &TangentPoint) -> Result<MetricValue> {
    let l = model.l_jet(p, 2)?;
    let m = Matrix4::from_fn(|a, b| 0.5 * l.dy(a).dy(b).value());
    Ok(MetricValue::new(m, MetricKind::GL))
}

/// `g^F_ab = ½ ∂̄_a ∂̄_b F²`, undefined on the null structure.
pub fn finsler_metric_gf(model: &FundamentalModel, p: &TangentPoint) -> Result<MetricValue> {
    let l = model.l_jet(p, 2)?;
    if is_null(l.value(), p, model.n()) {
        return Err(Error::NullVectorError(l.value()));
    }
    let f2 = l.abs().powf(2.0 / model.n());
    let jm = crate::jet::jet_mat(|a, b| f2.dy(a).dy(b).scale(0.5));
    let m = mat_value(&jm);
    if is_degenerate(&m) {
        return Err(Error::DegenerateHessian);
    }
    Ok(MetricValue::new(m, MetricKind::GF))
}

/// Pointwise causal character of a tangent vector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct CausalClass {
    pub sign_l: i8,
    pub degenerate: bool,
    pub hessian_signature: [i8; 4],
    pub in_shell_omega: bool,
    pub in_observer_cone: bool,
}

/// Sign of `L`, degeneracy and signature of `g^L`, without the (non-local)
/// cone membership.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RayClass {
    pub l: f64,
    pub sign_l: i8,
    pub degenerate: bool,
    pub det: f64,
    pub signature: [i8; 4],
}

impl RayClass {
    /// The direction satisfies the L5 signature condition (is a ray of `Ω`).
    pub fn is_observer_ray(&self) -> bool {
        !self.degenerate && has_observer_signature(self.sign_l, &self.signature)
    }
}

pub fn classify_ray(model: &FundamentalModel, p: &TangentPoint) -> Result<RayClass> {
    let l = model.l_jet(p, 2)?;
    let gl = Matrix4::from_fn(|a, b| 0.5 * l.dy(a).dy(b).value());
    let lv = l.value();
    let sign_l = if is_null(lv, p, model.n()) { 0 } else { lv.signum() as i8 };
    Ok(RayClass {
        l: lv,
        sign_l,
        degenerate: is_degenerate(&gl),
        det: gl.determinant(),
        signature: signature(&gl),
    })
}

/// Full classification, including shell and observer-cone membership.
pub fn classify(model: &FundamentalModel, p: &TangentPoint) -> Result<CausalClass> {
    let ray = classify_ray(model, p)?;
    let in_shell_omega = ray.is_observer_ray() && (ray.l.abs() - 1.0).abs() <= SHELL_TOL;
    let in_observer_cone = ray.is_observer_ray()
        && match CausalStructure::new(model, p.x) {
            Ok(cs) => cs.contains(&p.y)?,
            Err(Error::NoConeFound) => false,
            Err(e) => return Err(e),
        };
    Ok(CausalClass {
        sign_l: ray.sign_l,
        degenerate: ray.degenerate,
        hessian_signature: ray.signature,
        in_shell_omega,
        in_observer_cone,
    })
}

/// Rescales `y` onto the unit shell `|L| = 1`.
pub fn normalize_to_shell(model: &FundamentalModel, p: &TangentPoint) -> Result<TangentPoint> {
    let l = model.value(p)?;
    if is_null(l, p, model.n()) {
        return Err(Error::NullVectorError(l));
    }
    let mut q = p.scaled(l.abs().powf(-1.0 / model.n()));
    // One Newton correction removes the rounding left by the power.
    let l1 = model.value(&q)?.abs();
    q = q.scaled(l1.powf(-1.0 / model.n()));
    Ok(q)
}
