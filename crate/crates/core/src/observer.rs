//! Observer space `O`: the unit shells of future timelike vectors, with the
//! Sasaki metric, Reeb field, contact form and the split of `T O`.
//!
//! Vectors on `TM` are 8-vectors. "Coordinate" components refer to the basis
//! `(∂_a, ∂̄_a)`, "Berwald" components to `(δ_a, ∂̄_a)`; a vector with
//! coordinate components `(ẋ, ẏ)` has Berwald components `(ẋ, ẏ + N ẋ)`.
//!
//! The volume form `ε_ijkl ε_αβγ ẽ^i∧ẽ^j∧ẽ^k∧ẽ^l∧b̃^α∧b̃^β∧b̃^γ` equals
//! `4!·3! = 144` times the metric volume form of the Sasaki metric.

use nalgebra::{Matrix4, SMatrix, SVector, SymmetricEigen, Vector4};
use serde::Serialize;

use crate::connection::nonlinear_connection;
use crate::error::{Error, Result};
use crate::finsler::{finsler_function, finsler_metric_gf, SHELL_TOL};
use crate::frame::{require_observer_point, FrameAtPoint};
use crate::geodesic::Trajectory;
use crate::geometry::SprayJets;
use crate::model::{FundamentalModel, TangentPoint};
use crate::ode::{dopri5, OdeOptions};

pub type Vector8 = SVector<f64, 8>;
pub type Matrix8 = SMatrix<f64, 8, 8>;
pub type Matrix7 = SMatrix<f64, 7, 7>;
pub type Basis7 = SMatrix<f64, 8, 7>;

/// Ratio of the frame volume form to the Sasaki metric volume.
pub const VOLUME_NORMALIZATION: f64 = 144.0;
/// Measured ratio `α∧(dα)³ / vol(G̃)` on the Sasaki basis.
pub const CONTACT_VOLUME_RATIO: f64 = -6.0;

fn join(a: &Vector4<f64>, b: &Vector4<f64>) -> Vector8 {
    Vector8::from_fn(|i, _| if i < 4 { a[i] } else { b[i - 4] })
}

fn head(u: &Vector8) -> Vector4<f64> {
    u.fixed_rows::<4>(0).into_owned()
}

fn tail(u: &Vector8) -> Vector4<f64> {
    u.fixed_rows::<4>(4).into_owned()
}

/// `[[I, 0], [N, I]]`: coordinate to Berwald components.
pub fn to_berwald_matrix(n: &Matrix4<f64>) -> Matrix8 {
    let mut m = Matrix8::identity();
    m.fixed_view_mut::<4, 4>(4, 0).copy_from(n);
    m
}

/// `[[I, 0], [−N, I]]`: Berwald to coordinate components.
pub fn to_coordinate_matrix(n: &Matrix4<f64>) -> Matrix8 {
    to_berwald_matrix(&(-n))
}

/// Three vectors spanning the tangent space of the shell `S_x` at `y`, i.e.
/// the kernel of `∂̄F`, orthonormal in the Euclidean sense and oriented so
/// that `det(y, k_1, k_2, k_3) > 0`.
pub fn shell_tangent_basis(g: &Matrix4<f64>, y: &Vector4<f64>) -> [Vector4<f64>; 3] {
    // Greedy Gram–Schmidt of the coordinate axes against `w = g^F y`.
    let w = (g * y).normalize();
    let mut chosen: Vec<Vector4<f64>> = vec![w];
    let mut left: Vec<usize> = (0..4).collect();
    for _ in 0..3 {
        let residual = |a: usize| {
            let mut v = Vector4::from_fn(|i, _| if i == a { 1.0 } else { 0.0 });
            for _ in 0..2 {
                for c in &chosen {
                    v -= c * c.dot(&v);
                }
            }
            v
        };
        let (pos, v) = left
            .iter()
            .enumerate()
            .map(|(pos, &a)| (pos, residual(a)))
            .max_by(|a, b| a.1.norm().total_cmp(&b.1.norm()))
            .expect("candidates left");
        left.remove(pos);
        chosen.push(v.normalize());
    }
    let mut k = [chosen[1], chosen[2], chosen[3]];
    if Matrix4::from_columns(&[*y, k[0], k[1], k[2]]).determinant() < 0.0 {
        k[2] = -k[2];
    }
    k
}

/// The Sasaki metric restricted to `T O`.
#[derive(Debug, Clone, PartialEq)]
pub struct SasakiValue {
    /// `blockdiag(−g^F, −g^F/F²)` in Berwald components.
    pub ambient: Matrix8,
    /// Columns: `δ_0..δ_3` followed by three shell-tangent vertical vectors,
    /// in Berwald components.
    pub basis: Basis7,
    /// `basisᵀ · ambient · basis`.
    pub components: Matrix7,
    /// Eigenvalue signs in ascending order.
    pub signature: [i8; 7],
}

pub fn sasaki_metric(model: &FundamentalModel, p: &TangentPoint) -> Result<SasakiValue> {
    let g = finsler_metric_gf(model, p)?.components;
    let f = finsler_function(model, p)?;
    let mut ambient = Matrix8::zeros();
    ambient.fixed_view_mut::<4, 4>(0, 0).copy_from(&(-g));
    ambient.fixed_view_mut::<4, 4>(4, 4).copy_from(&(-g / (f * f)));
    let vert = shell_tangent_basis(&g, &p.y);
    let mut basis = Basis7::zeros();
    for a in 0..4 {
        basis[(a, a)] = 1.0;
    }
    for (k, v) in vert.iter().enumerate() {
        basis.fixed_view_mut::<4, 1>(4, 4 + k).copy_from(v);
    }
    let components = basis.transpose() * ambient * basis;
    let components = (components + components.transpose()) * 0.5;
    Ok(SasakiValue { ambient, basis, components, signature: signature7(&components) })
}

fn signature7(m: &Matrix7) -> [i8; 7] {
    let mut eig: Vec<f64> = SymmetricEigen::new(*m).eigenvalues.iter().copied().collect();
    eig.sort_by(|a, b| a.total_cmp(b));
    let scale = eig.iter().fold(0.0f64, |s, v| s.max(v.abs()));
    std::array::from_fn(|i| if eig[i].abs() <= 1e-8 * scale { 0 } else { eig[i].signum() as i8 })
}

/// Reeb field and contact form at an observer point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReebContact {
    /// `r = y^a δ_a` in coordinate components `(y, −N y)`.
    pub r: Vector8,
    /// `α = g^F_ab y^a dx^b` in coordinate components.
    pub alpha: Vector8,
    pub alpha_of_r: f64,
}

pub fn reeb_and_contact(model: &FundamentalModel, p: &TangentPoint) -> Result<ReebContact> {
    require_observer_point(model, p)?;
    let n = nonlinear_connection(model, p)?;
    let g = finsler_metric_gf(model, p)?.components;
    let r = join(&p.y, &-(n * p.y));
    let alpha = join(&(g * p.y), &Vector4::zeros());
    Ok(ReebContact { r, alpha, alpha_of_r: alpha.dot(&r) })
}

/// `α_b = ½ ∂̄_b F²` anywhere off the null structure, as a coordinate covector.
fn contact_form_at(model: &FundamentalModel, q: &TangentPoint) -> Result<Vector8> {
    let f2 = model.l_jet(q, 1)?.abs().powf(2.0 / model.n());
    Ok(join(&Vector4::from_fn(|b, _| 0.5 * f2.dy(b).value()), &Vector4::zeros()))
}

/// `dF` as a coordinate covector.
fn finsler_differential(model: &FundamentalModel, q: &TangentPoint) -> Result<Vector8> {
    let f = model.l_jet(q, 1)?.abs().powf(1.0 / model.n());
    Ok(Vector8::from_fn(|i, _| if i < 4 { f.dx(i).value() } else { f.dy(i - 4).value() }))
}

/// Pullback `Φ_t^* α` at `p` along the flow of the spray `(y, −2G)`, from
/// the flow map and its Jacobian.
fn pulled_back_alpha(model: &FundamentalModel, p: &TangentPoint, t: f64) -> Result<Vector8> {
    const DIM: usize = 72;
    let mut u0 = SVector::<f64, DIM>::zeros();
    for i in 0..8 {
        u0[i] = if i < 4 { p.x[i] } else { p.y[i - 4] };
        u0[8 + 9 * i] = 1.0;
    }
    let rhs = |_s: f64, u: &SVector<f64, DIM>| -> Result<SVector<f64, DIM>> {
        let q = TangentPoint::new(
            u.fixed_rows::<4>(0).into_owned(),
            u.fixed_rows::<4>(4).into_owned(),
        );
        let sp = SprayJets::new(model, &q, 3)?;
        let mut dv = Matrix8::zeros();
        for a in 0..4 {
            dv[(a, 4 + a)] = 1.0;
            for b in 0..4 {
                dv[(4 + a, b)] = -2.0 * sp.spray[a].dx(b).value();
                dv[(4 + a, 4 + b)] = -2.0 * sp.spray[a].dy(b).value();
            }
        }
        let j = Matrix8::from_fn(|r, c| u[8 + 8 * r + c]);
        let dj = dv * j;
        let mut out = SVector::<f64, DIM>::zeros();
        for a in 0..4 {
            out[a] = q.y[a];
            out[4 + a] = -2.0 * sp.spray[a].value();
        }
        for r in 0..8 {
            for c in 0..8 {
                out[8 + 8 * r + c] = dj[(r, c)];
            }
        }
        Ok(out)
    };
    let opts = OdeOptions { tol: 1e-14, max_step: Some(t.abs() / 4.0), ..OdeOptions::default() };
    let (u, _) = dopri5(rhs, 0.0, t, u0, &opts, |_, _| Ok(())).map_err(|e| match e {
        Error::StepFailure(_) => e,
        other => Error::StepFailure(other.to_string()),
    })?;
    let q = TangentPoint::new(u.fixed_rows::<4>(0).into_owned(), u.fixed_rows::<4>(4).into_owned());
    let j = Matrix8::from_fn(|r, c| u[8 + 8 * r + c]);
    Ok(j.transpose() * contact_form_at(model, &q)?)
}

/// Finite-difference Lie derivative of `α` along the Reeb flow, evaluated on
/// `T O` and extended by zero along the Liouville direction `y^a ∂̄_a`.
pub fn lie_derivative_contact(model: &FundamentalModel, p: &TangentPoint, h_flow: f64) -> Result<Vector8> {
    require_observer_point(model, p)?;
    if !(h_flow > 0.0) {
        return Err(Error::StepFailure(format!("flow step {h_flow} must be positive")));
    }
    let central = |h: f64| -> Result<Vector8> {
        Ok((pulled_back_alpha(model, p, h)? - pulled_back_alpha(model, p, -h)?) / (2.0 * h))
    };
    let d = (central(h_flow / 2.0)? * 4.0 - central(h_flow)?) / 3.0;
    let liouville = join(&Vector4::zeros(), &p.y);
    let df = finsler_differential(model, p)?;
    let proj = Matrix8::identity() - liouville * df.transpose() / df.dot(&liouville);
    Ok(proj.transpose() * d)
}

/// The coframe `(ẽ^0..ẽ^3, b̃^1..b̃^3)` on `T O` as rows acting on Berwald
/// components.
pub fn projected_coframe(frame: &FrameAtPoint) -> SMatrix<f64, 7, 8> {
    let mut t = SMatrix::<f64, 7, 8>::zeros();
    t.fixed_view_mut::<4, 4>(0, 0).copy_from(&frame.finv);
    t.fixed_view_mut::<3, 4>(4, 4).copy_from(&frame.finv.fixed_view::<3, 4>(1, 0));
    t
}

/// `η_ij ẽ^i ẽ^j + δ_αβ b̃^α b̃^β` in Berwald components.
pub fn sasaki_from_frame(frame: &FrameAtPoint) -> Matrix8 {
    let t = projected_coframe(frame);
    let d = Matrix7::from_diagonal(&SVector::<f64, 7>::from_column_slice(&[-1.0, 1.0, 1.0, 1.0, 1.0, 1.0, 1.0]));
    t.transpose() * d * t
}

fn check_frame_at(model: &FundamentalModel, p: &TangentPoint, frame: &FrameAtPoint) -> Result<()> {
    let dev = (frame.y() - p.y).amax() + (frame.x - p.x).amax();
    if dev > 1e-10 * p.y.amax().max(1.0) {
        return Err(Error::FrameNotOrthonormal(dev));
    }
    let res = frame.orthonormality_residual(model)?;
    if res > crate::frame::FRAME_TOL {
        return Err(Error::FrameNotOrthonormal(res));
    }
    Ok(())
}

/// Vertical, spatial-horizontal and temporal-horizontal projectors.
#[derive(Debug, Clone, PartialEq)]
pub struct TangentSplit {
    /// 8×8 projectors acting on Berwald components.
    pub p_v: Matrix8,
    pub p_hvec: Matrix8,
    pub p_h0: Matrix8,
    /// The same projectors in the Sasaki basis of `T O`.
    pub restricted: [Matrix7; 3],
    pub ranks: [usize; 3],
}

pub fn tangent_split(model: &FundamentalModel, p: &TangentPoint, frame: &FrameAtPoint) -> Result<TangentSplit> {
    check_frame_at(model, p, frame)?;
    let spatial: Matrix4<f64> = (1..4).map(|a| frame.f.column(a) * frame.finv.row(a)).sum();
    let temporal = frame.f.column(0) * frame.finv.row(0);
    let mut p_v = Matrix8::zeros();
    p_v.fixed_view_mut::<4, 4>(4, 4).copy_from(&spatial);
    let mut p_hvec = Matrix8::zeros();
    p_hvec.fixed_view_mut::<4, 4>(0, 0).copy_from(&spatial);
    let mut p_h0 = Matrix8::zeros();
    p_h0.fixed_view_mut::<4, 4>(0, 0).copy_from(&temporal);

    let basis = sasaki_metric(model, p)?.basis;
    let pinv = (basis.transpose() * basis).try_inverse().ok_or(Error::DegenerateHessian)? * basis.transpose();
    let restricted = [pinv * p_v * basis, pinv * p_hvec * basis, pinv * p_h0 * basis];
    let ranks = restricted.map(|m| m.singular_values().iter().filter(|s| **s > 1e-8).count());
    Ok(TangentSplit { p_v, p_hvec, p_h0, restricted, ranks })
}

/// The frame volume form and the Sasaki metric volume on the same basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VolumeCheck {
    pub form_value: f64,
    pub metric_volume: f64,
    pub ratio: f64,
}

/// Evaluates both volume forms on the Sasaki basis of `T O`.
pub fn volume_check(model: &FundamentalModel, p: &TangentPoint, frame: &FrameAtPoint) -> Result<VolumeCheck> {
    check_frame_at(model, p, frame)?;
    let s = sasaki_metric(model, p)?;
    let form_value = VOLUME_NORMALIZATION * (projected_coframe(frame) * s.basis).determinant();
    let metric_volume = s.components.determinant().abs().sqrt();
    Ok(VolumeCheck { form_value, metric_volume, ratio: form_value / metric_volume })
}

fn pfaffian(m: &[Vec<f64>]) -> f64 {
    let n = m.len();
    if n == 0 {
        return 1.0;
    }
    let mut acc = 0.0;
    for j in 1..n {
        let keep: Vec<usize> = (1..n).filter(|&k| k != j).collect();
        let minor: Vec<Vec<f64>> = keep.iter().map(|&r| keep.iter().map(|&c| m[r][c]).collect()).collect();
        let sign = if j % 2 == 1 { 1.0 } else { -1.0 };
        acc += sign * m[0][j] * pfaffian(&minor);
    }
    acc
}

/// `α∧(dα)³` divided by the Sasaki metric volume, both on the Sasaki basis.
pub fn contact_volume_ratio(model: &FundamentalModel, p: &TangentPoint) -> Result<f64> {
    require_observer_point(model, p)?;
    let s = sasaki_metric(model, p)?;
    let n = nonlinear_connection(model, p)?;
    let b = to_coordinate_matrix(&n) * s.basis;
    let f2 = model.l_jet(p, 2)?.abs().powf(2.0 / model.n());
    let alpha = contact_form_at(model, p)?;
    // dα_ij = ∂_i α_j − ∂_j α_i; α has no dy components.
    let d_alpha = |i: usize, j: usize| -> f64 {
        let part = |i: usize, j: usize| {
            if j < 4 {
                let aj = f2.dy(j).scale(0.5);
                if i < 4 { aj.dx(i).value() } else { aj.dy(i - 4).value() }
            } else {
                0.0
            }
        };
        part(i, j) - part(j, i)
    };
    let omega8 = Matrix8::from_fn(|i, j| d_alpha(i, j));
    let omega = b.transpose() * omega8 * b;
    let a7 = b.transpose() * alpha;
    let mut value = 0.0;
    for i in 0..7 {
        let keep: Vec<usize> = (0..7).filter(|&k| k != i).collect();
        let minor: Vec<Vec<f64>> = keep.iter().map(|&r| keep.iter().map(|&c| omega[(r, c)]).collect()).collect();
        let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        value += sign * a7[i] * pfaffian(&minor);
    }
    value *= 6.0;
    Ok(value / s.components.determinant().abs().sqrt())
}

/// Verdict of the observer-trajectory check.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TrajectoryVerdict {
    NotObserver,
    Observer,
    Inertial,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ObserverTrajectoryReport {
    pub verdict: TrajectoryVerdict,
    /// `max |ẽ^i(Γ̇) − δ^i_0|`.
    pub max_e_deviation: f64,
    /// `max |b̃^α(Γ̇)|`.
    pub max_b: f64,
    pub max_shell_drift: f64,
    pub samples_checked: usize,
}

/// Weights of the derivative at `t` of the Lagrange interpolant through `ts`.
fn lagrange_derivative_weights(ts: &[f64], t: f64) -> Vec<f64> {
    let n = ts.len();
    (0..n)
        .map(|j| {
            let mut sum = 0.0;
            for m in (0..n).filter(|&m| m != j) {
                let mut prod = 1.0 / (ts[j] - ts[m]);
                for l in (0..n).filter(|&l| l != j && l != m) {
                    prod *= (t - ts[l]) / (ts[j] - ts[l]);
                }
                sum += prod;
            }
            sum
        })
        .collect()
}

/// Evaluates `ẽ^i(Γ̇)` and `b̃^α(Γ̇)` along a sampled curve in `O`, with
/// velocities from five-point Lagrange differentiation and frames from
/// `section`. Deviations up to `tol` are accepted.
pub fn check_observer_trajectory(
    model: &FundamentalModel,
    traj: &Trajectory,
    section: impl Fn(&TangentPoint) -> Result<FrameAtPoint>,
    tol: f64,
) -> Result<ObserverTrajectoryReport> {
    const DRIFT: f64 = 1e-6;
    let s = &traj.samples;
    if s.len() < 5 {
        return Err(Error::InsufficientSamples(s.len()));
    }
    let mut max_shell_drift = 0.0f64;
    for (i, smp) in s.iter().enumerate() {
        let drift = (model.value(&smp.point)?.abs() - 1.0).abs();
        max_shell_drift = max_shell_drift.max(drift);
        if drift > DRIFT {
            return Err(Error::TrajectoryLeftObserverSpace(i));
        }
    }
    let (mut max_e, mut max_b) = (0.0f64, 0.0f64);
    for k in 0..s.len() {
        let lo = k.saturating_sub(2).min(s.len() - 5);
        let window = &s[lo..lo + 5];
        let ts: Vec<f64> = window.iter().map(|w| w.tau).collect();
        let wts = lagrange_derivative_weights(&ts, s[k].tau);
        let mut xdot = Vector4::zeros();
        let mut ydot = Vector4::zeros();
        for (w, smp) in wts.iter().zip(window) {
            xdot += smp.point.x * *w;
            ydot += smp.point.y * *w;
        }
        let p = s[k].point;
        let n = nonlinear_connection(model, &p)?;
        let fr = section(&p)?;
        let e = fr.finv * xdot;
        let b = fr.finv * (ydot + n * xdot);
        max_e = max_e.max((e - Vector4::new(1.0, 0.0, 0.0, 0.0)).amax());
        max_b = max_b.max(b.fixed_rows::<3>(1).amax());
    }
    let verdict = if max_e > tol {
        TrajectoryVerdict::NotObserver
    } else if max_b > tol {
        TrajectoryVerdict::Observer
    } else {
        TrajectoryVerdict::Inertial
    };
    Ok(ObserverTrajectoryReport {
        verdict,
        max_e_deviation: max_e,
        max_b,
        max_shell_drift,
        samples_checked: s.len(),
    })
}

/// Section-independent diagnostics at one observer point.
#[derive(Debug, Clone, Serialize)]
pub struct ObserverReport {
    pub x: [f64; 4],
    pub y: [f64; 4],
    pub alpha: Vec<f64>,
    pub reeb: Vec<f64>,
    pub alpha_of_r: f64,
    pub sasaki_signature: Vec<i8>,
    pub projector_ranks: [usize; 3],
    pub lie_derivative_residual: f64,
    pub sasaki_reconstruction_residual: f64,
}

pub fn observer_report(model: &FundamentalModel, p: &TangentPoint) -> Result<ObserverReport> {
    let rc = reeb_and_contact(model, p)?;
    let sas = sasaki_metric(model, p)?;
    let fr = crate::frame::axis_frame(model, p)?;
    let split = tangent_split(model, p, &fr)?;
    let lie = lie_derivative_contact(model, p, 1e-4)?;
    let recon = sas.basis.transpose() * sasaki_from_frame(&fr) * sas.basis - sas.components;
    Ok(ObserverReport {
        x: p.x.into(),
        y: p.y.into(),
        alpha: rc.alpha.iter().copied().collect(),
        reeb: rc.r.iter().copied().collect(),
        alpha_of_r: rc.alpha_of_r,
        sasaki_signature: sas.signature.to_vec(),
        projector_ranks: split.ranks,
        lie_derivative_residual: lie.amax(),
        sasaki_reconstruction_residual: recon.amax(),
    })
}

/// Berwald components of a coordinate vector.
pub fn berwald_components(n: &Matrix4<f64>, coord: &Vector8) -> (Vector4<f64>, Vector4<f64>) {
    let u = to_berwald_matrix(n) * coord;
    (head(&u), tail(&u))
}

/// `|L| = 1` within the shell tolerance.
pub fn on_shell(model: &FundamentalModel, p: &TangentPoint) -> Result<bool> {
    Ok((model.value(p)?.abs() - 1.0).abs() <= SHELL_TOL)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minkowski_reeb_is_time_translation() {
        let m = FundamentalModel::minkowski();
        let p = TangentPoint::from_arrays([0.0; 4], [1.0, 0.0, 0.0, 0.0]);
        let rc = reeb_and_contact(&m, &p).unwrap();
        assert_eq!(rc.r, Vector8::from_column_slice(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]));
        assert_eq!(rc.alpha_of_r, 1.0);
    }

    #[test]
    fn lagrange_weights_differentiate_quartics() {
        let ts = [0.0, 0.1, 0.3, 0.35, 0.6];
        let w = lagrange_derivative_weights(&ts, 0.3);
        let d: f64 = ts.iter().zip(&w).map(|(t, w)| w * t.powi(4)).sum();
        assert!((d - 4.0 * 0.3f64.powi(3)).abs() < 1e-12);
    }

    #[test]
    fn pfaffian_of_standard_form() {
        // J = e12 + e34 + e56 has Pf = 1
        let mut m = vec![vec![0.0; 6]; 6];
        for k in 0..3 {
            m[2 * k][2 * k + 1] = 1.0;
            m[2 * k + 1][2 * k] = -1.0;
        }
        assert_eq!(pfaffian(&m), 1.0);
    }
}
