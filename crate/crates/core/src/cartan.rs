//! The Cartan connection on the observer frame bundle, its fundamental
//! vector fields and curvature, the MacDowell–Mansouri densities and the
//! spacetime-reconstruction diagnostics.
//!
//! Frame-bundle points are `(x, f)` with 20 ambient coordinates; a tangent
//! vector is `(dx^a, df_i^a)` with `df_i^a` at index `4 + 4i + a`.
//!
//! The totally antisymmetric tensor is `ε_0123 = +√|det g^F|`, so that
//! `ε^0123 = −1/√|det g^F|`.

use nalgebra::{Matrix3, Matrix4, SVector, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{adjoint_rotation, algebra_bracket, rotation_matrix, AlgebraElement, ModelGroup};
use crate::causal::CausalStructure;
use crate::curvature::{gravity_density_from, linear_curvature_from, nonlinear_curvature_from};
use crate::error::{Error, Result};
use crate::finsler::{classify_ray, normalize_to_shell};
use crate::frame::{axis_frame, FrameAtPoint, FRAME_TOL};
use crate::geometry::{ConnectionJets, Tensor3, Tensor4};
use crate::jet::mat_value;
use crate::model::{FundamentalModel, TangentPoint};

pub type Ambient = SVector<f64, 20>;

pub fn ambient(dx: &Vector4<f64>, df: &Matrix4<f64>) -> Ambient {
    let mut v = Ambient::zeros();
    for a in 0..4 {
        v[a] = dx[a];
        for i in 0..4 {
            v[4 + 4 * i + a] = df[(a, i)];
        }
    }
    v
}

pub fn ambient_dx(v: &Ambient) -> Vector4<f64> {
    v.fixed_rows::<4>(0).into_owned()
}

/// Column `i` holds `df_i`.
pub fn ambient_df(v: &Ambient) -> Matrix4<f64> {
    Matrix4::from_fn(|a, i| v[4 + 4 * i + a])
}

// K^a_c = T^a_bc u^b
fn contract_first(t: &Tensor3, u: &Vector4<f64>) -> Matrix4<f64> {
    Matrix4::from_fn(|a, c| (0..4).map(|b| t[a][b][c] * u[b]).sum())
}

/// Everything the Cartan connection needs at one frame: the frame and the
/// values and first derivatives of `N`, `F` and `C` at `(x, f_0)`.
#[derive(Debug, Clone)]
pub struct CartanPoint {
    pub frame: FrameAtPoint,
    pub n: Matrix4<f64>,
    pub f: Tensor3,
    pub c: Tensor3,
    /// `∂_k F^a_bc` and `∂̄_k F^a_bc` as `[k][a][b][c]`.
    pub f_dx: Tensor4,
    pub f_dy: Tensor4,
    pub c_dx: Tensor4,
    pub c_dy: Tensor4,
    /// Multiplies `ω`; anything other than 1 corrupts the connection on
    /// purpose (fault injection).
    pub omega_scale: f64,
    jets: ConnectionJets,
}

impl CartanPoint {
    /// Checks orthonormality of the frame, then evaluates the connection data.
    pub fn new(model: &FundamentalModel, frame: &FrameAtPoint) -> Result<Self> {
        let res = frame.orthonormality_residual(model)?;
        if res > FRAME_TOL {
            return Err(Error::FrameNotOrthonormal(res));
        }
        Self::ambient(model, frame.x, frame.f)
    }

    /// The same data at an arbitrary invertible `f`, without the
    /// orthonormality check (for evaluating the fields off `P`).
    pub fn ambient(model: &FundamentalModel, x: Vector4<f64>, f: Matrix4<f64>) -> Result<Self> {
        let finv = f.try_inverse().ok_or(Error::FrameNotOrthonormal(f64::INFINITY))?;
        let frame = FrameAtPoint { x, f, finv };
        let jets = ConnectionJets::new(model, &frame.point(), 4)?;
        let val = |t: &crate::geometry::JetTensor3| crate::geometry::tensor3(|a, b, c| t[a][b][c].value());
        let d = |t: &crate::geometry::JetTensor3, y: bool| {
            crate::geometry::tensor4(|k, a, b, c| if y { t[a][b][c].dy(k).value() } else { t[a][b][c].dx(k).value() })
        };
        Ok(Self {
            frame,
            n: jets.spray.n_value(),
            f: val(&jets.f),
            c: val(&jets.c),
            f_dx: d(&jets.f, false),
            f_dy: d(&jets.f, true),
            c_dx: d(&jets.c, false),
            c_dy: d(&jets.c, true),
            omega_scale: 1.0,
            jets,
        })
    }

    /// The same point with the frame rotated, `f ↦ f·diag(1, R)`.
    pub fn rotated(&self, r: &Matrix3<f64>) -> Self {
        Self { frame: self.frame.rotated(r), ..self.clone() }
    }

    /// `A(v) = ω(v) + e(v)`.
    pub fn connection(&self, v: &Ambient) -> AlgebraElement {
        let (f, finv) = (&self.frame.f, &self.frame.finv);
        let dx = ambient_dx(v);
        let df = ambient_df(v);
        let e = finv * dx;
        let df0 = df.column(0).into_owned() + self.n * dx;
        // M^a_b = F^a_bc dx^c + C^a_bc δf_0^c
        let m = Matrix4::from_fn(|a, b| {
            (0..4).map(|c| self.f[a][b][c] * dx[c] + self.c[a][b][c] * df0[c]).sum::<f64>()
        });
        let omega = (finv * df + finv * m * f) * self.omega_scale;
        AlgebraElement { h: omega, z: e }
    }

    /// `Ā(a)`: the inverse of `A` at this point.
    pub fn fundamental(&self, a: &AlgebraElement) -> Ambient {
        let f = &self.frame.f;
        let u = f * a.h.column(0);
        let w = f * a.z;
        let df = f * a.h - contract_first(&self.c, &u) * f - contract_first(&self.f, &w) * f;
        ambient(&w, &df)
    }

    // first-order change of a tensor along (dx, dy)
    fn shifted(t_dx: &Tensor4, t_dy: &Tensor4, dx: &Vector4<f64>, dy: &Vector4<f64>) -> Tensor3 {
        crate::geometry::tensor3(|a, b, c| {
            (0..4).map(|k| t_dx[k][a][b][c] * dx[k] + t_dy[k][a][b][c] * dy[k]).sum()
        })
    }

    /// Directional derivative of the field `Ā(a)` along `dir`.
    pub fn fundamental_derivative(&self, a: &AlgebraElement, dir: &Ambient) -> Ambient {
        let f = &self.frame.f;
        let ddx = ambient_dx(dir);
        let ddf = ambient_df(dir);
        let ddy = ddf.column(0).into_owned();
        let u = f * a.h.column(0);
        let w = f * a.z;
        let du = ddf * a.h.column(0);
        let dw = ddf * a.z;
        let dc = Self::shifted(&self.c_dx, &self.c_dy, &ddx, &ddy);
        let dfc = Self::shifted(&self.f_dx, &self.f_dy, &ddx, &ddy);
        let kc = contract_first(&self.c, &u);
        let kf = contract_first(&self.f, &w);
        let d_df = ddf * a.h
            - (contract_first(&dc, &u) * f + contract_first(&self.c, &du) * f + kc * ddf)
            - (contract_first(&dfc, &w) * f + contract_first(&self.f, &dw) * f + kf * ddf);
        ambient(&dw, &d_df)
    }

    /// Lie bracket `[Ā(a), Ā(b)]` of fundamental vector fields.
    pub fn field_bracket(&self, a: &AlgebraElement, b: &AlgebraElement) -> Ambient {
        let xa = self.fundamental(a);
        let xb = self.fundamental(b);
        self.fundamental_derivative(b, &xa) - self.fundamental_derivative(a, &xb)
    }

    /// `F(Ā(a), Ā(b)) = [a, b] − A([Ā(a), Ā(b)])`.
    pub fn curvature(&self, a: &AlgebraElement, b: &AlgebraElement, grp: ModelGroup) -> AlgebraElement {
        algebra_bracket(a, b, grp).sub(&self.connection(&self.field_bracket(a, b)))
    }

    /// `Σ_α b^α([ē_α, ē_0])`, the boost part of `A([Ā(Z_α), Ā(Z_0)])`.
    pub fn cartan_density(&self) -> f64 {
        let z0 = AlgebraElement::generator(9);
        (0..3)
            .map(|al| {
                let a = self.connection(&self.field_bracket(&AlgebraElement::generator(6 + al), &z0));
                a.split().1[al]
            })
            .sum()
    }

    /// The gravity density `R^a_ab y^b` computed on the Finsler side.
    pub fn finsler_density(&self) -> f64 {
        gravity_density_from(&nonlinear_curvature_from(&self.jets.spray), &self.frame.point())
    }

    pub fn mm_density(&self, grp: ModelGroup) -> MmDensity {
        let s = grp.sign_lambda as f64;
        let lin = linear_curvature_from(&self.jets);
        let g = mat_value(&self.jets.gf);
        let ginv = mat_value(&self.jets.gf_inv);
        let mut curv = 0.0;
        for a in 0..4 {
            for b in 0..4 {
                for c in 0..4 {
                    curv += ginv[(a, b)] * lin.r[c][a][c][b];
                }
            }
        }
        let low = crate::geometry::tensor4(|a, b, c, d| (0..4).map(|e| g[(a, e)] * lin.r[e][b][c][d]).sum());
        // ε^abcd ε^efgh carries 1/|det g| in total.
        let inv_det = 1.0 / g.determinant().abs();
        let perms = permutations4();
        let mut gb = 0.0;
        for (p1, s1) in &perms {
            for (p2, s2) in &perms {
                let [a, b, e, f] = *p1;
                let [c, d, gg, h] = *p2;
                gb += s1 * s2 * low[a][b][c][d] * low[e][f][gg][h];
            }
        }
        MmDensity {
            cosmological: -s * s,
            curvature_term: s * curv / 6.0,
            gauss_bonnet: -gb * inv_det / 96.0,
        }
    }
}

fn permutations4() -> Vec<([usize; 4], f64)> {
    let mut out = Vec::with_capacity(24);
    for a in 0..4 {
        for b in 0..4 {
            for c in 0..4 {
                for d in 0..4 {
                    let p = [a, b, c, d];
                    if a == b || a == c || a == d || b == c || b == d || c == d {
                        continue;
                    }
                    let mut inv = 0;
                    for i in 0..4 {
                        for j in i + 1..4 {
                            if p[i] > p[j] {
                                inv += 1;
                            }
                        }
                    }
                    out.push((p, if inv % 2 == 0 { 1.0 } else { -1.0 }));
                }
            }
        }
    }
    out
}

pub fn cartan_connection(model: &FundamentalModel, fr: &FrameAtPoint, v: &Ambient) -> Result<AlgebraElement> {
    Ok(CartanPoint::new(model, fr)?.connection(v))
}

pub fn fundamental_vector_field(model: &FundamentalModel, fr: &FrameAtPoint, a: &AlgebraElement) -> Result<Ambient> {
    Ok(CartanPoint::new(model, fr)?.fundamental(a))
}

pub fn cartan_curvature(
    model: &FundamentalModel,
    fr: &FrameAtPoint,
    a: &AlgebraElement,
    b: &AlgebraElement,
    grp: ModelGroup,
) -> Result<AlgebraElement> {
    Ok(CartanPoint::new(model, fr)?.curvature(a, b, grp))
}

/// The three MacDowell–Mansouri densities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MmDensity {
    pub cosmological: f64,
    pub curvature_term: f64,
    pub gauss_bonnet: f64,
}

pub fn mm_density(model: &FundamentalModel, fr: &FrameAtPoint, grp: ModelGroup) -> Result<MmDensity> {
    Ok(CartanPoint::new(model, fr)?.mm_density(grp))
}

pub const C1_TOL: f64 = 1e-9;
pub const C2_TOL: f64 = 1e-8;
pub const C3_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy)]
pub struct CartanOptions {
    pub seed: u64,
    pub omega_scale: f64,
}

impl Default for CartanOptions {
    fn default() -> Self {
        Self { seed: 0, omega_scale: 1.0 }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CartanConditionReport {
    pub group: &'static str,
    pub samples: usize,
    pub c1_residual: f64,
    pub c2_residual: f64,
    pub c3_residual: f64,
    pub c1_pass: bool,
    pub c2_pass: bool,
    pub c3_pass: bool,
}

impl CartanConditionReport {
    pub fn all_pass(&self) -> bool {
        self.c1_pass && self.c2_pass && self.c3_pass
    }
}

pub fn verify_cartan_conditions(
    model: &FundamentalModel,
    fr: &FrameAtPoint,
    grp: ModelGroup,
    n_samples: usize,
) -> Result<CartanConditionReport> {
    verify_cartan_conditions_with(model, fr, grp, n_samples, &CartanOptions::default())
}

pub fn verify_cartan_conditions_with(
    model: &FundamentalModel,
    fr: &FrameAtPoint,
    grp: ModelGroup,
    n_samples: usize,
    opts: &CartanOptions,
) -> Result<CartanConditionReport> {
    let mut cp = CartanPoint::new(model, fr)?;
    cp.omega_scale = opts.omega_scale;
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let (mut c1, mut c2, mut c3) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..n_samples {
        // C1: A ∘ Ā = id
        let a = AlgebraElement::random(&mut rng);
        c1 = c1.max(cp.connection(&cp.fundamental(&a)).sub(&a).amax());

        // C2: A_{f k}(R_k* v) = Ad(k⁻¹) A_f(v)
        let axis = Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let r = rotation_matrix(&axis, rng.gen_range(-3.0..3.0));
        let v = Ambient::from_fn(|_, _| rng.gen_range(-1.0..1.0));
        let k = crate::frame::rotation4(&r);
        let moved = ambient(&ambient_dx(&v), &(ambient_df(&v) * k));
        let lhs = cp.rotated(&r).connection(&moved);
        let rhs = adjoint_rotation(&r.transpose(), &cp.connection(&v));
        c2 = c2.max(lhs.sub(&rhs).amax());

        // C3: on the infinitesimal right action of k, A is Maurer–Cartan.
        let rot = AlgebraElement::from_split(
            Vector3::from_fn(|_, _| rng.gen_range(-1.0..1.0)),
            Vector3::zeros(),
            Vector3::zeros(),
            0.0,
        );
        let vert = ambient(&Vector4::zeros(), &(cp.frame.f * rot.h));
        c3 = c3.max(cp.connection(&vert).sub(&rot).amax());
    }
    Ok(CartanConditionReport {
        group: grp.name(),
        samples: n_samples,
        c1_residual: c1,
        c2_residual: c2,
        c3_residual: c3,
        c1_pass: c1 <= C1_TOL,
        c2_pass: c2 <= C2_TOL,
        c3_pass: c3 <= C3_TOL,
    })
}

/// Random observer points at `x`, sampled around the cone seed direction.
pub fn sample_observer_points(model: &FundamentalModel, x: &Vector4<f64>, n: usize, seed: u64) -> Result<Vec<TangentPoint>> {
    let cs = CausalStructure::new(model, *x)?;
    let y0 = cs.seed();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(n);
    let mut tries = 0;
    while out.len() < n {
        tries += 1;
        if tries > 100 * n.max(1) {
            return Err(Error::NoConeFound);
        }
        let dy = Vector4::from_fn(|_, _| rng.gen_range(-0.15..0.15)) * y0.norm();
        let y = if out.is_empty() { y0 } else { y0 + dy };
        let p = TangentPoint::new(*x, y);
        if !classify_ray(model, &p)?.is_observer_ray() || !cs.contains(&y)? {
            continue;
        }
        out.push(normalize_to_shell(model, &p)?);
    }
    Ok(out)
}

/// A perturbation added to the vertical fields `b̃_α` (coordinate
/// components on `TM`), used to inject non-integrability.
pub type VerticalPerturbation<'a> = &'a dyn Fn(usize, &TangentPoint) -> SVector<f64, 8>;

#[derive(Debug, Clone, Serialize)]
pub struct IntegrabilityReport {
    pub samples: usize,
    /// Largest horizontal component of `[b̃_α, b̃_β]`.
    pub frobenius_residual: f64,
    /// Largest `|σ(o) − y|` with `σ = π′_* r`.
    pub embedding_residual: f64,
}

pub fn integrability_check(model: &FundamentalModel, x: &Vector4<f64>, n_samples: usize) -> Result<IntegrabilityReport> {
    integrability_check_with(model, x, n_samples, None)
}

/// `b̃_α` at `(x, y)` in coordinate components, using the axis-seeded section
/// evaluated at the shell point over `(x, y)`.
fn vertical_field(
    model: &FundamentalModel,
    q: &TangentPoint,
    alpha: usize,
    pert: Option<VerticalPerturbation>,
) -> Result<SVector<f64, 8>> {
    let fr = axis_frame(model, &normalize_to_shell(model, q)?)?;
    let cp = CartanPoint::ambient(model, fr.x, fr.f)?;
    let v = cp.fundamental(&AlgebraElement::generator(3 + alpha));
    let mut out = SVector::<f64, 8>::zeros();
    for a in 0..4 {
        out[a] = v[a];
        out[4 + a] = v[4 + a];
    }
    if let Some(p) = pert {
        out += p(alpha, q);
    }
    Ok(out)
}

fn field_jacobian_apply(
    model: &FundamentalModel,
    q: &TangentPoint,
    alpha: usize,
    dir: &SVector<f64, 8>,
    pert: Option<VerticalPerturbation>,
) -> Result<SVector<f64, 8>> {
    let at = |t: f64| -> Result<SVector<f64, 8>> {
        let mut s = *q;
        for a in 0..4 {
            s.x[a] += t * dir[a];
            s.y[a] += t * dir[4 + a];
        }
        vertical_field(model, &s, alpha, pert)
    };
    let central = |h: f64| -> Result<SVector<f64, 8>> { Ok((at(h)? - at(-h)?) / (2.0 * h)) };
    let h = 1e-4;
    Ok((central(h / 2.0)? * 4.0 - central(h)?) / 3.0)
}

pub fn integrability_check_with(
    model: &FundamentalModel,
    x: &Vector4<f64>,
    n_samples: usize,
    pert: Option<VerticalPerturbation>,
) -> Result<IntegrabilityReport> {
    let points = sample_observer_points(model, x, n_samples, 7)?;
    let (mut frob, mut emb) = (0.0f64, 0.0f64);
    for p in &points {
        let fields: Vec<SVector<f64, 8>> =
            (0..3).map(|al| vertical_field(model, p, al, pert)).collect::<Result<_>>()?;
        for al in 0..3 {
            for be in al + 1..3 {
                let bracket = field_jacobian_apply(model, p, be, &fields[al], pert)?
                    - field_jacobian_apply(model, p, al, &fields[be], pert)?;
                frob = frob.max(bracket.fixed_rows::<4>(0).amax());
            }
        }
        let fr = axis_frame(model, p)?;
        let cp = CartanPoint::new(model, &fr)?;
        let reeb = cp.fundamental(&AlgebraElement::generator(9));
        emb = emb.max((ambient_dx(&reeb) - p.y).amax());
    }
    Ok(IntegrabilityReport { samples: points.len(), frobenius_residual: frob, embedding_residual: emb })
}

/// Everything the Cartan report needs at one frame.
#[derive(Debug, Clone, Serialize)]
pub struct CartanReport {
    pub x: [f64; 4],
    pub y: [f64; 4],
    pub conditions: CartanConditionReport,
    pub cartan_density: f64,
    pub finsler_density: f64,
    pub mm_density: MmDensity,
}

pub fn cartan_report(
    model: &FundamentalModel,
    fr: &FrameAtPoint,
    grp: ModelGroup,
    n_samples: usize,
    opts: &CartanOptions,
) -> Result<CartanReport> {
    let conditions = verify_cartan_conditions_with(model, fr, grp, n_samples, opts)?;
    let cp = CartanPoint::new(model, fr)?;
    Ok(CartanReport {
        x: fr.x.into(),
        y: fr.y().into(),
        conditions,
        cartan_density: cp.cartan_density(),
        finsler_density: cp.finsler_density(),
        mm_density: cp.mm_density(grp),
    })
}
