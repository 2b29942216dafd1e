//! The Lie algebras `so(4,1)`, `iso(3,1)` and `so(3,2)` as `h ⊕ z` with
//! `h = so(3,1)`, and the split of `h ⊕ z` under spatial rotations.

use nalgebra::{Matrix3, Matrix4, Vector3, Vector4};
use rand::Rng;

use crate::frame::{eta, rotation4};

/// Sign of the cosmological constant selecting the model group:
/// `+1` de Sitter, `0` Poincaré, `−1` anti-de Sitter.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModelGroup {
    pub sign_lambda: i8,
}

impl ModelGroup {
    pub const DE_SITTER: Self = Self { sign_lambda: 1 };
    pub const POINCARE: Self = Self { sign_lambda: 0 };
    pub const ANTI_DE_SITTER: Self = Self { sign_lambda: -1 };

    pub fn all() -> [Self; 3] {
        [Self::DE_SITTER, Self::POINCARE, Self::ANTI_DE_SITTER]
    }

    pub fn name(&self) -> &'static str {
        match self.sign_lambda {
            1 => "so(4,1)",
            0 => "iso(3,1)",
            _ => "so(3,2)",
        }
    }

    pub fn from_sign(sign_lambda: i8) -> Self {
        Self { sign_lambda: sign_lambda.signum() }
    }
}

/// `a = ½ h^i_j H_i^j + z^i Z_i`, stored as the matrix `h` (row `i`,
/// column `j`) and the vector `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlgebraElement {
    pub h: Matrix4<f64>,
    pub z: Vector4<f64>,
}

fn levi_civita3(a: usize, b: usize, c: usize) -> f64 {
    match (a, b, c) {
        (0, 1, 2) | (1, 2, 0) | (2, 0, 1) => 1.0,
        (0, 2, 1) | (2, 1, 0) | (1, 0, 2) => -1.0,
        _ => 0.0,
    }
}

impl AlgebraElement {
    pub fn zero() -> Self {
        Self { h: Matrix4::zeros(), z: Vector4::zeros() }
    }

    /// Builds `h` from rotation `r^α` and boost `l^α` components:
    /// `h^α_0 = h^0_α = l^α`, `h^β_γ = −ε_αβγ r^α`.
    pub fn from_split(rot: Vector3<f64>, boost: Vector3<f64>, z_spatial: Vector3<f64>, z0: f64) -> Self {
        let mut h = Matrix4::zeros();
        for a in 0..3 {
            h[(a + 1, 0)] = boost[a];
            h[(0, a + 1)] = boost[a];
            for b in 0..3 {
                h[(a + 1, b + 1)] = -(0..3).map(|c| levi_civita3(c, a, b) * rot[c]).sum::<f64>();
            }
        }
        Self { h, z: Vector4::new(z0, z_spatial[0], z_spatial[1], z_spatial[2]) }
    }

    /// `(rotation, boost, spatial translation, temporal translation)`.
    pub fn split(&self) -> (Vector3<f64>, Vector3<f64>, Vector3<f64>, f64) {
        let rot = Vector3::new(-self.h[(2, 3)], -self.h[(3, 1)], -self.h[(1, 2)]);
        let boost = Vector3::new(self.h[(1, 0)], self.h[(2, 0)], self.h[(3, 0)]);
        (rot, boost, Vector3::new(self.z[1], self.z[2], self.z[3]), self.z[0])
    }

    /// The ten components `(r, l, z⃗, z⁰)` as one vector.
    pub fn components(&self) -> [f64; 10] {
        let (r, l, zs, z0) = self.split();
        [r[0], r[1], r[2], l[0], l[1], l[2], zs[0], zs[1], zs[2], z0]
    }

    pub fn from_components(c: &[f64; 10]) -> Self {
        Self::from_split(
            Vector3::new(c[0], c[1], c[2]),
            Vector3::new(c[3], c[4], c[5]),
            Vector3::new(c[6], c[7], c[8]),
            c[9],
        )
    }

    /// Generator `k` of the basis `(R_1..R_3, L_1..L_3, Z_1..Z_3, Z_0)`.
    pub fn generator(k: usize) -> Self {
        let mut c = [0.0; 10];
        c[k] = 1.0;
        Self::from_components(&c)
    }

    pub fn random(rng: &mut impl Rng) -> Self {
        let c: [f64; 10] = std::array::from_fn(|_| rng.gen_range(-1.0..1.0));
        Self::from_components(&c)
    }

    /// `max |η h + (η h)ᵀ|`, zero for a valid element.
    pub fn antisymmetry_defect(&self) -> f64 {
        let eh = eta() * self.h;
        (eh + eh.transpose()).amax()
    }

    /// Is this in the rotation subalgebra `k`?
    pub fn is_rotation(&self) -> bool {
        let (_, l, zs, z0) = self.split();
        l == Vector3::zeros() && zs == Vector3::zeros() && z0 == 0.0
    }

    pub fn scale(&self, s: f64) -> Self {
        Self { h: self.h * s, z: self.z * s }
    }

    pub fn add(&self, o: &Self) -> Self {
        Self { h: self.h + o.h, z: self.z + o.z }
    }

    pub fn sub(&self, o: &Self) -> Self {
        Self { h: self.h - o.h, z: self.z - o.z }
    }

    pub fn amax(&self) -> f64 {
        self.h.amax().max(self.z.amax())
    }
}

/// `[a, b] = (h_a h_b − h_b h_a − sgnΛ (z_a z_bᵀ − z_b z_aᵀ) η, h_a z_b − h_b z_a)`.
pub fn algebra_bracket(a: &AlgebraElement, b: &AlgebraElement, grp: ModelGroup) -> AlgebraElement {
    let s = grp.sign_lambda as f64;
    let zz = (a.z * b.z.transpose() - b.z * a.z.transpose()) * eta();
    AlgebraElement { h: a.h * b.h - b.h * a.h - zz * s, z: a.h * b.z - b.h * a.z }
}

/// `Ad(k)` for a spatial rotation `k = diag(1, R)`: `(k h k⁻¹, k z)`.
pub fn adjoint_rotation(r: &Matrix3<f64>, a: &AlgebraElement) -> AlgebraElement {
    let k = rotation4(r);
    let kinv = rotation4(&r.transpose());
    AlgebraElement { h: k * a.h * kinv, z: k * a.z }
}

/// Rotation matrix `exp(θ n̂ × ·)`.
pub fn rotation_matrix(axis: &Vector3<f64>, angle: f64) -> Matrix3<f64> {
    nalgebra::Rotation3::from_axis_angle(&nalgebra::Unit::new_normalize(*axis), angle).into_inner()
}
