//! Truncated multivariate Taylor arithmetic over the eight tangent-bundle
//! coordinates `(x⁰..x³, y⁰..y³)`.
//!
//! A [`Jet`] of degree `d` stores the Taylor coefficients `c_α = ∂^α f / α!`
//! of a function about a base point for every monomial with `|α| ≤ d`.
//! Arithmetic on jets is exact forward-mode differentiation of arbitrary
//! order: products, quotients and analytic functions propagate all mixed
//! partials at once, and differentiating a jet lowers its degree by one.
//!
//! Monomials are stored in graded order, so the coefficients of a degree-`d`
//! jet are a prefix of those of any higher-degree jet of the same function.

use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::sync::OnceLock;

/// Number of independent variables: four chart coordinates and four fiber
/// coordinates.
pub const NVARS: usize = 8;
/// Highest truncation degree supported by the multiplication tables.
pub const MAX_DEGREE: usize = 4;

/// Exponent vector of a monomial in the eight variables.
pub type Exponents = [u8; NVARS];

struct Tables {
    monomials: Vec<Exponents>,
    /// `len[d]` = number of monomials of total degree `≤ d`.
    len: [usize; MAX_DEGREE + 1],
    /// `(i, j, k)` with `m_i · m_j = m_k`, sorted by `k`.
    mul: Vec<(u16, u16, u16)>,
    /// Number of `mul` entries whose output has degree `≤ d`.
    mul_len: [usize; MAX_DEGREE + 1],
    /// Per variable: `(src, dst, factor)` with `∂_v m_src = factor · m_dst`,
    /// sorted by `src`.
    deriv: Vec<Vec<(u16, u16, f64)>>,
    /// Per variable and degree: number of `deriv` entries with `src < len[d]`.
    deriv_len: Vec<[usize; MAX_DEGREE + 1]>,
}

fn total(e: &Exponents) -> usize {
    e.iter().map(|&k| k as usize).sum()
}

fn build_tables() -> Tables {
    let mut monomials: Vec<Exponents> = Vec::new();
    let mut len = [0usize; MAX_DEGREE + 1];
    for d in 0..=MAX_DEGREE {
        let mut cur = [0u8; NVARS];
        enumerate(d, 0, &mut cur, &mut monomials);
        len[d] = monomials.len();
    }
    let index = |e: &Exponents| -> Option<usize> { monomials.iter().position(|m| m == e) };

    let mut mul = Vec::new();
    for (i, a) in monomials.iter().enumerate() {
        for (j, b) in monomials.iter().enumerate() {
            if total(a) + total(b) > MAX_DEGREE {
                continue;
            }
            let mut c = [0u8; NVARS];
            for v in 0..NVARS {
                c[v] = a[v] + b[v];
            }
            let k = index(&c).expect("product monomial is enumerated");
            mul.push((i as u16, j as u16, k as u16));
        }
    }
    mul.sort_by_key(|t| (t.2, t.0, t.1));
    let mut mul_len = [0usize; MAX_DEGREE + 1];
    for d in 0..=MAX_DEGREE {
        mul_len[d] = mul.iter().filter(|t| (t.2 as usize) < len[d]).count();
    }

    let mut deriv = Vec::with_capacity(NVARS);
    let mut deriv_len = Vec::with_capacity(NVARS);
    for v in 0..NVARS {
        let mut tab = Vec::new();
        for (src, m) in monomials.iter().enumerate() {
            if m[v] == 0 {
                continue;
            }
            let mut dst = *m;
            dst[v] -= 1;
            let k = index(&dst).expect("derivative monomial is enumerated");
            tab.push((src as u16, k as u16, m[v] as f64));
        }
        let mut dl = [0usize; MAX_DEGREE + 1];
        for d in 0..=MAX_DEGREE {
            dl[d] = tab.iter().filter(|t| (t.0 as usize) < len[d]).count();
        }
        deriv.push(tab);
        deriv_len.push(dl);
    }

    Tables {
        monomials,
        len,
        mul,
        mul_len,
        deriv,
        deriv_len,
    }
}

// Lexicographic enumeration of all exponent vectors with total degree `d`.
fn enumerate(d: usize, var: usize, cur: &mut Exponents, out: &mut Vec<Exponents>) {
    if var == NVARS - 1 {
        cur[var] = d as u8;
        out.push(*cur);
        cur[var] = 0;
        return;
    }
    for k in (0..=d).rev() {
        cur[var] = k as u8;
        enumerate(d - k, var + 1, cur, out);
    }
    cur[var] = 0;
}

fn tables() -> &'static Tables {
    static TABLES: OnceLock<Tables> = OnceLock::new();
    TABLES.get_or_init(build_tables)
}

/// Number of Taylor coefficients of a degree-`d` jet.
pub fn jet_len(d: usize) -> usize {
    tables().len[d]
}

/// Position of a monomial in the coefficient vector.
pub fn monomial_index(e: &Exponents) -> Option<usize> {
    let t = tables();
    let d = total(e);
    if d > MAX_DEGREE {
        return None;
    }
    let start = if d == 0 { 0 } else { t.len[d - 1] };
    t.monomials[start..t.len[d]]
        .iter()
        .position(|m| m == e)
        .map(|p| p + start)
}

/// Exponent vector of the monomial stored at `idx`.
pub fn monomial(idx: usize) -> Exponents {
    tables().monomials[idx]
}

/// Truncated Taylor expansion of a scalar function about a base point.
#[derive(Clone, Debug, PartialEq)]
pub struct Jet {
    degree: usize,
    c: Vec<f64>,
}

impl Jet {
    pub fn zero(degree: usize) -> Self {
        assert!(degree <= MAX_DEGREE, "jet degree {degree} exceeds {MAX_DEGREE}");
        Self {
            degree,
            c: vec![0.0; jet_len(degree)],
        }
    }

    pub fn constant(degree: usize, value: f64) -> Self {
        let mut j = Self::zero(degree);
        j.c[0] = value;
        j
    }

    /// The coordinate function `var` expanded about `value`.
    pub fn variable(degree: usize, var: usize, value: f64) -> Self {
        let mut j = Self::constant(degree, value);
        if degree >= 1 {
            j.c[1 + var] = 1.0;
        }
        j
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn value(&self) -> f64 {
        self.c[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.c
    }

    /// Taylor coefficient of a monomial (zero beyond the truncation degree).
    pub fn coeff(&self, e: &Exponents) -> f64 {
        match monomial_index(e) {
            Some(i) if i < self.c.len() => self.c[i],
            _ => 0.0,
        }
    }

    /// The mixed partial derivative `∂^α f` at the base point.
    pub fn partial(&self, e: &Exponents) -> f64 {
        let fact: f64 = e.iter().map(|&k| factorial(k as usize)).product();
        self.coeff(e) * fact
    }

    /// First derivative with respect to variable `var`.
    pub fn d(&self, var: usize) -> Jet {
        assert!(self.degree >= 1, "cannot differentiate a degree-0 jet");
        let t = tables();
        let mut out = Jet::zero(self.degree - 1);
        let tab = &t.deriv[var][..t.deriv_len[var][self.degree]];
        for &(src, dst, f) in tab {
            out.c[dst as usize] += f * self.c[src as usize];
        }
        out
    }

    /// Derivative along a chart coordinate `x^a`.
    pub fn dx(&self, a: usize) -> Jet {
        self.d(a)
    }

    /// Derivative along a fiber coordinate `y^a`.
    pub fn dy(&self, a: usize) -> Jet {
        self.d(4 + a)
    }

    pub fn truncate(&self, degree: usize) -> Jet {
        let degree = degree.min(self.degree);
        Jet {
            degree,
            c: self.c[..jet_len(degree)].to_vec(),
        }
    }

    pub fn scale(&self, s: f64) -> Jet {
        Jet {
            degree: self.degree,
            c: self.c.iter().map(|v| v * s).collect(),
        }
    }

    pub fn mul_jet(&self, other: &Jet) -> Jet {
        let degree = self.degree.min(other.degree);
        let t = tables();
        let mut out = Jet::zero(degree);
        let (a, b) = (&self.c, &other.c);
        for &(i, j, k) in &t.mul[..t.mul_len[degree]] {
            out.c[k as usize] += a[i as usize] * b[j as usize];
        }
        out
    }

    fn add_jet(&self, other: &Jet, sign: f64) -> Jet {
        let degree = self.degree.min(other.degree);
        let n = jet_len(degree);
        Jet {
            degree,
            c: (0..n).map(|i| self.c[i] + sign * other.c[i]).collect(),
        }
    }

    // Evaluates Σ_k coef[k] · u^k where u = self − value has no constant term.
    fn series(&self, coef: &[f64]) -> Jet {
        let mut u = self.clone();
        u.c[0] = 0.0;
        let mut acc = Jet::constant(self.degree, coef[self.degree]);
        for k in (0..self.degree).rev() {
            acc = acc.mul_jet(&u);
            acc.c[0] += coef[k];
        }
        acc
    }

    pub fn recip(&self) -> Jet {
        let a0 = self.value();
        let coef: Vec<f64> = (0..=self.degree)
            .map(|k| (-1.0f64).powi(k as i32) / a0.powi(k as i32 + 1))
            .collect();
        self.series(&coef)
    }

    /// `self^p` for a jet with positive value.
    pub fn powf(&self, p: f64) -> Jet {
        let a0 = self.value();
        let mut coef = Vec::with_capacity(self.degree + 1);
        let mut binom = 1.0;
        for k in 0..=self.degree {
            coef.push(binom * a0.powf(p - k as f64));
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.series(&coef)
    }

    pub fn sqrt(&self) -> Jet {
        self.powf(0.5)
    }

    pub fn exp(&self) -> Jet {
        let e0 = self.value().exp();
        let coef: Vec<f64> = (0..=self.degree).map(|k| e0 / factorial(k)).collect();
        self.series(&coef)
    }

    pub fn powi(&self, n: u32) -> Jet {
        let mut acc = Jet::constant(self.degree, 1.0);
        for _ in 0..n {
            acc = acc.mul_jet(self);
        }
        acc
    }

    /// `|f|` expanded about a base point where `f ≠ 0`.
    pub fn abs(&self) -> Jet {
        if self.value() < 0.0 {
            -self
        } else {
            self.clone()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }
}

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr<&Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                let f: fn(&Jet, &Jet) -> Jet = $body;
                f(self, rhs)
            }
        }
        impl $tr<Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Jet> for Jet {
            type Output = Jet;
            fn $m(self, rhs: &Jet) -> Jet {
                (&self).$m(rhs)
            }
        }
        impl $tr<Jet> for &Jet {
            type Output = Jet;
            fn $m(self, rhs: Jet) -> Jet {
                self.$m(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| a.add_jet(b, 1.0));
forward_binop!(Sub, sub, |a, b| a.add_jet(b, -1.0));
forward_binop!(Mul, mul, |a, b| a.mul_jet(b));

impl Add<f64> for Jet {
    type Output = Jet;
    fn add(mut self, rhs: f64) -> Jet {
        self.c[0] += rhs;
        self
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if rhs.degree < self.degree {
            *self = self.truncate(rhs.degree);
        }
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a += b;
        }
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        if rhs.degree < self.degree {
            *self = self.truncate(rhs.degree);
        }
        for (a, b) in self.c.iter_mut().zip(&rhs.c) {
            *a -= b;
        }
    }
}

/// Arithmetic needed to evaluate a fundamental geometry function in closed
/// form, either on plain numbers or on jets.
pub trait Scalar:
    Clone
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Neg<Output = Self>
    + Add<f64, Output = Self>
    + Mul<f64, Output = Self>
{
    /// A constant of the same kind (and jet degree) as `self`.
    fn constant_like(&self, c: f64) -> Self;
    fn exp(&self) -> Self;
    fn powi(&self, n: u32) -> Self;
    fn value(&self) -> f64;
}

impl Scalar for f64 {
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn powi(&self, n: u32) -> Self {
        f64::powi(*self, n as i32)
    }
    fn value(&self) -> f64 {
        *self
    }
}

impl Scalar for Jet {
    fn constant_like(&self, c: f64) -> Self {
        Jet::constant(self.degree, c)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn powi(&self, n: u32) -> Self {
        Jet::powi(self, n)
    }
    fn value(&self) -> f64 {
        self.c[0]
    }
}

/// 4×4 matrix of jets, indexed `[row][col]`.
pub type JetMat = [[Jet; 4]; 4];

pub fn jet_mat(f: impl Fn(usize, usize) -> Jet) -> JetMat {
    std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)))
}

pub fn mat_value(m: &JetMat) -> nalgebra::Matrix4<f64> {
    nalgebra::Matrix4::from_fn(|i, j| m[i][j].value())
}

pub fn mat_mul(a: &JetMat, b: &JetMat) -> JetMat {
    jet_mat(|i, j| {
        let mut acc = a[i][0].mul_jet(&b[0][j]);
        for k in 1..4 {
            acc += &a[i][k].mul_jet(&b[k][j]);
        }
        acc
    })
}

/// Inverse of a jet-valued matrix with invertible value, by the Neumann
/// series `(M₀ + E)⁻¹ = Σ (−M₀⁻¹E)^k M₀⁻¹`, which terminates because `E` has
/// no constant term.
pub fn mat_inverse(m: &JetMat) -> Option<JetMat> {
    let deg = m.iter().flatten().map(Jet::degree).min().unwrap_or(0);
    let m0 = mat_value(m);
    let inv0 = m0.try_inverse()?;
    // X = −M₀⁻¹ E
    let x = jet_mat(|i, j| {
        let mut acc = Jet::zero(deg);
        for k in 0..4 {
            let mut e = m[k][j].truncate(deg);
            e.c[0] = 0.0;
            acc -= &e.scale(inv0[(i, k)]);
        }
        acc
    });
    let inv0_jet = jet_mat(|i, j| Jet::constant(deg, inv0[(i, j)]));
    // Horner: S = I + X(I + X(I + ...)), then S·M₀⁻¹.
    let identity = jet_mat(|i, j| Jet::constant(deg, if i == j { 1.0 } else { 0.0 }));
    let mut s = identity.clone();
    for _ in 0..deg {
        let xs = mat_mul(&x, &s);
        s = jet_mat(|i, j| &identity[i][j] + &xs[i][j]);
    }
    Some(mat_mul(&s, &inv0_jet))
}
