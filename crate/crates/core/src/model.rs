//! Fundamental geometry functions `L(x, y)` and their construction from JSON.

use std::collections::BTreeMap;

use nalgebra::{Matrix4, Vector4};
use serde_json::Value;

use crate::error::{Error, Result};
use crate::jet::{Jet, Scalar, MAX_DEGREE};

/// A point `(x, y)` of the tangent bundle in the model chart.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentPoint {
    pub x: Vector4<f64>,
    pub y: Vector4<f64>,
}

impl TangentPoint {
    pub fn new(x: Vector4<f64>, y: Vector4<f64>) -> Self {
        Self { x, y }
    }

    pub fn from_arrays(x: [f64; 4], y: [f64; 4]) -> Self {
        Self::new(Vector4::from(x), Vector4::from(y))
    }

    pub fn with_y(&self, y: Vector4<f64>) -> Self {
        Self { x: self.x, y }
    }

    pub fn scaled(&self, lambda: f64) -> Self {
        self.with_y(self.y * lambda)
    }
}

/// A smooth coefficient function of the chart coordinates.
#[derive(Debug, Clone, PartialEq)]
pub enum Coeff {
    Const(f64),
    Var(usize),
    Sum(Vec<Coeff>),
    Prod(Vec<Coeff>),
    Pow(Box<Coeff>, u32),
    Exp(Box<Coeff>),
}

impl Coeff {
    /// `c0 + c1 · x^var`
    pub fn affine(c0: f64, c1: f64, var: usize) -> Self {
        Coeff::Sum(vec![
            Coeff::Const(c0),
            Coeff::Prod(vec![Coeff::Const(c1), Coeff::Var(var)]),
        ])
    }

    pub fn squared(self) -> Self {
        Coeff::Pow(Box::new(self), 2)
    }

    pub fn times(self, c: f64) -> Self {
        Coeff::Prod(vec![Coeff::Const(c), self])
    }

    /// The value if the function does not depend on `x`.
    pub fn as_const(&self) -> Option<f64> {
        match self {
            Coeff::Const(c) => Some(*c),
            Coeff::Var(_) => None,
            Coeff::Sum(v) => v.iter().map(Coeff::as_const).sum(),
            Coeff::Prod(v) => v.iter().map(Coeff::as_const).product(),
            Coeff::Pow(b, n) => b.as_const().map(|c| c.powi(*n as i32)),
            Coeff::Exp(b) => b.as_const().map(f64::exp),
        }
    }

    pub fn eval<S: Scalar>(&self, x: &[S; 4]) -> S {
        match self {
            Coeff::Const(c) => x[0].constant_like(*c),
            Coeff::Var(i) => x[*i].clone(),
            Coeff::Sum(v) => v
                .iter()
                .fold(x[0].constant_like(0.0), |acc, c| acc + c.eval(x)),
            Coeff::Prod(v) => v.iter().fold(x[0].constant_like(1.0), |acc, c| match c {
                Coeff::Const(k) => acc * *k,
                _ => acc * c.eval(x),
            }),
            Coeff::Pow(b, n) => b.eval(x).powi(*n),
            Coeff::Exp(b) => b.eval(x).exp(),
        }
    }

    /// The constant function equal to `self` at `x`.
    pub fn frozen(&self, x: &Vector4<f64>) -> Coeff {
        let xs = [x[0], x[1], x[2], x[3]];
        Coeff::Const(self.eval(&xs))
    }

    fn parse(v: &Value) -> Result<Coeff> {
        let bad = |msg: &str| Error::InvalidParams(format!("{msg}: {v}"));
        if let Some(c) = v.as_f64() {
            return Ok(Coeff::Const(c));
        }
        let obj = v.as_object().ok_or_else(|| bad("coefficient must be a number or object"))?;
        if obj.len() != 1 {
            return Err(bad("coefficient object must have exactly one key"));
        }
        let (key, arg) = obj.iter().next().expect("one entry");
        let list = |a: &Value| -> Result<Vec<Coeff>> {
            a.as_array()
                .ok_or_else(|| bad("expected an array"))?
                .iter()
                .map(Coeff::parse)
                .collect()
        };
        match key.as_str() {
            "const" => arg.as_f64().map(Coeff::Const).ok_or_else(|| bad("const needs a number")),
            "var" => match arg.as_u64() {
                Some(i) if i < 4 => Ok(Coeff::Var(i as usize)),
                _ => Err(bad("var needs an index 0..3")),
            },
            "sum" => Ok(Coeff::Sum(list(arg)?)),
            "prod" => Ok(Coeff::Prod(list(arg)?)),
            "exp" => Ok(Coeff::Exp(Box::new(Coeff::parse(arg)?))),
            "pow" => {
                let a = arg.as_array().filter(|a| a.len() == 2).ok_or_else(|| bad("pow needs [base, n]"))?;
                let n = a[1].as_u64().ok_or_else(|| bad("pow exponent must be a non-negative integer"))?;
                Ok(Coeff::Pow(Box::new(Coeff::parse(&a[0])?), n as u32))
            }
            "poly" => {
                // [[c, [p0, p1, p2, p3]], ...]
                let terms = arg.as_array().ok_or_else(|| bad("poly needs an array of terms"))?;
                let mut sum = Vec::new();
                for t in terms {
                    let t = t.as_array().filter(|t| t.len() == 2).ok_or_else(|| bad("poly term must be [c, powers]"))?;
                    let c = t[0].as_f64().ok_or_else(|| bad("poly coefficient must be a number"))?;
                    let p = parse_exponents(&t[1]).map_err(|_| bad("poly powers must be 4 integers"))?;
                    let mut prod = vec![Coeff::Const(c)];
                    for (i, &k) in p.iter().enumerate() {
                        if k > 0 {
                            prod.push(Coeff::Pow(Box::new(Coeff::Var(i)), k as u32));
                        }
                    }
                    sum.push(Coeff::Prod(prod));
                }
                Ok(Coeff::Sum(sum))
            }
            other => Err(Error::InvalidParams(format!("unknown coefficient operator `{other}`"))),
        }
    }
}

fn parse_exponents(v: &Value) -> Result<[u8; 4]> {
    let a = v
        .as_array()
        .filter(|a| a.len() == 4)
        .ok_or_else(|| Error::InvalidParams(format!("expected 4 exponents, got {v}")))?;
    let mut out = [0u8; 4];
    for (o, e) in out.iter_mut().zip(a) {
        *o = e
            .as_u64()
            .filter(|&k| k <= 16)
            .ok_or_else(|| Error::InvalidParams(format!("bad exponent {e}")))? as u8;
    }
    Ok(out)
}

/// Symmetric 4×4 field of coefficient functions.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    entries: [[Coeff; 4]; 4],
}

impl MetricField {
    pub fn from_fn(f: impl Fn(usize, usize) -> Coeff) -> Result<Self> {
        let entries: [[Coeff; 4]; 4] = std::array::from_fn(|i| std::array::from_fn(|j| f(i, j)));
        for i in 0..4 {
            for j in i + 1..4 {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::NonSymmetricMetricInput { row: i, col: j });
                }
            }
        }
        Ok(Self { entries })
    }

    pub fn constant(m: Matrix4<f64>) -> Result<Self> {
        Self::from_fn(|i, j| Coeff::Const(m[(i, j)]))
    }

    pub fn minkowski() -> Self {
        Self::diagonal([
            Coeff::Const(-1.0),
            Coeff::Const(1.0),
            Coeff::Const(1.0),
            Coeff::Const(1.0),
        ])
    }

    pub fn diagonal(d: [Coeff; 4]) -> Self {
        let entries = std::array::from_fn(|i| {
            std::array::from_fn(|j| if i == j { d[i].clone() } else { Coeff::Const(0.0) })
        });
        Self { entries }
    }

    /// `diag(−lapse², a², a², a²)`
    pub fn diag_scale(a: Coeff, lapse: Coeff) -> Self {
        let a2 = a.squared();
        Self::diagonal([lapse.squared().times(-1.0), a2.clone(), a2.clone(), a2])
    }

    pub fn entry(&self, i: usize, j: usize) -> &Coeff {
        &self.entries[i][j]
    }

    pub fn eval(&self, x: &Vector4<f64>) -> Matrix4<f64> {
        let xs = [x[0], x[1], x[2], x[3]];
        Matrix4::from_fn(|i, j| self.entries[i][j].eval(&xs))
    }

    fn frozen(&self, x: &Vector4<f64>) -> Self {
        Self {
            entries: std::array::from_fn(|i| std::array::from_fn(|j| self.entries[i][j].frozen(x))),
        }
    }

    /// `g_ab(x) y^a y^b`
    fn quadratic<S: Scalar>(&self, x: &[S; 4], y: &[S; 4]) -> S {
        let mut acc = y[0].constant_like(0.0);
        for a in 0..4 {
            for b in a..4 {
                let e = &self.entries[a][b];
                let w = if a == b { 1.0 } else { 2.0 };
                match e.as_const() {
                    Some(0.0) => {}
                    Some(c) => acc = acc + (y[a].clone() * y[b].clone()) * (w * c),
                    None => acc = acc + (e.eval(x) * (y[a].clone() * y[b].clone())) * w,
                }
            }
        }
        acc
    }

    fn parse(v: &Value) -> Result<Self> {
        if let Some(name) = v.as_str() {
            return match name {
                "minkowski" => Ok(Self::minkowski()),
                other => Err(Error::InvalidParams(format!("unknown metric preset `{other}`"))),
            };
        }
        if let Some(obj) = v.as_object() {
            let preset = obj.get("preset").and_then(Value::as_str).unwrap_or("");
            return match preset {
                "minkowski" => Ok(Self::minkowski()),
                "diag-scale" => {
                    let get = |k: &str| obj.get(k).map(Coeff::parse).unwrap_or(Ok(Coeff::Const(1.0)));
                    Ok(Self::diag_scale(get("a")?, get("lapse")?))
                }
                other => Err(Error::InvalidParams(format!("unknown metric preset `{other}`"))),
            };
        }
        let arr = v
            .as_array()
            .ok_or_else(|| Error::InvalidParams(format!("metric must be a preset or a 4x4 array: {v}")))?;
        let flat: Vec<&Value> = if arr.len() == 4 && arr.iter().all(Value::is_array) {
            arr.iter()
                .flat_map(|r| r.as_array().map(|r| r.iter().collect::<Vec<_>>()).unwrap_or_default())
                .collect()
        } else {
            arr.iter().collect()
        };
        if flat.len() != 16 {
            return Err(Error::InvalidParams(format!("metric array needs 16 entries, got {}", flat.len())));
        }
        let coeffs = flat.into_iter().map(Coeff::parse).collect::<Result<Vec<_>>>()?;
        Self::from_fn(|i, j| coeffs[4 * i + j].clone())
    }
}

/// One monomial `coef(x) · y^β` of a custom polynomial model.
#[derive(Debug, Clone, PartialEq)]
pub struct PolyTerm {
    pub coef: Coeff,
    pub powers: [u8; 4],
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelKind {
    /// `L = g_ab(x) y^a y^b`
    MetricInduced(MetricField),
    /// `L = (h_ab y^a y^b)(k_cd y^c y^d)`
    Bimetric { h: MetricField, k: MetricField },
    /// `L = Σ c_β(x) y^β` with every `|β|` equal to the degree.
    CustomPolynomial(Vec<PolyTerm>),
}

/// An immutable fundamental geometry function with its homogeneity degree.
#[derive(Debug, Clone, PartialEq)]
pub struct FundamentalModel {
    pub kind: ModelKind,
    pub degree: u32,
}

/// Fiber coordinates smaller than this are treated as the zero section.
pub const ZERO_SECTION: f64 = 1e-300;

impl FundamentalModel {
    pub fn metric(g: MetricField) -> Self {
        Self { kind: ModelKind::MetricInduced(g), degree: 2 }
    }

    pub fn minkowski() -> Self {
        Self::metric(MetricField::minkowski())
    }

    /// Expanding metric `diag(−1, a², a², a²)` with `a = 1 + 0.1 t`.
    pub fn flrw() -> Self {
        Self::metric(MetricField::diag_scale(Coeff::affine(1.0, 0.1, 0), Coeff::Const(1.0)))
    }

    pub fn bimetric(h: MetricField, k: MetricField) -> Self {
        Self { kind: ModelKind::Bimetric { h, k }, degree: 4 }
    }

    /// `h = η`, `k = diag(−1, 4, 4, 4)`: the k-cone lies inside the h-cone.
    pub fn bimetric_flat() -> Self {
        let k = MetricField::diagonal([
            Coeff::Const(-1.0),
            Coeff::Const(4.0),
            Coeff::Const(4.0),
            Coeff::Const(4.0),
        ]);
        Self::bimetric(MetricField::minkowski(), k)
    }

    /// Position-dependent bimetric model with nested cones on `[−1, 1]⁴`.
    pub fn bimetric_curved() -> Self {
        let a = Coeff::affine(1.0, 0.1, 0);
        let h = MetricField::diag_scale(a.clone(), Coeff::Const(1.0));
        let a2 = a.squared().times(4.0);
        let k = MetricField::diagonal([
            Coeff::affine(1.0, 0.1, 1).squared().times(-1.0),
            a2.clone(),
            a2.clone(),
            a2,
        ]);
        Self::bimetric(h, k)
    }

    pub fn custom(terms: Vec<PolyTerm>, degree: u32) -> Result<Self> {
        if degree < 2 {
            return Err(Error::DegreeOutOfRange(degree as f64));
        }
        if terms.is_empty() {
            return Err(Error::InvalidParams("custom model needs at least one term".into()));
        }
        for t in &terms {
            let total: u32 = t.powers.iter().map(|&p| p as u32).sum();
            if total != degree {
                return Err(Error::InvalidParams(format!(
                    "term with powers {:?} has degree {total}, expected {degree}",
                    t.powers
                )));
            }
        }
        Ok(Self { kind: ModelKind::CustomPolynomial(terms), degree })
    }

    pub fn n(&self) -> f64 {
        self.degree as f64
    }

    /// A copy with every coefficient function frozen at its value at `x`.
    pub fn frozen_at(&self, x: &Vector4<f64>) -> Self {
        let kind = match &self.kind {
            ModelKind::MetricInduced(g) => ModelKind::MetricInduced(g.frozen(x)),
            ModelKind::Bimetric { h, k } => ModelKind::Bimetric { h: h.frozen(x), k: k.frozen(x) },
            ModelKind::CustomPolynomial(ts) => ModelKind::CustomPolynomial(
                ts.iter()
                    .map(|t| PolyTerm { coef: t.coef.frozen(x), powers: t.powers })
                    .collect(),
            ),
        };
        Self { kind, degree: self.degree }
    }

    /// The input metric of a metric-induced model.
    pub fn metric_field(&self) -> Option<&MetricField> {
        match &self.kind {
            ModelKind::MetricInduced(g) => Some(g),
            _ => None,
        }
    }

    /// Closed form of `L`, generic over plain numbers and jets.
    pub fn lagrangian<S: Scalar>(&self, x: &[S; 4], y: &[S; 4]) -> S {
        match &self.kind {
            ModelKind::MetricInduced(g) => g.quadratic(x, y),
            ModelKind::Bimetric { h, k } => h.quadratic(x, y) * k.quadratic(x, y),
            ModelKind::CustomPolynomial(terms) => {
                let mut acc = y[0].constant_like(0.0);
                for t in terms {
                    let mut mono = y[0].constant_like(1.0);
                    for (a, &p) in t.powers.iter().enumerate() {
                        if p > 0 {
                            mono = mono * y[a].powi(p as u32);
                        }
                    }
                    acc = match t.coef.as_const() {
                        Some(c) => acc + mono * c,
                        None => acc + mono * t.coef.eval(x),
                    };
                }
                acc
            }
        }
    }

    fn check_domain(&self, p: &TangentPoint) -> Result<()> {
        if !(p.x.iter().chain(p.y.iter()).all(|v| v.is_finite())) {
            return Err(Error::EvaluationDomainError("non-finite coordinates".into()));
        }
        if p.y.amax() < ZERO_SECTION {
            return Err(Error::EvaluationDomainError("y is on the zero section".into()));
        }
        Ok(())
    }

    /// `L(x, y)`.
    pub fn value(&self, p: &TangentPoint) -> Result<f64> {
        self.check_domain(p)?;
        let x = [p.x[0], p.x[1], p.x[2], p.x[3]];
        let y = [p.y[0], p.y[1], p.y[2], p.y[3]];
        let v = self.lagrangian(&x, &y);
        if !v.is_finite() {
            return Err(Error::EvaluationDomainError("L is not finite".into()));
        }
        Ok(v)
    }

    /// Taylor jet of `L` about `p` in all eight coordinates up to `degree`.
    pub fn l_jet(&self, p: &TangentPoint, degree: usize) -> Result<Jet> {
        self.check_domain(p)?;
        let x: [Jet; 4] = std::array::from_fn(|a| Jet::variable(degree, a, p.x[a]));
        let y: [Jet; 4] = std::array::from_fn(|a| Jet::variable(degree, 4 + a, p.y[a]));
        let l = self.lagrangian(&x, &y);
        if !l.is_finite() {
            return Err(Error::EvaluationDomainError("L jet is not finite".into()));
        }
        Ok(l)
    }
}

/// `L` and its mixed partials at a point, up to the requested orders.
#[derive(Debug, Clone)]
pub struct JetValue {
    pub x_order: usize,
    pub y_order: usize,
    jet: Jet,
}

impl JetValue {
    pub fn value(&self) -> f64 {
        self.jet.value()
    }

    /// `∂_{α} ∂̄_{β} L` with the derivative indices listed explicitly, e.g.
    /// `partial(&[0], &[1, 1])` for `∂_0 ∂̄_1 ∂̄_1 L`.
    pub fn partial(&self, alpha: &[usize], beta: &[usize]) -> Result<f64> {
        if alpha.len() > self.x_order || alpha.len() + beta.len() > self.x_order + self.y_order {
            return Err(Error::OrderUnsupported { x_order: alpha.len(), y_order: beta.len() });
        }
        Ok(self.jet.partial(&exponents(alpha, beta)))
    }

    /// All partials as a map keyed by exponent vectors `(α, β)`.
    pub fn partials(&self) -> BTreeMap<([u8; 4], [u8; 4]), f64> {
        let mut out = BTreeMap::new();
        for (i, _) in self.jet.coeffs().iter().enumerate() {
            let e = crate::jet::monomial(i);
            let ax: usize = e[..4].iter().map(|&k| k as usize).sum();
            let by: usize = e[4..].iter().map(|&k| k as usize).sum();
            if ax <= self.x_order && ax + by <= self.x_order + self.y_order {
                let alpha = [e[0], e[1], e[2], e[3]];
                let beta = [e[4], e[5], e[6], e[7]];
                out.insert((alpha, beta), self.jet.partial(&e));
            }
        }
        out
    }

    pub fn jet(&self) -> &Jet {
        &self.jet
    }
}

fn exponents(alpha: &[usize], beta: &[usize]) -> crate::jet::Exponents {
    let mut e = [0u8; 8];
    for &a in alpha {
        e[a] += 1;
    }
    for &b in beta {
        e[4 + b] += 1;
    }
    e
}

/// Highest total jet order served by [`evaluate_jet`].
pub const JET_ORDER_MAX: usize = MAX_DEGREE;

/// `L` and all mixed partials with at most `x_order` chart derivatives and at
/// most `x_order + y_order` derivatives in total.
pub fn evaluate_jet(
    model: &FundamentalModel,
    p: &TangentPoint,
    x_order: usize,
    y_order: usize,
) -> Result<JetValue> {
    if x_order > 2 || x_order + y_order > JET_ORDER_MAX {
        return Err(Error::OrderUnsupported { x_order, y_order });
    }
    let jet = model.l_jet(p, x_order + y_order)?;
    Ok(JetValue { x_order, y_order, jet })
}

/// Builds a model from its JSON description
/// `{"kind": ..., "degree": ..., "params": {...}}`.
pub fn build_model(spec: &Value) -> Result<FundamentalModel> {
    let kind = spec
        .get("kind")
        .and_then(Value::as_str)
        .ok_or_else(|| Error::InvalidParams("missing string field `kind`".into()))?;
    let declared = spec.get("degree").map(|d| {
        d.as_f64()
            .ok_or_else(|| Error::InvalidParams(format!("degree must be a number, got {d}")))
    });
    let declared = declared.transpose()?;
    if let Some(n) = declared {
        if n < 2.0 || !n.is_finite() {
            return Err(Error::DegreeOutOfRange(n));
        }
    }
    let params = spec.get("params").cloned().unwrap_or(Value::Null);
    let expect_degree = |n: u32| -> Result<()> {
        match declared {
            Some(d) if d != n as f64 => Err(Error::InvalidParams(format!(
                "kind `{kind}` has degree {n}, but degree {d} was declared"
            ))),
            _ => Ok(()),
        }
    };
    match kind {
        "metric-induced" | "metric" => {
            expect_degree(2)?;
            let g = match &params {
                Value::Object(o) if o.contains_key("metric") => MetricField::parse(&o["metric"])?,
                Value::Null => MetricField::minkowski(),
                other => MetricField::parse(other)?,
            };
            Ok(FundamentalModel::metric(g))
        }
        "minkowski" => {
            expect_degree(2)?;
            Ok(FundamentalModel::minkowski())
        }
        "bimetric" | "bimetric-product" => {
            expect_degree(4)?;
            let get = |k: &str| {
                params
                    .get(k)
                    .ok_or_else(|| Error::InvalidParams(format!("bimetric needs params.{k}")))
                    .and_then(MetricField::parse)
            };
            Ok(FundamentalModel::bimetric(get("h")?, get("k")?))
        }
        "custom" | "custom-polynomial" => {
            let n = declared.ok_or_else(|| Error::InvalidParams("custom model needs a degree".into()))?;
            if n.fract() != 0.0 || n > 16.0 {
                return Err(Error::DegreeOutOfRange(n));
            }
            let terms = params
                .get("terms")
                .and_then(Value::as_array)
                .ok_or_else(|| Error::InvalidParams("custom model needs params.terms".into()))?;
            let terms = terms
                .iter()
                .map(|t| {
                    let coef = t
                        .get("coef")
                        .map(Coeff::parse)
                        .unwrap_or_else(|| Err(Error::InvalidParams(format!("term without coef: {t}"))))?;
                    let powers = t
                        .get("y")
                        .map(parse_exponents)
                        .unwrap_or_else(|| Err(Error::InvalidParams(format!("term without y powers: {t}"))))?;
                    Ok(PolyTerm { coef, powers })
                })
                .collect::<Result<Vec<_>>>()?;
            FundamentalModel::custom(terms, n as u32)
        }
        other => Err(Error::UnknownKind(other.to_string())),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn minkowski_closed_form() {
        let m = build_model(&json!({"kind": "metric-induced", "params": "minkowski"})).unwrap();
        let p = TangentPoint::from_arrays([0.3, 0.0, 1.0, 2.0], [2.0, 1.0, 0.5, 0.0]);
        assert_eq!(m.value(&p).unwrap(), -4.0 + 1.0 + 0.25);
        assert_eq!(m.degree, 2);
    }

    #[test]
    fn hessian_of_minkowski_is_twice_eta() {
        let m = FundamentalModel::minkowski();
        let p = TangentPoint::from_arrays([0.0; 4], [0.7, 0.1, -0.3, 0.2]);
        let j = evaluate_jet(&m, &p, 0, 2).unwrap();
        for a in 0..4 {
            for b in 0..4 {
                let want = if a != b { 0.0 } else if a == 0 { -2.0 } else { 2.0 };
                assert_eq!(j.partial(&[], &[a, b]).unwrap(), want);
            }
        }
    }

    #[test]
    fn diag_scale_preset_parses() {
        let spec = json!({
            "kind": "metric-induced",
            "params": {"preset": "diag-scale", "a": {"sum": [1.0, {"prod": [0.1, {"var": 0}]}]}}
        });
        let m = build_model(&spec).unwrap();
        assert_eq!(m, FundamentalModel::flrw());
    }

    #[test]
    fn rejects_bad_specs() {
        assert!(matches!(
            build_model(&json!({"kind": "warp-drive"})),
            Err(Error::UnknownKind(_))
        ));
        assert!(matches!(
            build_model(&json!({"kind": "custom", "degree": 1, "params": {"terms": []}})),
            Err(Error::DegreeOutOfRange(_))
        ));
        let asym = json!({"kind": "metric-induced", "params": [
            -1, 0.1, 0, 0,  0, 1, 0, 0,  0, 0, 1, 0,  0, 0, 0, 1
        ]});
        assert!(matches!(
            build_model(&asym),
            Err(Error::NonSymmetricMetricInput { row: 0, col: 1 })
        ));
        let wrong_degree = json!({"kind": "custom", "degree": 4, "params": {"terms": [
            {"coef": 1.0, "y": [2, 1, 0, 0]}
        ]}});
        assert!(matches!(build_model(&wrong_degree), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn zero_section_is_rejected() {
        let m = FundamentalModel::minkowski();
        let p = TangentPoint::from_arrays([0.0; 4], [0.0; 4]);
        assert!(matches!(m.value(&p), Err(Error::EvaluationDomainError(_))));
    }

    #[test]
    fn order_limits() {
        let m = FundamentalModel::bimetric_flat();
        let p = TangentPoint::from_arrays([0.0; 4], [1.0, 0.0, 0.0, 0.0]);
        assert!(evaluate_jet(&m, &p, 3, 0).is_err());
        assert!(evaluate_jet(&m, &p, 2, 3).is_err());
        assert!(evaluate_jet(&m, &p, 2, 2).is_ok());
    }
}
