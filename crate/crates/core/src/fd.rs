//! Finite-difference jets of `L`, used as an independent oracle.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::model::{FundamentalModel, TangentPoint};

#[derive(Debug, Clone, Copy)]
pub struct FdOptions {
    /// Base step; `None` picks `ε^{1/(k+4)}` for a `k`-th derivative,
    /// scaled by the size of the point.
    pub h: Option<f64>,
    /// Relative disagreement between Richardson levels that is tolerated.
    pub consistency_tol: f64,
}

impl Default for FdOptions {
    fn default() -> Self {
        Self { h: None, consistency_tol: 1e-3 }
    }
}

/// An entry of a finite-difference jet with its error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdEntry {
    pub value: f64,
    pub error: f64,
}

/// Mixed partials `∂^α ∂̄^β L` keyed by exponent vectors `(α, β)`.
#[derive(Debug, Clone)]
pub struct FdJet {
    pub entries: BTreeMap<([u8; 4], [u8; 4]), FdEntry>,
}

impl FdJet {
    pub fn get(&self, alpha: [u8; 4], beta: [u8; 4]) -> Option<FdEntry> {
        self.entries.get(&(alpha, beta)).copied()
    }
}

// Product central-difference stencil for ∂_{v1}…∂_{vk} with step h.
fn stencil(model: &FundamentalModel, p: &TangentPoint, vars: &[usize], h: f64) -> Result<f64> {
    let k = vars.len();
    let mut acc = 0.0;
    for mask in 0..(1usize << k) {
        let mut q = *p;
        let mut sign = 1.0;
        for (i, &v) in vars.iter().enumerate() {
            let s = if mask & (1 << i) != 0 { -1.0 } else { 1.0 };
            sign *= s;
            if v < 4 {
                q.x[v] += s * h;
            } else {
                q.y[v - 4] += s * h;
            }
        }
        acc += sign * model.value(&q)?;
    }
    Ok(acc / (2.0 * h).powi(k as i32))
}

/// One partial derivative with two Richardson levels (steps `h, h/2, h/4`).
pub fn fd_partial(model: &FundamentalModel, p: &TangentPoint, vars: &[usize], opts: &FdOptions) -> Result<FdEntry> {
    if vars.is_empty() {
        return Ok(FdEntry { value: model.value(p)?, error: 0.0 });
    }
    let scale = p.x.amax().max(p.y.amax()).max(1.0);
    let h = opts.h.unwrap_or_else(|| f64::EPSILON.powf(1.0 / (vars.len() as f64 + 4.0)) * scale);
    if !(h > 0.0) || h / 4.0 < f64::EPSILON * scale {
        return Err(Error::StepUnderflow);
    }
    let d: Vec<f64> = [h, h / 2.0, h / 4.0]
        .iter()
        .map(|&s| stencil(model, p, vars, s))
        .collect::<Result<_>>()?;
    let r1 = (4.0 * d[1] - d[0]) / 3.0;
    let r1b = (4.0 * d[2] - d[1]) / 3.0;
    let r2 = (16.0 * r1b - r1) / 15.0;
    let error = (r2 - r1b).abs();
    let mag = r2.abs().max(d.iter().fold(0.0f64, |m, v| m.max(v.abs()))).max(1.0);
    if error > opts.consistency_tol * mag {
        return Err(Error::OracleInconsistent(error));
    }
    Ok(FdEntry { value: r2, error })
}

/// All partials with at most `x_order` chart derivatives and total order at
/// most `x_order + y_order`.
pub fn finite_difference_jet(
    model: &FundamentalModel,
    p: &TangentPoint,
    x_order: usize,
    y_order: usize,
    opts: &FdOptions,
) -> Result<FdJet> {
    model.value(p)?;
    let total = x_order + y_order;
    let mut entries = BTreeMap::new();
    let mut vars = Vec::new();
    collect(model, p, opts, x_order, total, 0, &mut vars, &mut entries)?;
    Ok(FdJet { entries })
}

#[allow(clippy::too_many_arguments)]
fn collect(
    model: &FundamentalModel,
    p: &TangentPoint,
    opts: &FdOptions,
    x_order: usize,
    total: usize,
    from: usize,
    vars: &mut Vec<usize>,
    out: &mut BTreeMap<([u8; 4], [u8; 4]), FdEntry>,
) -> Result<()> {
    let nx = vars.iter().filter(|&&v| v < 4).count();
    if nx <= x_order {
        let mut alpha = [0u8; 4];
        let mut beta = [0u8; 4];
        for &v in vars.iter() {
            if v < 4 {
                alpha[v] += 1;
            } else {
                beta[v - 4] += 1;
            }
        }
        out.insert((alpha, beta), fd_partial(model, p, vars, opts)?);
    }
    if vars.len() == total {
        return Ok(());
    }
    for v in from..8 {
        vars.push(v);
        if vars.iter().filter(|&&u| u < 4).count() <= x_order {
            collect(model, p, opts, x_order, total, v, vars, out)?;
        }
        vars.pop();
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minkowski_hessian() {
        let m = FundamentalModel::minkowski();
        let p = TangentPoint::from_arrays([0.0; 4], [1.0, 0.2, 0.0, 0.3]);
        let j = finite_difference_jet(&m, &p, 0, 2, &FdOptions::default()).unwrap();
        assert!((j.get([0; 4], [2, 0, 0, 0]).unwrap().value + 2.0).abs() < 1e-8);
        assert!((j.get([0; 4], [0, 1, 0, 1]).unwrap().value).abs() < 1e-8);
        assert!((j.get([0; 4], [0, 0, 2, 0]).unwrap().value - 2.0).abs() < 1e-8);
    }
}
