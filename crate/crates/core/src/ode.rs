//! Adaptive Dormand–Prince 5(4) integrator on fixed-size states.

use nalgebra::SVector;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy)]
pub struct OdeOptions {
    /// Mixed absolute/relative local error tolerance.
    pub tol: f64,
    pub max_steps: usize,
    /// Optional cap on the step size (useful for dense sampling).
    pub max_step: Option<f64>,
    pub initial_step: Option<f64>,
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_steps: 1_000_000,
            max_step: None,
            initial_step: None,
        }
    }
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// Difference between the fifth- and fourth-order weights.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

/// Integrates `u' = f(t, u)` from `t0` to `t1` (either direction), calling
/// `on_accept(t, u)` at the start point and after every accepted step.
///
/// An error from `f` or `on_accept` aborts the integration and is returned
/// unchanged, so callers can recover the states accepted so far.
pub fn dopri5<const N: usize, F, G>(
    mut f: F,
    t0: f64,
    t1: f64,
    u0: SVector<f64, N>,
    opts: &OdeOptions,
    mut on_accept: G,
) -> Result<(SVector<f64, N>, OdeStats)>
where
    F: FnMut(f64, &SVector<f64, N>) -> Result<SVector<f64, N>>,
    G: FnMut(f64, &SVector<f64, N>) -> Result<()>,
{
    let mut stats = OdeStats::default();
    let mut t = t0;
    let mut u = u0;
    on_accept(t, &u)?;
    let span = t1 - t0;
    if span == 0.0 {
        return Ok((u, stats));
    }
    let dir = span.signum();
    let mut k1 = f(t, &u)?;
    stats.evaluations += 1;
    let max_step = opts.max_step.unwrap_or(span.abs()).min(span.abs());
    let mut h = opts.initial_step.unwrap_or_else(|| {
        // Hairer's starting-step heuristic, simplified.
        let d0 = u.amax().max(1e-5);
        let d1 = k1.amax().max(1e-5);
        (0.01 * d0 / d1).min(max_step) * opts.tol.powf(0.2).max(1e-3) * 10.0
    });
    h = h.min(max_step);
    let min_step = 1e-14 * (t0.abs().max(t1.abs()).max(1.0));

    while (t1 - t) * dir > 0.0 {
        if stats.accepted + stats.rejected >= opts.max_steps {
            return Err(Error::StepFailure(format!("exceeded {} steps at t = {t}", opts.max_steps)));
        }
        let last = (t + dir * h - t1) * dir >= 0.0;
        let hs = if last { t1 - t } else { dir * h };
        let k2 = f(t + C2 * hs, &(u + k1 * (hs * A21)))?;
        let k3 = f(t + C3 * hs, &(u + (k1 * A31 + k2 * A32) * hs))?;
        let k4 = f(t + C4 * hs, &(u + (k1 * A41 + k2 * A42 + k3 * A43) * hs))?;
        let k5 = f(t + C5 * hs, &(u + (k1 * A51 + k2 * A52 + k3 * A53 + k4 * A54) * hs))?;
        let k6 = f(t + hs, &(u + (k1 * A61 + k2 * A62 + k3 * A63 + k4 * A64 + k5 * A65) * hs))?;
        let u_new = u + (k1 * B1 + k3 * B3 + k4 * B4 + k5 * B5 + k6 * B6) * hs;
        let k7 = f(t + hs, &u_new)?;
        stats.evaluations += 6;
        let err_vec = (k1 * E1 + k3 * E3 + k4 * E4 + k5 * E5 + k6 * E6 + k7 * E7) * hs;
        let mut err = 0.0f64;
        for i in 0..N {
            let sc = opts.tol * (1.0 + u[i].abs().max(u_new[i].abs()));
            err = err.max((err_vec[i] / sc).abs());
        }
        if !err.is_finite() {
            stats.rejected += 1;
            h *= 0.25;
            if h < min_step {
                return Err(Error::StepFailure(format!("non-finite error estimate at t = {t}")));
            }
            continue;
        }
        if err <= 1.0 {
            t = if last { t1 } else { t + hs };
            u = u_new;
            k1 = k7;
            stats.accepted += 1;
            on_accept(t, &u)?;
            let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
            h = (h * fac).min(max_step);
        } else {
            stats.rejected += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < min_step {
                return Err(Error::StepFailure(format!("step size underflow at t = {t}")));
            }
        }
    }
    Ok((u, stats))
}
