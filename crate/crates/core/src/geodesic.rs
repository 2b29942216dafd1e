//! Finsler geodesics `ẍ^a + N^a_b(x, ẋ) ẋ^b = 0` and proper time.

use nalgebra::{SVector, Vector4};

use crate::error::{Error, Result};
use crate::geometry::SprayJets;
use crate::model::{FundamentalModel, TangentPoint};
use crate::ode::{dopri5, OdeOptions, OdeStats};

/// One sample of a canonically lifted curve `τ ↦ (γ(τ), γ̇(τ))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectorySample {
    pub tau: f64,
    pub point: TangentPoint,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Trajectory {
    pub samples: Vec<TrajectorySample>,
    pub tol: f64,
    pub steps: usize,
    pub rejected: usize,
}

impl Trajectory {
    pub fn from_samples(samples: Vec<TrajectorySample>) -> Self {
        Self { samples, ..Self::default() }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn last(&self) -> Option<&TrajectorySample> {
        self.samples.last()
    }

    fn set_stats(&mut self, stats: OdeStats) {
        self.steps = stats.accepted;
        self.rejected = stats.rejected;
    }
}

/// The geodesic spray pushed to `(ẋ, ẏ)` coordinates: `(y, −N(x, y)·y)`.
pub fn geodesic_vector_field(model: &FundamentalModel, p: &TangentPoint) -> Result<(Vector4<f64>, Vector4<f64>)> {
    let n = SprayJets::new(model, p, 3)?.n_value();
    Ok((p.y, -(n * p.y)))
}

fn pack(p: &TangentPoint) -> SVector<f64, 8> {
    SVector::<f64, 8>::from_fn(|i, _| if i < 4 { p.x[i] } else { p.y[i - 4] })
}

fn unpack(u: &SVector<f64, 8>) -> TangentPoint {
    TangentPoint::new(u.fixed_rows::<4>(0).into_owned(), u.fixed_rows::<4>(4).into_owned())
}

/// Integrates the geodesic through `p0` over `τ ∈ span` with local error
/// tolerance `tol`, recording every accepted step.
pub fn integrate_geodesic(
    model: &FundamentalModel,
    p0: &TangentPoint,
    span: (f64, f64),
    tol: f64,
) -> Result<Trajectory> {
    integrate_geodesic_with(model, p0, span, &OdeOptions::with_tol(tol))
}

pub fn integrate_geodesic_with(
    model: &FundamentalModel,
    p0: &TangentPoint,
    span: (f64, f64),
    opts: &OdeOptions,
) -> Result<Trajectory> {
    model.value(p0)?;
    let mut traj = Trajectory { tol: opts.tol, ..Trajectory::default() };
    let rhs = |_t: f64, u: &SVector<f64, 8>| -> Result<SVector<f64, 8>> {
        let (dx, dy) = geodesic_vector_field(model, &unpack(u))?;
        Ok(SVector::<f64, 8>::from_fn(|i, _| if i < 4 { dx[i] } else { dy[i - 4] }))
    };
    let mut last_tau = span.0;
    let result = dopri5(rhs, span.0, span.1, pack(p0), opts, |t, u| {
        last_tau = t;
        traj.samples.push(TrajectorySample { tau: t, point: unpack(u) });
        Ok(())
    });
    match result {
        Ok((_, stats)) => {
            traj.set_stats(stats);
            Ok(traj)
        }
        Err(Error::DegenerateHessian) => {
            traj.steps = traj.samples.len().saturating_sub(1);
            Err(Error::DegeneracyEncountered { tau: last_tau, partial: Box::new(traj) })
        }
        Err(e) => Err(e),
    }
}

/// `F(γ(τ), γ̇(τ))` at every sample.
pub fn finsler_along(model: &FundamentalModel, traj: &Trajectory) -> Result<Vec<f64>> {
    traj.samples
        .iter()
        .map(|s| crate::finsler::finsler_function(model, &s.point))
        .collect()
}

/// Largest deviation of `F` along the curve from its initial value.
pub fn finsler_drift(model: &FundamentalModel, traj: &Trajectory) -> Result<f64> {
    let f = finsler_along(model, traj)?;
    let f0 = f.first().copied().unwrap_or(0.0);
    Ok(f.iter().map(|v| (v - f0).abs()).fold(0.0, f64::max))
}

/// Proper time `∫ F(γ, γ̇) dτ` by composite Simpson on the (possibly
/// non-uniform) sample grid.
pub fn proper_time(model: &FundamentalModel, traj: &Trajectory) -> Result<f64> {
    let n = traj.samples.len();
    if n < 3 {
        return Err(Error::InsufficientSamples(n));
    }
    let f = finsler_along(model, traj)?;
    let t: Vec<f64> = traj.samples.iter().map(|s| s.tau).collect();
    Ok(simpson_nonuniform(&t, &f))
}

/// Composite Simpson rule on an arbitrary increasing (or decreasing) grid;
/// an odd trailing interval is handled with the matching three-point
/// correction.
pub fn simpson_nonuniform(t: &[f64], f: &[f64]) -> f64 {
    let n = t.len();
    debug_assert_eq!(n, f.len());
    let mut acc = 0.0;
    let mut i = 0;
    while i + 2 < n {
        let h0 = t[i + 1] - t[i];
        let h1 = t[i + 2] - t[i + 1];
        let hs = h0 + h1;
        acc += hs / 6.0
            * ((2.0 - h1 / h0) * f[i] + hs * hs / (h0 * h1) * f[i + 1] + (2.0 - h0 / h1) * f[i + 2]);
        i += 2;
    }
    if i + 1 < n {
        // Last interval [t_{n-2}, t_{n-1}] using the quadratic through the
        // last three points.
        let (h0, h1) = (t[n - 2] - t[n - 3], t[n - 1] - t[n - 2]);
        acc += h1 * (2.0 * h1 + 3.0 * h0) / (6.0 * (h0 + h1)) * f[n - 1]
            + h1 * (h1 + 3.0 * h0) / (6.0 * h0) * f[n - 2]
            - h1 * h1 * h1 / (6.0 * h0 * (h0 + h1)) * f[n - 3];
    }
    acc
}
