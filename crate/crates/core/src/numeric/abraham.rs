//! Radiation reaction: `m x'' + k x - eps x''' = 0`.
//!
//! The third-order equation admits the runaway branch growing like
//! `e^{m t / eps}`. The order-reduced (Landau-Lifshitz) form replaces
//! `x'''` by its lowest-order value `-(k/m) x'`, leaving a damped
//! oscillator with damping coefficient `eps k / m`.

use serde::Serialize;

use super::ode::{rk4_step, step_count, Metadata, Trajectory};
use crate::error::NumericError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AbrahamParams {
    pub m: f64,
    pub k: f64,
    pub eps: f64,
    pub x0: f64,
    pub v0: f64,
    /// Initial acceleration for the direct third-order run.
    pub a0: f64,
    pub t1: f64,
    pub dt: f64,
    /// Energy growth factor that flags a runaway.
    pub runaway_factor: f64,
}

impl Default for AbrahamParams {
    fn default() -> Self {
        Self { m: 1.0, k: 1.0, eps: 1e-2, x0: 1.0, v0: 0.0, a0: 0.0, t1: 20.0, dt: 1e-3, runaway_factor: 1e6 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AbrahamRuns {
    pub reduced: Trajectory,
    /// Direct third-order run, truncated where the runaway was detected.
    pub direct: Trajectory,
    pub runaway: Option<(f64, f64)>,
}

fn energy(p: &AbrahamParams, s: &[f64]) -> f64 {
    0.5 * p.m * s[1] * s[1] + 0.5 * p.k * s[0] * s[0]
}

fn run(
    p: &AbrahamParams,
    y0: Vec<f64>,
    rhs: impl Fn(f64, &[f64]) -> Vec<f64>,
    stop_on_runaway: bool,
) -> Result<(Trajectory, Option<(f64, f64)>), NumericError> {
    let steps = step_count((0.0, p.t1), p.dt)?;
    let e0 = energy(p, &y0).max(f64::MIN_POSITIVE);
    let mut states = vec![y0.clone()];
    let mut y = y0;
    let mut runaway = None;
    for i in 0..steps {
        let t = i as f64 * p.dt;
        y = rk4_step(&rhs, t, &y, p.dt);
        if y.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::NonFiniteState { t: t + p.dt });
        }
        states.push(y.clone());
        let factor = energy(p, &y) / e0;
        if stop_on_runaway && factor > p.runaway_factor {
            runaway = Some((t + p.dt, factor));
            break;
        }
    }
    let n = states.len();
    let mut tr = Trajectory {
        t0: 0.0,
        dt: p.dt,
        n,
        columns: Vec::new(),
        states,
        invariants: Vec::new(),
        meta: Metadata::new("abraham-lorentz", "rk4")
            .param("m", p.m)
            .param("k", p.k)
            .param("eps", p.eps),
    };
    let q = *p;
    tr.derive("E", move |_, s| energy(&q, s));
    Ok((tr, runaway))
}

/// Order-reduced run only.
pub fn simulate_reduced(p: &AbrahamParams) -> Result<Trajectory, NumericError> {
    if !(p.m > 0.0) || p.eps < 0.0 {
        return Err(NumericError::InvalidArgument("need m > 0 and eps >= 0".into()));
    }
    let (m, k, c) = (p.m, p.k, p.eps * p.k / p.m);
    let (mut tr, _) = run(p, vec![p.x0, p.v0], move |_, y| vec![y[1], -(k * y[0] + c * y[1]) / m], false)?;
    tr.columns = vec!["x".into(), "v".into()];
    tr.meta.integrator = "rk4 (order-reduced)".into();
    Ok(tr)
}

/// Direct third-order run; fails with `RunawayDetected` once the energy
/// exceeds `runaway_factor` times its initial value.
pub fn simulate_direct(p: &AbrahamParams) -> Result<Trajectory, NumericError> {
    let (tr, r) = direct(p)?;
    match r {
        Some((t, factor)) => Err(NumericError::RunawayDetected { t, factor }),
        None => Ok(tr),
    }
}

fn direct(p: &AbrahamParams) -> Result<(Trajectory, Option<(f64, f64)>), NumericError> {
    if !(p.m > 0.0 && p.eps > 0.0) {
        return Err(NumericError::InvalidArgument("direct run needs m > 0 and eps > 0".into()));
    }
    let (m, k, e) = (p.m, p.k, p.eps);
    let (mut tr, r) = run(
        p,
        vec![p.x0, p.v0, p.a0],
        move |_, y| vec![y[1], y[2], (m * y[2] + k * y[0]) / e],
        true,
    )?;
    tr.columns = vec!["x".into(), "v".into(), "a".into()];
    Ok((tr, r))
}

/// Both runs side by side.
pub fn simulate_abraham_lorentz(p: &AbrahamParams) -> Result<AbrahamRuns, NumericError> {
    let reduced = simulate_reduced(p)?;
    let (direct, runaway) = direct(p)?;
    Ok(AbrahamRuns { reduced, direct, runaway })
}
