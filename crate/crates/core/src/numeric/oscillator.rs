//! Damped harmonic oscillator `m x'' + gamma x' + k x = 0`.

use serde::Serialize;

use super::ode::{integrate_ode, Method, Metadata, Trajectory};
use crate::error::NumericError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct OscillatorParams {
    pub m: f64,
    pub gamma: f64,
    pub k: f64,
    pub x0: f64,
    pub v0: f64,
    pub t1: f64,
    pub dt: f64,
}

impl Default for OscillatorParams {
    fn default() -> Self {
        Self { m: 1.0, gamma: 0.1, k: 1.0, x0: 1.0, v0: 0.0, t1: 20.0, dt: 1e-3 }
    }
}

pub fn simulate_dissipative_oscillator(p: &OscillatorParams, method: Method) -> Result<Trajectory, NumericError> {
    if !(p.m > 0.0) || p.k < 0.0 || p.gamma < 0.0 {
        return Err(NumericError::InvalidArgument(
            "oscillator needs m > 0, k >= 0, gamma >= 0".into(),
        ));
    }
    let (m, g, k) = (p.m, p.gamma, p.k);
    let mut tr = integrate_ode(
        move |_, y| vec![y[1], -(g * y[1] + k * y[0]) / m],
        &[p.x0, p.v0],
        (0.0, p.t1),
        p.dt,
        method,
    )?;
    tr.columns = vec!["x".into(), "v".into()];
    tr.derive("E", |_, s| 0.5 * m * s[1] * s[1] + 0.5 * k * s[0] * s[0]);
    tr.meta = Metadata::new("dissipative-oscillator", method.name())
        .param("m", m)
        .param("gamma", g)
        .param("k", k)
        .param("x0", p.x0)
        .param("v0", p.v0);
    Ok(tr)
}

/// Largest increase between consecutive samples (zero for a non-increasing series).
pub fn max_increase(series: &[f64]) -> f64 {
    series.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn undamped_conserves_energy() {
        let p = OscillatorParams { gamma: 0.0, ..Default::default() };
        let tr = simulate_dissipative_oscillator(&p, Method::Rk4).unwrap();
        let e = tr.invariant("E").unwrap();
        assert!((e[e.len() - 1] - e[0]).abs() < 1e-10);
    }

    #[test]
    fn damped_energy_decreases() {
        let tr = simulate_dissipative_oscillator(&OscillatorParams::default(), Method::Rk4).unwrap();
        assert!(max_increase(tr.invariant("E").unwrap()) <= 0.0);
    }
}
