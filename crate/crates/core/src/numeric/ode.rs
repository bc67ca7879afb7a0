//! Fixed-step ODE integration on a uniform grid.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::NumericError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Rk4,
    /// Symplectic Euler for states laid out as `[positions.., velocities..]`.
    SemiImplicitEuler,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Rk4 => "rk4",
            Method::SemiImplicitEuler => "semi-implicit-euler",
        }
    }
}

impl std::str::FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "rk4" => Ok(Method::Rk4),
            "semi-implicit-euler" => Ok(Method::SemiImplicitEuler),
            other => Err(format!("unknown integrator `{other}` (rk4, semi-implicit-euler)")),
        }
    }
}

/// Provenance of a numeric run.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct Metadata {
    pub system: String,
    pub params: BTreeMap<String, f64>,
    pub seed: Option<u64>,
    pub integrator: String,
}

impl Metadata {
    pub fn new(system: &str, integrator: &str) -> Self {
        Self {
            system: system.to_string(),
            integrator: integrator.to_string(),
            ..Self::default()
        }
    }

    pub fn param(mut self, key: &str, v: f64) -> Self {
        self.params.insert(key.to_string(), v);
        self
    }
}

/// States on a uniform time grid, with derived series aligned to it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    pub t0: f64,
    pub dt: f64,
    pub n: usize,
    pub columns: Vec<String>,
    pub states: Vec<Vec<f64>>,
    pub invariants: Vec<(String, Vec<f64>)>,
    pub meta: Metadata,
}

impl Trajectory {
    pub fn time(&self, i: usize) -> f64 {
        self.t0 + i as f64 * self.dt
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.time(i)).collect()
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.columns.iter().position(|c| c == name)?;
        Some(self.states.iter().map(|s| s[j]).collect())
    }

    pub fn invariant(&self, name: &str) -> Option<&[f64]> {
        self.invariants
            .iter()
            .find(|(n, _)| n == name)
            .map(|(_, v)| v.as_slice())
    }

    pub fn last(&self) -> &[f64] {
        self.states.last().expect("trajectories hold at least the initial state")
    }

    /// Append a derived series computed row by row.
    pub fn derive(&mut self, name: &str, f: impl Fn(f64, &[f64]) -> f64) {
        let series = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| f(self.t0 + i as f64 * self.dt, s))
            .collect();
        self.invariants.push((name.to_string(), series));
    }
}

fn axpy(y: &[f64], h: f64, k: &[f64]) -> Vec<f64> {
    y.iter().zip(k).map(|(a, b)| a + h * b).collect()
}

/// One classical Runge-Kutta step.
pub fn rk4_step(rhs: &impl Fn(f64, &[f64]) -> Vec<f64>, t: f64, y: &[f64], dt: f64) -> Vec<f64> {
    let k1 = rhs(t, y);
    let k2 = rhs(t + dt / 2.0, &axpy(y, dt / 2.0, &k1));
    let k3 = rhs(t + dt / 2.0, &axpy(y, dt / 2.0, &k2));
    let k4 = rhs(t + dt, &axpy(y, dt, &k3));
    y.iter()
        .enumerate()
        .map(|(i, v)| v + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
        .collect()
}

fn semi_implicit_step(rhs: &impl Fn(f64, &[f64]) -> Vec<f64>, t: f64, y: &[f64], dt: f64) -> Vec<f64> {
    let half = y.len() / 2;
    let f = rhs(t, y);
    let mut out = y.to_vec();
    for i in 0..half {
        out[half + i] += dt * f[half + i];
    }
    for i in 0..half {
        out[i] += dt * out[half + i];
    }
    out
}

/// Number of steps covering `span` with step `dt`.
pub fn step_count(span: (f64, f64), dt: f64) -> Result<usize, NumericError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(NumericError::InvalidArgument(format!("dt = {dt} must be positive")));
    }
    if !(span.1 >= span.0) {
        return Err(NumericError::InvalidArgument(format!(
            "time span [{}, {}] is reversed",
            span.0, span.1
        )));
    }
    Ok(((span.1 - span.0) / dt).round() as usize)
}

/// Integrate `y' = rhs(t, y)` from `y0` over `span`.
pub fn integrate_ode(
    rhs: impl Fn(f64, &[f64]) -> Vec<f64>,
    y0: &[f64],
    span: (f64, f64),
    dt: f64,
    method: Method,
) -> Result<Trajectory, NumericError> {
    let steps = step_count(span, dt)?;
    if method == Method::SemiImplicitEuler && !y0.len().is_multiple_of(2) {
        return Err(NumericError::InvalidArgument(
            "semi-implicit Euler needs a [positions, velocities] state of even length".into(),
        ));
    }
    let mut states = Vec::with_capacity(steps + 1);
    states.push(y0.to_vec());
    let mut y = y0.to_vec();
    for i in 0..steps {
        let t = span.0 + i as f64 * dt;
        y = match method {
            Method::Rk4 => rk4_step(&rhs, t, &y, dt),
            Method::SemiImplicitEuler => semi_implicit_step(&rhs, t, &y, dt),
        };
        if y.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::NonFiniteState { t: t + dt });
        }
        states.push(y.clone());
    }
    Ok(Trajectory {
        t0: span.0,
        dt,
        n: steps + 1,
        columns: (0..y0.len()).map(|i| format!("y{i}")).collect(),
        states,
        invariants: Vec::new(),
        meta: Metadata::new("ode", method.name()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth() {
        let tr = integrate_ode(|_, y| vec![y[0]], &[1.0], (0.0, 1.0), 1e-3, Method::Rk4).unwrap();
        assert_eq!(tr.n, 1001);
        assert!((tr.last()[0] - std::f64::consts::E).abs() < 1e-8);
    }

    #[test]
    fn blow_up_is_reported() {
        let err = integrate_ode(|_, y| vec![y[0] * y[0]], &[1.0], (0.0, 2.0), 1e-2, Method::Rk4).unwrap_err();
        assert!(matches!(err, NumericError::NonFiniteState { .. }));
    }

    #[test]
    fn bad_step() {
        assert!(integrate_ode(|_, y| y.to_vec(), &[1.0], (0.0, 1.0), 0.0, Method::Rk4).is_err());
    }
}
