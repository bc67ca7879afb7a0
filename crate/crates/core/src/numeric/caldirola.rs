//! Hamilton flow of `H = e^{-lambda t} p^2 / 2m + e^{lambda t} m w0^2 q^2 / 2`.
//!
//! The physical coordinate is `x = q`; it obeys the damped oscillator with
//! damping rate `lambda`.

use serde::Serialize;

use super::ode::{integrate_ode, Method, Metadata, Trajectory};
use crate::error::NumericError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaldirolaParams {
    pub m: f64,
    pub lambda: f64,
    pub omega0: f64,
    pub q0: f64,
    pub p0: f64,
    pub t1: f64,
    pub dt: f64,
}

impl Default for CaldirolaParams {
    fn default() -> Self {
        Self { m: 1.0, lambda: 0.2, omega0: 1.0, q0: 1.0, p0: 0.0, t1: 20.0, dt: 1e-3 }
    }
}

pub fn hamiltonian(p: &CaldirolaParams, t: f64, q: f64, mom: f64) -> f64 {
    let e = (p.lambda * t).exp();
    mom * mom / (2.0 * p.m * e) + 0.5 * e * p.m * p.omega0 * p.omega0 * q * q
}

pub fn simulate_caldirola_kanai(p: &CaldirolaParams) -> Result<Trajectory, NumericError> {
    if !(p.m > 0.0) {
        return Err(NumericError::InvalidArgument("mass must be positive".into()));
    }
    let c = *p;
    let mut tr = integrate_ode(
        move |t, y| {
            let e = (c.lambda * t).exp();
            vec![y[1] / (c.m * e), -c.m * e * c.omega0 * c.omega0 * y[0]]
        },
        &[p.q0, p.p0],
        (0.0, p.t1),
        p.dt,
        Method::Rk4,
    )?;
    tr.columns = vec!["q".into(), "p".into()];
    tr.derive("x", |_, s| s[0]);
    tr.derive("v", move |t, s| s[1] / (c.m * (c.lambda * t).exp()));
    tr.derive("hamiltonian", move |t, s| hamiltonian(&c, t, s[0], s[1]));
    tr.derive("mechanical-energy", move |t, s| {
        let v = s[1] / (c.m * (c.lambda * t).exp());
        0.5 * c.m * v * v + 0.5 * c.m * c.omega0 * c.omega0 * s[0] * s[0]
    });
    tr.meta = Metadata::new("caldirola-kanai", "rk4")
        .param("m", p.m)
        .param("lambda", p.lambda)
        .param("omega0", p.omega0)
        .param("q0", p.q0)
        .param("p0", p.p0);
    Ok(tr)
}
