//! Reaction-convection-diffusion `U_t = K U_xx - gamma U_x - beta U + f(x, t)`
//! by the method of lines: central diffusion, first-order upwind
//! convection, RK4 in time.
//!
//! Upwinding adds numerical diffusion `|gamma| dx / 2`; pure transport
//! therefore slowly loses L2 norm.

use serde::Serialize;

use super::grid::{integral, Boundary, FieldGrid};
use super::ode::{rk4_step, step_count, Metadata};
use crate::error::NumericError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RcdParams {
    pub k: f64,
    pub gamma: f64,
    pub beta: f64,
    pub x0: f64,
    pub length: f64,
    pub points: usize,
    pub boundary: Boundary,
    pub t1: f64,
    pub dt: f64,
    pub save_every: usize,
}

impl Default for RcdParams {
    fn default() -> Self {
        Self {
            k: 1.0,
            gamma: 0.0,
            beta: 0.0,
            x0: -5.0,
            length: 10.0,
            points: 400,
            boundary: Boundary::Periodic,
            t1: 0.1,
            dt: 1e-4,
            save_every: 100,
        }
    }
}

impl RcdParams {
    pub fn dx(&self) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => self.length / (self.points - 1) as f64,
            _ => self.length / self.points as f64,
        }
    }

    /// Largest stable step: the diffusive bound `dx^2 / 2K` and the
    /// transport bound `dx / |gamma|`.
    pub fn stability_bound(&self) -> f64 {
        let dx = self.dx();
        let mut b = f64::INFINITY;
        if self.k > 0.0 {
            b = b.min(dx * dx / (2.0 * self.k));
        }
        if self.gamma != 0.0 {
            b = b.min(dx / self.gamma.abs());
        }
        if self.beta > 0.0 {
            b = b.min(2.0 / self.beta);
        }
        b
    }
}

fn rhs(p: &RcdParams, xs: &[f64], f: &dyn Fn(f64, f64) -> f64, t: f64, u: &[f64]) -> Vec<f64> {
    let n = u.len();
    let dx = p.dx();
    let periodic = p.boundary == Boundary::Periodic;
    let at = |i: isize| -> f64 {
        if periodic {
            u[i.rem_euclid(n as isize) as usize]
        } else {
            u[i.clamp(0, n as isize - 1) as usize]
        }
    };
    let mut out = vec![0.0; n];
    for i in 0..n {
        if !periodic && (i == 0 || i == n - 1) {
            continue;
        }
        let j = i as isize;
        let (l, c, r) = (at(j - 1), u[i], at(j + 1));
        let diff = p.k * (r - 2.0 * c + l) / (dx * dx);
        let adv = if p.gamma >= 0.0 { p.gamma * (c - l) / dx } else { p.gamma * (r - c) / dx };
        out[i] = diff - adv - p.beta * c + f(xs[i], t);
    }
    out
}

/// Evolve `u0` (sampled on the grid) with source `f(x, t)`.
pub fn simulate_rcd(
    p: &RcdParams,
    u0: impl Fn(f64) -> f64,
    f: impl Fn(f64, f64) -> f64,
) -> Result<FieldGrid, NumericError> {
    if p.points < 3 || p.save_every == 0 || p.k < 0.0 || !(p.length > 0.0) {
        return Err(NumericError::InvalidArgument(
            "rcd needs >= 3 points, save_every >= 1, K >= 0 and a positive length".into(),
        ));
    }
    if p.boundary == Boundary::Reflecting {
        return Err(NumericError::InvalidArgument(
            "rcd supports periodic and dirichlet boundaries".into(),
        ));
    }
    let bound = p.stability_bound();
    if p.dt > bound {
        return Err(NumericError::CflViolation {
            dt: p.dt,
            bound,
            reason: "explicit diffusion/upwind transport".into(),
        });
    }
    let steps = step_count((0.0, p.t1), p.dt)?;
    let dx = p.dx();
    let xs: Vec<f64> = (0..p.points).map(|i| p.x0 + i as f64 * dx).collect();
    let mut u: Vec<f64> = xs.iter().map(|&x| u0(x)).collect();
    let mut times = vec![0.0];
    let mut snaps = vec![u.clone()];
    let sys = |t: f64, y: &[f64]| rhs(p, &xs, &f, t, y);
    for i in 0..steps {
        let t = i as f64 * p.dt;
        u = rk4_step(&sys, t, &u, p.dt);
        if u.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::NonFiniteState { t: t + p.dt });
        }
        if (i + 1) % p.save_every == 0 || i + 1 == steps {
            times.push(t + p.dt);
            snaps.push(u.clone());
        }
    }
    let mass = snaps.iter().map(|s| integral(s, dx)).collect();
    let l2 = snaps
        .iter()
        .map(|s| integral(&s.iter().map(|v| v * v).collect::<Vec<_>>(), dx))
        .collect();
    Ok(FieldGrid {
        field: "U".into(),
        x0: p.x0,
        dx,
        points: p.points,
        boundary: p.boundary,
        dt: p.dt,
        times,
        snapshots: snaps,
        conserved: vec![("mass".into(), mass), ("l2".into(), l2)],
        stability_bound: bound,
        warnings: Vec::new(),
        meta: Metadata::new("rcd", "rk4-mol")
            .param("K", p.k)
            .param("gamma", p.gamma)
            .param("beta", p.beta),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_large_step() {
        let p = RcdParams { dt: 1e-2, ..Default::default() };
        let err = simulate_rcd(&p, |_| 0.0, |_, _| 0.0).unwrap_err();
        assert!(matches!(err, NumericError::CflViolation { .. }));
    }

    #[test]
    fn diffusion_conserves_mass() {
        let g = simulate_rcd(&RcdParams::default(), |x| (-x * x).exp(), |_, _| 0.0).unwrap();
        assert!(g.drift("mass").unwrap() < 1e-12);
    }
}
