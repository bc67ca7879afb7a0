//! Fokker-Planck variants in finite-volume flux form.
//!
//! * linear: `P_t = -(f P)_x + D P_xx`
//! * nonlinear-1: `P_t = -(f P)_x + D (P^(mu-1) P_x)_x - (mu-1)/2 D P_x^2 P^(mu-2)`
//! * nonlinear-2: `(P^mu)_t = -(f P^mu)_x + D (P^(nu-1) P_x)_x - (nu-1)/2 D P_x^2 P^(nu-2)`
//!
//! The evolved density is `P` (`P^mu` for nonlinear-2). Its integral is
//! conserved to round-off under reflecting or periodic boundaries whenever
//! the non-divergence term vanishes (`mu = 1`, resp. `nu = 1`).

use serde::Serialize;

use super::grid::{integral, Boundary, FieldGrid};
use super::ode::{rk4_step, step_count, Metadata};
use crate::error::NumericError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "variant", rename_all = "kebab-case")]
pub enum FpVariant {
    Linear,
    Nonlinear1 { mu: f64 },
    Nonlinear2 { mu: f64, nu: f64 },
}

impl FpVariant {
    pub fn name(&self) -> &'static str {
        match self {
            FpVariant::Linear => "fp-linear",
            FpVariant::Nonlinear1 { .. } => "fp-nonlinear-1",
            FpVariant::Nonlinear2 { .. } => "fp-nonlinear-2",
        }
    }

    /// Exponents `(m, n)` with evolved density `P^m` and diffusivity `P^(n-1)`.
    fn exponents(&self) -> (f64, f64) {
        match *self {
            FpVariant::Linear => (1.0, 1.0),
            FpVariant::Nonlinear1 { mu } => (1.0, mu),
            FpVariant::Nonlinear2 { mu, nu } => (mu, nu),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FpParams {
    pub variant: FpVariant,
    pub d: f64,
    /// Left edge of the domain.
    pub xlo: f64,
    pub length: f64,
    pub cells: usize,
    pub boundary: Boundary,
    pub t1: f64,
    pub dt: f64,
    pub save_every: usize,
    /// Abort on negative density instead of clipping it.
    pub strict_positivity: bool,
}

impl Default for FpParams {
    fn default() -> Self {
        Self {
            variant: FpVariant::Linear,
            d: 1.0,
            xlo: -8.0,
            length: 16.0,
            cells: 320,
            boundary: Boundary::Reflecting,
            t1: 1.0,
            dt: 1e-4,
            save_every: 1000,
            strict_positivity: false,
        }
    }
}

impl FpParams {
    pub fn dx(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn centers(&self) -> Vec<f64> {
        let dx = self.dx();
        (0..self.cells).map(|i| self.xlo + (i as f64 + 0.5) * dx).collect()
    }
}

fn mobility(p: f64, n: f64) -> f64 {
    if n == 1.0 {
        1.0
    } else if p > 0.0 {
        p.powf(n - 1.0)
    } else {
        0.0
    }
}

struct Op<'a> {
    p: &'a FpParams,
    /// Drift at faces `i + 1/2`, i = 0..cells.
    f_face: Vec<f64>,
    m: f64,
    n: f64,
}

impl Op<'_> {
    fn density(&self, q: f64) -> f64 {
        if self.m == 1.0 {
            q
        } else {
            q.max(0.0).powf(1.0 / self.m)
        }
    }

    /// d(density)/dQ.
    fn density_slope(&self, q: f64) -> f64 {
        if self.m == 1.0 {
            1.0
        } else if q > 0.0 {
            q.powf(1.0 / self.m - 1.0) / self.m
        } else {
            0.0
        }
    }

    fn rhs(&self, q: &[f64]) -> Vec<f64> {
        let c = q.len();
        let dx = self.p.dx();
        let d = self.p.d;
        let periodic = self.p.boundary == Boundary::Periodic;
        let dens: Vec<f64> = q.iter().map(|&v| self.density(v)).collect();
        // flux through face i + 1/2
        let faces = if periodic { c } else { c - 1 };
        let mut flux = vec![0.0; c];
        for i in 0..faces {
            let j = (i + 1) % c;
            let pf = 0.5 * (dens[i] + dens[j]);
            let mob = d * mobility(pf, self.n);
            let dif = mob * (dens[j] - dens[i]) / dx;
            // hybrid differencing: central unless the cell Peclet number
            // exceeds 2, where central advection would oscillate
            let slope = if (q[j] - q[i]).abs() > 1e-12 {
                (dens[j] - dens[i]) / (q[j] - q[i])
            } else {
                self.density_slope(0.5 * (q[i] + q[j]))
            };
            let f = self.f_face[i];
            let adv = if (f * dx).abs() <= 2.0 * mob * slope {
                f * 0.5 * (q[i] + q[j])
            } else if f > 0.0 {
                f * q[i]
            } else {
                f * q[j]
            };
            flux[i] = adv - dif;
        }
        let mut out = vec![0.0; c];
        for i in 0..c {
            let right = if periodic || i + 1 < c { flux[i] } else { 0.0 };
            let left = if i > 0 {
                flux[i - 1]
            } else if periodic {
                flux[c - 1]
            } else {
                0.0
            };
            out[i] = -(right - left) / dx;
        }
        if self.n != 1.0 {
            let coef = -0.5 * (self.n - 1.0) * d;
            for i in 0..c {
                let (l, r) = if periodic {
                    ((i + c - 1) % c, (i + 1) % c)
                } else {
                    (i.saturating_sub(1), (i + 1).min(c - 1))
                };
                let span = if periodic { 2.0 } else { (r - l) as f64 };
                let px = (dens[r] - dens[l]) / (span * dx);
                let pv = dens[i];
                if pv > 0.0 {
                    out[i] += coef * px * px * pv.powf(self.n - 2.0);
                }
            }
        }
        out
    }
}

/// Evolve the density `p0(x)` under drift `f(x)`.
///
/// Negative undershoots are clipped to zero and reported in `warnings`,
/// or abort with `NegativeDensity` under `strict_positivity`.
pub fn simulate_fokker_planck(
    p: &FpParams,
    p0: impl Fn(f64) -> f64,
    f: impl Fn(f64) -> f64,
) -> Result<FieldGrid, NumericError> {
    if p.cells < 3 || p.save_every == 0 || p.d < 0.0 || !(p.length > 0.0) {
        return Err(NumericError::InvalidArgument(
            "fokker-planck needs >= 3 cells, save_every >= 1, D >= 0 and a positive length".into(),
        ));
    }
    if p.boundary == Boundary::Dirichlet {
        return Err(NumericError::InvalidArgument(
            "fokker-planck supports reflecting and periodic boundaries".into(),
        ));
    }
    let (m, n) = p.variant.exponents();
    if !(m > 0.0) {
        return Err(NumericError::InvalidArgument("mu must be positive".into()));
    }
    let dx = p.dx();
    let xs = p.centers();
    let f_face: Vec<f64> = (0..p.cells).map(|i| f(p.xlo + (i as f64 + 1.0) * dx)).collect();
    let op = Op { p, f_face, m, n };
    let mut q: Vec<f64> = xs.iter().map(|&x| p0(x).max(0.0).powf(m)).collect();

    // effective diffusivity of the evolved density: (D / m) P^(n - m)
    let peak_mob = q
        .iter()
        .map(|&v| {
            let pv = op.density(v);
            if m == 1.0 && n == 1.0 {
                1.0
            } else if pv > 0.0 {
                pv.powf(n - m) / m
            } else {
                0.0
            }
        })
        .fold(0.0, f64::max)
        .max(1.0);
    let fmax = op.f_face.iter().fold(0.0_f64, |a, v| a.max(v.abs()));
    let mut bound = f64::INFINITY;
    if p.d > 0.0 {
        bound = bound.min(dx * dx / (2.0 * p.d * peak_mob));
    }
    if fmax > 0.0 {
        bound = bound.min(dx / fmax);
    }
    if p.dt > bound {
        return Err(NumericError::CflViolation { dt: p.dt, bound, reason: "explicit finite-volume flux".into() });
    }

    let steps = step_count((0.0, p.t1), p.dt)?;
    let mut warnings = Vec::new();
    let mut clipped = 0usize;
    let mut worst: Option<(f64, f64)> = None;
    let mut times = vec![0.0];
    let mut snaps = vec![q.clone()];
    let sys = |_: f64, y: &[f64]| op.rhs(y);
    for i in 0..steps {
        let t = (i + 1) as f64 * p.dt;
        q = rk4_step(&sys, t - p.dt, &q, p.dt);
        let min = q.iter().cloned().fold(f64::INFINITY, f64::min);
        if q.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::NonFiniteState { t });
        }
        if min < 0.0 {
            if p.strict_positivity {
                return Err(NumericError::NegativeDensity { t, min });
            }
            if worst.is_none_or(|(_, m)| min < m) {
                worst = Some((t, min));
            }
            q.iter_mut().for_each(|v| *v = v.max(0.0));
            clipped += 1;
        }
        if (i + 1) % p.save_every == 0 || i + 1 == steps {
            times.push(t);
            snaps.push(q.clone());
        }
    }
    if let Some((t, min)) = worst {
        warnings.push(format!(
            "{} (clipped to zero on {clipped} steps)",
            NumericError::NegativeDensity { t, min }
        ));
    }
    let norm = snaps.iter().map(|s| integral(s, dx)).collect();
    let mut meta = Metadata::new(p.variant.name(), "rk4-finite-volume").param("D", p.d);
    match p.variant {
        FpVariant::Linear => {}
        FpVariant::Nonlinear1 { mu } => meta = meta.param("mu", mu),
        FpVariant::Nonlinear2 { mu, nu } => meta = meta.param("mu", mu).param("nu", nu),
    }
    Ok(FieldGrid {
        field: if m == 1.0 { "P".into() } else { "P^mu".into() },
        x0: xs[0],
        dx,
        points: p.cells,
        boundary: p.boundary,
        dt: p.dt,
        times,
        snapshots: snaps,
        conserved: vec![("norm".into(), norm)],
        stability_bound: bound,
        warnings,
        meta,
    })
}

/// Mean and variance of a density sampled on cell centers.
pub fn mean_variance(u: &[f64], x0: f64, dx: f64) -> (f64, f64) {
    let z: f64 = u.iter().sum();
    let xs = (0..u.len()).map(|i| x0 + i as f64 * dx);
    let mean = xs.clone().zip(u).map(|(x, v)| x * v).sum::<f64>() / z;
    let var = xs.zip(u).map(|(x, v)| (x - mean).powi(2) * v).sum::<f64>() / z;
    (mean, var)
}
