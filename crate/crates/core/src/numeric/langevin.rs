//! Ensemble Euler-Maruyama for `m x'' + gamma(t) x' = sqrt(2 D(t)) gamma(t) zeta(t)`
//! with the scaled-Brownian profile `gamma = gamma0 (1 + t/tau)^(1-alpha)`,
//! `D = D0 (1 + t/tau)^(alpha-1)`.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use super::ode::{step_count, Metadata};
use crate::error::NumericError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SbmParams {
    pub m: f64,
    pub gamma0: f64,
    pub d0: f64,
    pub tau: f64,
    pub alpha: f64,
    pub trajectories: usize,
    pub seed: u64,
    pub t1: f64,
    pub dt: f64,
    /// Steps between recorded checkpoints.
    pub record_every: usize,
}

impl Default for SbmParams {
    fn default() -> Self {
        Self {
            m: 1.0,
            gamma0: 1.0,
            d0: 1.0,
            tau: 1.0,
            alpha: 0.5,
            trajectories: 10_000,
            seed: 0x5eed,
            t1: 10.0,
            dt: 1e-3,
            record_every: 1000,
        }
    }
}

impl SbmParams {
    pub fn gamma(&self, t: f64) -> f64 {
        self.gamma0 * (1.0 + t / self.tau).powf(1.0 - self.alpha)
    }

    pub fn diffusion(&self, t: f64) -> f64 {
        self.d0 * (1.0 + t / self.tau).powf(self.alpha - 1.0)
    }
}

/// Ensemble moments at the recorded checkpoints.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnsembleStats {
    pub times: Vec<f64>,
    pub msd: Vec<f64>,
    pub msd_stderr: Vec<f64>,
    pub v2: Vec<f64>,
    pub v2_stderr: Vec<f64>,
    pub trajectories: usize,
    pub meta: Metadata,
}

/// Independent stream for trajectory `index` under `seed`.
pub fn trajectory_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn run_one(p: &SbmParams, steps: usize, index: u64) -> Vec<(f64, f64)> {
    let mut rng = trajectory_rng(p.seed, index);
    let sq = p.dt.sqrt();
    let (mut x, mut v) = (0.0_f64, 0.0_f64);
    let mut out = Vec::with_capacity(steps / p.record_every + 1);
    out.push((0.0, 0.0));
    for i in 0..steps {
        let t = i as f64 * p.dt;
        let g = p.gamma(t);
        let s = (2.0 * p.diffusion(t)).sqrt() * g / p.m;
        let xi: f64 = StandardNormal.sample(&mut rng);
        x += v * p.dt;
        v += -g / p.m * v * p.dt + s * sq * xi;
        if (i + 1) % p.record_every == 0 {
            out.push((x * x, v * v));
        }
    }
    out
}

/// Mean and standard error of the mean from running sums.
fn moments(sum: f64, sum2: f64, n: usize) -> (f64, f64) {
    let nf = n as f64;
    let mean = sum / nf;
    let var = if n > 1 { ((sum2 - nf * mean * mean) / (nf - 1.0)).max(0.0) } else { 0.0 };
    (mean, (var / nf).sqrt())
}

/// Simulate the ensemble in parallel. Results depend only on the seed.
pub fn simulate_langevin_sbm(p: &SbmParams) -> Result<EnsembleStats, NumericError> {
    if p.trajectories == 0 || p.record_every == 0 {
        return Err(NumericError::InvalidArgument(
            "need at least one trajectory and record_every >= 1".into(),
        ));
    }
    if !(p.m > 0.0 && p.tau > 0.0 && p.gamma0 >= 0.0 && p.d0 >= 0.0) {
        return Err(NumericError::InvalidArgument(
            "SBM needs m > 0, tau > 0, gamma0 >= 0, D0 >= 0".into(),
        ));
    }
    let steps = step_count((0.0, p.t1), p.dt)?;
    let runs: Vec<Vec<(f64, f64)>> = (0..p.trajectories as u64)
        .into_par_iter()
        .map(|i| run_one(p, steps, i))
        .collect();
    let k = runs[0].len();
    let mut acc = vec![[0.0_f64; 4]; k];
    for r in &runs {
        for (a, &(x2, v2)) in acc.iter_mut().zip(r) {
            a[0] += x2;
            a[1] += x2 * x2;
            a[2] += v2;
            a[3] += v2 * v2;
        }
    }
    let n = p.trajectories;
    let mut st = EnsembleStats {
        times: (0..k).map(|j| (j * p.record_every) as f64 * p.dt).collect(),
        msd: Vec::with_capacity(k),
        msd_stderr: Vec::with_capacity(k),
        v2: Vec::with_capacity(k),
        v2_stderr: Vec::with_capacity(k),
        trajectories: n,
        meta: Metadata::new("langevin", "euler-maruyama")
            .param("m", p.m)
            .param("gamma0", p.gamma0)
            .param("D0", p.d0)
            .param("tau", p.tau)
            .param("alpha", p.alpha),
    };
    st.meta.seed = Some(p.seed);
    for a in &acc {
        if a.iter().any(|v| !v.is_finite()) {
            return Err(NumericError::NonFiniteState { t: p.t1 });
        }
        let (m, e) = moments(a[0], a[1], n);
        st.msd.push(m);
        st.msd_stderr.push(e);
        let (m, e) = moments(a[2], a[3], n);
        st.v2.push(m);
        st.v2_stderr.push(e);
    }
    Ok(st)
}
