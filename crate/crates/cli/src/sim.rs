//! `simulate`: run one catalog system numerically and export the result.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use structvar_core::numeric::abraham::{simulate_abraham_lorentz, AbrahamParams};
use structvar_core::numeric::caldirola::{simulate_caldirola_kanai, CaldirolaParams};
use structvar_core::numeric::export::{
    write_conserved_csv, write_ensemble_csv, write_field_csv, write_manifest, write_trajectory_csv, InvariantSummary,
    Manifest,
};
use structvar_core::numeric::fokker_planck::{simulate_fokker_planck, FpParams, FpVariant};
use structvar_core::numeric::kdv::{simulate_kdv, soliton, KdvParams, KdvScheme};
use structvar_core::numeric::langevin::{simulate_langevin_sbm, SbmParams};
use structvar_core::numeric::llg::{simulate_llg, LlgParams};
use structvar_core::numeric::oscillator::{max_increase, simulate_dissipative_oscillator, OscillatorParams};
use structvar_core::numeric::rcd::{simulate_rcd, RcdParams};
use structvar_core::numeric::{Boundary, FieldGrid, Method, Metadata, Trajectory};
use structvar_core::NumericError;

use crate::config::RunConfig;
use crate::Failure;

/// Environment variable naming the default output directory.
pub const OUT_ENV: &str = "STRUCTVAR_OUT";

/// Parameter lookup that rejects keys the system does not know.
struct Params<'a> {
    system: &'a str,
    raw: &'a BTreeMap<String, String>,
}

impl<'a> Params<'a> {
    fn new(system: &'a str, raw: &'a BTreeMap<String, String>, known: &[&str]) -> Result<Self, Failure> {
        if let Some(k) = raw.keys().find(|k| !known.contains(&k.as_str())) {
            return Err(Failure::Parse(format!(
                "unknown parameter `{k}` for {system} (known: {})",
                known.join(", ")
            )));
        }
        Ok(Self { system, raw })
    }

    fn get<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T, Failure> {
        match self.raw.get(key) {
            None => Ok(default),
            Some(v) => v
                .parse()
                .map_err(|_| Failure::Parse(format!("bad value `{v}` for {} parameter `{key}`", self.system))),
        }
    }

    fn f(&self, key: &str, default: f64) -> Result<f64, Failure> {
        self.get(key, default)
    }

    fn has(&self, key: &str) -> bool {
        self.raw.contains_key(key)
    }
}

fn parse_enum<T: std::str::FromStr<Err = String>>(p: &Params, key: &str, default: &str) -> Result<T, Failure> {
    p.raw.get(key).map_or(default, String::as_str).parse().map_err(Failure::Parse)
}

fn scheme(p: &Params) -> Result<KdvScheme, Failure> {
    match p.raw.get("scheme").map_or("pseudo-spectral", String::as_str) {
        "pseudo-spectral" | "spectral" => Ok(KdvScheme::Spectral),
        "zabusky-kruskal" => Ok(KdvScheme::ZabuskyKruskal),
        other => Err(Failure::Parse(format!("unknown scheme `{other}` (pseudo-spectral, zabusky-kruskal)"))),
    }
}

/// One line of the run summary.
struct Check {
    name: String,
    pass: Option<bool>,
    detail: String,
}

impl Check {
    fn judged(name: &str, pass: bool, detail: String) -> Self {
        Self { name: name.into(), pass: Some(pass), detail }
    }

    fn info(name: &str, detail: String) -> Self {
        Self { name: name.into(), pass: None, detail }
    }

    fn line(&self) -> String {
        match self.pass {
            Some(p) => format!("{}: {} ({})", self.name, if p { "PASS" } else { "FAIL" }, self.detail),
            None => format!("{}: {}", self.name, self.detail),
        }
    }
}

/// Result of a run, before anything touches the disk.
enum Output {
    Trajectory(Trajectory),
    Field(FieldGrid),
    Ensemble(structvar_core::numeric::langevin::EnsembleStats),
}

struct Run {
    main: Output,
    extra: Vec<(String, Trajectory)>,
    checks: Vec<Check>,
    tolerances: Vec<(String, f64)>,
    warnings: Vec<String>,
    meta: Metadata,
    dt: f64,
    t1: f64,
}

fn monotone(name: &str, series: &[f64], tol: f64) -> Check {
    let rise = max_increase(series);
    let scale = series[0].abs().max(1.0);
    Check::judged(name, rise <= tol * scale, format!("largest step increase {rise:.3e}"))
}

fn drift(g: &FieldGrid, name: &str, tol: f64) -> Check {
    let d = g.drift(name).unwrap_or(f64::NAN);
    Check::judged(&format!("{name} conserved"), d <= tol, format!("relative drift {d:.3e}, tolerance {tol:.0e}"))
}

const MONOTONE_TOL: f64 = 1e-12;

fn oscillator(p: &Params) -> Result<Run, Failure> {
    let d = OscillatorParams::default();
    let q = OscillatorParams {
        m: p.f("m", d.m)?,
        gamma: p.f("gamma", d.gamma)?,
        k: p.f("k", d.k)?,
        x0: p.f("x0", d.x0)?,
        v0: p.f("v0", d.v0)?,
        t1: p.f("t1", d.t1)?,
        dt: p.f("dt", d.dt)?,
    };
    let method: Method = parse_enum(p, "integrator", "rk4")?;
    let tr = simulate_dissipative_oscillator(&q, method)?;
    let checks = vec![monotone("energy monotone", tr.invariant("E").expect("oscillator records E"), MONOTONE_TOL)];
    Ok(Run {
        meta: tr.meta.clone(),
        main: Output::Trajectory(tr),
        extra: vec![],
        checks,
        tolerances: vec![("energy monotone".into(), MONOTONE_TOL)],
        warnings: vec![],
        dt: q.dt,
        t1: q.t1,
    })
}

fn langevin(p: &Params, seed: Option<u64>) -> Result<Run, Failure> {
    let seed = seed.ok_or_else(|| Failure::Parse("langevin is stochastic: pass --seed".into()))?;
    let d = SbmParams::default();
    let q = SbmParams {
        m: p.f("m", d.m)?,
        gamma0: p.f("gamma0", d.gamma0)?,
        d0: p.f("D0", d.d0)?,
        tau: p.f("tau", d.tau)?,
        alpha: p.f("alpha", d.alpha)?,
        trajectories: p.get("N", d.trajectories)?,
        seed,
        t1: p.f("t1", d.t1)?,
        dt: p.f("dt", d.dt)?,
        record_every: p.get("record-every", d.record_every)?,
    };
    let s = simulate_langevin_sbm(&q)?;
    let last = s.times.len() - 1;
    let checks = vec![
        Check::info("trajectories", s.trajectories.to_string()),
        Check::info(
            &format!("msd at t = {}", s.times[last]),
            format!("{:.6} +/- {:.6}", s.msd[last], s.msd_stderr[last]),
        ),
        Check::info(
            &format!("v2 at t = {}", s.times[last]),
            format!("{:.6} +/- {:.6}", s.v2[last], s.v2_stderr[last]),
        ),
    ];
    Ok(Run {
        meta: s.meta.clone(),
        main: Output::Ensemble(s),
        extra: vec![],
        checks,
        tolerances: vec![],
        warnings: vec![],
        dt: q.dt,
        t1: q.t1,
    })
}

fn abraham(p: &Params, id: &str) -> Result<Run, Failure> {
    let d = AbrahamParams::default();
    let eps = match (p.has("eps"), p.has("e") || p.has("c")) {
        (true, true) => return Err(Failure::Parse("give either eps or e and c, not both".into())),
        (false, true) => {
            let (e, c) = (p.f("e", 1.0)?, p.f("c", 1.0)?);
            2.0 * e * e / (3.0 * c * c * c)
        }
        _ => p.f("eps", d.eps)?,
    };
    let q = AbrahamParams {
        m: p.f("m", d.m)?,
        k: p.f("k", d.k)?,
        eps,
        x0: p.f("x0", d.x0)?,
        v0: p.f("v0", d.v0)?,
        a0: p.f("a0", d.a0)?,
        t1: p.f("t1", d.t1)?,
        dt: p.f("dt", d.dt)?,
        runaway_factor: p.f("runaway-factor", d.runaway_factor)?,
    };
    let runs = simulate_abraham_lorentz(&q)?;
    let mut checks = vec![monotone("energy monotone", runs.reduced.invariant("E").expect("reduced run records E"), MONOTONE_TOL)];
    let mut warnings = vec![];
    match runs.runaway {
        Some((t, factor)) => {
            let msg = format!("direct third-order run is a runaway: energy grew by {factor:.3e} at t = {t}");
            checks.push(Check::info("direct run", msg.clone()));
            warnings.push(msg);
        }
        None => checks.push(Check::info("direct run", "no runaway within the span".into())),
    }
    let mut meta = runs.reduced.meta.clone();
    meta.system = id.to_string();
    Ok(Run {
        meta,
        main: Output::Trajectory(runs.reduced),
        extra: vec![(format!("{id}_direct.csv"), runs.direct)],
        checks,
        tolerances: vec![("energy monotone".into(), MONOTONE_TOL), ("runaway factor".into(), q.runaway_factor)],
        warnings,
        dt: q.dt,
        t1: q.t1,
    })
}

fn gaussian(x0: f64, sigma: f64) -> impl Fn(f64) -> f64 {
    move |x| (-(x - x0).powi(2) / (2.0 * sigma * sigma)).exp() / (sigma * (2.0 * std::f64::consts::PI).sqrt())
}

fn rcd(p: &Params) -> Result<Run, Failure> {
    let d = RcdParams::default();
    let q = RcdParams {
        k: p.f("K", d.k)?,
        gamma: p.f("gamma", d.gamma)?,
        beta: p.f("beta", d.beta)?,
        x0: p.f("x0", d.x0)?,
        length: p.f("length", d.length)?,
        points: p.get("points", d.points)?,
        boundary: parse_enum(p, "boundary", "periodic")?,
        t1: p.f("t1", d.t1)?,
        dt: p.f("dt", d.dt)?,
        save_every: p.get("save-every", d.save_every)?,
    };
    let source = p.f("f", 0.0)?;
    let sigma = p.f("sigma", 0.5)?;
    let center = p.f("center", q.x0 + q.length / 2.0)?;
    let g = simulate_rcd(&q, gaussian(center, sigma), move |_, _| source)?;
    let conserving = q.beta == 0.0 && source == 0.0 && q.boundary == Boundary::Periodic;
    let checks = if conserving {
        vec![drift(&g, "mass", 1e-10)]
    } else {
        let m = g.drift("mass").unwrap_or(f64::NAN);
        vec![Check::info("mass drift", format!("{m:.3e} (not conserved with reaction, source or non-periodic ends)"))]
    };
    Ok(field_run(g, checks, vec![("mass".into(), 1e-10)], q.dt, q.t1))
}

fn field_run(g: FieldGrid, checks: Vec<Check>, tolerances: Vec<(String, f64)>, dt: f64, t1: f64) -> Run {
    Run {
        meta: g.meta.clone(),
        warnings: g.warnings.clone(),
        main: Output::Field(g),
        extra: vec![],
        checks,
        tolerances,
        dt,
        t1,
    }
}

fn fokker_planck(p: &Params, id: &str) -> Result<Run, Failure> {
    let variant = match id {
        "fp-linear" => FpVariant::Linear,
        "fp-nonlinear-1" => FpVariant::Nonlinear1 { mu: p.f("mu", 1.0)? },
        _ => FpVariant::Nonlinear2 { mu: p.f("mu", 0.5)?, nu: p.f("nu", 1.0)? },
    };
    let d = FpParams::default();
    let q = FpParams {
        variant,
        d: p.f("D", d.d)?,
        xlo: p.f("xlo", d.xlo)?,
        length: p.f("length", d.length)?,
        cells: p.get("cells", d.cells)?,
        boundary: parse_enum(p, "boundary", "reflecting")?,
        t1: p.f("t1", d.t1)?,
        dt: p.f("dt", d.dt)?,
        save_every: p.get("save-every", d.save_every)?,
        strict_positivity: p.get("strict-positivity", false)?,
    };
    let k = p.f("k", 1.0)?;
    let sigma = p.f("sigma", 1.0)?;
    let g = simulate_fokker_planck(&q, gaussian(0.0, sigma), move |x| -k * x)?;
    const NORM_TOL: f64 = 1e-6;
    let checks = match variant {
        FpVariant::Nonlinear1 { mu } if mu != 1.0 => {
            let n = g.drift("norm").unwrap_or(f64::NAN);
            vec![Check::info("norm drift", format!("{n:.3e} (the extra term does not conserve normalization for mu != 1)"))]
        }
        _ => vec![drift(&g, "norm", NORM_TOL)],
    };
    Ok(field_run(g, checks, vec![("norm".into(), NORM_TOL)], q.dt, q.t1))
}

fn kdv(p: &Params) -> Result<Run, Failure> {
    let d = KdvParams::default();
    let q = KdvParams {
        x0: p.f("x0", d.x0)?,
        length: p.f("length", d.length)?,
        points: p.get("points", d.points)?,
        t1: p.f("t1", d.t1)?,
        dt: p.f("dt", d.dt)?,
        save_every: p.get("save-every", d.save_every)?,
        scheme: scheme(p)?,
    };
    let c = p.f("c", 1.0)?;
    let xc = p.f("xc", q.x0 + q.length / 4.0)?;
    let g = simulate_kdv(&q, move |x| soliton(c, xc, x, 0.0))?;
    const MASS_TOL: f64 = 1e-8;
    const ENERGY_TOL: f64 = 1e-5;
    let checks = vec![drift(&g, "mass", MASS_TOL), drift(&g, "energy", ENERGY_TOL)];
    Ok(field_run(g, checks, vec![("mass".into(), MASS_TOL), ("energy".into(), ENERGY_TOL)], q.dt, q.t1))
}

fn llg(p: &Params) -> Result<Run, Failure> {
    let d = LlgParams::default();
    let th = p.f("theta0", 0.5)?;
    let q = LlgParams {
        g: p.f("g", d.g)?,
        kappa: p.f("kappa", d.kappa)?,
        c: p.f("c", d.c)?,
        h: [p.f("hx", d.h[0])?, p.f("hy", d.h[1])?, p.f("hz", d.h[2])?],
        m0: [th.sin(), 0.0, th.cos()],
        t1: p.f("t1", d.t1)?,
        dt: p.f("dt", d.dt)?,
        norm_tol: p.f("norm-tol", d.norm_tol)?,
    };
    let tr = simulate_llg(&q)?;
    let norm = tr.invariant("norm").expect("llg records norm");
    let worst = norm.iter().map(|n| (n - 1.0).abs()).fold(0.0, f64::max);
    let mut checks = vec![Check::judged("norm preserved", worst <= q.norm_tol, format!("max |m| - 1 = {worst:.3e}"))];
    let e = tr.invariant("energy").expect("llg records energy");
    if q.alpha() == 0.0 {
        let spread = e.iter().map(|v| (v - e[0]).abs()).fold(0.0, f64::max);
        checks.push(Check::judged("energy conserved", spread <= 1e-8, format!("max change {spread:.3e}")));
    } else {
        checks.push(monotone("energy monotone", e, MONOTONE_TOL));
    }
    Ok(Run {
        meta: tr.meta.clone(),
        main: Output::Trajectory(tr),
        extra: vec![],
        checks,
        tolerances: vec![("norm".into(), q.norm_tol), ("energy monotone".into(), MONOTONE_TOL)],
        warnings: vec![],
        dt: q.dt,
        t1: q.t1,
    })
}

fn caldirola(p: &Params) -> Result<Run, Failure> {
    let d = CaldirolaParams::default();
    let q = CaldirolaParams {
        m: p.f("m", d.m)?,
        lambda: p.f("lambda", d.lambda)?,
        omega0: p.f("omega0", d.omega0)?,
        q0: p.f("q0", d.q0)?,
        p0: p.f("p0", d.p0)?,
        t1: p.f("t1", d.t1)?,
        dt: p.f("dt", d.dt)?,
    };
    let tr = simulate_caldirola_kanai(&q)?;
    let checks = vec![monotone(
        "mechanical energy monotone",
        tr.invariant("mechanical-energy").expect("caldirola-kanai records mechanical energy"),
        MONOTONE_TOL,
    )];
    Ok(Run {
        meta: tr.meta.clone(),
        main: Output::Trajectory(tr),
        extra: vec![],
        checks,
        tolerances: vec![("energy monotone".into(), MONOTONE_TOL)],
        warnings: vec![],
        dt: q.dt,
        t1: q.t1,
    })
}

const KEYS: &[(&str, &[&str])] = &[
    ("dissipative-oscillator", &["m", "gamma", "k", "x0", "v0", "t1", "dt", "integrator"]),
    ("langevin", &["m", "gamma0", "D0", "tau", "alpha", "N", "t1", "dt", "record-every"]),
    ("abraham-lorentz", &["m", "k", "eps", "e", "c", "x0", "v0", "a0", "t1", "dt", "runaway-factor"]),
    ("galley-ald", &["m", "k", "eps", "e", "c", "x0", "v0", "a0", "t1", "dt", "runaway-factor"]),
    ("rcd", &["K", "gamma", "beta", "f", "sigma", "center", "x0", "length", "points", "boundary", "t1", "dt", "save-every"]),
    ("fp-linear", &["D", "k", "sigma", "xlo", "length", "cells", "boundary", "t1", "dt", "save-every", "strict-positivity"]),
    ("fp-nonlinear-1", &["D", "mu", "k", "sigma", "xlo", "length", "cells", "boundary", "t1", "dt", "save-every", "strict-positivity"]),
    ("fp-nonlinear-2", &["D", "mu", "nu", "k", "sigma", "xlo", "length", "cells", "boundary", "t1", "dt", "save-every", "strict-positivity"]),
    ("kdv", &["c", "xc", "x0", "length", "points", "t1", "dt", "save-every", "scheme"]),
    ("llg", &["g", "kappa", "c", "hx", "hy", "hz", "theta0", "t1", "dt", "norm-tol"]),
    ("caldirola-kanai", &["m", "omega0", "lambda", "q0", "p0", "t1", "dt"]),
];

fn run(id: &str, cfg: &RunConfig) -> Result<Run, Failure> {
    let known = KEYS.iter().find(|(k, _)| *k == id).map(|(_, v)| *v).ok_or_else(|| match id {
        "kdv-deformed" => Failure::Parse("kdv-deformed has no numeric integrator; simulate kdv instead".into()),
        _ => Failure::Parse(format!("unknown system `{id}`")),
    })?;
    let p = Params::new(id, &cfg.params, known)?;
    match id {
        "dissipative-oscillator" => oscillator(&p),
        "langevin" => langevin(&p, cfg.seed),
        "abraham-lorentz" | "galley-ald" => abraham(&p, id),
        "rcd" => rcd(&p),
        "fp-linear" | "fp-nonlinear-1" | "fp-nonlinear-2" => fokker_planck(&p, id),
        "kdv" => kdv(&p),
        "llg" => llg(&p),
        _ => caldirola(&p),
    }
}

/// Output directory: `--out`, then `$STRUCTVAR_OUT`, then the working directory.
fn out_dir(cfg: &RunConfig) -> PathBuf {
    cfg.out
        .clone()
        .or_else(|| std::env::var_os(OUT_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("."))
}

/// Tracks written files so a failed export leaves nothing behind.
struct Written {
    dir: PathBuf,
    files: Vec<String>,
}

impl Written {
    fn write(&mut self, name: &str, f: impl FnOnce(&Path) -> Result<(), NumericError>) -> Result<(), NumericError> {
        let path = self.dir.join(name);
        self.files.push(name.to_string());
        f(&path)
    }

    fn discard(&self) {
        for f in &self.files {
            let _ = std::fs::remove_file(self.dir.join(f));
        }
    }
}

fn export(id: &str, r: &Run, w: &mut Written) -> Result<Manifest, NumericError> {
    let mut invariants = Vec::new();
    match &r.main {
        Output::Trajectory(tr) => {
            w.write(&format!("{id}.csv"), |p| write_trajectory_csv(tr, p))?;
            invariants.extend(tr.invariants.iter().map(|(n, s)| InvariantSummary::of(n, s)));
        }
        Output::Field(g) => {
            w.write(&format!("{id}.csv"), |p| write_field_csv(g, p))?;
            w.write(&format!("{id}_conserved.csv"), |p| write_conserved_csv(g, p))?;
            invariants.extend(g.conserved.iter().map(|(n, s)| InvariantSummary::of(n, s)));
        }
        Output::Ensemble(s) => w.write(&format!("{id}.csv"), |p| write_ensemble_csv(s, p))?,
    }
    for (name, tr) in &r.extra {
        w.write(name, |p| write_trajectory_csv(tr, p))?;
    }
    let mut files = w.files.clone();
    files.push("manifest.json".into());
    let m = Manifest {
        meta: r.meta.clone(),
        dt: r.dt,
        t1: r.t1,
        files,
        tolerances: r.tolerances.clone(),
        invariants,
        warnings: r.warnings.clone(),
    };
    w.write("manifest.json", |p| write_manifest(&m, p))?;
    Ok(m)
}

pub fn simulate(cfg: &RunConfig) -> Result<(), Failure> {
    let id = cfg.system.as_deref().ok_or_else(|| Failure::Parse("simulate needs a system id".into()))?;
    let r = run(id, cfg)?;
    let dir = out_dir(cfg);
    std::fs::create_dir_all(&dir)
        .map_err(|e| Failure::Numeric(format!("cannot create output directory {}: {e}", dir.display())))?;
    let mut w = Written { dir, files: vec![] };
    let manifest = match export(id, &r, &mut w) {
        Ok(m) => m,
        Err(e) => {
            w.discard();
            return Err(e.into());
        }
    };
    if cfg.json {
        println!("{}", serde_json::to_string_pretty(&manifest).expect("manifest serializes"));
    } else {
        println!("{id}: wrote {} to {}", manifest.files.join(", "), w.dir.display());
        for c in &r.checks {
            println!("{}", c.line());
        }
        for warn in &r.warnings {
            println!("warning: {warn}");
        }
    }
    if r.checks.iter().any(|c| c.pass == Some(false)) {
        return Err(Failure::Numeric("invariant check failed; outputs kept for inspection".into()));
    }
    Ok(())
}
