//! One PASS/FAIL line per acceptance criterion; exits non-zero if any fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::collections::BTreeMap;
use std::process::Command;
use std::time::{Duration, Instant};

use proptest::test_runner::{Config, TestError, TestRunner};

use common::gen;
use common::{damped, heat_gaussian, linf, second_moments, soliton_periodic};
use structvar_core::catalog::{build, compare, derive, hamiltonian_of, list_systems, TargetMode};
use structvar_core::kernels::expand_deformed;
use structvar_core::numeric::caldirola::{simulate_caldirola_kanai, CaldirolaParams};
use structvar_core::numeric::fokker_planck::{mean_variance, simulate_fokker_planck, FpParams};
use structvar_core::numeric::kdv::{simulate_kdv, soliton, KdvParams};
use structvar_core::numeric::langevin::{simulate_langevin_sbm, SbmParams};
use structvar_core::numeric::llg::{dot, simulate_llg, LlgParams};
use structvar_core::numeric::oscillator::{simulate_dissipative_oscillator, OscillatorParams};
use structvar_core::numeric::rcd::{simulate_rcd, RcdParams};
use structvar_core::numeric::Method;
use structvar_core::symbolic::expr::{deformed, func, int, mul, sym, zero};
use structvar_core::symbolic::{differentiate, parse, parse_with, simplify, substitute, Expr, Kernel, ParseContext};
use structvar_core::variational::Verdict;

type Outcome = Result<String, String>;
type Criterion = (&'static str, Duration, fn() -> Outcome);

fn bin(args: &[&str], dir: &std::path::Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_structvar"))
        .current_dir(dir)
        .env_remove("STRUCTVAR_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn check(ok: bool, what: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn verify_all() -> Outcome {
    let o = bin(&["verify", "--all"], &std::env::temp_dir());
    let out = String::from_utf8_lossy(&o.stdout);
    let matched = out.lines().filter(|l| l.ends_with(" MATCH")).count();
    check(o.status.code() == Some(0), format!("exit {:?}\n{out}", o.status.code()))?;
    check(matched == 12 && list_systems().len() == 12, format!("{matched}/12 MATCH"))?;
    Ok("12/12 MATCH, exit 0".into())
}

fn overrides(kv: &[(&str, &str)]) -> BTreeMap<String, String> {
    kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
}

fn post(id: &str, kv: &[(&str, &str)]) -> Result<(ParseContext, Expr), String> {
    let sys = build(id, &overrides(kv)).map_err(|e| format!("{id}: {e}"))?;
    let r = derive(&sys, TargetMode::Corrected, true).map_err(|e| format!("{id}: {e}"))?;
    Ok((sys.context, r[0].post_limit.clone()))
}

fn reduces(name: &str, a: &Expr, b: &Expr) -> Result<(), String> {
    match compare(a, b) {
        Verdict::Match => Ok(()),
        v => Err(format!("{name}: {v:?}")),
    }
}

fn degenerations() -> Outcome {
    let mut n = 0;
    let mut step = |name: &str, r: Result<(), String>| {
        n += 1;
        r.map_err(|e| format!("{name}: {e}"))
    };
    let (ctx, e) = post("dissipative-oscillator", &[("gamma", "0")])?;
    step("gamma = 0", reduces("oscillator", &e, &parse_with("m*x'' + U'(x)", &ctx).unwrap()))?;
    let (ctx, e) = post("abraham-lorentz", &[("e", "0")])?;
    step("epsilon = 0", reduces("abraham-lorentz", &e, &parse_with("m*x'' + U'(x)", &ctx).unwrap()))?;
    let (_, e) = post("langevin", &[])?;
    let fixed = [
        (func("gamma", &["t"]), sym("gamma")),
        (func("D", &["t"]), sym("D")),
        (func("zeta", &["t"]), zero()),
    ];
    let e = simplify(&fixed.iter().fold(e, |acc, (f, v)| substitute(&acc, f, v)));
    let (_, osc) = post("dissipative-oscillator", &[])?;
    step("constant langevin coefficients", reduces("langevin", &e, &osc))?;
    let (_, a) = post("fp-nonlinear-1", &[("mu", "1")])?;
    let (_, b) = post("fp-linear", &[])?;
    step("mu = 1", reduces("fp-nonlinear-1", &a, &b))?;
    let (ctx, e) = post("fp-nonlinear-2", &[("nu", "1")])?;
    let want = parse_with("d(P^mu,t) + d(f*P^mu,x) - D*d(P,x,2)", &ctx).unwrap();
    step("nu = 1", reduces("fp-nonlinear-2", &e, &want))?;
    let (_, a) = post("kdv-deformed", &[("mu", "1"), ("nu", "1")])?;
    let (_, b) = post("kdv", &[])?;
    step("mu = nu = 1", reduces("kdv-deformed", &a, &b))?;
    let (ctx, e) = post("rcd", &[("gamma", "0"), ("beta", "0")])?;
    step("gamma = beta = 0", reduces("rcd", &e, &parse_with("d(U,t) - K*d(U,x,2) - f", &ctx).unwrap()))?;
    let h = hamiltonian_of(&overrides(&[("lambda", "0")])).map_err(|e| e.to_string())?;
    let want = parse_with("p^2/(2*m) + m/2*omega0^2*q^2", &ParseContext::new()).unwrap();
    step("lambda = 0", reduces("caldirola-kanai", &h, &want))?;
    for src in ["x^3*y", "exp(a*x)", "ln(2 + x^2)*y"] {
        let f = parse(src).unwrap();
        let d = differentiate(&f, "x", 1);
        let conf = expand_deformed(&deformed(Kernel::conformable(int(1), sym("a")), "x", &f));
        step("alpha = 1", check(conf == d, format!("conformable kernel on {src}")))?;
        let lexp = expand_deformed(&deformed(Kernel::lambda_exp(zero(), false), "x", &f));
        step("lambda = 0 kernel", check(lexp == d, format!("lambda-exp kernel on {src}")))?;
        let haus = expand_deformed(&deformed(Kernel::hausdorff(int(1), sym("y")), "x", &f));
        step("hausdorff alpha = 1", check(haus == mul(vec![sym("y"), d.clone()]), format!("hausdorff kernel on {src}")))?;
    }
    Ok(format!("{n} reductions"))
}

fn unit(v: [f64; 3]) -> [f64; 3] {
    let n = dot(v, v).sqrt();
    [v[0] / n, v[1] / n, v[2] / n]
}

fn numeric_oracles() -> Outcome {
    let num = |e: structvar_core::NumericError| e.to_string();
    let mut lines = Vec::new();

    let p = OscillatorParams { m: 2.0, gamma: 0.3, k: 3.0, x0: 1.0, v0: 0.5, t1: 20.0, dt: 1e-3 };
    let tr = simulate_dissipative_oscillator(&p, Method::Rk4).map_err(num)?;
    let (b, w0) = (p.gamma / (2.0 * p.m), (p.k / p.m).sqrt());
    let x = tr.column("x").unwrap();
    let err = (0..tr.n).map(|i| (x[i] - damped(b, w0, p.x0, p.v0, tr.time(i))).abs()).fold(0.0, f64::max);
    check(err <= 1e-6, format!("oscillator L-inf {err:.2e} > 1e-6"))?;
    lines.push(format!("oscillator {err:.1e}"));

    let p = CaldirolaParams { m: 1.5, lambda: 0.2, omega0: 1.3, q0: 1.0, p0: 0.3, t1: 20.0, dt: 1e-3 };
    let tr = simulate_caldirola_kanai(&p).map_err(num)?;
    let q = tr.column("q").unwrap();
    let err = (0..tr.n)
        .map(|i| (q[i] - damped(p.lambda / 2.0, p.omega0, p.q0, p.p0 / p.m, tr.time(i))).abs())
        .fold(0.0, f64::max);
    check(err <= 1e-6, format!("caldirola-kanai L-inf {err:.2e} > 1e-6"))?;
    lines.push(format!("caldirola-kanai {err:.1e}"));

    let s0 = 0.5;
    let p = RcdParams::default();
    let g = simulate_rcd(&p, |x| heat_gaussian(s0, p.k, x, 0.0), |_, _| 0.0).map_err(num)?;
    let exact: Vec<f64> = g.xs().iter().map(|&x| heat_gaussian(s0, p.k, x, p.t1)).collect();
    let err = linf(g.last(), &exact);
    check(err <= 1e-3, format!("heat kernel L-inf {err:.2e} > 1e-3"))?;
    lines.push(format!("heat {err:.1e}"));

    let p = FpParams { t1: 8.0, dt: 1e-3, save_every: 1000, ..Default::default() };
    let g = simulate_fokker_planck(&p, |x| (-x * x).exp() / std::f64::consts::PI.sqrt(), |x| -x).map_err(num)?;
    let (_, var) = mean_variance(g.last(), g.x0, g.dx);
    let rel = (var / p.d - 1.0).abs();
    check(rel <= 0.01, format!("OU position variance off by {rel:.2e}"))?;
    let drift = g.drift("norm").unwrap();
    check(drift <= 1e-6, format!("FP normalization drift {drift:.2e} > 1e-6"))?;
    lines.push(format!("OU density variance {rel:.1e}, FP norm {drift:.1e}"));

    let p = SbmParams { alpha: 1.0, t1: 60.0, dt: 2e-3, record_every: 250, ..Default::default() };
    let s = simulate_langevin_sbm(&p).map_err(num)?;
    let late: Vec<f64> = s.times.iter().zip(&s.v2).filter(|(t, _)| **t >= 10.0).map(|(_, v)| *v).collect();
    let mean = late.iter().sum::<f64>() / late.len() as f64;
    let rel = (mean / (p.d0 * p.gamma0 / p.m) - 1.0).abs();
    check(rel <= 0.01, format!("OU stationary <v^2> off by {rel:.2e}"))?;
    lines.push(format!("OU velocity variance {rel:.1e}"));

    let c = 4.0;
    let p = KdvParams { t1: 10.0, save_every: 1000, ..Default::default() };
    let g = simulate_kdv(&p, |x| soliton(c, 0.0, x, 0.0)).map_err(num)?;
    let exact: Vec<f64> = g.xs().iter().map(|&x| soliton_periodic(c, x, p.t1, p.x0, p.length)).collect();
    let err = linf(g.last(), &exact);
    check(err <= 1e-3, format!("KdV soliton L-inf {err:.2e} > 1e-3"))?;
    let mass = g.conserved("mass").unwrap();
    let md = mass.iter().map(|m| (m - mass[0]).abs()).fold(0.0, f64::max);
    check(md <= 1e-8, format!("KdV mass drift {md:.2e} > 1e-8"))?;
    lines.push(format!("KdV shape {err:.1e}, mass {md:.1e}"));

    let h = 2.0;
    let p = LlgParams { kappa: 0.0, h: [0.0, 0.0, h], m0: unit([1.0, 0.0, 1.0]), t1: 10.0, ..Default::default() };
    let tr = simulate_llg(&p).map_err(num)?;
    let (mx, my) = (tr.column("mx").unwrap(), tr.column("my").unwrap());
    let mut phase = 0.0;
    for i in 1..tr.n {
        let d = my[i].atan2(mx[i]) - my[i - 1].atan2(mx[i - 1]);
        phase += (d + std::f64::consts::PI).rem_euclid(2.0 * std::f64::consts::PI) - std::f64::consts::PI;
    }
    let rel = ((phase.abs() / p.t1) / (p.gamma().abs() * h) - 1.0).abs();
    check(rel <= 1e-3, format!("LLG precession frequency off by {rel:.2e}"))?;
    let nd = tr.invariant("norm").unwrap().iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
    check(nd <= 1e-8, format!("LLG norm drift {nd:.2e} > 1e-8"))?;
    lines.push(format!("LLG frequency {rel:.1e}, norm {nd:.1e}"));

    Ok(lines.join("; "))
}

fn stochastic() -> Outcome {
    let p = SbmParams { trajectories: 10_000, ..Default::default() };
    let s = simulate_langevin_sbm(&p).map_err(|e| e.to_string())?;
    let q = p;
    let oracle = second_moments(
        move |t| q.gamma(t) / q.m,
        move |t| 2.0 * q.diffusion(t) * (q.gamma(t) / q.m).powi(2),
        p.t1,
        1e-4,
    );
    let mut worst = 0.0f64;
    let mut checked = 0;
    for j in 1..s.times.len() {
        let z = (s.msd[j] - oracle(s.times[j])) / s.msd_stderr[j];
        check(z.abs() < 3.0, format!("t = {}: MSD {} standard errors from the oracle", s.times[j], z))?;
        worst = worst.max(z.abs());
        checked += 1;
    }
    check(checked == 10, format!("{checked} checkpoints, want 10"))?;

    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    for out in ["a", "b"] {
        let o = bin(&["--out", out, "simulate", "langevin", "--N", "10000", "--seed", "7"], dir.path());
        check(o.status.success(), format!("simulate langevin failed: {}", String::from_utf8_lossy(&o.stderr)))?;
    }
    for f in ["langevin.csv", "manifest.json"] {
        let a = std::fs::read(dir.path().join("a").join(f)).map_err(|e| e.to_string())?;
        let b = std::fs::read(dir.path().join("b").join(f)).map_err(|e| e.to_string())?;
        check(a == b, format!("replay of {f} differs"))?;
    }
    Ok(format!("{checked} checkpoints, max |z| = {worst:.2}; replay byte-identical"))
}

fn s<T: std::fmt::Debug>(e: TestError<T>) -> String {
    e.to_string()
}

fn properties() -> Outcome {
    let config = Config { cases: 100, failure_persistence: None, ..Config::default() };
    let mut failures = Vec::new();
    let mut run = |name: &str, r: Result<(), String>| {
        if let Err(e) = r {
            failures.push(format!("{name}: {e}"));
        }
    };
    run(
        "linearity",
        TestRunner::new(config.clone())
            .run(&(gen::expr(), gen::expr(), -3i128..=3, -3i128..=3, gen::point()), |(f, g, al, be, p)| {
                gen::linearity(&f, &g, al, be, p)
            })
            .map_err(s),
    );
    run(
        "leibniz",
        TestRunner::new(config.clone())
            .run(&(gen::expr(), gen::expr(), gen::point()), |(f, g, p)| gen::leibniz(&f, &g, p))
            .map_err(s),
    );
    run(
        "finite difference",
        TestRunner::new(config.clone())
            .run(&(gen::expr(), gen::point()), |(f, p)| gen::finite_difference(&f, p))
            .map_err(s),
    );
    run(
        "idempotence",
        TestRunner::new(config.clone()).run(&gen::expr(), |f| gen::idempotent(&f)).map_err(s),
    );
    run("round trip", TestRunner::new(config).run(&gen::expr(), |f| gen::round_trip(&f)).map_err(s));
    if failures.is_empty() {
        Ok("5 properties x 100 cases, 0 failures".into())
    } else {
        Err(failures.join("; "))
    }
}

fn typo_transparency() -> Outcome {
    for id in ["kdv", "abraham-lorentz", "caldirola-kanai"] {
        let o = bin(&["verify", id, "--printed-target"], &std::env::temp_dir());
        let out = String::from_utf8_lossy(&o.stdout);
        check(o.status.code() == Some(1), format!("{id}: exit {:?}", o.status.code()))?;
        check(out.contains("MISMATCH  diff: "), format!("{id}: no diff in output\n{out}"))?;
    }
    Ok("3 printed targets exit 1 with a diff".into())
}

fn main() {
    let criteria: [Criterion; 6] = [
        ("1 verify --all", Duration::from_secs(10), verify_all),
        ("2 degenerations", Duration::from_secs(5), degenerations),
        ("3 numeric oracles", Duration::from_secs(300), numeric_oracles),
        ("4 stochastic", Duration::from_secs(600), stochastic),
        ("5 symbolic properties", Duration::from_secs(30), properties),
        ("6 typo transparency", Duration::from_secs(60), typo_transparency),
    ];
    let mut failed = 0;
    for (name, limit, f) in criteria {
        let t = Instant::now();
        let r = f();
        let dt = t.elapsed();
        let r = match r {
            Ok(d) if dt > limit => Err(format!("{d} but took {:.1?} (limit {limit:?})", dt)),
            other => other,
        };
        match r {
            Ok(d) => println!("PASS criterion {name} [{dt:.1?}]: {d}"),
            Err(e) => {
                failed += 1;
                println!("FAIL criterion {name} [{dt:.1?}]: {e}");
            }
        }
    }
    println!("acceptance: {} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
