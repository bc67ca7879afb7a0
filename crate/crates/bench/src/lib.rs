//! Criterion benchmarks for the symbolic engine, the catalog and the
//! numeric integrators. `cargo bench -p structvar-bench` runs them all.

use std::collections::BTreeMap;
use std::hint::black_box;

use criterion::{BenchmarkId, Criterion};
use structvar_core::catalog::{verify, TargetMode};
use structvar_core::numeric::kdv::{simulate_kdv, soliton, KdvParams, KdvScheme};
use structvar_core::numeric::langevin::{simulate_langevin_sbm, SbmParams};
use structvar_core::numeric::oscillator::{simulate_dissipative_oscillator, OscillatorParams};
use structvar_core::numeric::Method;
use structvar_core::symbolic::{differentiate, parse, simplify};

const EXPRS: [&str; 3] = [
    "x^3*y + exp(a*x)*ln(2 + x^2)",
    "(x + y)^3*(x - a)^2/(1 + x^2)",
    "exp(x*y)*(x^2 + 2*x*y + y^2) - ln(2 + (a*x)^2)",
];

pub fn symbolic(c: &mut Criterion) {
    let mut g = c.benchmark_group("symbolic");
    for (i, src) in EXPRS.iter().enumerate() {
        let e = parse(src).unwrap();
        g.bench_with_input(BenchmarkId::new("parse", i), src, |b, s| b.iter(|| parse(black_box(s)).unwrap()));
        g.bench_with_input(BenchmarkId::new("simplify", i), &e, |b, e| b.iter(|| simplify(black_box(e))));
        g.bench_with_input(BenchmarkId::new("differentiate", i), &e, |b, e| {
            b.iter(|| differentiate(black_box(e), "x", 2))
        });
    }
    g.finish();
}

pub fn catalog(c: &mut Criterion) {
    let none = BTreeMap::new();
    let mut g = c.benchmark_group("verify");
    for id in ["dissipative-oscillator", "kdv", "llg", "caldirola-kanai"] {
        g.bench_function(id, |b| b.iter(|| verify(black_box(id), &none, TargetMode::Corrected).unwrap()));
    }
    g.finish();
}

pub fn numeric(c: &mut Criterion) {
    let mut g = c.benchmark_group("numeric");
    g.sample_size(20);
    let osc = OscillatorParams::default();
    g.bench_function("oscillator rk4 20k steps", |b| {
        b.iter(|| simulate_dissipative_oscillator(black_box(&osc), Method::Rk4).unwrap())
    });
    for scheme in [KdvScheme::Spectral, KdvScheme::ZabuskyKruskal] {
        let p = KdvParams { t1: 0.1, dt: 1e-4, save_every: 1000, scheme, ..Default::default() };
        g.bench_function(format!("kdv {scheme:?} 1k steps"), |b| {
            b.iter(|| simulate_kdv(black_box(&p), |x| soliton(1.0, 0.0, x, 0.0)).unwrap())
        });
    }
    let sbm = SbmParams { trajectories: 256, t1: 1.0, record_every: 100, ..Default::default() };
    g.bench_function("langevin ensemble 256 x 1k steps", |b| {
        b.iter(|| simulate_langevin_sbm(black_box(&sbm)).unwrap())
    });
    g.finish();
}
