use std::collections::BTreeMap;

use structvar_core::catalog::{build, derive, hamilton_elimination, hamiltonian_of, TargetMode};
use structvar_core::numeric::abraham::{simulate_reduced, AbrahamParams};
use structvar_core::numeric::caldirola::{simulate_caldirola_kanai, CaldirolaParams};
use structvar_core::numeric::fokker_planck::{simulate_fokker_planck, FpParams, FpVariant};
use structvar_core::numeric::kdv::{simulate_kdv, soliton, soliton_expr, KdvParams};
use structvar_core::numeric::oscillator::{simulate_dissipative_oscillator, OscillatorParams};
use structvar_core::numeric::rcd::{simulate_rcd, RcdParams};
use structvar_core::numeric::residual::{residual_check, Solution};
use structvar_core::numeric::Method;
use structvar_core::symbolic::{differentiate, evaluate, parse_with, simplify, Bindings, Expr, ParseContext};
use structvar_core::symbolic::expr::add;
use structvar_core::NumericError;

fn post_limit(id: &str, kv: &[(&str, &str)]) -> Expr {
    let o: BTreeMap<String, String> = kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect();
    let sys = build(id, &o).unwrap();
    derive(&sys, TargetMode::Corrected, true).unwrap()[0].post_limit.clone()
}

#[test]
fn oscillator_run_satisfies_derived_equation() {
    let p = OscillatorParams { gamma: 0.2, ..Default::default() };
    let tr = simulate_dissipative_oscillator(&p, Method::Rk4).unwrap();
    let eq = post_limit("dissipative-oscillator", &[("U", "harmonic")]);
    let b = Bindings::new().with("m", p.m).with("gamma", p.gamma).with("k", p.k);
    let r = residual_check(&eq, Solution::Trajectory(&tr), &b).unwrap();
    assert!(r < 1e-4, "{r}");
}

#[test]
fn radiation_reaction_reduced_run_satisfies_third_order_equation() {
    let p = AbrahamParams { eps: 1e-2, ..Default::default() };
    let tr = simulate_reduced(&p).unwrap();
    let eq = post_limit("abraham-lorentz", &[("U", "harmonic"), ("m", "1"), ("k", "1")]);
    // eps = 2 e^2 / 3 c^3 with c = 1
    let b = Bindings::new().with("e", (1.5 * p.eps).sqrt()).with("c", 1.0);
    let r = residual_check(&eq, Solution::Trajectory(&tr), &b).unwrap();
    assert!(r < 1e-3, "{r}");
}

#[test]
fn caldirola_kanai_run_satisfies_hamilton_elimination() {
    let p = CaldirolaParams::default();
    let tr = simulate_caldirola_kanai(&p).unwrap();
    let h = hamiltonian_of(&BTreeMap::new()).unwrap();
    let eq = hamilton_elimination(&h, "q");
    let b = Bindings::new().with("m", p.m).with("lambda", p.lambda).with("omega0", p.omega0);
    let r = residual_check(&eq, Solution::Trajectory(&tr), &b).unwrap();
    assert!(r < 1e-4, "{r}");
}

#[test]
fn kdv_run_satisfies_derived_equation() {
    let p = KdvParams { t1: 0.01, save_every: 1, ..Default::default() };
    let g = simulate_kdv(&p, |x| soliton(4.0, 0.0, x, 0.0)).unwrap();
    let eq = post_limit("kdv", &[]);
    let r = residual_check(&eq, Solution::Field(&g), &Bindings::new()).unwrap();
    assert!(r < 1e-3, "{r}");
}

#[test]
fn soliton_solves_kdv_symbolically() {
    let phi = soliton_expr();
    let res = simplify(&add(vec![
        differentiate(&phi, "t", 1),
        differentiate(&phi, "x", 3),
        structvar_core::symbolic::expr::mul(vec![structvar_core::symbolic::int(-6), phi.clone(), differentiate(&phi, "x", 1)]),
    ]));
    for (c, x, t) in [(4.0, 0.3, 0.1), (1.0, -1.2, 0.7), (2.5, 2.0, -0.4)] {
        let b = Bindings::new().with("c", c).with("x", x).with("t", t);
        assert!(evaluate(&res, &b).unwrap().abs() < 1e-9);
    }
}

#[test]
fn fokker_planck_run_satisfies_derived_equation() {
    let p = FpParams { variant: FpVariant::Linear, t1: 0.01, dt: 1e-4, save_every: 1, cells: 640, ..Default::default() };
    let start = |x: f64| (-x * x).exp() / std::f64::consts::PI.sqrt();
    let g = simulate_fokker_planck(&p, start, |x| -x).unwrap();
    let eq = post_limit("fp-linear", &[]);
    let b = Bindings::new().with("D", p.d).with_fn("f", |a, o| match o[0] {
        0 => Some(-a[0]),
        1 => Some(-1.0),
        _ => Some(0.0),
    });
    let r = residual_check(&eq, Solution::Field(&g), &b).unwrap();
    assert!(r < 1e-3, "{r}");
}

#[test]
fn rcd_run_satisfies_derived_equation() {
    // upwind transport is only first order, so the loop is closed on the
    // diffusion-reaction part
    let p = RcdParams { beta: 0.3, t1: 0.01, save_every: 1, ..Default::default() };
    let g = simulate_rcd(&p, |x| (-x * x).exp(), |_, _| 0.2).unwrap();
    let eq = post_limit("rcd", &[("gamma", "0")]);
    let b = Bindings::new().with("K", p.k).with("beta", p.beta).with_fn("f", |_, _| Some(0.2));
    let r = residual_check(&eq, Solution::Field(&g), &b).unwrap();
    assert!(r < 1e-3, "{r}");
}

#[test]
fn zero_field_has_zero_residual() {
    let g = simulate_kdv(&KdvParams { t1: 0.01, save_every: 1, ..Default::default() }, |_| 0.0).unwrap();
    let eq = post_limit("kdv", &[]);
    assert_eq!(residual_check(&eq, Solution::Field(&g), &Bindings::new()).unwrap(), 0.0);
}

#[test]
fn foreign_symbols_are_rejected() {
    let g = simulate_kdv(&KdvParams { t1: 0.01, save_every: 1, ..Default::default() }, |_| 0.0).unwrap();
    let eq = parse_with("d(psi,t) + psi", &ParseContext::new().with_function("psi", &["x", "t"])).unwrap();
    assert!(matches!(
        residual_check(&eq, Solution::Field(&g), &Bindings::new()),
        Err(NumericError::SymbolMismatch(_))
    ));
}
