//! Expression generators and the symbolic properties they feed.

use proptest::prelude::*;
use proptest::test_runner::TestCaseError;

use structvar_core::symbolic::expr::*;
use structvar_core::symbolic::*;

pub fn leaf() -> impl Strategy<Value = Expr> {
    prop_oneof![
        (-3i128..=3).prop_map(int),
        (1i128..=4, 2i128..=3).prop_map(|(n, d)| rat(n, d)),
        prop::sample::select(vec!["x", "y", "a"]).prop_map(sym),
    ]
}

pub fn expr() -> impl Strategy<Value = Expr> {
    leaf().prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            prop::collection::vec(inner.clone(), 2..4).prop_map(add),
            prop::collection::vec(inner.clone(), 2..3).prop_map(mul),
            (inner.clone(), 2i128..=3).prop_map(|(b, n)| pow(&b, q(n, 1))),
            inner.clone().prop_map(|u| exp(&scale(q(1, 4), &u))),
            inner.prop_map(|u| ln(&add(vec![int(2), pow(&u, q(2, 1))]))),
        ]
    })
}

pub type Point = (f64, f64, f64);

pub fn point() -> impl Strategy<Value = Point> {
    (0.5f64..1.5, 0.5f64..1.5, 0.5f64..1.5)
}

pub fn at((x, y, a): Point) -> Bindings {
    Bindings::new().with("x", x).with("y", y).with("a", a)
}

fn close(u: f64, v: f64, rel: f64) -> bool {
    (u - v).abs() <= rel * (1.0 + u.abs().max(v.abs()))
}

fn eval(e: &Expr, p: Point) -> Result<f64, TestCaseError> {
    evaluate(e, &at(p)).map_err(|err| TestCaseError::fail(format!("{e}: {err}")))
}

pub fn linearity(f: &Expr, g: &Expr, al: i128, be: i128, p: Point) -> Result<(), TestCaseError> {
    let lhs = differentiate(&add(vec![scale(q(al, 1), f), scale(q(be, 1), g)]), "x", 1);
    let rhs = add(vec![scale(q(al, 1), &differentiate(f, "x", 1)), scale(q(be, 1), &differentiate(g, "x", 1))]);
    prop_assert!(close(eval(&lhs, p)?, eval(&rhs, p)?, 1e-9));
    Ok(())
}

pub fn leibniz(f: &Expr, g: &Expr, p: Point) -> Result<(), TestCaseError> {
    let lhs = differentiate(&mul(vec![f.clone(), g.clone()]), "x", 1);
    let rhs = add(vec![
        mul(vec![differentiate(f, "x", 1), g.clone()]),
        mul(vec![f.clone(), differentiate(g, "x", 1)]),
    ]);
    prop_assert!(close(eval(&lhs, p)?, eval(&rhs, p)?, 1e-9));
    Ok(())
}

pub fn finite_difference(f: &Expr, p: Point) -> Result<(), TestCaseError> {
    let h = 1e-5;
    let e = |x: f64| eval(f, (x, p.1, p.2));
    let fd = (e(p.0 + h)? - e(p.0 - h)?) / (2.0 * h);
    let d = eval(&differentiate(f, "x", 1), p)?;
    let scale = 1.0 + e(p.0)?.abs() + d.abs();
    prop_assert!((fd - d).abs() < 1e-5 * scale, "fd {} vs {}", fd, d);
    Ok(())
}

pub fn idempotent(f: &Expr) -> Result<(), TestCaseError> {
    let once = simplify(f);
    prop_assert_eq!(simplify(&once), once);
    Ok(())
}

pub fn round_trip(f: &Expr) -> Result<(), TestCaseError> {
    prop_assert_eq!(&parse(&render_plain(f)).map_err(|e| TestCaseError::fail(e.to_string()))?, f);
    prop_assert_eq!(&parse_sexpr(&render_sexpr(f)).map_err(|e| TestCaseError::fail(e.to_string()))?, f);
    Ok(())
}
