//! Residual of a symbolic equation along a numeric solution.
//!
//! Derivatives of the solution are taken by central differences in time
//! and (for periodic fields) spectrally in space. The result is the
//! largest absolute residual over the grid divided by the largest
//! magnitude of any single term, so `1e-4` means four digits of
//! cancellation.

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::{Boundary, FieldGrid};
use super::ode::Trajectory;
use crate::error::{NumericError, SymbolicError};
use crate::symbolic::expr::Node;
use crate::symbolic::{atoms, evaluate, Bindings, Expr};

/// A numeric solution to check against.
#[derive(Debug, Clone, Copy)]
pub enum Solution<'a> {
    Trajectory(&'a Trajectory),
    Field(&'a FieldGrid),
}

/// Central finite difference of order 0..=4 at index `i` (needs `i +- 2`).
fn central(y: &[f64], i: usize, h: f64, order: u32) -> f64 {
    let (m2, m1, c, p1, p2) = (y[i - 2], y[i - 1], y[i], y[i + 1], y[i + 2]);
    match order {
        0 => c,
        1 => (p1 - m1) / (2.0 * h),
        2 => (p1 - 2.0 * c + m1) / (h * h),
        3 => (p2 - 2.0 * p1 + 2.0 * m1 - m2) / (2.0 * h * h * h),
        _ => (p2 - 4.0 * p1 + 6.0 * c - 4.0 * m1 + m2) / (h * h * h * h),
    }
}

fn mismatch(e: SymbolicError) -> NumericError {
    match e {
        SymbolicError::UnboundSymbol(s) => NumericError::SymbolMismatch(format!("`{s}` is not bound by the solution or parameters")),
        other => NumericError::Symbolic(other),
    }
}

struct Atom {
    expr: Expr,
    name: String,
    orders: Vec<u32>,
    args: Vec<String>,
}

fn solution_atoms(eq: &Expr, names: &[&str]) -> Result<Vec<Atom>, NumericError> {
    let mut out = Vec::new();
    for a in atoms(eq) {
        match a.node() {
            Node::Func { name, args, orders } if names.contains(&name.as_str()) => {
                let args = args
                    .iter()
                    .map(|x| x.as_sym().map(str::to_string))
                    .collect::<Option<Vec<_>>>()
                    .ok_or_else(|| NumericError::SymbolMismatch(format!("`{name}` must be applied to plain coordinates")))?;
                if orders.iter().any(|&o| o > 4) {
                    return Err(NumericError::SymbolMismatch(format!("derivative of `{name}` beyond fourth order")));
                }
                out.push(Atom { expr: a.clone(), name: name.clone(), orders: orders.clone(), args });
            }
            Node::Derivative { .. } | Node::Deformed { .. } => {
                return Err(NumericError::SymbolMismatch(
                    "unevaluated derivative nodes; expand the equation first".into(),
                ))
            }
            _ => {}
        }
    }
    Ok(out)
}

fn check(eq: &Expr, points: impl Iterator<Item = Bindings>) -> Result<f64, NumericError> {
    let terms = eq.terms();
    let (mut worst, mut scale) = (0.0_f64, 0.0_f64);
    for b in points {
        let mut sum = 0.0;
        for t in &terms {
            let v = evaluate(t, &b).map_err(mismatch)?;
            scale = scale.max(v.abs());
            sum += v;
        }
        worst = worst.max(sum.abs());
    }
    if !worst.is_finite() {
        return Err(NumericError::NonFiniteState { t: f64::NAN });
    }
    Ok(if scale > 0.0 { worst / scale } else { worst })
}

/// Normalized residual of `eq` (an expression meant to vanish) along `sol`.
///
/// `params` binds every symbol and source function that is not part of the
/// solution. Trajectory columns and derived series are addressed as
/// functions of time by name; a field is addressed by its field name as a
/// function of `(space, time)`.
pub fn residual_check(eq: &Expr, sol: Solution<'_>, params: &Bindings) -> Result<f64, NumericError> {
    match sol {
        Solution::Trajectory(tr) => trajectory_residual(eq, tr, params),
        Solution::Field(g) => field_residual(eq, g, params),
    }
}

fn trajectory_residual(eq: &Expr, tr: &Trajectory, params: &Bindings) -> Result<f64, NumericError> {
    let mut names: Vec<&str> = tr.columns.iter().map(String::as_str).collect();
    names.extend(tr.invariants.iter().map(|(n, _)| n.as_str()));
    let found = solution_atoms(eq, &names)?;
    if found.is_empty() {
        return Err(NumericError::SymbolMismatch("equation does not involve the solution".into()));
    }
    if tr.n < 5 {
        return Err(NumericError::InvalidArgument("need at least five samples".into()));
    }
    let mut series = Vec::new();
    for a in &found {
        if a.orders.len() != 1 {
            return Err(NumericError::SymbolMismatch(format!("`{}` must be a function of time only", a.name)));
        }
        let y = match tr.column(&a.name) {
            Some(c) => c,
            None => tr.invariant(&a.name).expect("name taken from the trajectory").to_vec(),
        };
        series.push(y);
    }
    let time = found[0].args[0].clone();
    let points = (2..tr.n - 2).map(|i| {
        let mut b = params.clone();
        b.set(&time, tr.time(i));
        for (a, y) in found.iter().zip(&series) {
            b.set_atom(&a.expr, central(y, i, tr.dt, a.orders[0]));
        }
        b
    });
    check(eq, points)
}

fn spectral_derivative(u: &[f64], dx: f64, order: u32) -> Vec<f64> {
    if order == 0 {
        return u.to_vec();
    }
    let n = u.len();
    let mut planner = FftPlanner::<f64>::new();
    let mut b: Vec<Complex64> = u.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut b);
    let k0 = 2.0 * std::f64::consts::PI / (n as f64 * dx);
    for (j, c) in b.iter_mut().enumerate() {
        let m = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        let ik = if n.is_multiple_of(2) && j == n / 2 && order % 2 == 1 {
            Complex64::new(0.0, 0.0)
        } else {
            Complex64::new(0.0, k0 * m)
        };
        *c *= ik.powu(order);
    }
    planner.plan_fft_inverse(n).process(&mut b);
    b.iter().map(|c| c.re / n as f64).collect()
}

fn field_residual(eq: &Expr, g: &FieldGrid, params: &Bindings) -> Result<f64, NumericError> {
    let found = solution_atoms(eq, &[g.field.as_str()])?;
    if found.is_empty() {
        return Err(NumericError::SymbolMismatch(format!("equation does not involve `{}`", g.field)));
    }
    let nt = g.snapshots.len();
    if nt < 3 {
        return Err(NumericError::InvalidArgument("need at least three snapshots".into()));
    }
    for a in &found {
        if a.orders.len() != 2 || a.orders[1] > 1 {
            return Err(NumericError::SymbolMismatch(format!(
                "`{}` must be a function of (space, time) with at most a first time derivative",
                a.name
            )));
        }
    }
    let periodic = g.boundary == Boundary::Periodic;
    let space = |u: &[f64], order: u32| -> Vec<f64> {
        if periodic {
            spectral_derivative(u, g.dx, order)
        } else {
            let n = u.len();
            (0..n)
                .map(|i| if i >= 2 && i + 2 < n { central(u, i, g.dx, order) } else { f64::NAN })
                .collect()
        }
    };
    let (xname, tname) = (found[0].args[0].clone(), found[0].args[1].clone());
    let xs = g.xs();
    let lo = if periodic { 0 } else { 2 };
    let hi = if periodic { g.points } else { g.points - 2 };
    let mut points = Vec::new();
    for j in 1..nt - 1 {
        let dt = g.times[j + 1] - g.times[j - 1];
        let vals: Vec<Vec<f64>> = found
            .iter()
            .map(|a| {
                let ox = a.orders[0];
                if a.orders[1] == 0 {
                    space(&g.snapshots[j], ox)
                } else {
                    let (p, m) = (space(&g.snapshots[j + 1], ox), space(&g.snapshots[j - 1], ox));
                    p.iter().zip(&m).map(|(a, b)| (a - b) / dt).collect()
                }
            })
            .collect();
        for i in lo..hi {
            let mut b = params.clone();
            b.set(&xname, xs[i]);
            b.set(&tname, g.times[j]);
            for (a, v) in found.iter().zip(&vals) {
                b.set_atom(&a.expr, v[i]);
            }
            points.push(b);
        }
    }
    check(eq, points.into_iter())
}
