//! Deformed-derivative kernels and the rewrite `D_k f -> k(x) f'(x)`.

use num_traits::{One, Zero};

use crate::error::SymbolicError;
use crate::symbolic::diff::differentiate;
use crate::symbolic::eval::{evaluate, Bindings};
use crate::symbolic::expr::*;
use crate::symbolic::simplify::simplify;

pub use crate::symbolic::expr::Kernel;

/// `k(var)` for the given kernel.
pub fn kernel_factor(k: &Kernel, var: &str) -> Expr {
    let x = sym(var);
    match k {
        Kernel::Identity => one(),
        Kernel::ConformableInterval { alpha, a } => exponentiate(&sub(&x, a), &sub(&one(), alpha)),
        Kernel::LambdaExp { lambda, halved } => {
            let mut u = neg(&mul(vec![lambda.clone(), x]));
            if *halved {
                u = scale(q(1, 2), &u);
            }
            exp(&u)
        }
        Kernel::Hausdorff { alpha, l0 } => {
            let base = add(vec![one(), div(&x, l0)]);
            mul(vec![l0.clone(), exponentiate(&base, &sub(&one(), alpha))])
        }
    }
}

fn exponentiate(base: &Expr, e: &Expr) -> Expr {
    match e.as_num() {
        Some(r) => pow(base, *r),
        None => powsym(base, e),
    }
}

/// Reject numeric conformable orders outside `(0, 1]`.
pub fn validate(k: &Kernel) -> Result<(), SymbolicError> {
    if let Kernel::ConformableInterval { alpha, .. } | Kernel::Hausdorff { alpha, .. } = k {
        if let Some(v) = alpha.as_num() {
            if *v <= Q::zero() || *v > Q::one() {
                return Err(SymbolicError::EvalSingularity(format!(
                    "kernel order alpha = {v} outside (0, 1]"
                )));
            }
        }
    }
    Ok(())
}

/// Rewrite every deformed node into kernel times ordinary derivative,
/// innermost first, and resolve ordinary-derivative nodes that wrapped them.
pub fn expand_deformed(e: &Expr) -> Expr {
    simplify(&expand_rec(e))
}

fn expand_rec(e: &Expr) -> Expr {
    match e.node() {
        Node::Deformed { kernel, var, arg } => {
            let inner = expand_rec(arg);
            mul(vec![kernel_factor(kernel, var), differentiate(&inner, var, 1)])
        }
        Node::Derivative { arg, var, order } => differentiate(&expand_rec(arg), var, *order),
        _ => rebuild(e, expand_rec),
    }
}

pub fn contains_deformed(e: &Expr) -> bool {
    match e.node() {
        Node::Deformed { .. } => true,
        Node::Num(_) | Node::Sym(_) => false,
        Node::Func { args, .. } => args.iter().any(contains_deformed),
        Node::Add(xs) | Node::Mul(xs) => xs.iter().any(contains_deformed),
        Node::Pow(b, _) => contains_deformed(b),
        Node::PowSym(b, x) => contains_deformed(b) || contains_deformed(x),
        Node::Exp(u) | Node::Ln(u) => contains_deformed(u),
        Node::Derivative { arg, .. } => contains_deformed(arg),
    }
}

/// Limit-quotient estimate `[f(x + h k(x)) - f(x)] / h`.
///
/// Kernel parameters are evaluated against `params`. At the interval
/// endpoint of a conformable kernel with `alpha < 1` the quotient degenerates
/// and an error is returned.
pub fn eval_deformed_numeric(
    f: impl Fn(f64) -> f64,
    k: &Kernel,
    var: &str,
    x: f64,
    h: f64,
    params: &Bindings,
) -> Result<f64, SymbolicError> {
    if !(h > 0.0) {
        return Err(SymbolicError::EvalSingularity(format!("step h = {h} must be positive")));
    }
    if let Kernel::ConformableInterval { alpha, a } = k {
        let av = evaluate(a, params)?;
        let alv = evaluate(alpha, params)?;
        if x == av && alv < 1.0 {
            return Err(SymbolicError::EvalSingularity(format!(
                "conformable derivative at the interval endpoint {var} = {x}"
            )));
        }
    }
    let mut b = params.clone();
    b.set(var, x);
    let kv = evaluate(&kernel_factor(k, var), &b)?;
    let v = (f(x + h * kv) - f(x)) / h;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SymbolicError::EvalSingularity(format!("non-finite quotient at {var} = {x}")))
    }
}
