//! Numeric evaluation of expressions at a binding point.

use std::collections::HashMap;
use std::sync::Arc;

use super::expr::*;
use super::render::render_plain;
use crate::error::SymbolicError;

/// Numeric callable for a dependent function: receives argument values and
/// per-slot derivative orders; returns `None` for an unsupported order.
pub type FuncValue = Arc<dyn Fn(&[f64], &[u32]) -> Option<f64> + Send + Sync>;

/// Values for the free symbols and functions of an expression.
///
/// Unbound symbols are an error at evaluation time; there are no defaults.
#[derive(Clone, Default)]
pub struct Bindings {
    symbols: HashMap<String, f64>,
    funcs: HashMap<String, FuncValue>,
    atoms: HashMap<Expr, f64>,
}

impl Bindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, name: &str, v: f64) -> Self {
        self.set(name, v);
        self
    }

    pub fn set(&mut self, name: &str, v: f64) {
        self.symbols.insert(name.to_string(), v);
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.symbols.get(name).copied()
    }

    pub fn set_fn(
        &mut self,
        name: &str,
        f: impl Fn(&[f64], &[u32]) -> Option<f64> + Send + Sync + 'static,
    ) {
        self.funcs.insert(name.to_string(), Arc::new(f));
    }

    pub fn with_fn(
        mut self,
        name: &str,
        f: impl Fn(&[f64], &[u32]) -> Option<f64> + Send + Sync + 'static,
    ) -> Self {
        self.set_fn(name, f);
        self
    }

    /// Bind a whole sub-tree (e.g. a particular derivative `x''(t)`) to a value.
    pub fn set_atom(&mut self, atom: &Expr, v: f64) {
        self.atoms.insert(atom.clone(), v);
    }

    pub fn symbols(&self) -> impl Iterator<Item = (&String, &f64)> {
        self.symbols.iter()
    }
}

/// Evaluate `e` in IEEE double precision.
pub fn evaluate(e: &Expr, b: &Bindings) -> Result<f64, SymbolicError> {
    let v = eval_rec(e, b)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(SymbolicError::EvalSingularity(format!(
            "non-finite value of {}",
            render_plain(e)
        )))
    }
}

fn checked_pow(base: f64, exp: f64, e: &Expr) -> Result<f64, SymbolicError> {
    if base == 0.0 && exp < 0.0 {
        return Err(SymbolicError::EvalSingularity(format!(
            "0 to a negative power in {}",
            render_plain(e)
        )));
    }
    let v = if exp.fract() == 0.0 && exp.abs() < i32::MAX as f64 {
        base.powi(exp as i32)
    } else {
        base.powf(exp)
    };
    if v.is_nan() {
        return Err(SymbolicError::EvalSingularity(format!(
            "negative base to a fractional power in {}",
            render_plain(e)
        )));
    }
    Ok(v)
}

fn eval_rec(e: &Expr, b: &Bindings) -> Result<f64, SymbolicError> {
    if let Some(v) = b.atoms.get(e) {
        return Ok(*v);
    }
    match e.node() {
        Node::Num(v) => Ok(q_to_f64(v)),
        Node::Sym(s) => b
            .symbols
            .get(s)
            .copied()
            .ok_or_else(|| SymbolicError::UnboundSymbol(s.clone())),
        Node::Func { name, args, orders } => {
            let f = b
                .funcs
                .get(name)
                .ok_or_else(|| SymbolicError::UnboundSymbol(render_plain(e)))?;
            let vals = args
                .iter()
                .map(|a| eval_rec(a, b))
                .collect::<Result<Vec<_>, _>>()?;
            f(&vals, orders).ok_or_else(|| SymbolicError::UnboundSymbol(render_plain(e)))
        }
        Node::Add(ts) => ts.iter().try_fold(0.0, |acc, t| Ok(acc + eval_rec(t, b)?)),
        Node::Mul(fs) => fs.iter().try_fold(1.0, |acc, f| Ok(acc * eval_rec(f, b)?)),
        Node::Pow(base, r) => checked_pow(eval_rec(base, b)?, q_to_f64(r), e),
        Node::PowSym(base, x) => checked_pow(eval_rec(base, b)?, eval_rec(x, b)?, e),
        Node::Exp(u) => Ok(eval_rec(u, b)?.exp()),
        Node::Ln(u) => {
            let v = eval_rec(u, b)?;
            if v <= 0.0 {
                Err(SymbolicError::EvalSingularity(format!(
                    "log of non-positive value in {}",
                    render_plain(e)
                )))
            } else {
                Ok(v.ln())
            }
        }
        Node::Derivative { arg, var, order } => central_difference(arg, var, *order, b),
        Node::Deformed { .. } => eval_rec(&crate::kernels::expand_deformed(e), b),
    }
}

fn central_difference(arg: &Expr, var: &str, order: u32, b: &Bindings) -> Result<f64, SymbolicError> {
    let x0 = b
        .symbols
        .get(var)
        .copied()
        .ok_or_else(|| SymbolicError::UnboundSymbol(var.to_string()))?;
    let h = 1e-3 * x0.abs().max(1.0);
    let at = |x: f64| -> Result<f64, SymbolicError> {
        let mut bb = b.clone();
        bb.set(var, x);
        if order == 1 {
            eval_rec(arg, &bb)
        } else {
            central_difference(arg, var, order - 1, &bb)
        }
    };
    Ok((at(x0 + h)? - at(x0 - h)?) / (2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_at_four() {
        let e = mul(vec![int(2), pow(&sym("t"), q(3, 2))]);
        assert_eq!(evaluate(&e, &Bindings::new().with("t", 4.0)).unwrap(), 16.0);
    }

    #[test]
    fn sum_of_bound_symbols() {
        let e = add(vec![sym("x"), sym("y")]);
        let b = Bindings::new().with("x", 1.0).with("y", 2.0);
        assert_eq!(evaluate(&e, &b).unwrap(), 3.0);
    }

    #[test]
    fn lambda_zero_exponential() {
        let e = exp(&neg(&mul(vec![sym("lambda"), sym("t")])));
        let b = Bindings::new().with("lambda", 0.0).with("t", 7.0);
        assert_eq!(evaluate(&e, &b).unwrap(), 1.0);
    }

    #[test]
    fn unbound_is_an_error() {
        let e = add(vec![sym("x"), sym("y")]);
        let err = evaluate(&e, &Bindings::new().with("x", 1.0)).unwrap_err();
        assert_eq!(err, SymbolicError::UnboundSymbol("y".into()));
    }

    #[test]
    fn division_by_zero_is_singular() {
        let e = div(&one(), &sym("x"));
        let err = evaluate(&e, &Bindings::new().with("x", 0.0)).unwrap_err();
        assert!(matches!(err, SymbolicError::EvalSingularity(_)));
    }

    #[test]
    fn function_callable_with_derivatives() {
        let x2 = func_d("x", vec![sym("t")], vec![2]);
        let b = Bindings::new().with("t", 2.0).with_fn("x", |a, o| match o[0] {
            0 => Some(a[0].powi(3)),
            1 => Some(3.0 * a[0].powi(2)),
            2 => Some(6.0 * a[0]),
            _ => None,
        });
        assert_eq!(evaluate(&x2, &b).unwrap(), 12.0);
    }
}
