//! Exact symbolic differentiation.

use super::expr::*;

/// `d^order e / d v^order`, exact and re-canonicalized.
///
/// Deformed-operator nodes are not expanded here: their derivative is an
/// unevaluated [`Node::Derivative`] wrapping the deformed node. Run
/// [`crate::kernels::expand_deformed`] first to resolve them.
pub fn differentiate(e: &Expr, v: &str, order: u32) -> Expr {
    (0..order).fold(e.clone(), |acc, _| diff1(&acc, v))
}

fn diff1(e: &Expr, v: &str) -> Expr {
    if !e.depends_on(v) {
        return zero();
    }
    match e.node() {
        Node::Num(_) => zero(),
        Node::Sym(s) => {
            if s == v {
                one()
            } else {
                zero()
            }
        }
        Node::Func { name, args, orders } => {
            let mut terms = Vec::new();
            for (i, a) in args.iter().enumerate() {
                let da = diff1(a, v);
                if da.is_zero() {
                    continue;
                }
                let mut o = orders.clone();
                o[i] += 1;
                terms.push(mul(vec![func_d(name, args.clone(), o), da]));
            }
            add(terms)
        }
        Node::Add(ts) => add(ts.iter().map(|t| diff1(t, v)).collect()),
        Node::Mul(fs) => {
            let mut terms = Vec::with_capacity(fs.len());
            for i in 0..fs.len() {
                let d = diff1(&fs[i], v);
                if d.is_zero() {
                    continue;
                }
                let mut prod: Vec<Expr> = fs
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, f)| f.clone())
                    .collect();
                prod.push(d);
                terms.push(mul(prod));
            }
            add(terms)
        }
        Node::Pow(b, r) => {
            let db = diff1(b, v);
            mul(vec![num(*r), pow(b, r - Q::from_integer(1)), db])
        }
        Node::PowSym(b, ex) => {
            let db = diff1(b, v);
            let dex = diff1(ex, v);
            let mut terms = Vec::new();
            if !db.is_zero() {
                // e * b^(e-1) * b'
                terms.push(mul(vec![ex.clone(), powsym(b, &sub(ex, &one())), db]));
            }
            if !dex.is_zero() {
                terms.push(mul(vec![e.clone(), ln(b), dex]));
            }
            add(terms)
        }
        Node::Exp(u) => mul(vec![e.clone(), diff1(u, v)]),
        Node::Ln(u) => div(&diff1(u, v), u),
        Node::Derivative { arg, var, order } => {
            if var == v {
                derivative_node(arg, var, order + 1)
            } else {
                derivative_node(e, v, 1)
            }
        }
        Node::Deformed { .. } => derivative_node(e, v, 1),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_rule() {
        let x = sym("x");
        let e = pow(&x, q(2, 1));
        assert_eq!(differentiate(&e, "x", 1), mul(vec![int(2), x]));
    }

    #[test]
    fn independent_constant() {
        assert_eq!(differentiate(&sym("c"), "t", 1), zero());
    }

    #[test]
    fn interval_product() {
        // d/dt[(t - a) x'(t)] = x' + (t - a) x''
        let t = sym("t");
        let s = sub(&t, &sym("a"));
        let x1 = func_d("x", vec![t.clone()], vec![1]);
        let x2 = func_d("x", vec![t.clone()], vec![2]);
        let got = differentiate(&mul(vec![s.clone(), x1.clone()]), "t", 1);
        assert_eq!(got, add(vec![x1, mul(vec![s, x2])]));
    }

    #[test]
    fn function_of_other_variable_vanishes() {
        let phi = func("phi", &["x"]);
        assert_eq!(differentiate(&phi, "t", 1), zero());
    }

    #[test]
    fn chain_rule_through_function_argument() {
        let x = func("x", &["t"]);
        let u = apply("U", vec![x.clone()]);
        let got = differentiate(&u, "t", 1);
        let want = mul(vec![
            func_d("U", vec![x.clone()], vec![1]),
            func_d("x", vec![sym("t")], vec![1]),
        ]);
        assert_eq!(got, want);
    }

    #[test]
    fn symbolic_exponent() {
        let t = sym("t");
        let e = powsym(&t, &sym("mu"));
        let got = differentiate(&e, "t", 1);
        let want = mul(vec![sym("mu"), powsym(&t, &sub(&sym("mu"), &one()))]);
        assert_eq!(got, want);
    }

    #[test]
    fn deformed_left_unexpanded() {
        let k = Kernel::conformable(rat(1, 2), sym("a"));
        let d = deformed(k, "t", &func("x", &["t"]));
        let got = differentiate(&d, "t", 2);
        assert_eq!(got, derivative_node(&d, "t", 2));
    }
}
