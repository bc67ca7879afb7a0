//! Structural substitution.

use super::diff::differentiate;
use super::expr::*;

/// Replace every occurrence of `target` in `e` by `replacement`, then
/// re-canonicalize.
///
/// * A symbol or sub-tree target is replaced structurally.
/// * A bare function target such as `z(t)` also rewrites its derivatives:
///   `z''(t)` becomes `d^2/dt^2 replacement`.
/// * A sum target such as `t - a` is treated as the constraint
///   `target = replacement` and solved for one of its linear symbols
///   (the last in canonical order), because canonical products are fully
///   distributed and the sum rarely survives as a sub-tree.
pub fn substitute(e: &Expr, target: &Expr, replacement: &Expr) -> Expr {
    if let Node::Add(terms) = target.node() {
        if let Some((s, value)) = solve_linear(terms, replacement) {
            return substitute(e, &sym(&s), &value);
        }
    }
    subst_rec(e, target, replacement)
}

fn solve_linear(terms: &[Expr], replacement: &Expr) -> Option<(String, Expr)> {
    let candidates: Vec<(usize, Q, String)> = terms
        .iter()
        .enumerate()
        .filter_map(|(i, t)| {
            let (c, rest) = t.split_coeff();
            let s = rest.as_sym()?.to_string();
            let elsewhere = terms
                .iter()
                .enumerate()
                .any(|(j, u)| j != i && u.depends_on(&s));
            (!elsewhere).then_some((i, c, s))
        })
        .collect();
    let (i, c, s) = candidates.last()?.clone();
    let others: Vec<Expr> = terms
        .iter()
        .enumerate()
        .filter(|(j, _)| *j != i)
        .map(|(_, t)| t.clone())
        .collect();
    let value = scale(c.recip(), &sub(replacement, &add(others)));
    Some((s, value))
}

fn subst_rec(e: &Expr, target: &Expr, replacement: &Expr) -> Expr {
    if e == target {
        return replacement.clone();
    }
    if let (
        Node::Func {
            name: tn,
            args: targs,
            orders: tord,
        },
        Node::Func { name, args, orders },
    ) = (target.node(), e.node())
    {
        if tn == name && targs == args && tord.iter().all(|o| *o == 0) {
            if let Some(vars) = args.iter().map(|a| a.as_sym()).collect::<Option<Vec<_>>>() {
                return vars
                    .iter()
                    .zip(orders)
                    .fold(replacement.clone(), |acc, (v, o)| differentiate(&acc, v, *o));
            }
        }
    }
    rebuild(e, |c| subst_rec(c, target, replacement))
}

/// Apply several substitutions in order.
pub fn substitute_all(e: &Expr, pairs: &[(Expr, Expr)]) -> Expr {
    pairs
        .iter()
        .fold(e.clone(), |acc, (t, r)| substitute(&acc, t, r))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_to_zero() {
        let e = add(vec![sym("x"), sym("y")]);
        assert_eq!(substitute(&e, &sym("y"), &zero()), sym("x"));
    }

    #[test]
    fn galley_collapse() {
        let t = sym("t");
        let z2 = func_d("z", vec![t.clone()], vec![2]);
        let x2 = func_d("x", vec![t.clone()], vec![2]);
        let e = sub(&z2, &x2);
        assert_eq!(substitute(&e, &func("z", &["t"]), &func("x", &["t"])), zero());
    }

    #[test]
    fn interval_pattern_to_zero() {
        let t = sym("t");
        let s = sub(&t, &sym("a"));
        let e = mul(vec![s.clone(), func_d("x", vec![t], vec![2])]);
        assert_eq!(substitute(&e, &s, &zero()), zero());
    }

    #[test]
    fn function_replacement_differentiates() {
        let t = sym("t");
        let g = func("g", &["t"]);
        let e = func_d("g", vec![t.clone()], vec![1]);
        let repl = pow(&t, q(3, 1));
        assert_eq!(substitute(&e, &g, &repl), mul(vec![int(3), pow(&t, q(2, 1))]));
    }

    #[test]
    fn kernel_parameters_are_substituted() {
        let k = Kernel::conformable(sym("alpha"), sym("a"));
        let e = deformed(k, "t", &func("x", &["t"]));
        let got = substitute(&e, &sym("alpha"), &one());
        let want = deformed(Kernel::conformable(one(), sym("a")), "t", &func("x", &["t"]));
        assert_eq!(got, want);
    }
}
