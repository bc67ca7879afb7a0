mod common;

use common::gen::*;
use proptest::prelude::*;

use structvar_core::kernels::expand_deformed;
use structvar_core::symbolic::expr::*;
use structvar_core::symbolic::*;
use structvar_core::variational::{euler_lagrange_particle, LagrangianSpec};

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn derivative_is_linear(f in expr(), g in expr(), al in -3i128..=3, be in -3i128..=3, p in point()) {
        linearity(&f, &g, al, be, p)?;
    }

    #[test]
    fn leibniz_rule(f in expr(), g in expr(), p in point()) {
        leibniz(&f, &g, p)?;
    }

    #[test]
    fn derivative_matches_finite_difference(f in expr(), p in point()) {
        finite_difference(&f, p)?;
    }

    #[test]
    fn simplify_is_idempotent(f in expr()) {
        idempotent(&f)?;
    }

    #[test]
    fn render_parse_round_trip(f in expr()) {
        round_trip(&f)?;
    }

    #[test]
    fn unit_order_kernels_are_ordinary_derivatives(f in expr()) {
        let d = differentiate(&f, "x", 1);
        let conf = deformed(Kernel::conformable(int(1), sym("a")), "x", &f);
        prop_assert_eq!(expand_deformed(&conf), d.clone());
        let lexp = deformed(Kernel::lambda_exp(zero(), false), "x", &f);
        prop_assert_eq!(expand_deformed(&lexp), d.clone());
        let haus = deformed(Kernel::hausdorff(int(1), sym("y")), "x", &f);
        prop_assert_eq!(expand_deformed(&haus), mul(vec![sym("y"), d]));
    }

    #[test]
    fn identity_kernels_give_classical_euler_lagrange(c in prop::collection::vec(-3i64..=3, 4)) {
        let ctx = ParseContext::new().with_function("x", &["t"]);
        let l = parse_with(
            &format!("{}*x'^2 + {}*x^2 + {}*x*x' + {}*x^3", c[0], c[1], c[2], c[3]),
            &ctx,
        ).unwrap();
        let spec = LagrangianSpec::new(l.clone()).variable("x", &["t"]);
        let r = euler_lagrange_particle(&spec, "x").unwrap();
        // dL/dx - d/dt dL/dx', with placeholders standing in for x and x'
        let (xs, vs) = (sym("_x"), sym("_v"));
        let xt = func("x", &["t"]);
        let vt = differentiate(&xt, "t", 1);
        let lp = substitute(&substitute(&l, &vt, &vs), &xt, &xs);
        let back = |e: &Expr| substitute(&substitute(e, &vs, &vt), &xs, &xt);
        let classical = sub(
            &back(&differentiate(&lp, "_x", 1)),
            &differentiate(&back(&differentiate(&lp, "_v", 1)), "t", 1),
        );
        prop_assert!(equivalent(&r.post_limit, &classical, 20, 1, 1e-9).unwrap());
    }
}
