//! Text renderings: plain infix, LaTeX and s-expressions.

use num_traits::{One, Signed};
use serde::{Deserialize, Serialize};

use super::expr::*;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Plain,
    Latex,
    Sexpr,
}

impl std::str::FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "plain" => Ok(Format::Plain),
            "latex" => Ok(Format::Latex),
            "sexpr" => Ok(Format::Sexpr),
            other => Err(format!("unknown format `{other}` (plain, latex, sexpr)")),
        }
    }
}

pub fn render(e: &Expr, format: Format) -> String {
    match format {
        Format::Plain => render_plain(e),
        Format::Latex => render_latex(e),
        Format::Sexpr => render_sexpr(e),
    }
}

const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_POWER: u8 = 3;
const PREC_ATOM: u8 = 4;

fn precedence(e: &Expr) -> u8 {
    match e.node() {
        Node::Add(_) => PREC_SUM,
        Node::Mul(_) => PREC_PRODUCT,
        Node::Num(v) if v.is_negative() || !v.is_integer() => PREC_PRODUCT,
        Node::Pow(..) | Node::PowSym(..) => PREC_POWER,
        _ => PREC_ATOM,
    }
}

fn q_text(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else {
        format!("{}/{}", v.numer(), v.denom())
    }
}

/// Sum terms with the constant moved last, for readability.
fn display_terms(e: &Expr) -> Vec<Expr> {
    let mut ts = e.terms();
    if ts.len() > 1 && ts[0].as_num().is_some() {
        let c = ts.remove(0);
        ts.push(c);
    }
    ts
}

// ---------------------------------------------------------------- plain

pub fn render_plain(e: &Expr) -> String {
    plain(e)
}

fn plain_wrap(e: &Expr, min_prec: u8) -> String {
    let s = plain(e);
    if precedence(e) < min_prec {
        format!("({s})")
    } else {
        s
    }
}

fn plain(e: &Expr) -> String {
    match e.node() {
        Node::Num(v) => q_text(v),
        Node::Sym(s) => s.clone(),
        Node::Func { name, args, orders } => plain_func(name, args, orders),
        Node::Add(_) => {
            let mut out = String::new();
            for (i, t) in display_terms(e).iter().enumerate() {
                let (c, rest) = t.split_coeff();
                if c.is_negative() {
                    out.push_str(if i == 0 { "-" } else { " - " });
                    out.push_str(&plain_term(-c, &rest));
                } else {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    out.push_str(&plain_term(c, &rest));
                }
            }
            out
        }
        Node::Mul(_) => {
            let (c, rest) = e.split_coeff();
            if c.is_negative() {
                format!("-{}", plain_term(-c, &rest))
            } else {
                plain_term(c, &rest)
            }
        }
        Node::Pow(b, r) => {
            let base = plain_wrap(b, PREC_ATOM);
            if r.is_integer() && r.is_positive() {
                format!("{base}^{}", r.numer())
            } else {
                format!("{base}^({})", q_text(r))
            }
        }
        Node::PowSym(b, x) => format!("{}^({})", plain_wrap(b, PREC_ATOM), plain(x)),
        Node::Exp(u) => format!("exp({})", plain(u)),
        Node::Ln(u) => format!("ln({})", plain(u)),
        Node::Derivative { arg, var, order } => {
            if *order == 1 {
                format!("d({}, {var})", plain(arg))
            } else {
                format!("d({}, {var}, {order})", plain(arg))
            }
        }
        Node::Deformed { kernel, var, arg } => {
            format!("D[{}, {var}]({})", plain_kernel(kernel), plain(arg))
        }
    }
}

/// `c * rest` with `c > 0`.
fn plain_term(c: Q, rest: &Expr) -> String {
    if rest.is_one() {
        return q_text(&c);
    }
    let factors = rest.factors();
    let body = factors
        .iter()
        .map(|f| plain_wrap(f, PREC_POWER))
        .collect::<Vec<_>>()
        .join("*");
    if c.is_one() {
        body
    } else {
        format!("{}*{body}", q_text(&c))
    }
}

fn plain_func(name: &str, args: &[Expr], orders: &[u32]) -> String {
    let arg_text = args.iter().map(plain).collect::<Vec<_>>().join(", ");
    if args.len() == 1 {
        return format!("{name}{}({arg_text})", "'".repeat(orders[0] as usize));
    }
    if orders.iter().all(|o| *o == 0) {
        return format!("{name}({arg_text})");
    }
    if let Some(vars) = args.iter().map(|a| a.as_sym()).collect::<Option<Vec<_>>>() {
        let mut out = format!("{name}({arg_text})");
        for (v, o) in vars.iter().zip(orders) {
            match o {
                0 => {}
                1 => out = format!("d({out}, {v})"),
                _ => out = format!("d({out}, {v}, {o})"),
            }
        }
        return out;
    }
    let ord = orders.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
    format!("{name}@({ord})({arg_text})")
}

fn plain_kernel(k: &Kernel) -> String {
    match k {
        Kernel::Identity => "id".into(),
        Kernel::ConformableInterval { alpha, a } => format!("conf({}, {})", plain(alpha), plain(a)),
        Kernel::LambdaExp { lambda, halved } => {
            format!("{}({})", if *halved { "lexp2" } else { "lexp" }, plain(lambda))
        }
        Kernel::Hausdorff { alpha, l0 } => format!("haus({}, {})", plain(alpha), plain(l0)),
    }
}

// ---------------------------------------------------------------- latex

const GREEK: &[&str] = &[
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "kappa", "lambda", "mu",
    "nu", "xi", "pi", "rho", "sigma", "tau", "phi", "chi", "psi", "omega",
];

fn latex_name(s: &str) -> String {
    let (head, tail) = match s.find(|c: char| c.is_ascii_digit() || c == '_') {
        Some(i) => (&s[..i], &s[i..]),
        None => (s, ""),
    };
    let head = if GREEK.contains(&head) {
        format!("\\{head}")
    } else {
        head.to_string()
    };
    let tail = tail.trim_start_matches('_');
    if tail.is_empty() {
        head
    } else {
        format!("{head}_{{{tail}}}")
    }
}

pub fn render_latex(e: &Expr) -> String {
    latex(e)
}

fn latex_wrap(e: &Expr, min_prec: u8) -> String {
    let s = latex(e);
    if precedence(e) < min_prec {
        format!("\\left({s}\\right)")
    } else {
        s
    }
}

fn latex_q(v: &Q) -> String {
    if v.is_integer() {
        v.numer().to_string()
    } else if v.is_negative() {
        format!("-\\frac{{{}}}{{{}}}", -v.numer(), v.denom())
    } else {
        format!("\\frac{{{}}}{{{}}}", v.numer(), v.denom())
    }
}

fn latex(e: &Expr) -> String {
    match e.node() {
        Node::Num(v) => latex_q(v),
        Node::Sym(s) => latex_name(s),
        Node::Func { name, args, orders } => latex_func(name, args, orders),
        Node::Add(_) => {
            let mut out = String::new();
            for (i, t) in display_terms(e).iter().enumerate() {
                let (c, rest) = t.split_coeff();
                if c.is_negative() {
                    out.push_str(if i == 0 { "-" } else { " - " });
                    out.push_str(&latex_term(-c, &rest));
                } else {
                    if i > 0 {
                        out.push_str(" + ");
                    }
                    out.push_str(&latex_term(c, &rest));
                }
            }
            out
        }
        Node::Mul(_) => {
            let (c, rest) = e.split_coeff();
            if c.is_negative() {
                format!("-{}", latex_term(-c, &rest))
            } else {
                latex_term(c, &rest)
            }
        }
        Node::Pow(b, r) => {
            let ex = if r.is_integer() {
                r.numer().to_string()
            } else {
                format!("{}/{}", r.numer(), r.denom())
            };
            format!("{}^{{{ex}}}", latex_wrap(b, PREC_ATOM))
        }
        Node::PowSym(b, x) => format!("{}^{{{}}}", latex_wrap(b, PREC_ATOM), latex(x)),
        Node::Exp(u) => format!("e^{{{}}}", latex(u)),
        Node::Ln(u) => format!("\\ln\\left({}\\right)", latex(u)),
        Node::Derivative { arg, var, order } => {
            let v = latex_name(var);
            if *order == 1 {
                format!("\\frac{{d}}{{d {v}}}\\left[{}\\right]", latex(arg))
            } else {
                format!("\\frac{{d^{{{order}}}}}{{d {v}^{{{order}}}}}\\left[{}\\right]", latex(arg))
            }
        }
        Node::Deformed { kernel, var, arg } => {
            let v = latex_name(var);
            let op = match kernel {
                Kernel::Identity => format!("D_{{{v}}}"),
                Kernel::ConformableInterval { alpha, a } => {
                    format!("{{}}_{{{}}}D_{{{v}}}^{{{}}}", latex(a), latex(alpha))
                }
                Kernel::LambdaExp { lambda, halved } => {
                    let tag = if *halved { "/2" } else { "" };
                    format!("\\mathcal{{D}}_{{{v}}}^{{{}{tag}}}", latex(lambda))
                }
                Kernel::Hausdorff { alpha, l0 } => {
                    format!("H_{{{v}}}^{{{},{}}}", latex(alpha), latex(l0))
                }
            };
            format!("{op}\\left[{}\\right]", latex(arg))
        }
    }
}

fn latex_term(c: Q, rest: &Expr) -> String {
    if rest.is_one() {
        return latex_q(&c);
    }
    let body = rest
        .factors()
        .iter()
        .map(|f| latex_wrap(f, PREC_POWER))
        .collect::<Vec<_>>()
        .join(" ");
    if c.is_one() {
        body
    } else {
        format!("{} {body}", latex_q(&c))
    }
}

fn latex_func(name: &str, args: &[Expr], orders: &[u32]) -> String {
    let n = latex_name(name);
    let arg_text = args.iter().map(latex).collect::<Vec<_>>().join(", ");
    let total: u32 = orders.iter().sum();
    if total == 0 {
        return format!("{n}({arg_text})");
    }
    match args.iter().map(|a| a.as_sym()).collect::<Option<Vec<_>>>() {
        Some(vars) if vars.len() == 1 => {
            let v = latex_name(vars[0]);
            if total == 1 {
                format!("\\frac{{d {n}}}{{d {v}}}")
            } else {
                format!("\\frac{{d^{{{total}}} {n}}}{{d {v}^{{{total}}}}}")
            }
        }
        Some(vars) => {
            let mut den = String::new();
            for (v, o) in vars.iter().zip(orders) {
                match o {
                    0 => {}
                    1 => den.push_str(&format!("\\partial {}", latex_name(v))),
                    _ => den.push_str(&format!("\\partial {}^{{{o}}}", latex_name(v))),
                }
            }
            if total == 1 {
                format!("\\frac{{\\partial {n}}}{{{den}}}")
            } else {
                format!("\\frac{{\\partial^{{{total}}} {n}}}{{{den}}}")
            }
        }
        None if args.len() == 1 => format!("{n}^{{{}}}({arg_text})", "\\prime".repeat(total as usize)),
        None => {
            let ord = orders.iter().map(u32::to_string).collect::<Vec<_>>().join(",");
            format!("{n}^{{({ord})}}({arg_text})")
        }
    }
}

// ---------------------------------------------------------------- sexpr

pub fn render_sexpr(e: &Expr) -> String {
    match e.node() {
        Node::Num(v) => format!("(num {})", q_text(v)),
        Node::Sym(s) => format!("(sym {s})"),
        Node::Func { name, args, orders } => {
            let a = args.iter().map(render_sexpr).collect::<Vec<_>>().join(" ");
            let o = orders.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
            format!("(fn {name} ({a}) ({o}))")
        }
        Node::Add(xs) => format!(
            "(add {})",
            xs.iter().map(render_sexpr).collect::<Vec<_>>().join(" ")
        ),
        Node::Mul(xs) => format!(
            "(mul {})",
            xs.iter().map(render_sexpr).collect::<Vec<_>>().join(" ")
        ),
        Node::Pow(b, r) => format!("(pow {} {})", render_sexpr(b), q_text(r)),
        Node::PowSym(b, x) => format!("(powsym {} {})", render_sexpr(b), render_sexpr(x)),
        Node::Exp(u) => format!("(exp {})", render_sexpr(u)),
        Node::Ln(u) => format!("(ln {})", render_sexpr(u)),
        Node::Derivative { arg, var, order } => format!("(deriv {var} {order} {})", render_sexpr(arg)),
        Node::Deformed { kernel, var, arg } => format!(
            "(deformed {} {var} {})",
            sexpr_kernel(kernel),
            render_sexpr(arg)
        ),
    }
}

fn sexpr_kernel(k: &Kernel) -> String {
    match k {
        Kernel::Identity => "(id)".into(),
        Kernel::ConformableInterval { alpha, a } => {
            format!("(conf {} {})", render_sexpr(alpha), render_sexpr(a))
        }
        Kernel::LambdaExp { lambda, halved } => format!(
            "({} {})",
            if *halved { "lexp2" } else { "lexp" },
            render_sexpr(lambda)
        ),
        Kernel::Hausdorff { alpha, l0 } => format!("(haus {} {})", render_sexpr(alpha), render_sexpr(l0)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_product() {
        assert_eq!(render(&mul(vec![int(2), sym("x")]), Format::Plain), "2*x");
    }

    #[test]
    fn latex_square() {
        assert_eq!(render(&pow(&sym("x"), q(2, 1)), Format::Latex), "x^{2}");
    }

    #[test]
    fn plain_derivatives_and_signs() {
        let t = sym("t");
        let e = add(vec![
            mul(vec![sym("m"), func_d("x", vec![t.clone()], vec![2])]),
            neg(&mul(vec![sym("gamma"), func_d("x", vec![t], vec![1])])),
        ]);
        assert_eq!(render_plain(&e), "-gamma*x'(t) + m*x''(t)");
    }

    #[test]
    fn construction_order_renders_identically() {
        let (x, y) = (sym("x"), sym("y"));
        let a = add(vec![x.clone(), mul(vec![int(3), y.clone()])]);
        let b = add(vec![mul(vec![y, int(3)]), x]);
        for f in [Format::Plain, Format::Latex, Format::Sexpr] {
            assert_eq!(render(&a, f), render(&b, f));
        }
    }

    #[test]
    fn sexpr_shape() {
        let e = add(vec![pow(&sym("x"), q(2, 1)), one()]);
        assert_eq!(render_sexpr(&e), "(add (num 1) (pow (sym x) 2))");
    }
}
