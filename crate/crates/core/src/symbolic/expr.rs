//! Immutable expression trees in canonical form.
//!
//! Every `Expr` is built through the smart constructors in this module
//! ([`add`], [`mul`], [`pow`], ...), which keep the tree in a normal form:
//! sums of products, numeric coefficients folded, like terms collected,
//! powers of identical bases merged and products distributed over sums.
//! Children of sums and products are sorted by the derived `Ord` on
//! [`Node`], whose variant order is the node-kind rank.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Exact rational used for coefficients and numeric exponents.
pub type Q = Ratio<i128>;

/// Kernel `k(x)` of a deformed derivative `D_k f = k(x) f'(x)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Kernel {
    /// `k = 1`; reproduces ordinary differentiation.
    Identity,
    /// Left conformable derivative, `k = (x - a)^(1 - alpha)`.
    ConformableInterval { alpha: Expr, a: Expr },
    /// `k = exp(-lambda x)`, or `exp(-lambda x / 2)` when `halved`.
    LambdaExp { lambda: Expr, halved: bool },
    /// Hausdorff form, `k = l0 (1 + x / l0)^(1 - alpha)`.
    Hausdorff { alpha: Expr, l0: Expr },
}

impl Kernel {
    pub fn conformable(alpha: Expr, a: Expr) -> Self {
        Kernel::ConformableInterval { alpha, a }
    }

    pub fn lambda_exp(lambda: Expr, halved: bool) -> Self {
        Kernel::LambdaExp { lambda, halved }
    }

    pub fn hausdorff(alpha: Expr, l0: Expr) -> Self {
        Kernel::Hausdorff { alpha, l0 }
    }

    /// Parameter expressions carried by the kernel.
    pub fn params(&self) -> Vec<&Expr> {
        match self {
            Kernel::Identity => vec![],
            Kernel::ConformableInterval { alpha, a } => vec![alpha, a],
            Kernel::LambdaExp { lambda, .. } => vec![lambda],
            Kernel::Hausdorff { alpha, l0 } => vec![alpha, l0],
        }
    }

    /// Rebuild the kernel with every parameter mapped through `f`.
    pub fn map_params(&self, mut f: impl FnMut(&Expr) -> Expr) -> Kernel {
        match self {
            Kernel::Identity => Kernel::Identity,
            Kernel::ConformableInterval { alpha, a } => Kernel::ConformableInterval {
                alpha: f(alpha),
                a: f(a),
            },
            Kernel::LambdaExp { lambda, halved } => Kernel::LambdaExp {
                lambda: f(lambda),
                halved: *halved,
            },
            Kernel::Hausdorff { alpha, l0 } => Kernel::Hausdorff {
                alpha: f(alpha),
                l0: f(l0),
            },
        }
    }
}

/// Node kinds. Variant order is the canonical kind rank.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Node {
    Num(Q),
    Sym(String),
    /// Dependent function `name(args)` with partial-derivative orders per argument slot.
    Func {
        name: String,
        args: Vec<Expr>,
        orders: Vec<u32>,
    },
    Add(Vec<Expr>),
    Mul(Vec<Expr>),
    Pow(Expr, Q),
    /// Power with a non-numeric exponent, carried opaquely.
    PowSym(Expr, Expr),
    Exp(Expr),
    Ln(Expr),
    /// Unevaluated ordinary derivative; only produced around deformed nodes.
    Derivative { arg: Expr, var: String, order: u32 },
    Deformed {
        kernel: Kernel,
        var: String,
        arg: Expr,
    },
}

/// Shared handle to an immutable canonical node.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Expr(Arc<Node>);

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::symbolic::render::render_plain(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", crate::symbolic::render::render_plain(self))
    }
}

impl Expr {
    fn raw(node: Node) -> Expr {
        Expr(Arc::new(node))
    }

    pub fn node(&self) -> &Node {
        &self.0
    }

    pub fn as_num(&self) -> Option<&Q> {
        match self.node() {
            Node::Num(q) => Some(q),
            _ => None,
        }
    }

    pub fn as_sym(&self) -> Option<&str> {
        match self.node() {
            Node::Sym(s) => Some(s),
            _ => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.as_num().is_some_and(|q| q.is_zero())
    }

    pub fn is_one(&self) -> bool {
        self.as_num().is_some_and(|q| q.is_one())
    }

    /// Additive terms (a single term for non-sums, none for zero).
    pub fn terms(&self) -> Vec<Expr> {
        match self.node() {
            Node::Add(ts) => ts.clone(),
            _ if self.is_zero() => vec![],
            _ => vec![self.clone()],
        }
    }

    /// Multiplicative factors, numeric coefficient included when present.
    pub fn factors(&self) -> Vec<Expr> {
        match self.node() {
            Node::Mul(fs) => fs.clone(),
            _ => vec![self.clone()],
        }
    }

    /// Split into numeric coefficient and the remaining monomial.
    pub fn split_coeff(&self) -> (Q, Expr) {
        match self.node() {
            Node::Num(q) => (*q, one()),
            Node::Mul(fs) => match fs[0].node() {
                Node::Num(c) => {
                    let rest: Vec<Expr> = fs[1..].to_vec();
                    let rest = if rest.len() == 1 {
                        rest[0].clone()
                    } else {
                        Expr::raw(Node::Mul(rest))
                    };
                    (*c, rest)
                }
                _ => (Q::one(), self.clone()),
            },
            _ => (Q::one(), self.clone()),
        }
    }

    /// True when `v` occurs anywhere in the tree (as a symbol, a function
    /// argument, a derivative variable, or a kernel parameter).
    pub fn depends_on(&self, v: &str) -> bool {
        match self.node() {
            Node::Num(_) => false,
            Node::Sym(s) => s == v,
            Node::Func { args, .. } => args.iter().any(|a| a.depends_on(v)),
            Node::Add(xs) | Node::Mul(xs) => xs.iter().any(|x| x.depends_on(v)),
            Node::Pow(b, _) => b.depends_on(v),
            Node::PowSym(b, e) => b.depends_on(v) || e.depends_on(v),
            Node::Exp(u) | Node::Ln(u) => u.depends_on(v),
            Node::Derivative { arg, var, .. } => var == v || arg.depends_on(v),
            Node::Deformed { kernel, var, arg } => {
                var == v || arg.depends_on(v) || kernel.params().iter().any(|p| p.depends_on(v))
            }
        }
    }

    /// Free symbol names, sorted.
    pub fn free_symbols(&self) -> Vec<String> {
        let mut out = std::collections::BTreeSet::new();
        self.collect_symbols(&mut out);
        out.into_iter().collect()
    }

    fn collect_symbols(&self, out: &mut std::collections::BTreeSet<String>) {
        match self.node() {
            Node::Num(_) => {}
            Node::Sym(s) => {
                out.insert(s.clone());
            }
            Node::Func { args, .. } => args.iter().for_each(|a| a.collect_symbols(out)),
            Node::Add(xs) | Node::Mul(xs) => xs.iter().for_each(|x| x.collect_symbols(out)),
            Node::Pow(b, _) => b.collect_symbols(out),
            Node::PowSym(b, e) => {
                b.collect_symbols(out);
                e.collect_symbols(out);
            }
            Node::Exp(u) | Node::Ln(u) => u.collect_symbols(out),
            Node::Derivative { arg, var, .. } => {
                out.insert(var.clone());
                arg.collect_symbols(out);
            }
            Node::Deformed { kernel, var, arg } => {
                out.insert(var.clone());
                arg.collect_symbols(out);
                kernel.params().iter().for_each(|p| p.collect_symbols(out));
            }
        }
    }

    /// Node count, used by generators and benches.
    pub fn size(&self) -> usize {
        1 + match self.node() {
            Node::Num(_) | Node::Sym(_) => 0,
            Node::Func { args, .. } => args.iter().map(Expr::size).sum(),
            Node::Add(xs) | Node::Mul(xs) => xs.iter().map(Expr::size).sum(),
            Node::Pow(b, _) => b.size(),
            Node::PowSym(b, e) => b.size() + e.size(),
            Node::Exp(u) | Node::Ln(u) => u.size(),
            Node::Derivative { arg, .. } => arg.size(),
            Node::Deformed { arg, .. } => arg.size(),
        }
    }
}

pub fn q(n: i128, d: i128) -> Q {
    Q::new(n, d)
}

pub fn num(v: Q) -> Expr {
    Expr::raw(Node::Num(v))
}

pub fn int(n: i128) -> Expr {
    num(Q::from_integer(n))
}

pub fn rat(n: i128, d: i128) -> Expr {
    num(Q::new(n, d))
}

pub fn zero() -> Expr {
    int(0)
}

pub fn one() -> Expr {
    int(1)
}

pub fn sym(name: &str) -> Expr {
    Expr::raw(Node::Sym(name.to_string()))
}

/// Dependent function of independent variables, e.g. `x(t)` or `phi(x, t)`.
pub fn func(name: &str, vars: &[&str]) -> Expr {
    let args = vars.iter().map(|v| sym(v)).collect::<Vec<_>>();
    func_d(name, args, vec![0; vars.len()])
}

/// Function of arbitrary argument expressions with derivative orders.
pub fn func_d(name: &str, args: Vec<Expr>, orders: Vec<u32>) -> Expr {
    assert_eq!(args.len(), orders.len(), "one derivative order per argument");
    Expr::raw(Node::Func {
        name: name.to_string(),
        args,
        orders,
    })
}

/// Function applied to expressions, no derivatives (e.g. `U(x(t))`).
pub fn apply(name: &str, args: Vec<Expr>) -> Expr {
    let n = args.len();
    func_d(name, args, vec![0; n])
}

pub fn neg(e: &Expr) -> Expr {
    mul(vec![int(-1), e.clone()])
}

pub fn sub(a: &Expr, b: &Expr) -> Expr {
    add(vec![a.clone(), neg(b)])
}

pub fn div(a: &Expr, b: &Expr) -> Expr {
    mul(vec![a.clone(), pow(b, Q::from_integer(-1))])
}

pub fn sqrt(e: &Expr) -> Expr {
    pow(e, Q::new(1, 2))
}

pub fn scale(c: Q, e: &Expr) -> Expr {
    mul(vec![num(c), e.clone()])
}

/// Canonical sum.
pub fn add(terms: Vec<Expr>) -> Expr {
    let mut constant = Q::zero();
    let mut collected: BTreeMap<Expr, Q> = BTreeMap::new();
    let mut stack = terms;
    while let Some(t) = stack.pop() {
        match t.node() {
            Node::Add(inner) => stack.extend(inner.iter().cloned()),
            Node::Num(c) => constant += c,
            _ => {
                let (c, rest) = t.split_coeff();
                *collected.entry(rest).or_insert_with(Q::zero) += c;
            }
        }
    }
    let mut out: Vec<Expr> = Vec::new();
    if !constant.is_zero() {
        out.push(num(constant));
    }
    for (rest, c) in collected {
        if c.is_zero() {
            continue;
        }
        out.push(attach_coeff(c, rest));
    }
    match out.len() {
        0 => zero(),
        1 => out.pop().unwrap(),
        _ => {
            out.sort();
            Expr::raw(Node::Add(out))
        }
    }
}

fn attach_coeff(c: Q, rest: Expr) -> Expr {
    if c.is_one() {
        return rest;
    }
    let mut fs = vec![num(c)];
    match rest.node() {
        Node::Mul(inner) => fs.extend(inner.iter().cloned()),
        _ => fs.push(rest),
    }
    Expr::raw(Node::Mul(fs))
}

/// Canonical product; distributes over sums.
pub fn mul(factors: Vec<Expr>) -> Expr {
    let mut coeff = Q::one();
    // base -> accumulated exponent terms
    let mut powers: BTreeMap<Expr, Vec<Expr>> = BTreeMap::new();
    let mut exp_args: Vec<Expr> = Vec::new();
    let mut stack = factors;
    while let Some(f) = stack.pop() {
        match f.node() {
            Node::Num(c) => {
                if c.is_zero() {
                    return zero();
                }
                coeff *= c;
            }
            Node::Mul(inner) => stack.extend(inner.iter().cloned()),
            Node::Pow(b, r) => powers.entry(b.clone()).or_default().push(num(*r)),
            Node::PowSym(b, e) => powers.entry(b.clone()).or_default().push(e.clone()),
            Node::Exp(u) => exp_args.push(u.clone()),
            _ => powers.entry(f.clone()).or_default().push(one()),
        }
    }

    let mut out: Vec<Expr> = Vec::new();
    let mut needs_renormalize = false;
    for (base, exps) in powers {
        let single_unit = exps.len() == 1 && exps[0].is_one();
        let p = if single_unit {
            base.clone()
        } else {
            let e = add(exps);
            match e.node() {
                Node::Num(r) => pow(&base, *r),
                _ => powsym(&base, &e),
            }
        };
        match p.node() {
            Node::Num(c) => coeff *= c,
            Node::Add(_) => {
                if !single_unit {
                    needs_renormalize = true;
                }
                out.push(p)
            }
            Node::Mul(_) | Node::Exp(_) => {
                needs_renormalize = true;
                out.push(p)
            }
            _ => out.push(p),
        }
    }
    if !exp_args.is_empty() {
        let e = exp(&add(exp_args));
        if !e.is_one() {
            out.push(e);
        }
    }
    if coeff.is_zero() {
        return zero();
    }
    if needs_renormalize {
        out.push(num(coeff));
        return mul(out);
    }

    // distribute over the first sum
    if let Some(pos) = out.iter().position(|f| matches!(f.node(), Node::Add(_))) {
        let sum = out.remove(pos);
        let mut terms = Vec::new();
        for t in sum.terms() {
            let mut fs = out.clone();
            fs.push(num(coeff));
            fs.push(t);
            terms.push(mul(fs));
        }
        return add(terms);
    }

    match out.len() {
        0 => num(coeff),
        1 if coeff.is_one() => out.pop().unwrap(),
        _ => {
            out.sort();
            if !coeff.is_one() {
                out.insert(0, num(coeff));
            }
            Expr::raw(Node::Mul(out))
        }
    }
}

fn int_pow(base: &Q, n: i128) -> Q {
    let mut acc = Q::one();
    let b = if n < 0 { base.recip() } else { *base };
    for _ in 0..n.unsigned_abs() {
        acc *= b;
    }
    acc
}

/// Exact integer k-th root if one exists.
fn exact_root(v: i128, k: i128) -> Option<i128> {
    if v < 0 {
        return None;
    }
    let guess = (v as f64).powf(1.0 / k as f64).round() as i128;
    (guess.saturating_sub(1)..=guess + 1).find(|c| *c >= 0 && c.checked_pow(k as u32) == Some(v))
}

fn num_pow(b: &Q, r: Q) -> Expr {
    if b.is_zero() {
        return if r.is_positive() {
            zero()
        } else {
            Expr::raw(Node::Pow(num(*b), r))
        };
    }
    if b.is_one() {
        return one();
    }
    if r.is_integer() {
        return num(int_pow(b, r.to_integer()));
    }
    let n = r.floor().to_integer();
    let frac = r - Q::from_integer(n);
    // exact rational root, e.g. 4^(1/2) = 2
    let k = *frac.denom();
    let p = *frac.numer();
    if let (Some(rn), Some(rd)) = (exact_root(*b.numer(), k), exact_root(*b.denom(), k)) {
        let root = Q::new(rn, rd);
        return num(int_pow(b, n) * int_pow(&root, p));
    }
    if b.is_negative() {
        return Expr::raw(Node::Pow(num(*b), r));
    }
    let atom = Expr::raw(Node::Pow(num(*b), frac));
    let c = int_pow(b, n);
    if c.is_one() {
        atom
    } else {
        Expr::raw(Node::Mul(vec![num(c), atom]))
    }
}

/// Product of two sums, term by term.
fn distribute(a: &Expr, b: &Expr) -> Expr {
    let mut out = Vec::new();
    for ta in a.terms() {
        for tb in b.terms() {
            out.push(mul(vec![ta.clone(), tb.clone()]));
        }
    }
    add(out)
}

/// Canonical power with rational exponent.
pub fn pow(b: &Expr, r: Q) -> Expr {
    if r.is_zero() {
        return one();
    }
    if r.is_one() {
        return b.clone();
    }
    match b.node() {
        Node::Num(v) => num_pow(v, r),
        Node::Pow(inner, s) => pow(inner, s * r),
        Node::PowSym(inner, e) => powsym(inner, &scale(r, e)),
        Node::Exp(u) => exp(&scale(r, u)),
        Node::Mul(fs) => mul(fs.iter().map(|f| pow(f, r)).collect()),
        Node::Add(_) if r.is_integer() && r.is_positive() && r.to_integer() <= 8 => {
            let mut acc = b.clone();
            for _ in 1..r.to_integer() {
                acc = distribute(&acc, b);
            }
            acc
        }
        _ => Expr::raw(Node::Pow(b.clone(), r)),
    }
}

/// Power with an arbitrary exponent expression.
pub fn powsym(b: &Expr, e: &Expr) -> Expr {
    if let Node::Num(r) = e.node() {
        return pow(b, *r);
    }
    match b.node() {
        Node::Num(v) if v.is_one() => one(),
        Node::Num(v) if v.is_zero() => zero(),
        Node::Pow(inner, s) => powsym(inner, &scale(*s, e)),
        Node::PowSym(inner, e2) => powsym(inner, &mul(vec![e2.clone(), e.clone()])),
        Node::Exp(u) => exp(&mul(vec![u.clone(), e.clone()])),
        Node::Mul(fs) => mul(fs.iter().map(|f| powsym(f, e)).collect()),
        _ => Expr::raw(Node::PowSym(b.clone(), e.clone())),
    }
}

pub fn exp(u: &Expr) -> Expr {
    if u.is_zero() {
        return one();
    }
    if let Node::Ln(v) = u.node() {
        return v.clone();
    }
    Expr::raw(Node::Exp(u.clone()))
}

pub fn ln(u: &Expr) -> Expr {
    if u.is_one() {
        return zero();
    }
    if let Node::Exp(v) = u.node() {
        return v.clone();
    }
    Expr::raw(Node::Ln(u.clone()))
}

/// Unevaluated `d^order/dvar^order (arg)`.
pub fn derivative_node(arg: &Expr, var: &str, order: u32) -> Expr {
    if order == 0 {
        return arg.clone();
    }
    if let Node::Derivative {
        arg: inner,
        var: v2,
        order: o2,
    } = arg.node()
    {
        if v2 == var {
            return derivative_node(inner, var, order + o2);
        }
    }
    Expr::raw(Node::Derivative {
        arg: arg.clone(),
        var: var.to_string(),
        order,
    })
}

/// Deformed-derivative operator node `D_k[var](arg)`.
pub fn deformed(kernel: Kernel, var: &str, arg: &Expr) -> Expr {
    Expr::raw(Node::Deformed {
        kernel,
        var: var.to_string(),
        arg: arg.clone(),
    })
}

/// Rebuild a node with new children through the canonicalizing
/// constructors. Used by [`crate::symbolic::simplify`] and substitution.
pub fn rebuild(e: &Expr, mut f: impl FnMut(&Expr) -> Expr) -> Expr {
    match e.node() {
        Node::Num(_) | Node::Sym(_) => e.clone(),
        Node::Func { name, args, orders } => {
            func_d(name, args.iter().map(&mut f).collect(), orders.clone())
        }
        Node::Add(xs) => add(xs.iter().map(&mut f).collect()),
        Node::Mul(xs) => mul(xs.iter().map(&mut f).collect()),
        Node::Pow(b, r) => pow(&f(b), *r),
        Node::PowSym(b, x) => {
            let b2 = f(b);
            powsym(&b2, &f(x))
        }
        Node::Exp(u) => exp(&f(u)),
        Node::Ln(u) => ln(&f(u)),
        Node::Derivative { arg, var, order } => derivative_node(&f(arg), var, *order),
        Node::Deformed { kernel, var, arg } => {
            let k = kernel.map_params(&mut f);
            deformed(k, var, &f(arg))
        }
    }
}

/// Rational to f64.
pub fn q_to_f64(v: &Q) -> f64 {
    v.numer().to_f64().unwrap_or(f64::NAN) / v.denom().to_f64().unwrap_or(f64::NAN)
}

/// Closest rational with a bounded denominator, for numeric input.
pub fn q_from_f64(v: f64) -> Option<Q> {
    if !v.is_finite() {
        return None;
    }
    for d in [1i128, 2, 3, 4, 5, 6, 8, 10, 12, 16, 20, 25, 50, 100, 1000, 10_000, 100_000, 1_000_000] {
        let n = (v * d as f64).round();
        if ((n / d as f64) - v).abs() <= 1e-12 * v.abs().max(1.0) {
            return Some(Q::new(n as i128, d));
        }
    }
    None
}

impl std::ops::Add for Expr {
    type Output = Expr;
    fn add(self, rhs: Expr) -> Expr {
        add(vec![self, rhs])
    }
}

impl std::ops::Sub for Expr {
    type Output = Expr;
    fn sub(self, rhs: Expr) -> Expr {
        sub(&self, &rhs)
    }
}

impl std::ops::Mul for Expr {
    type Output = Expr;
    fn mul(self, rhs: Expr) -> Expr {
        mul(vec![self, rhs])
    }
}

impl std::ops::Div for Expr {
    type Output = Expr;
    fn div(self, rhs: Expr) -> Expr {
        div(&self, &rhs)
    }
}

impl std::ops::Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        neg(&self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn like_terms_collect() {
        let x = sym("x");
        assert_eq!(x.clone() + x.clone(), mul(vec![int(2), x]));
    }

    #[test]
    fn half_powers_merge_and_distribute() {
        let s = sub(&sym("t"), &sym("a"));
        let h = pow(&s, q(1, 2));
        let prod = mul(vec![h.clone(), h]);
        assert_eq!(prod, s);
    }

    #[test]
    fn rational_lowest_terms() {
        assert_eq!(rat(2, 4), rat(1, 2));
        assert_eq!(pow(&int(4), q(1, 2)), int(2));
        assert_eq!(pow(&int(8), q(2, 3)), int(4));
        let r2 = pow(&int(2), q(1, 2));
        assert_eq!(mul(vec![r2.clone(), r2]), int(2));
    }

    #[test]
    fn construction_order_is_irrelevant() {
        let (x, y, z) = (sym("x"), sym("y"), sym("z"));
        let a = add(vec![x.clone(), y.clone(), z.clone()]);
        let b = add(vec![z.clone(), add(vec![y.clone(), x.clone()])]);
        assert_eq!(a, b);
        assert_eq!(mul(vec![x.clone(), y.clone()]), mul(vec![y, x]));
    }

    #[test]
    fn symbolic_exponents_add() {
        let b = add(vec![one(), div(&sym("t"), &sym("tau"))]);
        let am1 = sub(&sym("alpha"), &one());
        let g = powsym(&b, &am1);
        let half = pow(&g, q(1, 2));
        let lhs = mul(vec![g, half]);
        let rhs = powsym(&b, &scale(q(3, 2), &am1));
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn exponentials_merge() {
        let lt = mul(vec![sym("lambda"), sym("t")]);
        let half = exp(&scale(q(-1, 2), &lt));
        assert_eq!(pow(&half, q(2, 1)), exp(&neg(&lt)));
        assert_eq!(mul(vec![exp(&lt), exp(&neg(&lt))]), one());
    }

    #[test]
    fn zero_and_one_absorb() {
        let x = sym("x");
        assert_eq!(mul(vec![zero(), x.clone()]), zero());
        assert_eq!(mul(vec![one(), x.clone()]), x);
        assert_eq!(add(vec![zero(), x.clone()]), x);
        assert_eq!(sub(&x, &x), zero());
    }
}
