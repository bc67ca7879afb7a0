//! Euler-Lagrange residuals for Lagrangians with deformed-derivative slots,
//! the interval and order limits, and the Legendre transform.
//!
//! For a dynamical variable `y` and each of its coordinates `x` the
//! residual is
//!
//! ```text
//! dL/dy - d/dx[dL/d(y_x)] - d/dx[k(x) dL/d(D_k y)] + d2/dx2[k(x) dL/d(D_k y_x)]
//! ```
//!
//! with the partials taken by treating the value, first derivative,
//! deformed derivative and deformed first derivative as independent slots.

use std::collections::{BTreeMap, HashMap};

use num_traits::{Signed, Zero};
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::EngineError;
use crate::kernels::{expand_deformed, kernel_factor};
use crate::symbolic::{
    differentiate, render_latex, render_plain, render_sexpr, simplify, substitute, Expr, Kernel, Node,
};
use crate::symbolic::expr::*;

/// A dependent function that is varied, e.g. `x(t)` or `phi(x, t)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DynVar {
    pub name: String,
    pub coords: Vec<String>,
}

impl DynVar {
    pub fn new(name: &str, coords: &[&str]) -> Self {
        Self {
            name: name.to_string(),
            coords: coords.iter().map(|c| c.to_string()).collect(),
        }
    }

    pub fn value(&self) -> Expr {
        func_d(&self.name, self.args(), vec![0; self.coords.len()])
    }

    /// First partial along `coord`.
    pub fn first(&self, coord: &str) -> Expr {
        let orders = self.coords.iter().map(|c| u32::from(c == coord)).collect();
        func_d(&self.name, self.args(), orders)
    }

    fn args(&self) -> Vec<Expr> {
        self.coords.iter().map(|c| sym(c)).collect()
    }
}

/// Kernel per (variable, coordinate).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct KernelAssignment(BTreeMap<(String, String), Kernel>);

impl KernelAssignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, variable: &str, coord: &str, k: Kernel) {
        self.0.insert((variable.to_string(), coord.to_string()), k);
    }

    pub fn get(&self, variable: &str, coord: &str) -> Option<&Kernel> {
        self.0.get(&(variable.to_string(), coord.to_string()))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(String, String), &Kernel)> {
        self.0.iter()
    }
}

#[derive(Debug, Clone)]
pub struct LagrangianSpec {
    pub lagrangian: Expr,
    pub variables: Vec<DynVar>,
    /// Given functions (noise, sources, external fields); never varied.
    pub sources: Vec<String>,
    pub kernels: KernelAssignment,
}

impl LagrangianSpec {
    pub fn new(lagrangian: Expr) -> Self {
        Self {
            lagrangian,
            variables: Vec::new(),
            sources: Vec::new(),
            kernels: KernelAssignment::new(),
        }
    }

    pub fn variable(mut self, name: &str, coords: &[&str]) -> Self {
        self.variables.push(DynVar::new(name, coords));
        self
    }

    pub fn source(mut self, name: &str) -> Self {
        self.sources.push(name.to_string());
        self
    }

    pub fn kernel(mut self, variable: &str, coord: &str, k: Kernel) -> Self {
        self.kernels.insert(variable, coord, k);
        self
    }

    pub fn var_coords(&self, name: &str) -> Option<&Vec<String>> {
        self.variables.iter().find(|v| v.name == name).map(|v| &v.coords)
    }

    fn var(&self, name: &str) -> Result<&DynVar, EngineError> {
        self.variables
            .iter()
            .find(|v| v.name == name)
            .ok_or_else(|| EngineError::UnknownVariable(name.to_string()))
    }

    /// Lower interval endpoints of every conformable kernel, by coordinate.
    pub fn intervals(&self) -> Vec<(String, Expr)> {
        let mut out: Vec<(String, Expr)> = Vec::new();
        for ((_, coord), k) in self.kernels.iter() {
            if let Kernel::ConformableInterval { a, .. } = k {
                if !out.iter().any(|(c, l)| c == coord && l == a) {
                    out.push((coord.clone(), a.clone()));
                }
            }
        }
        out
    }

    /// Check slots and kernels; returns the Lagrangian in slot form.
    pub fn validate(&self) -> Result<Expr, EngineError> {
        if self.variables.is_empty() {
            return Err(EngineError::InvalidLagrangian("no dynamical variables declared".into()));
        }
        for ((v, _), k) in self.kernels.iter() {
            self.var(v)?;
            crate::kernels::validate(k)?;
        }
        let l = normalize(&self.lagrangian, self)?;
        let (tilde, _) = slot_form(&l, self);
        for v in &self.variables {
            if let Some(bad) = find_func(&tilde, &v.name) {
                return Err(EngineError::InvalidLagrangian(format!(
                    "`{}` enters only through its value, first derivatives and deformed slots; found {}",
                    v.name,
                    render_plain(&bad)
                )));
            }
        }
        Ok(l)
    }
}

/// Which function of which variable sits in a slot.
fn slot_owner<'a>(e: &Expr, spec: &'a LagrangianSpec) -> Option<(&'a DynVar, Option<String>)> {
    let Node::Func { name, .. } = e.node() else {
        return None;
    };
    let v = spec.variables.iter().find(|v| &v.name == name)?;
    if *e == v.value() {
        return Some((v, None));
    }
    v.coords.iter().find(|c| *e == v.first(c)).map(|c| (v, Some(c.clone())))
}

fn involves_variables(e: &Expr, spec: &LagrangianSpec) -> bool {
    spec.variables.iter().any(|v| find_func(e, &v.name).is_some())
}

fn find_func(e: &Expr, name: &str) -> Option<Expr> {
    match e.node() {
        Node::Func { name: n, args, .. } => {
            if n == name {
                Some(e.clone())
            } else {
                args.iter().find_map(|a| find_func(a, name))
            }
        }
        Node::Num(_) | Node::Sym(_) => None,
        Node::Add(xs) | Node::Mul(xs) => xs.iter().find_map(|x| find_func(x, name)),
        Node::Pow(b, _) => find_func(b, name),
        Node::PowSym(b, x) => find_func(b, name).or_else(|| find_func(x, name)),
        Node::Exp(u) | Node::Ln(u) => find_func(u, name),
        Node::Derivative { arg, .. } => find_func(arg, name),
        Node::Deformed { kernel, arg, .. } => find_func(arg, name)
            .or_else(|| kernel.params().into_iter().find_map(|p| find_func(p, name))),
    }
}

fn assigned<'a>(spec: &'a LagrangianSpec, v: &DynVar, coord: &str, k: &Kernel) -> Result<&'a Kernel, EngineError> {
    let ak = spec.kernels.get(&v.name, coord).ok_or_else(|| EngineError::MissingKernel {
        variable: v.name.clone(),
        coordinate: coord.to_string(),
    })?;
    if ak != k {
        return Err(EngineError::InvalidLagrangian(format!(
            "deformed derivative of `{}` along `{coord}` uses a kernel different from its assignment",
            v.name
        )));
    }
    Ok(ak)
}

/// Rewrite deformed nodes so each wraps a slot (a variable or its first
/// derivative along the same coordinate). `D_k g(y)` becomes
/// `g'(y) D_k y + k dg/dx|explicit`; nodes free of variables are expanded.
fn normalize(e: &Expr, spec: &LagrangianSpec) -> Result<Expr, EngineError> {
    let mut err: Option<EngineError> = None;
    let out = normalize_rec(e, spec, &mut err);
    match err {
        Some(er) => Err(er),
        None => Ok(out),
    }
}

fn normalize_rec(e: &Expr, spec: &LagrangianSpec, err: &mut Option<EngineError>) -> Expr {
    if err.is_some() {
        return e.clone();
    }
    let Node::Deformed { kernel, var, arg } = e.node() else {
        return rebuild(e, |c| normalize_rec(c, spec, err));
    };
    let arg = normalize_rec(arg, spec, err);
    let result = (|| -> Result<Expr, EngineError> {
        if let Some((v, c)) = slot_owner(&arg, spec) {
            if c.is_none() || c.as_deref() == Some(var.as_str()) {
                assigned(spec, v, var, kernel)?;
                return Ok(deformed(kernel.clone(), var, &arg));
            }
        }
        if !involves_variables(&arg, spec) {
            return Ok(mul(vec![kernel_factor(kernel, var), differentiate(&arg, var, 1)]));
        }
        // chain rule through the values
        let mut map = HashMap::new();
        let mut back = Vec::new();
        for (i, v) in spec.variables.iter().enumerate() {
            let ph = sym(&format!("_y{i}"));
            map.insert(v.value(), ph.clone());
            back.push((ph, v));
        }
        let g = replace_map(&arg, &map);
        if let Some(v) = spec.variables.iter().find(|v| find_func(&g, &v.name).is_some()) {
            return Err(EngineError::InvalidLagrangian(format!(
                "deformed derivative of an expression in derivatives of `{}` is not a slot",
                v.name
            )));
        }
        let restore: HashMap<Expr, Expr> = back.iter().map(|(ph, v)| (ph.clone(), v.value())).collect();
        let mut terms = vec![replace_map(
            &mul(vec![kernel_factor(kernel, var), differentiate(&g, var, 1)]),
            &restore,
        )];
        for (ph, v) in &back {
            let dg = differentiate(&g, ph.as_sym().unwrap(), 1);
            if dg.is_zero() {
                continue;
            }
            if !v.coords.contains(var) {
                return Err(EngineError::InvalidLagrangian(format!(
                    "`{}` does not depend on `{var}`",
                    v.name
                )));
            }
            assigned(spec, v, var, kernel)?;
            terms.push(mul(vec![replace_map(&dg, &restore), deformed(kernel.clone(), var, &v.value())]));
        }
        Ok(add(terms))
    })();
    match result {
        Ok(x) => x,
        Err(er) => {
            *err = Some(er);
            e.clone()
        }
    }
}

/// Top-down structural replacement of whole sub-trees.
pub fn replace_map(e: &Expr, map: &HashMap<Expr, Expr>) -> Expr {
    if let Some(r) = map.get(e) {
        return r.clone();
    }
    rebuild(e, |c| replace_map(c, map))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum SlotKind {
    Value,
    First,
    Deformed,
    DeformedFirst,
}

struct Slot {
    var: String,
    coord: Option<String>,
    kind: SlotKind,
    expr: Expr,
    placeholder: Expr,
}

fn slots(spec: &LagrangianSpec) -> Vec<Slot> {
    let mut out = Vec::new();
    let mut push = |var: &DynVar, coord: Option<&String>, kind, expr: Expr| {
        let placeholder = sym(&format!("_slot{}", out.len()));
        out.push(Slot {
            var: var.name.clone(),
            coord: coord.cloned(),
            kind,
            expr,
            placeholder,
        });
    };
    for v in &spec.variables {
        push(v, None, SlotKind::Value, v.value());
        for c in &v.coords {
            push(v, Some(c), SlotKind::First, v.first(c));
            if let Some(k) = spec.kernels.get(&v.name, c) {
                push(v, Some(c), SlotKind::Deformed, deformed(k.clone(), c, &v.value()));
                push(v, Some(c), SlotKind::DeformedFirst, deformed(k.clone(), c, &v.first(c)));
            }
        }
    }
    out
}

fn slot_form(l: &Expr, spec: &LagrangianSpec) -> (Expr, Vec<Slot>) {
    let ss = slots(spec);
    let map: HashMap<Expr, Expr> = ss.iter().map(|s| (s.expr.clone(), s.placeholder.clone())).collect();
    (replace_map(l, &map), ss)
}

/// One step of a limit recipe.
#[derive(Debug, Clone, PartialEq)]
pub enum LimitStep {
    /// `(coordinate - lower) -> 0`.
    Interval { coordinate: String, lower: Expr },
    /// Order symbol to one.
    Alpha { symbol: String },
    Substitute { target: Expr, replacement: Expr },
}

impl LimitStep {
    pub fn describe(&self) -> String {
        match self {
            LimitStep::Interval { coordinate, lower } => {
                format!("({} - {}) -> 0", coordinate, render_plain(lower))
            }
            LimitStep::Alpha { symbol } => format!("{symbol} -> 1"),
            LimitStep::Substitute { target, replacement } => {
                format!("{} -> {}", render_plain(target), render_plain(replacement))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Verdict {
    Match,
    Mismatch { diff: Expr },
    Singular { reason: String },
}

impl Verdict {
    pub fn label(&self) -> &'static str {
        match self {
            Verdict::Match => "MATCH",
            Verdict::Mismatch { .. } => "MISMATCH",
            Verdict::Singular { .. } => "SINGULAR",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ELResult {
    pub variable: String,
    pub pre_limit: Expr,
    pub post_limit: Expr,
    /// Terms removed by interval limits, grouped by power of the interval.
    pub dropped_terms: Vec<Expr>,
    /// Terms with negative or undetermined interval powers kept by a
    /// lenient limit.
    pub singular_terms: Vec<Expr>,
    pub limits_applied: Vec<LimitStep>,
    pub target: Option<Expr>,
    pub verdict: Option<Verdict>,
}

impl ELResult {
    fn new(variable: &str, pre: Expr) -> Self {
        Self {
            variable: variable.to_string(),
            post_limit: pre.clone(),
            pre_limit: pre,
            dropped_terms: Vec::new(),
            singular_terms: Vec::new(),
            limits_applied: Vec::new(),
            target: None,
            verdict: None,
        }
    }

    /// Apply a limit recipe to the post-limit residual. A lenient run keeps
    /// singular terms instead of failing.
    pub fn apply_limits(&mut self, steps: &[LimitStep], lenient: bool) -> Result<(), EngineError> {
        for step in steps {
            match step {
                LimitStep::Interval { coordinate, lower } => {
                    let out = limit_interval_impl(&self.post_limit, coordinate, lower, lenient)?;
                    self.post_limit = out.kept;
                    self.dropped_terms.extend(out.dropped);
                    self.singular_terms.extend(out.singular.iter().cloned());
                    if !out.singular.is_empty() {
                        self.post_limit = add(std::iter::once(self.post_limit.clone()).chain(out.singular).collect());
                    }
                }
                LimitStep::Alpha { symbol } => {
                    self.post_limit = take_limit_alpha(&self.post_limit, symbol);
                    self.dropped_terms = self.dropped_terms.iter().map(|d| take_limit_alpha(d, symbol)).collect();
                }
                LimitStep::Substitute { target, replacement } => {
                    self.post_limit = simplify(&substitute(&self.post_limit, target, replacement));
                }
            }
            self.limits_applied.push(step.clone());
        }
        Ok(())
    }

    pub fn to_json(&self, system: Option<&str>) -> Value {
        json!({
            "system": system,
            "variable": self.variable,
            "pre_limit": expr_json(&self.pre_limit),
            "post_limit": expr_json(&self.post_limit),
            "dropped_terms": self.dropped_terms.iter().map(expr_json).collect::<Vec<_>>(),
            "singular_terms": self.singular_terms.iter().map(expr_json).collect::<Vec<_>>(),
            "limits_applied": self.limits_applied.iter().map(|s| s.describe()).collect::<Vec<_>>(),
            "target": self.target.as_ref().map(expr_json),
            "verdict": self.verdict.as_ref().map(verdict_json),
        })
    }
}

pub fn expr_json(e: &Expr) -> Value {
    json!({ "plain": render_plain(e), "latex": render_latex(e), "sexpr": render_sexpr(e) })
}

pub fn verdict_json(v: &Verdict) -> Value {
    match v {
        Verdict::Match => json!({ "status": "MATCH" }),
        Verdict::Mismatch { diff } => json!({ "status": "MISMATCH", "diff": expr_json(diff) }),
        Verdict::Singular { reason } => json!({ "status": "SINGULAR", "reason": reason }),
    }
}

/// Residual of `y` summed over its coordinates, fully expanded, no limits.
fn residual(spec: &LagrangianSpec, y: &str) -> Result<Expr, EngineError> {
    let v = spec.var(y)?.clone();
    let l = spec.validate()?;
    let (tilde, ss) = slot_form(&l, spec);
    let restore: HashMap<Expr, Expr> = ss.iter().map(|s| (s.placeholder.clone(), s.expr.clone())).collect();
    let partial = |s: &Slot| -> Expr {
        let d = differentiate(&tilde, s.placeholder.as_sym().unwrap(), 1);
        expand_deformed(&replace_map(&d, &restore))
    };
    let mut terms = Vec::new();
    for s in ss.iter().filter(|s| s.var == y) {
        let p = partial(s);
        if p.is_zero() {
            continue;
        }
        let coord = s.coord.as_deref().unwrap_or("");
        let k = || kernel_factor(spec.kernels.get(y, coord).expect("slot implies kernel"), coord);
        terms.push(match s.kind {
            SlotKind::Value => p,
            SlotKind::First => neg(&differentiate(&p, coord, 1)),
            SlotKind::Deformed => neg(&differentiate(&mul(vec![k(), p]), coord, 1)),
            SlotKind::DeformedFirst => differentiate(&mul(vec![k(), p]), coord, 2),
        });
    }
    debug_assert!(v.coords.iter().all(|c| !c.is_empty()));
    Ok(expand_deformed(&add(terms)))
}

/// Four-term residual for a variable of one coordinate.
pub fn euler_lagrange_particle(spec: &LagrangianSpec, y: &str) -> Result<ELResult, EngineError> {
    let v = spec.var(y)?;
    if v.coords.len() != 1 {
        return Err(EngineError::InvalidLagrangian(format!(
            "`{y}` depends on {} coordinates; use the field equation",
            v.coords.len()
        )));
    }
    Ok(ELResult::new(y, residual(spec, y)?))
}

/// Residual summed over all coordinates of a field.
pub fn euler_lagrange_field(spec: &LagrangianSpec, phi: &str) -> Result<ELResult, EngineError> {
    let v = spec.var(phi)?;
    if v.coords.is_empty() {
        return Err(EngineError::InvalidLagrangian(format!("`{phi}` has no coordinates")));
    }
    Ok(ELResult::new(phi, residual(spec, phi)?))
}

/// One residual per declared variable (doubled-variable systems).
pub fn euler_lagrange_system(spec: &LagrangianSpec) -> Result<Vec<ELResult>, EngineError> {
    if spec.variables.len() < 2 {
        return Err(EngineError::InvalidLagrangian(
            "a system needs at least two dynamical variables".into(),
        ));
    }
    spec.variables
        .iter()
        .map(|v| {
            if v.coords.len() == 1 {
                euler_lagrange_particle(spec, &v.name)
            } else {
                euler_lagrange_field(spec, &v.name)
            }
        })
        .collect()
}

/// Interval limit split of an expanded expression.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitOutcome {
    pub kept: Expr,
    pub dropped: Vec<Expr>,
    pub singular: Vec<Expr>,
}

/// Drop every term carrying a positive power of `(coordinate - lower)`.
pub fn take_limit_interval(e: &Expr, coordinate: &str, lower: &Expr) -> Result<Expr, EngineError> {
    Ok(limit_interval_impl(e, coordinate, lower, false)?.kept)
}

/// As [`take_limit_interval`], but keeps negative-power terms apart instead
/// of failing.
pub fn take_limit_interval_lenient(e: &Expr, coordinate: &str, lower: &Expr) -> Result<LimitOutcome, EngineError> {
    limit_interval_impl(e, coordinate, lower, true)
}

/// Full split into kept, dropped and singular parts.
pub fn split_interval(e: &Expr, coordinate: &str, lower: &Expr) -> Result<LimitOutcome, EngineError> {
    limit_interval_impl(e, coordinate, lower, false)
}

enum Power {
    Rational(Q),
    Symbolic,
}

fn limit_interval_impl(e: &Expr, coordinate: &str, lower: &Expr, lenient: bool) -> Result<LimitOutcome, EngineError> {
    const S: &str = "_interval";
    if lower.as_sym().is_none() {
        return Err(EngineError::InvalidLagrangian(format!(
            "interval endpoint must be a symbol, got {}",
            render_plain(lower)
        )));
    }
    let s = sym(S);
    let interval = sub(&sym(coordinate), lower);
    let shifted = substitute(e, lower, &sub(&sym(coordinate), &s));
    let mut kept = Vec::new();
    let mut dropped: BTreeMap<Q, Vec<Expr>> = BTreeMap::new();
    let mut singular = Vec::new();
    for term in shifted.terms() {
        let mut power = Power::Rational(Q::zero());
        for f in term.factors() {
            let p = match f.node() {
                Node::Sym(n) if n == S => Power::Rational(q(1, 1)),
                Node::Pow(b, r) if b.as_sym() == Some(S) => Power::Rational(*r),
                Node::PowSym(b, _) if b.as_sym() == Some(S) => Power::Symbolic,
                _ if f.depends_on(S) => {
                    return Err(EngineError::LimitSingular(format!(
                        "{} is not a monomial in {}",
                        render_plain(&substitute(&term, &s, &interval)),
                        render_plain(&interval)
                    )))
                }
                _ => continue,
            };
            power = match (power, p) {
                (Power::Rational(a), Power::Rational(b)) => Power::Rational(a + b),
                _ => Power::Symbolic,
            };
        }
        let back = simplify(&substitute(&term, &s, &interval));
        match power {
            Power::Rational(r) if r.is_zero() => kept.push(back),
            Power::Rational(r) if r.is_positive() => dropped.entry(r).or_default().push(back),
            _ if lenient => singular.push(back),
            _ => return Err(EngineError::LimitSingular(render_plain(&back))),
        }
    }
    Ok(LimitOutcome {
        kept: add(kept),
        dropped: dropped.into_values().map(add).filter(|d| !d.is_zero()).collect(),
        singular,
    })
}

/// Set the order symbol to one.
pub fn take_limit_alpha(e: &Expr, alpha: &str) -> Expr {
    simplify(&substitute(e, &sym(alpha), &one()))
}

/// Hamiltonian from a Lagrangian quadratic in its velocity slot.
#[derive(Debug, Clone, PartialEq)]
pub struct Hamiltonian {
    /// `H(q, p, t)` with `q` the variable name as a symbol and `p` its momentum.
    pub h: Expr,
    /// `H` in terms of the velocity slot, before eliminating it.
    pub h_slot: Expr,
    /// Slot variable (`D_k q` or `q'`).
    pub slot: Expr,
    /// `dL/d(slot)`.
    pub momentum: Expr,
    /// `d2L/d(slot)2`.
    pub mass: Expr,
    /// Kernel factor relating the slot to the ordinary velocity.
    pub kernel_factor: Expr,
}

/// `H = p_k (D_k q) - L`, rewritten with `D_k q = k(t) p / m`.
pub fn legendre_transform(spec: &LagrangianSpec, qname: &str) -> Result<Hamiltonian, EngineError> {
    let v = spec.var(qname)?.clone();
    if v.coords.len() != 1 {
        return Err(EngineError::InvalidLagrangian(format!("`{qname}` must have exactly one coordinate")));
    }
    let t = v.coords[0].clone();
    let l = spec.validate()?;
    let (slot, k) = match spec.kernels.get(qname, &t) {
        Some(kernel) => (deformed(kernel.clone(), &t, &v.value()), kernel_factor(kernel, &t)),
        None => (v.first(&t), one()),
    };
    const S: &str = "_velocity";
    let mut map = HashMap::new();
    map.insert(slot.clone(), sym(S));
    let lt = replace_map(&l, &map);
    if let Some(bad) = find_func(&lt, qname).filter(|f| *f != v.value()) {
        return Err(EngineError::NonInvertibleMomentum(format!(
            "{} enters besides the slot {}",
            render_plain(&bad),
            render_plain(&slot)
        )));
    }
    let pk = differentiate(&lt, S, 1);
    let m = differentiate(&pk, S, 1);
    if m.is_zero() || m.depends_on(S) {
        return Err(EngineError::NonInvertibleMomentum(render_plain(&l)));
    }
    let h_s = simplify(&sub(&mul(vec![pk.clone(), sym(S)]), &lt));
    let back: HashMap<Expr, Expr> = [(sym(S), slot.clone())].into_iter().collect();
    let velocity = div(&mul(vec![k.clone(), sym("p")]), &m);
    let h = substitute(&h_s, &sym(S), &velocity);
    let to_q: HashMap<Expr, Expr> = [(v.value(), sym(qname))].into_iter().collect();
    Ok(Hamiltonian {
        h: simplify(&replace_map(&h, &to_q)),
        h_slot: replace_map(&h_s, &back),
        slot,
        momentum: replace_map(&pk, &back),
        mass: replace_map(&m, &back),
        kernel_factor: k,
    })
}
