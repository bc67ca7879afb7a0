use std::collections::BTreeMap;

use serde_json::{json, Value};
use structvar_core::catalog::{self, TargetMode};
use structvar_core::symbolic::expr::Node;
use structvar_core::symbolic::{neg, parse_with, render, Expr, Format, ParseContext};
use structvar_core::variational::{
    euler_lagrange_field, euler_lagrange_particle, expr_json, ELResult, LagrangianSpec, LimitStep, Verdict,
};

use crate::config::RunConfig;
use crate::Failure;

/// Write to `--out` if given, else stdout.
pub fn emit(cfg: &RunConfig, text: &str) -> Result<(), Failure> {
    match &cfg.out {
        Some(p) => std::fs::write(p, text).map_err(|e| Failure::Parse(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json(cfg: &RunConfig, v: &Value) -> Result<(), Failure> {
    emit(cfg, &format!("{}\n", serde_json::to_string_pretty(v).expect("json values serialize")))
}

fn format_of(cfg: &RunConfig) -> Result<Format, Failure> {
    cfg.format.as_deref().unwrap_or("plain").parse().map_err(Failure::Parse)
}

pub fn list(cfg: &RunConfig) -> Result<(), Failure> {
    let rows: Vec<_> = catalog::list_systems()
        .into_iter()
        .filter(|s| cfg.section.as_deref().is_none_or(|sec| s.section == sec))
        .collect();
    if cfg.json {
        return emit_json(cfg, &serde_json::to_value(&rows).expect("rows serialize"));
    }
    let mut out = String::new();
    for s in rows {
        out += &format!("{:<24} {:<5} {}\n", s.id, s.section, s.description);
    }
    emit(cfg, &out)
}

fn max_order(e: &Expr) -> u32 {
    match e.node() {
        Node::Func { orders, args, .. } => orders.iter().sum::<u32>().max(args.iter().map(max_order).max().unwrap_or(0)),
        Node::Add(xs) | Node::Mul(xs) => xs.iter().map(max_order).max().unwrap_or(0),
        Node::Pow(b, _) => max_order(b),
        Node::PowSym(b, x) => max_order(b).max(max_order(x)),
        Node::Exp(u) | Node::Ln(u) => max_order(u),
        Node::Derivative { arg, order, .. } => max_order(arg) + order,
        Node::Deformed { arg, .. } => max_order(arg) + 1,
        _ => 0,
    }
}

/// A residual is an equation `R = 0`; show it with its highest-order
/// term positive.
pub fn flips(e: &Expr) -> bool {
    let terms = e.terms();
    let lead = terms.iter().max_by_key(|t| max_order(t));
    matches!(lead, Some(t) if t.split_coeff().0 < 0.into())
}

pub fn oriented(e: &Expr) -> Expr {
    if flips(e) {
        neg(e)
    } else {
        e.clone()
    }
}

fn split_top(s: &str, sep: char) -> Vec<String> {
    let (mut depth, mut cur, mut out) = (0i32, String::new(), Vec::new());
    for ch in s.chars() {
        match ch {
            '(' | '[' => depth += 1,
            ')' | ']' => depth -= 1,
            _ => {}
        }
        if ch == sep && depth == 0 {
            out.push(cur.trim().to_string());
            cur.clear();
        } else {
            cur.push(ch);
        }
    }
    if !cur.trim().is_empty() {
        out.push(cur.trim().to_string());
    }
    out
}

fn declared(decls: &str, ctx: &mut ParseContext) -> Result<Vec<(String, Vec<String>)>, Failure> {
    let mut out = Vec::new();
    for d in split_top(decls, ',') {
        ctx.declare(&d)?;
        let (name, rest) = d.split_once('(').ok_or_else(|| Failure::Parse(format!("`{d}` is not a declaration like x(t)")))?;
        if out.iter().any(|(n, _): &(String, Vec<String>)| n == name.trim()) {
            return Err(Failure::Parse(format!("`{}` declared twice", name.trim())));
        }
        let coords = rest.trim_end_matches(')').split(',').map(|c| c.trim().to_string()).collect();
        out.push((name.trim().to_string(), coords));
    }
    Ok(out)
}

fn custom(cfg: &RunConfig, lagrangian: &str) -> Result<Vec<ELResult>, Failure> {
    let mut ctx = ParseContext::new();
    let vars = declared(cfg.vars.as_deref().unwrap_or("x(t)"), &mut ctx)?;
    let sources = match &cfg.sources {
        Some(s) => declared(s, &mut ctx)?,
        None => Vec::new(),
    };
    let l = parse_with(lagrangian, &ctx)?;
    let mut spec = LagrangianSpec::new(l);
    for (name, coords) in &vars {
        let c: Vec<&str> = coords.iter().map(String::as_str).collect();
        spec = spec.variable(name, &c);
    }
    for (name, _) in &sources {
        spec = spec.source(name);
    }
    for item in split_top(cfg.kernels.as_deref().unwrap_or(""), ';') {
        let (lhs, kernel) = item
            .split_once('=')
            .ok_or_else(|| Failure::Parse(format!("kernel `{item}` should read var:coord=kernel")))?;
        let (var, coord) = lhs
            .split_once(':')
            .ok_or_else(|| Failure::Parse(format!("kernel `{item}` should read var:coord=kernel")))?;
        let (var, coord) = (var.trim(), coord.trim());
        match vars.iter().find(|(n, _)| n == var) {
            None => return Err(Failure::Parse(format!("kernel `{item}` names undeclared variable `{var}`"))),
            Some((_, cs)) if !cs.iter().any(|c| c == coord) => {
                return Err(Failure::Parse(format!("kernel `{item}`: `{var}` does not depend on `{coord}`")))
            }
            _ => {}
        }
        let probe = parse_with(&format!("D[{},{coord}]({var})", kernel.trim()), &ctx)?;
        match probe.node() {
            Node::Deformed { kernel, .. } => spec = spec.kernel(var, coord, kernel.clone()),
            _ => return Err(Failure::Parse(format!("cannot read kernel `{kernel}`"))),
        }
    }
    let steps: Vec<LimitStep> = spec
        .intervals()
        .into_iter()
        .map(|(coordinate, lower)| LimitStep::Interval { coordinate, lower })
        .collect();
    let mut out = Vec::new();
    for (name, coords) in &vars {
        let mut r = if coords.len() == 1 {
            euler_lagrange_particle(&spec, name)?
        } else {
            euler_lagrange_field(&spec, name)?
        };
        if !cfg.no_limit {
            r.apply_limits(&steps, false)?;
        }
        out.push(r);
    }
    Ok(out)
}

fn overrides(cfg: &RunConfig) -> BTreeMap<String, String> {
    cfg.params.clone()
}

pub fn derive(cfg: &RunConfig) -> Result<(), Failure> {
    let fmt = format_of(cfg)?;
    let (system, results) = match (&cfg.lagrangian, &cfg.system) {
        (Some(l), _) => (None, custom(cfg, l)?),
        (None, Some(id)) => {
            let sys = catalog::build(id, &overrides(cfg))?;
            let mode = if cfg.printed { TargetMode::Printed } else { TargetMode::Corrected };
            let results = catalog::derive(&sys, mode, !cfg.no_limit)?;
            (Some(sys), results)
        }
        (None, None) => return Err(Failure::Parse("derive needs a system id or --lagrangian".into())),
    };
    let id = system.as_ref().map(|s| s.id.clone());
    if cfg.json {
        let v: Vec<Value> = results
            .iter()
            .map(|r| {
                let mut j = r.to_json(id.as_deref());
                j["post_limit_oriented"] = expr_json(&oriented(&r.post_limit));
                j
            })
            .collect();
        return emit_json(cfg, &Value::Array(v));
    }
    let mut out = String::new();
    if let Some(s) = &system {
        out += &format!("system: {} ({})\n", s.id, s.section);
    }
    for r in &results {
        let sign = |e: &Expr| if flips(&r.post_limit) { neg(e) } else { e.clone() };
        out += &format!("residual for {}\n", r.variable);
        out += &format!("  pre-limit:  {} = 0\n", render(&sign(&r.pre_limit), fmt));
        if cfg.no_limit {
            continue;
        }
        out += &format!("  post-limit: {} = 0\n", render(&sign(&r.post_limit), fmt));
        for d in &r.dropped_terms {
            out += &format!("  dropped:    {}\n", render(&sign(d), fmt));
        }
        for d in &r.singular_terms {
            out += &format!("  singular:   {}\n", render(&sign(d), fmt));
        }
    }
    if let Some(s) = &system {
        for n in &s.notes {
            out += &format!("note: {n}\n");
        }
    }
    emit(cfg, &out)
}

fn verdict_line(v: &Verdict, fmt: Format) -> String {
    match v {
        Verdict::Match => "MATCH".into(),
        Verdict::Mismatch { diff } => format!("MISMATCH  diff: {}", render(diff, fmt)),
        Verdict::Singular { reason } => format!("SINGULAR  {reason}"),
    }
}

pub fn verify(cfg: &RunConfig) -> Result<(), Failure> {
    let fmt = format_of(cfg)?;
    let mode = if cfg.printed { TargetMode::Printed } else { TargetMode::Corrected };
    let ids: Vec<String> = match (&cfg.system, cfg.all) {
        (Some(_), true) => return Err(Failure::Parse("give a system id or --all, not both".into())),
        (Some(id), false) => vec![id.clone()],
        (None, true) => catalog::list_systems().iter().map(|s| s.id.to_string()).collect(),
        (None, false) => return Err(Failure::Parse("verify needs a system id or --all".into())),
    };
    if cfg.all && !cfg.params.is_empty() {
        return Err(Failure::Parse("parameter overrides apply to a single system".into()));
    }
    let mut reports = Vec::new();
    for id in &ids {
        reports.push(catalog::verify(id, &overrides(cfg), mode)?);
    }
    let ok = reports.iter().all(|r| r.is_match());
    if cfg.json {
        emit_json(cfg, &Value::Array(reports.iter().map(|r| r.to_json()).collect()))?;
    } else {
        let mut out = String::new();
        for r in &reports {
            out += &format!("{:<24} {:<5} {}\n", r.system, r.section, verdict_line(&r.verdict, fmt));
            if ids.len() == 1 {
                for c in &r.checks {
                    out += &format!("  {}: {}\n", c.name, verdict_line(&c.verdict, fmt));
                }
                for n in &r.notes {
                    out += &format!("  note: {n}\n");
                }
            }
        }
        let matched = reports.iter().filter(|r| r.is_match()).count();
        out += &format!("{matched}/{} MATCH ({} targets)\n", reports.len(), json!(mode).as_str().unwrap_or_default());
        emit(cfg, &out)?;
    }
    if ok {
        Ok(())
    } else {
        Err(Failure::Verify)
    }
}

pub fn render_cmd(cfg: &RunConfig) -> Result<(), Failure> {
    let text = cfg.expr.as_deref().ok_or_else(|| Failure::Parse("render needs an expression".into()))?;
    let mut ctx = ParseContext::new();
    if let Some(v) = &cfg.vars {
        declared(v, &mut ctx)?;
    }
    let e = parse_with(text, &ctx)?;
    if cfg.json {
        return emit_json(cfg, &expr_json(&e));
    }
    emit(cfg, &format!("{}\n", render(&e, format_of(cfg)?)))
}

