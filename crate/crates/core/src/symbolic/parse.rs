//! Expression grammar.
//!
//! ```text
//! expr     := term (('+' | '-') term)*
//! term     := unary (('*' | '/') unary)*
//! unary    := '-' unary | power
//! power    := primary ('^' unary)?
//! primary  := number | '(' expr ')'
//!           | 'D' '[' kernel ',' ident ']' '(' expr ')'      deformed derivative
//!           | 'd' '(' expr ',' ident (',' integer)? ')'      ordinary derivative
//!           | 'd' '/' 'd'ident '(' expr ')'                   ordinary derivative
//!           | ('exp' | 'ln' | 'sqrt') '(' expr ')'
//!           | ident "'"* '(' expr (',' expr)* ')'             function (primes: derivative orders)
//!           | ident '@' '(' integer (',' integer)* ')' '(' expr (',' expr)* ')'
//!           | ident "'"*                                     symbol, or declared function
//! kernel   := 'conf' '(' expr ',' expr ')' | 'lexp' '(' expr ')' | 'lexp2' '(' expr ')'
//!           | 'haus' '(' expr ',' expr ')' | 'id'
//! number   := digits ('.' digits)?
//! ```
//!
//! Inputs beginning with an s-expression keyword, e.g. `(add ...)`, are read
//! in the s-expression format produced by [`super::render::render_sexpr`].

use std::collections::BTreeMap;

use num_traits::Zero;

use super::diff::differentiate;
use super::expr::*;
use crate::error::SymbolicError;

/// Names that denote dependent functions when written bare, e.g. `x` for `x(t)`.
#[derive(Debug, Clone, Default)]
pub struct ParseContext {
    pub functions: BTreeMap<String, Vec<String>>,
}

impl ParseContext {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_function(mut self, name: &str, vars: &[&str]) -> Self {
        self.functions
            .insert(name.to_string(), vars.iter().map(|v| v.to_string()).collect());
        self
    }

    /// Parse a declaration such as `x(t)` or `phi(x,t)`.
    pub fn declare(&mut self, decl: &str) -> Result<(), SymbolicError> {
        let decl = decl.trim();
        let open = decl.find('(').ok_or_else(|| SymbolicError::Parse {
            pos: 0,
            msg: format!("expected `name(vars)` in declaration `{decl}`"),
        })?;
        if !decl.ends_with(')') {
            return Err(SymbolicError::Parse {
                pos: decl.len(),
                msg: "declaration must end with `)`".into(),
            });
        }
        let name = decl[..open].trim().to_string();
        let vars = decl[open + 1..decl.len() - 1]
            .split(',')
            .map(|v| v.trim().to_string())
            .filter(|v| !v.is_empty())
            .collect::<Vec<_>>();
        if name.is_empty() || vars.is_empty() {
            return Err(SymbolicError::Parse {
                pos: 0,
                msg: format!("empty name or variable list in `{decl}`"),
            });
        }
        self.functions.insert(name, vars);
        Ok(())
    }
}

const SEXPR_KEYWORDS: &[&str] = &[
    "num", "sym", "fn", "add", "mul", "pow", "powsym", "exp", "ln", "deriv", "deformed",
];

/// Parse with no declared functions.
pub fn parse(s: &str) -> Result<Expr, SymbolicError> {
    parse_with(s, &ParseContext::default())
}

pub fn parse_with(s: &str, ctx: &ParseContext) -> Result<Expr, SymbolicError> {
    if looks_like_sexpr(s) {
        return parse_sexpr(s);
    }
    let tokens = lex(s)?;
    let mut p = Parser { tokens, i: 0, ctx };
    let e = p.expr()?;
    if p.i < p.tokens.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

fn looks_like_sexpr(s: &str) -> bool {
    let t = s.trim_start();
    let Some(rest) = t.strip_prefix('(') else {
        return false;
    };
    let word: String = rest.chars().take_while(|c| c.is_ascii_alphabetic()).collect();
    let after = rest[word.len()..].chars().next();
    SEXPR_KEYWORDS.contains(&word.as_str()) && matches!(after, Some(' ') | Some(')'))
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(Q),
    Ident(String),
    Sym(char),
}

fn lex(s: &str) -> Result<Vec<(Tok, usize)>, SymbolicError> {
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        if c.is_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || (c == '.' && chars.get(i + 1).is_some_and(|(_, d)| d.is_ascii_digit())) {
            let start = i;
            while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                i += 1;
            }
            let text: String = chars[start..i].iter().map(|(_, c)| *c).collect();
            out.push((Tok::Num(decimal(&text, pos)?), pos));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().map(|(_, c)| *c).collect()), pos));
        } else if "+-*/^()[],'@".contains(c) {
            out.push((Tok::Sym(c), pos));
            i += 1;
        } else {
            return Err(SymbolicError::Parse {
                pos,
                msg: format!("unexpected character `{c}`"),
            });
        }
    }
    Ok(out)
}

fn decimal(text: &str, pos: usize) -> Result<Q, SymbolicError> {
    let bad = || SymbolicError::Parse {
        pos,
        msg: format!("malformed number `{text}`"),
    };
    let (int_part, frac_part) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if frac_part.contains('.') || frac_part.len() > 18 {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let n: i128 = if digits.is_empty() { 0 } else { digits.parse().map_err(|_| bad())? };
    Ok(Q::new(n, 10i128.pow(frac_part.len() as u32)))
}

struct Parser<'a> {
    tokens: Vec<(Tok, usize)>,
    i: usize,
    ctx: &'a ParseContext,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> SymbolicError {
        let pos = self.tokens.get(self.i).map(|(_, p)| *p).unwrap_or_else(|| {
            self.tokens.last().map(|(_, p)| p + 1).unwrap_or(0)
        });
        SymbolicError::Parse {
            pos,
            msg: msg.to_string(),
        }
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.i).map(|(t, _)| t)
    }

    fn peek_at(&self, k: usize) -> Option<&Tok> {
        self.tokens.get(self.i + k).map(|(t, _)| t)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(&Tok::Sym(c)) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), SymbolicError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected `{c}`")))
        }
    }

    fn ident(&mut self) -> Result<String, SymbolicError> {
        match self.peek().cloned() {
            Some(Tok::Ident(s)) => {
                self.i += 1;
                Ok(s)
            }
            _ => Err(self.error("expected identifier")),
        }
    }

    fn integer(&mut self) -> Result<u32, SymbolicError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) if v.is_integer() && v >= Q::zero() => {
                self.i += 1;
                Ok(v.to_integer() as u32)
            }
            _ => Err(self.error("expected non-negative integer")),
        }
    }

    fn expr(&mut self) -> Result<Expr, SymbolicError> {
        let mut terms = vec![self.term()?];
        loop {
            if self.eat('+') {
                terms.push(self.term()?);
            } else if self.eat('-') {
                terms.push(neg(&self.term()?));
            } else {
                return Ok(add(terms));
            }
        }
    }

    fn term(&mut self) -> Result<Expr, SymbolicError> {
        let mut acc = self.unary()?;
        loop {
            if self.eat('*') {
                acc = mul(vec![acc, self.unary()?]);
            } else if self.peek() == Some(&Tok::Sym('/')) {
                self.i += 1;
                let rhs = self.unary()?;
                acc = div(&acc, &rhs);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, SymbolicError> {
        if self.eat('-') {
            return Ok(neg(&self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, SymbolicError> {
        let base = self.primary()?;
        if self.eat('^') {
            let ex = self.unary()?;
            return Ok(match ex.as_num() {
                Some(r) => pow(&base, *r),
                None => powsym(&base, &ex),
            });
        }
        Ok(base)
    }

    fn args(&mut self) -> Result<Vec<Expr>, SymbolicError> {
        self.expect('(')?;
        let mut out = vec![self.expr()?];
        while self.eat(',') {
            out.push(self.expr()?);
        }
        self.expect(')')?;
        Ok(out)
    }

    fn primes(&mut self) -> u32 {
        let mut n = 0;
        while self.eat('\'') {
            n += 1;
        }
        n
    }

    fn primary(&mut self) -> Result<Expr, SymbolicError> {
        match self.peek().cloned() {
            Some(Tok::Num(v)) => {
                self.i += 1;
                Ok(num(v))
            }
            Some(Tok::Sym('(')) => {
                self.i += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Some(Tok::Ident(name)) => {
                self.i += 1;
                self.after_ident(name)
            }
            _ => Err(self.error("expected expression")),
        }
    }

    fn after_ident(&mut self, name: String) -> Result<Expr, SymbolicError> {
        let next = self.peek().cloned();
        match (name.as_str(), next) {
            ("D", Some(Tok::Sym('['))) => {
                self.i += 1;
                let kernel = self.kernel()?;
                self.expect(',')?;
                let var = self.ident()?;
                self.expect(']')?;
                self.expect('(')?;
                let arg = self.expr()?;
                self.expect(')')?;
                Ok(deformed(kernel, &var, &arg))
            }
            ("d", Some(Tok::Sym('('))) => {
                self.i += 1;
                let arg = self.expr()?;
                self.expect(',')?;
                let var = self.ident()?;
                let order = if self.eat(',') { self.integer()? } else { 1 };
                self.expect(')')?;
                Ok(differentiate(&arg, &var, order))
            }
            ("d", Some(Tok::Sym('/')))
                if matches!(self.peek_at(1), Some(Tok::Ident(s)) if s.len() > 1 && s.starts_with('d'))
                    && self.peek_at(2) == Some(&Tok::Sym('(')) =>
            {
                self.i += 1;
                let dv = self.ident()?;
                let args = self.args()?;
                if args.len() != 1 {
                    return Err(self.error("d/dv takes one argument"));
                }
                Ok(differentiate(&args[0], &dv[1..], 1))
            }
            ("exp" | "ln" | "sqrt", Some(Tok::Sym('('))) => {
                let args = self.args()?;
                if args.len() != 1 {
                    return Err(self.error("expected one argument"));
                }
                Ok(match name.as_str() {
                    "exp" => exp(&args[0]),
                    "ln" => ln(&args[0]),
                    _ => sqrt(&args[0]),
                })
            }
            (_, Some(Tok::Sym('@'))) => {
                self.i += 1;
                self.expect('(')?;
                let mut orders = vec![self.integer()?];
                while self.eat(',') {
                    orders.push(self.integer()?);
                }
                self.expect(')')?;
                let args = self.args()?;
                if args.len() != orders.len() {
                    return Err(self.error("derivative orders must match argument count"));
                }
                Ok(func_d(&name, args, orders))
            }
            _ => {
                let primes = self.primes();
                if self.peek() == Some(&Tok::Sym('(')) {
                    let args = self.args()?;
                    if primes > 0 && args.len() != 1 {
                        return Err(self.error("primes apply to single-argument functions only"));
                    }
                    let mut orders = vec![0; args.len()];
                    if primes > 0 {
                        orders[0] = primes;
                    }
                    return Ok(func_d(&name, args, orders));
                }
                if let Some(vars) = self.ctx.functions.get(&name) {
                    let args = vars.iter().map(|v| sym(v)).collect::<Vec<_>>();
                    let mut orders = vec![0; args.len()];
                    if primes > 0 {
                        if args.len() != 1 {
                            return Err(self.error("primes apply to single-argument functions only"));
                        }
                        orders[0] = primes;
                    }
                    return Ok(func_d(&name, args, orders));
                }
                if primes > 0 {
                    return Err(self.error(&format!("`{name}` is not a declared function")));
                }
                Ok(sym(&name))
            }
        }
    }

    fn kernel(&mut self) -> Result<Kernel, SymbolicError> {
        let name = self.ident()?;
        match name.as_str() {
            "id" => Ok(Kernel::Identity),
            "conf" | "haus" => {
                let a = self.args()?;
                if a.len() != 2 {
                    return Err(self.error("kernel takes two arguments"));
                }
                Ok(if name == "conf" {
                    Kernel::conformable(a[0].clone(), a[1].clone())
                } else {
                    Kernel::hausdorff(a[0].clone(), a[1].clone())
                })
            }
            "lexp" | "lexp2" => {
                let a = self.args()?;
                if a.len() != 1 {
                    return Err(self.error("kernel takes one argument"));
                }
                Ok(Kernel::lambda_exp(a[0].clone(), name == "lexp2"))
            }
            other => Err(self.error(&format!("unknown kernel `{other}`"))),
        }
    }
}

// ---------------------------------------------------------------- sexpr

#[derive(Debug, Clone)]
enum STree {
    Atom(String, usize),
    List(Vec<STree>, usize),
}

impl STree {
    fn pos(&self) -> usize {
        match self {
            STree::Atom(_, p) | STree::List(_, p) => *p,
        }
    }
}

fn serr(pos: usize, msg: impl Into<String>) -> SymbolicError {
    SymbolicError::Parse {
        pos,
        msg: msg.into(),
    }
}

fn read_stree(s: &str) -> Result<STree, SymbolicError> {
    let mut stack: Vec<(Vec<STree>, usize)> = Vec::new();
    let mut result: Option<STree> = None;
    let chars: Vec<(usize, char)> = s.char_indices().collect();
    let mut i = 0;
    while i < chars.len() {
        let (pos, c) = chars[i];
        match c {
            '(' => {
                stack.push((Vec::new(), pos));
                i += 1;
            }
            ')' => {
                let (items, p) = stack.pop().ok_or_else(|| serr(pos, "unbalanced `)`"))?;
                let node = STree::List(items, p);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(node),
                    None => {
                        if result.is_some() {
                            return Err(serr(pos, "multiple top-level forms"));
                        }
                        result = Some(node);
                    }
                }
                i += 1;
            }
            c if c.is_whitespace() => i += 1,
            _ => {
                let start = i;
                while i < chars.len() && !chars[i].1.is_whitespace() && chars[i].1 != '(' && chars[i].1 != ')' {
                    i += 1;
                }
                let text: String = chars[start..i].iter().map(|(_, c)| *c).collect();
                let atom = STree::Atom(text, pos);
                match stack.last_mut() {
                    Some((parent, _)) => parent.push(atom),
                    None => return Err(serr(pos, "atom outside of a list")),
                }
            }
        }
    }
    if let Some((_, p)) = stack.last() {
        return Err(serr(*p, "unclosed `(`"));
    }
    result.ok_or_else(|| serr(0, "empty input"))
}

fn atom_text(t: &STree) -> Result<&str, SymbolicError> {
    match t {
        STree::Atom(s, _) => Ok(s),
        STree::List(_, p) => Err(serr(*p, "expected atom")),
    }
}

fn rational_text(t: &STree) -> Result<Q, SymbolicError> {
    let s = atom_text(t)?;
    let bad = || serr(t.pos(), format!("malformed rational `{s}`"));
    match s.split_once('/') {
        Some((n, d)) => {
            let d: i128 = d.parse().map_err(|_| bad())?;
            if d == 0 {
                return Err(bad());
            }
            Ok(Q::new(n.parse().map_err(|_| bad())?, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Read the s-expression serialization.
pub fn parse_sexpr(s: &str) -> Result<Expr, SymbolicError> {
    sexpr_expr(&read_stree(s)?)
}

fn sexpr_expr(t: &STree) -> Result<Expr, SymbolicError> {
    let STree::List(items, pos) = t else {
        return Err(serr(t.pos(), "expected list"));
    };
    let head = items.first().ok_or_else(|| serr(*pos, "empty list"))?;
    let head = atom_text(head)?;
    let args = &items[1..];
    let arity = |n: usize| -> Result<(), SymbolicError> {
        if args.len() == n {
            Ok(())
        } else {
            Err(serr(*pos, format!("`{head}` expects {n} arguments")))
        }
    };
    match head {
        "num" => {
            arity(1)?;
            Ok(num(rational_text(&args[0])?))
        }
        "sym" => {
            arity(1)?;
            Ok(sym(atom_text(&args[0])?))
        }
        "fn" => {
            arity(3)?;
            let name = atom_text(&args[0])?;
            let STree::List(fargs, _) = &args[1] else {
                return Err(serr(args[1].pos(), "expected argument list"));
            };
            let STree::List(ords, _) = &args[2] else {
                return Err(serr(args[2].pos(), "expected order list"));
            };
            let fargs = fargs.iter().map(sexpr_expr).collect::<Result<Vec<_>, _>>()?;
            let ords = ords
                .iter()
                .map(|o| {
                    atom_text(o)?
                        .parse::<u32>()
                        .map_err(|_| serr(o.pos(), "bad derivative order"))
                })
                .collect::<Result<Vec<_>, _>>()?;
            if fargs.len() != ords.len() {
                return Err(serr(*pos, "argument and order counts differ"));
            }
            Ok(func_d(name, fargs, ords))
        }
        "add" => Ok(add(args.iter().map(sexpr_expr).collect::<Result<_, _>>()?)),
        "mul" => Ok(mul(args.iter().map(sexpr_expr).collect::<Result<_, _>>()?)),
        "pow" => {
            arity(2)?;
            Ok(pow(&sexpr_expr(&args[0])?, rational_text(&args[1])?))
        }
        "powsym" => {
            arity(2)?;
            Ok(powsym(&sexpr_expr(&args[0])?, &sexpr_expr(&args[1])?))
        }
        "exp" => {
            arity(1)?;
            Ok(exp(&sexpr_expr(&args[0])?))
        }
        "ln" => {
            arity(1)?;
            Ok(ln(&sexpr_expr(&args[0])?))
        }
        "deriv" => {
            arity(3)?;
            let var = atom_text(&args[0])?;
            let order = atom_text(&args[1])?
                .parse::<u32>()
                .map_err(|_| serr(args[1].pos(), "bad derivative order"))?;
            Ok(derivative_node(&sexpr_expr(&args[2])?, var, order))
        }
        "deformed" => {
            arity(3)?;
            let kernel = sexpr_kernel(&args[0])?;
            let var = atom_text(&args[1])?;
            Ok(deformed(kernel, var, &sexpr_expr(&args[2])?))
        }
        other => Err(serr(*pos, format!("unknown form `{other}`"))),
    }
}

fn sexpr_kernel(t: &STree) -> Result<Kernel, SymbolicError> {
    let STree::List(items, pos) = t else {
        return Err(serr(t.pos(), "expected kernel list"));
    };
    let head = atom_text(items.first().ok_or_else(|| serr(*pos, "empty kernel"))?)?;
    let ps = items[1..].iter().map(sexpr_expr).collect::<Result<Vec<_>, _>>()?;
    match (head, ps.len()) {
        ("id", 0) => Ok(Kernel::Identity),
        ("conf", 2) => Ok(Kernel::conformable(ps[0].clone(), ps[1].clone())),
        ("haus", 2) => Ok(Kernel::hausdorff(ps[0].clone(), ps[1].clone())),
        ("lexp", 1) => Ok(Kernel::lambda_exp(ps[0].clone(), false)),
        ("lexp2", 1) => Ok(Kernel::lambda_exp(ps[0].clone(), true)),
        _ => Err(serr(*pos, format!("bad kernel `{head}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbolic::render::render_sexpr;

    #[test]
    fn power_plus_constant() {
        let e = parse("x^2 + 1").unwrap();
        assert_eq!(e, add(vec![pow(&sym("x"), q(2, 1)), one()]));
    }

    #[test]
    fn deformed_node() {
        let e = parse("D[conf(0.5,a),t](x(t))").unwrap();
        let want = deformed(Kernel::conformable(rat(1, 2), sym("a")), "t", &func("x", &["t"]));
        assert_eq!(e, want);
    }

    #[test]
    fn ordinary_derivative_forms() {
        let ctx = ParseContext::new().with_function("x", &["t"]);
        let a = parse_with("d(x, t, 2)", &ctx).unwrap();
        let b = parse_with("x''", &ctx).unwrap();
        let c = parse("d/dt(x'(t))").unwrap();
        assert_eq!(a, b);
        assert_eq!(b, c);
    }

    #[test]
    fn error_has_position() {
        let err = parse("x + * y").unwrap_err();
        assert_eq!(
            err,
            SymbolicError::Parse {
                pos: 4,
                msg: "expected expression".into()
            }
        );
    }

    #[test]
    fn sexpr_roundtrip_simple() {
        let e = parse("exp(-lambda*t)*q'(t)^2/2 + U'(x(t))").unwrap();
        assert_eq!(parse(&render_sexpr(&e)).unwrap(), e);
    }

    #[test]
    fn decimals_are_exact() {
        assert_eq!(parse("0.25").unwrap(), rat(1, 4));
    }

    #[test]
    fn declarations() {
        let mut ctx = ParseContext::new();
        ctx.declare("phi(x, t)").unwrap();
        assert_eq!(parse_with("phi", &ctx).unwrap(), func("phi", &["x", "t"]));
        assert!(ctx.declare("phi").is_err());
    }
}
