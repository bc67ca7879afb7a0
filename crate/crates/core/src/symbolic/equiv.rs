//! Structural-then-randomized equivalence testing.

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::eval::{evaluate, Bindings};
use super::expr::*;
use crate::error::SymbolicError;

/// Which route decided an equivalence query.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EquivalencePath {
    Structural,
    Numeric { points: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Equivalence {
    pub equal: bool,
    pub path: EquivalencePath,
}

/// Sample range for atoms; positive so that fractional powers of symbols
/// stay real.
const SAMPLE_LO: f64 = 0.2;
const SAMPLE_HI: f64 = 2.5;

/// Maximal non-arithmetic sub-trees: symbols, function applications
/// (derivatives included), unevaluated derivative and deformed nodes.
/// Each is sampled as an independent variable.
pub fn atoms(e: &Expr) -> BTreeSet<Expr> {
    let mut out = BTreeSet::new();
    collect_atoms(e, &mut out);
    out
}

fn collect_atoms(e: &Expr, out: &mut BTreeSet<Expr>) {
    match e.node() {
        Node::Num(_) => {}
        Node::Sym(_) | Node::Func { .. } | Node::Derivative { .. } | Node::Deformed { .. } => {
            out.insert(e.clone());
        }
        Node::Add(xs) | Node::Mul(xs) => xs.iter().for_each(|x| collect_atoms(x, out)),
        Node::Pow(b, _) => collect_atoms(b, out),
        Node::PowSym(b, x) => {
            collect_atoms(b, out);
            collect_atoms(x, out);
        }
        Node::Exp(u) | Node::Ln(u) => collect_atoms(u, out),
    }
}

/// Decide whether `a` and `b` are the same expression.
///
/// First `simplify(a - b) == 0`; failing that, `trials` seeded random
/// points at which `|a - b| <= tol (1 + |a|)` must hold. Singular sample
/// points are skipped.
pub fn equivalence(
    a: &Expr,
    b: &Expr,
    trials: usize,
    seed: u64,
    tol: f64,
) -> Result<Equivalence, SymbolicError> {
    let diff = sub(a, b);
    if diff.is_zero() {
        return Ok(Equivalence {
            equal: true,
            path: EquivalencePath::Structural,
        });
    }
    let mut all = atoms(a);
    all.extend(atoms(b));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut good = 0usize;
    let mut attempts = 0usize;
    let max_attempts = trials.max(1) * 20;
    while good < trials && attempts < max_attempts {
        attempts += 1;
        let mut bind = Bindings::new();
        for atom in &all {
            bind.set_atom(atom, rng.random_range(SAMPLE_LO..SAMPLE_HI));
        }
        let (va, vb) = match (evaluate(a, &bind), evaluate(b, &bind)) {
            (Ok(va), Ok(vb)) => (va, vb),
            _ => continue,
        };
        good += 1;
        if (va - vb).abs() > tol * (1.0 + va.abs()) {
            return Ok(Equivalence {
                equal: false,
                path: EquivalencePath::Numeric { points: good },
            });
        }
    }
    if good == 0 {
        return Err(SymbolicError::AllPointsSingular(attempts));
    }
    Ok(Equivalence {
        equal: true,
        path: EquivalencePath::Numeric { points: good },
    })
}

/// Boolean form of [`equivalence`].
pub fn equivalent(a: &Expr, b: &Expr, trials: usize, seed: u64, tol: f64) -> Result<bool, SymbolicError> {
    Ok(equivalence(a, b, trials, seed, tol)?.equal)
}
