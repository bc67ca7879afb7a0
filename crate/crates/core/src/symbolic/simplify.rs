//! Canonical normal form.

use super::expr::{rebuild, Expr};

/// Rebuild `e` bottom-up through the canonicalizing constructors.
///
/// Trees produced by the constructors are already canonical, so this is
/// the identity on them; it matters for trees whose leaves were replaced
/// (substitution) and is idempotent in all cases.
pub fn simplify(e: &Expr) -> Expr {
    rebuild(e, simplify)
}
