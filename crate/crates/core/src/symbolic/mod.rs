//! Exact symbolic expressions: construction, differentiation, substitution,
//! evaluation, equivalence testing, parsing and rendering.

pub mod diff;
pub mod equiv;
pub mod eval;
pub mod expr;
pub mod parse;
pub mod render;
pub mod simplify;
pub mod subst;

pub use diff::differentiate;
pub use equiv::{atoms, equivalence, equivalent, Equivalence, EquivalencePath};
pub use eval::{evaluate, Bindings, FuncValue};
pub use expr::*;
pub use parse::{parse, parse_sexpr, parse_with, ParseContext};
pub use render::{render, render_latex, render_plain, render_sexpr, Format};
pub use simplify::simplify;
pub use subst::{substitute, substitute_all};
