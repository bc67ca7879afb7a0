//! Deformed-derivative variational calculus: symbolic derivation of
//! Euler-Lagrange equations with kernel-deformed derivatives, a catalog of
//! worked systems, and numeric integrators for the resulting equations.

// guards like `!(dt > 0.0)` are meant to reject NaN too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod kernels;
pub mod symbolic;
pub mod catalog;
pub mod numeric;
pub mod variational;

pub use error::{CatalogError, EngineError, NumericError, SymbolicError};
pub use symbolic::{Expr, Kernel};
