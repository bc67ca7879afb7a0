//! Numerical integration of the derived equations with invariant checks.

pub mod abraham;
pub mod caldirola;
pub mod export;
pub mod fokker_planck;
pub mod grid;
pub mod kdv;
pub mod langevin;
pub mod llg;
pub mod ode;
pub mod oscillator;
pub mod rcd;
pub mod residual;

pub use grid::{Boundary, FieldGrid};
pub use ode::{integrate_ode, Method, Metadata, Trajectory};
