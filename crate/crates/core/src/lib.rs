//! Numerical laboratory for the viscous Hamilton-Jacobi equation
//!
//! ```text
//! -∂t u - σ Δu + h(x, t) |Du|^γ = f,    γ > 2,
//! ```
//!
//! its dual Fokker-Planck problem, and the Hölder-seminorm machinery used to
//! study local regularity of its solutions.
//!
//! The crate is organised bottom-up:
//!
//! - [`grid`]: space-time lattices, fields, finite differences, quadrature
//! - [`seminorm`]: classical, weighted and nonlinear Hölder seminorms
//! - [`hj`]: backward HJ solver, manufactured solutions, Legendre checks
//! - [`fp`]: absorbing Fokker-Planck solver and its functionals
//! - [`dual`]: duality identities and oscillation budgets
//! - [`scalelab`]: blow-up rescalings, Liouville probe, regularity sweeps
//! - [`cli`]: configuration, dispatch and CSV/manifest output
//!
//! See the `examples/` directory for one runnable program per capability.

// `!(x > 0.0)` is how parameter checks reject NaN along with bad values
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod dual;
pub mod error;
pub mod exponents;
pub mod fp;
pub mod grid;
pub mod hj;
pub mod io;
pub mod linalg;
pub mod scalelab;
pub mod seminorm;

pub use error::{LabError, Result};
pub use exponents::Exponents;
