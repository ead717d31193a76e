//! Simulation laboratory for the fractional porous medium equation
//! `u_t = div(u grad p)`, `p = (-Delta)^{-s} u`, on a periodic box.
//!
//! Modules, bottom-up:
//! - [`grid`]: box geometry, fields, quadrature and norms.
//! - [`fracops`]: spectral fractional powers, Riesz kernels, bilinear forms.
//! - [`solver`]: conservative upwind evolution with adaptive steps.
//! - [`diagnostics`]: measured functionals and exponent fits.
//! - [`harness`]: configuration, persistence, sweeps and the property check.

pub mod diagnostics;
pub mod error;
pub mod fracops;
pub mod grid;
pub mod harness;
pub mod solver;

pub use error::{FpmeError, Result};
pub use grid::{integrate, lp_norm, make_grid, Field, FracOrder, GridSpec};
