//! Fractional Laplacian powers, Riesz kernels, the difference and gradient
//! forms of the `H^r` bilinear form, and level truncations.

mod bilinear;
mod kernel;
mod spectral;

pub use bilinear::{
    bilinear_difference, difference_form_constant, embedding_sides, truncate_above,
    truncate_below, EmbeddingSides, DOUBLE_SUM_MAX_POINTS,
};
pub use kernel::{fractional_laplacian_constant, riesz_constant, KernelSample};
pub use spectral::{
    bilinear_gradient, frac_laplacian, half_energy, linear_semigroup, pressure, SpectralPlan,
};
