//! Real-space Riesz kernels. Operators are applied spectrally everywhere
//! else; these tables back the direct-convolution oracles.

use std::f64::consts::PI;

use statrs::function::gamma::gamma;

use crate::error::{FpmeError, Result};
use crate::grid::{compensated_sum, Field, GridSpec};

#[cfg(feature = "fault-injection")]
const RIESZ_FAULT: f64 = 1.1;
#[cfg(not(feature = "fault-injection"))]
const RIESZ_FAULT: f64 = 1.0;

/// `c(N,s) = Gamma((N-2s)/2) / (4^s pi^{N/2} Gamma(s))`, so that
/// `c |x|^{-N+2s}` has Fourier symbol `|k|^{-2s}`. Requires `N > 2s`.
pub fn riesz_constant(dim: usize, s: f64) -> Result<f64> {
    let n = dim as f64;
    if !(s > 0.0 && 2.0 * s < n) {
        return Err(FpmeError::OutOfRangeOrder(s));
    }
    Ok(RIESZ_FAULT * gamma((n - 2.0 * s) / 2.0) / (4f64.powf(s) * PI.powf(n / 2.0) * gamma(s)))
}

/// Constant of the singular-integral form of `(-Delta)^r`:
/// `4^r Gamma(N/2 + r) / (pi^{N/2} |Gamma(-r)|)`.
pub fn fractional_laplacian_constant(dim: usize, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(FpmeError::InvalidOrder(r));
    }
    let n = dim as f64;
    Ok(4f64.powf(r) * gamma(n / 2.0 + r) / (PI.powf(n / 2.0) * gamma(-r).abs()))
}

/// Minimum-image displacement (per axis) from the origin to grid offset `flat`.
pub(crate) fn offset_vector(grid: &GridSpec, flat: usize) -> [f64; 2] {
    let idx = grid.unflatten(flat);
    let mut d = [0.0; 2];
    for (a, slot) in d.iter_mut().enumerate().take(grid.dim()) {
        *slot = grid.min_image_offset(idx[a]) as f64 * grid.dx();
    }
    d
}

/// The Riesz kernel `L_s(x) = c(N,s) |x|^{-N+2s}` tabulated on grid offsets.
///
/// Entry `flat` holds `L_s` at the minimum-image displacement of offset
/// `flat`; entry 0 is the origin cell.
#[derive(Debug, Clone)]
pub struct KernelSample {
    pub s: f64,
    pub dim: usize,
    grid: GridSpec,
    constant: f64,
    values: Vec<f64>,
}

impl KernelSample {
    pub fn new(grid: GridSpec, s: f64) -> Result<Self> {
        let dim = grid.dim();
        let constant = riesz_constant(dim, s)?;
        let beta = dim as f64 - 2.0 * s;
        let mut values: Vec<f64> = (0..grid.len())
            .map(|flat| {
                let d = offset_vector(&grid, flat);
                let rho = (d[0] * d[0] + d[1] * d[1]).sqrt();
                if rho == 0.0 {
                    0.0
                } else {
                    constant * rho.powf(-beta)
                }
            })
            .collect();
        values[0] = constant * origin_cell_average(dim, beta, grid.dx());
        Ok(KernelSample {
            s,
            dim,
            grid,
            constant,
            values,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Kernel value at grid offset `flat`.
    pub fn at_offset(&self, flat: usize) -> f64 {
        self.values[flat]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// `grad L_s` at the minimum-image displacement of offset `flat`
    /// (origin excluded, returns 0 there).
    pub fn gradient_at_offset(&self, flat: usize) -> [f64; 2] {
        let d = offset_vector(&self.grid, flat);
        let rho2 = d[0] * d[0] + d[1] * d[1];
        if rho2 == 0.0 {
            return [0.0; 2];
        }
        let beta = self.dim as f64 - 2.0 * self.s;
        let f = -beta * self.constant * rho2.powf(-beta / 2.0 - 1.0);
        [f * d[0], f * d[1]]
    }

    /// Direct periodic convolution `sum_y L(x - y) u(y) dx^N`, O(M^2).
    pub fn convolve(&self, u: &Field) -> Result<Field> {
        if *u.grid() != self.grid {
            return Err(FpmeError::GridMismatch);
        }
        let g = self.grid;
        let n = g.n();
        let vals = u.values();
        let out: Vec<f64> = (0..g.len())
            .map(|i| {
                let ii = g.unflatten(i);
                compensated_sum((0..g.len()).map(|j| {
                    let jj = g.unflatten(j);
                    let off = g.flatten([(ii[0] + n - jj[0]) % n, (ii[1] + n - jj[1]) % n]);
                    self.values[off] * vals[j]
                })) * g.cell_volume()
            })
            .collect();
        Field::new(g, out)
    }
}

/// Average of `|x|^{-beta}` over the cube `[-h/2, h/2]^N`.
///
/// Splits the cube into `5^N` subcells sampled at their midpoints; the
/// central subcell is a scaled copy of the whole cube, whose average is
/// `5^beta` times larger, which closes the recursion.
fn origin_cell_average(dim: usize, beta: f64, h: f64) -> f64 {
    let sub = h / 5.0;
    let mids: Vec<f64> = (-2..=2).map(|i| i as f64 * sub).collect();
    let mut total = 0.0;
    let cells = 5usize.pow(dim as u32);
    for c in 0..cells {
        let (i, j) = (c % 5, c / 5);
        let y = if dim == 2 { mids[j] } else { 0.0 };
        let x = mids[i];
        let rho = (x * x + y * y).sqrt();
        if rho > 0.0 {
            total += rho.powf(-beta);
        }
    }
    let self_similar = 5f64.powf(beta);
    total / (cells as f64 - self_similar)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn riesz_constant_known_values() {
        // 1D, s = 1/4: Gamma(1/4) / (sqrt 2 sqrt pi Gamma(1/4)) = 1/sqrt(2 pi).
        let c = riesz_constant(1, 0.25).unwrap();
        if cfg!(not(feature = "fault-injection")) {
            assert!((c - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
        }
        assert!(riesz_constant(1, 0.5).is_err());
        assert!(riesz_constant(1, 0.75).is_err());
        assert!(riesz_constant(2, 0.75).is_ok());
    }

    #[test]
    fn fractional_laplacian_constant_half() {
        // C(1, 1/2) = 1/pi.
        let c = fractional_laplacian_constant(1, 0.5).unwrap();
        assert!((c - 1.0 / PI).abs() < 1e-12);
    }

    #[test]
    fn origin_average_matches_closed_form_in_1d() {
        // int_{-1/2}^{1/2} |x|^{-1/2} dx = 2 sqrt(2).
        let a = origin_cell_average(1, 0.5, 1.0);
        assert!((a - 2.0 * 2f64.sqrt()).abs() / a < 0.03, "{a}");
    }

    #[test]
    fn kernel_is_positive_symmetric_decreasing() {
        for dim in [1, 2] {
            let g = make_grid(dim, 16, 2.0).unwrap();
            let k = KernelSample::new(g, 0.3).unwrap();
            assert!(k.values().iter().all(|&v| v > 0.0));
            let n = g.n();
            for i in 1..n / 2 {
                let a = k.at_offset(g.flatten([i, 0]));
                let b = k.at_offset(g.flatten([n - i, 0]));
                assert_eq!(a, b);
                assert!(k.at_offset(g.flatten([i + 1, 0])) < a);
            }
            assert!(k.at_offset(0) > k.at_offset(1));
        }
    }
}
