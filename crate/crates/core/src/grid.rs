//! Periodic-box geometry, field storage and the reductions shared by every
//! other module.
//!
//! The box is `[-R, R)^dim` sampled at `x_j = -R + j*dx`, so the origin is a
//! grid point (index `n/2` on each axis) and the point set is symmetric
//! under `x -> -x` modulo the period.

use crate::error::{FpmeError, Result};

/// Neumaier-compensated sum; fixed left-to-right order keeps reductions
/// deterministic.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(iter: I) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for x in iter {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    dim: usize,
    n: usize,
    half_length: f64,
    dx: f64,
}

/// Validated constructor for a [`GridSpec`].
pub fn make_grid(dim: usize, n: usize, half_length: f64) -> Result<GridSpec> {
    GridSpec::new(dim, n, half_length)
}

impl GridSpec {
    pub fn new(dim: usize, n: usize, half_length: f64) -> Result<Self> {
        if !(1..=2).contains(&dim) {
            return Err(FpmeError::InvalidDim(dim));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(FpmeError::NotPowerOfTwo(n));
        }
        if !(half_length > 0.0 && half_length.is_finite()) {
            return Err(FpmeError::NonpositiveLength(half_length));
        }
        Ok(GridSpec {
            dim,
            n,
            half_length,
            dx: 2.0 * half_length / n as f64,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Points per axis.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    /// Total number of grid points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Volume element `dx^dim`.
    pub fn cell_volume(&self) -> f64 {
        self.dx.powi(self.dim as i32)
    }

    /// Volume of the box, `(2R)^dim`.
    pub fn box_volume(&self) -> f64 {
        (2.0 * self.half_length).powi(self.dim as i32)
    }

    /// Coordinate of index `i` along any axis.
    pub fn coord(&self, i: usize) -> f64 {
        -self.half_length + i as f64 * self.dx
    }

    /// Index of the origin along any axis.
    pub fn origin_index(&self) -> usize {
        self.n / 2
    }

    /// Per-axis indices of a flat (row-major) index. Unused axes are 0.
    pub fn unflatten(&self, flat: usize) -> [usize; 2] {
        match self.dim {
            1 => [flat, 0],
            _ => [flat / self.n, flat % self.n],
        }
    }

    pub fn flatten(&self, idx: [usize; 2]) -> usize {
        match self.dim {
            1 => idx[0],
            _ => idx[0] * self.n + idx[1],
        }
    }

    /// Coordinates of a flat index. Unused axes are 0.
    pub fn point(&self, flat: usize) -> [f64; 2] {
        let idx = self.unflatten(flat);
        let mut p = [0.0; 2];
        for (axis, slot) in p.iter_mut().enumerate().take(self.dim) {
            *slot = self.coord(idx[axis]);
        }
        p
    }

    /// Signed wavenumber `pi*m/R` for spectral index `i` (FFT ordering).
    pub fn wavenumber(&self, i: usize) -> f64 {
        let m = if i < self.n / 2 {
            i as i64
        } else {
            i as i64 - self.n as i64
        };
        std::f64::consts::PI * m as f64 / self.half_length
    }

    /// Signed offset (in cells) with minimum-image convention: `-n/2..n/2`.
    pub fn min_image_offset(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let o = i as i64 % n;
        if o >= n / 2 {
            o - n
        } else {
            o
        }
    }
}

/// Scalar samples on a grid, row-major over axes. All entries are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    grid: GridSpec,
    values: Vec<f64>,
}

impl Field {
    pub fn new(grid: GridSpec, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(FpmeError::LengthMismatch {
                len: values.len(),
                expected: grid.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(FpmeError::NonFinite(i));
        }
        Ok(Field { grid, values })
    }

    /// Callers guarantee length and finiteness.
    pub(crate) fn from_raw(grid: GridSpec, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Field { grid, values }
    }

    pub fn zeros(grid: GridSpec) -> Self {
        Field::constant(grid, 0.0)
    }

    pub fn constant(grid: GridSpec, value: f64) -> Self {
        assert!(value.is_finite());
        Field {
            grid,
            values: vec![value; grid.len()],
        }
    }

    /// Samples `f` at every grid point. `f` receives the point's coordinates
    /// (a slice of length `dim`).
    pub fn from_fn<F: FnMut(&[f64]) -> f64>(grid: GridSpec, mut f: F) -> Result<Self> {
        let values = (0..grid.len())
            .map(|i| f(&grid.point(i)[..grid.dim()]))
            .collect();
        Field::new(grid, values)
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub(crate) fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> Result<Field> {
        Field::new(self.grid, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn zip_with<F: Fn(f64, f64) -> f64>(&self, other: &Field, f: F) -> Result<Field> {
        self.check_same_grid(other)?;
        Field::new(
            self.grid,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        )
    }

    pub fn check_same_grid(&self, other: &Field) -> Result<()> {
        if self.grid != other.grid {
            return Err(FpmeError::GridMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a - b)
    }

    pub fn mul(&self, other: &Field) -> Result<Field> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn scale(&self, a: f64) -> Field {
        Field::from_raw(self.grid, self.values.iter().map(|v| a * v).collect())
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn mean(&self) -> f64 {
        compensated_sum(self.values.iter().copied()) / self.values.len() as f64
    }

    /// Value at the origin grid point.
    pub fn at_origin(&self) -> f64 {
        let o = self.grid.origin_index();
        self.values[self.grid.flatten([o, o])]
    }
}

/// Midpoint-rule integral over the periodic box.
pub fn integrate(f: &Field) -> f64 {
    compensated_sum(f.values.iter().copied()) * f.grid.cell_volume()
}

/// `L^p` norm; pass `f64::INFINITY` for the sup norm.
pub fn lp_norm(f: &Field, p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(FpmeError::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(f.max_abs());
    }
    if p == 1.0 {
        return Ok(compensated_sum(f.values.iter().map(|v| v.abs())) * f.grid.cell_volume());
    }
    // Scale by the max so large exponents do not overflow.
    let m = f.max_abs();
    if m == 0.0 {
        return Ok(0.0);
    }
    let s = compensated_sum(f.values.iter().map(|v| (v.abs() / m).powf(p)));
    Ok(m * (s * f.grid.cell_volume()).powf(1.0 / p))
}

/// The exponent `s` together with the quantities derived from it for a
/// given space dimension.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    pub s: f64,
    /// `1 - s`, the order of the bilinear form.
    pub r: f64,
    /// Smoothing exponent `N/(N+2-2s)`.
    pub alpha: f64,
    /// Mass exponent `(2-2s)/(N+2-2s)`.
    pub gamma: f64,
    pub dim: usize,
}

impl FracOrder {
    pub fn new(s: f64, dim: usize) -> Result<Self> {
        if !(s > 0.0 && s < 1.0) {
            return Err(FpmeError::OutOfRangeOrder(s));
        }
        if !(1..=2).contains(&dim) {
            return Err(FpmeError::InvalidDim(dim));
        }
        let n = dim as f64;
        let denom = n + 2.0 - 2.0 * s;
        Ok(FracOrder {
            s,
            r: 1.0 - s,
            alpha: n / denom,
            gamma: (2.0 - 2.0 * s) / denom,
            dim,
        })
    }

    /// Decay exponent of the `L^p` norm: `alpha (p-1)/p`.
    pub fn alpha_p(&self, p: f64) -> f64 {
        if p.is_infinite() {
            self.alpha
        } else {
            self.alpha * (p - 1.0) / p
        }
    }

    /// Mass exponent of the `L^p` norm: `(1 + gamma (p-1))/p`.
    pub fn gamma_p(&self, p: f64) -> f64 {
        if p.is_infinite() {
            self.gamma
        } else {
            (1.0 + self.gamma * (p - 1.0)) / p
        }
    }

    /// One-dimensional runs with `s >= 1/2` are not covered by the
    /// boundedness theory.
    pub fn outside_theory(&self) -> bool {
        self.dim == 1 && self.s >= 0.5
    }

    /// Hölder-regularity results exclude `s = 1/2`.
    pub fn excluded_from_regularity_fit(&self) -> bool {
        (self.s - 0.5).abs() < 1e-12
    }
}
