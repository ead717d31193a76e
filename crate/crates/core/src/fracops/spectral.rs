use std::cell::RefCell;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{FpmeError, Result};
use crate::grid::{compensated_sum, Field, GridSpec};

/// Cached FFT plans, wavenumber tables and transform workspace for one grid.
///
/// The workspace is interior-mutable, so a plan is `Send` but not `Sync`:
/// each worker owns its own plan.
pub struct SpectralPlan {
    grid: GridSpec,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    axis_k: Vec<f64>,
    kmag: Vec<f64>,
    work: RefCell<Vec<Complex64>>,
    column: RefCell<Vec<Complex64>>,
    scratch: RefCell<Vec<Complex64>>,
}

impl fmt::Debug for SpectralPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("SpectralPlan")
            .field("grid", &self.grid)
            .finish_non_exhaustive()
    }
}

impl Clone for SpectralPlan {
    fn clone(&self) -> Self {
        SpectralPlan::new(self.grid)
    }
}

impl SpectralPlan {
    pub fn new(grid: GridSpec) -> Self {
        let n = grid.n();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(n);
        let inv = planner.plan_fft_inverse(n);
        let axis_k: Vec<f64> = (0..n).map(|i| grid.wavenumber(i)).collect();
        let kmag = (0..grid.len())
            .map(|flat| {
                let idx = grid.unflatten(flat);
                (0..grid.dim())
                    .map(|a| axis_k[idx[a]].powi(2))
                    .sum::<f64>()
                    .sqrt()
            })
            .collect();
        let scratch_len = fwd
            .get_inplace_scratch_len()
            .max(inv.get_inplace_scratch_len());
        SpectralPlan {
            grid,
            fwd,
            inv,
            axis_k,
            kmag,
            work: RefCell::new(vec![Complex64::default(); grid.len()]),
            column: RefCell::new(vec![Complex64::default(); n]),
            scratch: RefCell::new(vec![Complex64::default(); scratch_len]),
        }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    /// `|k|` per spectral index (flat, row-major, FFT ordering).
    pub fn kmag(&self) -> &[f64] {
        &self.kmag
    }

    /// Signed wavenumbers along one axis, FFT ordering.
    pub fn axis_wavenumbers(&self) -> &[f64] {
        &self.axis_k
    }

    pub(crate) fn check(&self, f: &Field) -> Result<()> {
        if *f.grid() != self.grid {
            return Err(FpmeError::GridMismatch);
        }
        Ok(())
    }

    fn transform(&self, buf: &mut [Complex64], inverse: bool) {
        let n = self.grid.n();
        let fft = if inverse { &self.inv } else { &self.fwd };
        let mut scratch = self.scratch.borrow_mut();
        for row in buf.chunks_exact_mut(n) {
            fft.process_with_scratch(row, &mut scratch);
        }
        if self.grid.dim() == 2 {
            let mut col = self.column.borrow_mut();
            for j in 0..n {
                for i in 0..n {
                    col[i] = buf[i * n + j];
                }
                fft.process_with_scratch(&mut col, &mut scratch);
                for i in 0..n {
                    buf[i * n + j] = col[i];
                }
            }
        }
    }

    /// Unnormalized forward DFT coefficients of `f`.
    pub fn spectrum(&self, f: &Field) -> Result<Vec<Complex64>> {
        self.check(f)?;
        let mut buf: Vec<Complex64> = f.values().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, false);
        Ok(buf)
    }

    /// Multiplies the spectrum of `f` by `symbol(flat_spectral_index)` and
    /// returns the real part of the inverse transform.
    pub fn apply<S: Fn(usize) -> Complex64>(&self, f: &Field, symbol: S) -> Result<Field> {
        self.check(f)?;
        let mut work = self.work.borrow_mut();
        for (w, &v) in work.iter_mut().zip(f.values()) {
            *w = Complex64::new(v, 0.0);
        }
        self.transform(&mut work, false);
        for (i, w) in work.iter_mut().enumerate() {
            *w *= symbol(i);
        }
        self.transform(&mut work, true);
        let norm = 1.0 / self.grid.len() as f64;
        Ok(Field::from_raw(
            self.grid,
            work.iter().map(|c| c.re * norm).collect(),
        ))
    }

    /// Real multiplier `|k|^(2 s_pow)`; the zero mode maps to 0 unless
    /// `s_pow == 0`.
    fn power_symbol(&self, s_pow: f64) -> impl Fn(usize) -> Complex64 + '_ {
        move |i| {
            let k = self.kmag[i];
            let m = if s_pow == 0.0 {
                1.0
            } else if k == 0.0 {
                0.0
            } else {
                k.powf(2.0 * s_pow)
            };
            Complex64::new(m, 0.0)
        }
    }

    /// Spectral partial derivative along `axis`. The Nyquist mode is dropped
    /// so the result stays real.
    pub fn derivative(&self, f: &Field, axis: usize) -> Result<Field> {
        self.derivative_of_power(f, axis, 0.0)
    }

    /// `d/dx_axis (-Delta)^{s_pow} f` in a single transform pair.
    pub fn derivative_of_power(&self, f: &Field, axis: usize, s_pow: f64) -> Result<Field> {
        if axis >= self.grid.dim() {
            return Err(FpmeError::param("axis", format!("{axis} >= dim")));
        }
        let n = self.grid.n();
        let power = self.power_symbol(s_pow);
        self.apply(f, |i| {
            let idx = self.grid.unflatten(i)[axis];
            if idx == n / 2 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, self.axis_k[idx]) * power(i)
            }
        })
    }

    /// Spectral quadratic pairing `sum m(k) Re(V conj W) dx^N / M`, which is
    /// `integrate(v * m(D) w)` by Parseval.
    pub fn pairing<S: Fn(usize) -> f64>(&self, v: &Field, w: &Field, weight: S) -> Result<f64> {
        v.check_same_grid(w)?;
        let vs = self.spectrum(v)?;
        let ws = if std::ptr::eq(v, w) {
            vs.clone()
        } else {
            self.spectrum(w)?
        };
        let sum = compensated_sum(
            vs.iter()
                .zip(&ws)
                .enumerate()
                .map(|(i, (a, b))| weight(i) * (a * b.conj()).re),
        );
        Ok(sum * self.grid.cell_volume() / self.grid.len() as f64)
    }
}

/// Applies `(-Delta)^{s_pow}` as the Fourier multiplier `|k|^{2 s_pow}`.
///
/// For negative powers the zero mode of the result is pinned to 0.
pub fn frac_laplacian(f: &Field, s_pow: f64, plan: &SpectralPlan) -> Result<Field> {
    if !(-1.0..=1.0).contains(&s_pow) {
        return Err(FpmeError::OutOfRangeOrder(s_pow));
    }
    plan.apply(f, plan.power_symbol(s_pow))
}

/// Pressure `p = (-Delta)^{-s} u` with zero mean.
pub fn pressure(u: &Field, s: f64, plan: &SpectralPlan) -> Result<Field> {
    frac_laplacian(u, -s, plan)
}

/// `int |(-Delta)^{-s/2} u|^2`, by Parseval; the zero mode is excluded.
pub fn half_energy(u: &Field, s: f64, plan: &SpectralPlan) -> Result<f64> {
    let kmag = plan.kmag();
    plan.pairing(u, u, |i| {
        if kmag[i] == 0.0 {
            0.0
        } else {
            kmag[i].powf(-2.0 * s)
        }
    })
}

/// The `H^r` pairing `sum |k|^{2r} V conj W`, the Fourier form of the
/// gradient representation of the bilinear form.
pub fn bilinear_gradient(v: &Field, w: &Field, r: f64, plan: &SpectralPlan) -> Result<f64> {
    let kmag = plan.kmag();
    plan.pairing(v, w, |i| {
        if kmag[i] == 0.0 {
            0.0
        } else {
            kmag[i].powf(2.0 * r)
        }
    })
}

/// Linear semigroup `exp(-t (-Delta)^sigma) f`; `sigma = 1` is the heat flow.
pub fn linear_semigroup(f: &Field, t: f64, sigma: f64, plan: &SpectralPlan) -> Result<Field> {
    if !(t >= 0.0) {
        return Err(FpmeError::param("t", "must be nonnegative"));
    }
    if !(sigma > 0.0 && sigma <= 1.0) {
        return Err(FpmeError::OutOfRangeOrder(sigma));
    }
    let kmag = plan.kmag();
    plan.apply(f, |i| {
        Complex64::new((-t * kmag[i].powf(2.0 * sigma)).exp(), 0.0)
    })
}
