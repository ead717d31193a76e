use crate::error::{FpmeError, Result};
use crate::fracops::kernel::{fractional_laplacian_constant, offset_vector};
use crate::fracops::spectral::{bilinear_gradient, SpectralPlan};
use crate::grid::{compensated_sum, integrate, lp_norm, Field};

/// Largest grid (total points) accepted by the O(M^2) double sum.
pub const DOUBLE_SUM_MAX_POINTS: usize = 4096;

/// Normalization of the difference form. With `C(N,r)/2` the form agrees
/// with the spectral pairing `sum |k|^{2r} V conj W`.
pub fn difference_form_constant(dim: usize, r: f64) -> Result<f64> {
    Ok(0.5 * fractional_laplacian_constant(dim, r)?)
}

/// `C_N sum_x sum_{y != x} (v(x)-v(y)) |x-y|^{-(N+2r)} (w(x)-w(y)) dx^{2N}`
/// over ordered pairs, with minimum-image periodic distance.
pub fn bilinear_difference(v: &Field, w: &Field, r: f64) -> Result<f64> {
    v.check_same_grid(w)?;
    if !(r > 0.0 && r < 1.0) {
        return Err(FpmeError::InvalidOrder(r));
    }
    let g = *v.grid();
    let m = g.len();
    if m > DOUBLE_SUM_MAX_POINTS {
        return Err(FpmeError::GridTooLarge(m));
    }
    let n = g.n();
    let expo = -(g.dim() as f64 + 2.0 * r) / 2.0;
    let kernel: Vec<f64> = (0..m)
        .map(|off| {
            let d = offset_vector(&g, off);
            let rho2 = d[0] * d[0] + d[1] * d[1];
            if rho2 == 0.0 {
                0.0
            } else {
                rho2.powf(expo)
            }
        })
        .collect();
    let (vv, ww) = (v.values(), w.values());
    let rows = (0..m).map(|i| {
        let ii = g.unflatten(i);
        compensated_sum((1..m).map(|off| {
            let oo = g.unflatten(off);
            let j = g.flatten([(ii[0] + oo[0]) % n, (ii[1] + oo[1]) % n]);
            (vv[i] - vv[j]) * kernel[off] * (ww[i] - ww[j])
        }))
    });
    let total = compensated_sum(rows);
    Ok(difference_form_constant(g.dim(), r)? * total * g.cell_volume().powi(2))
}

/// `(u - level)_+`.
pub fn truncate_above(u: &Field, level: f64) -> Result<Field> {
    u.map(|v| (v - level).max(0.0))
}

/// `(u - level) ∧ 0`.
pub fn truncate_below(u: &Field, level: f64) -> Result<Field> {
    u.map(|v| (v - level).min(0.0))
}

/// Both sides of the `L^1`–`H^r` embedding `int u^q <= C |u|_1^theta |u|_{H^r}^2`
/// with `theta = 2r/N`, `q = 2 + theta`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EmbeddingSides {
    /// `int u^q`.
    pub lhs: f64,
    /// `|u|_1^theta`.
    pub l1_pow_theta: f64,
    /// Homogeneous seminorm `|u|_{H^r}^2`, the spectral pairing of `u` with itself.
    pub hr_seminorm_sq: f64,
    /// `|u|_2^2`, so the inhomogeneous norm is `hr_seminorm_sq + l2_sq`.
    pub l2_sq: f64,
    pub theta: f64,
    pub q: f64,
}

impl EmbeddingSides {
    /// `lhs / (|u|_1^theta |u|_{H^r}^2)`; `None` for the zero field.
    pub fn ratio(&self) -> Option<f64> {
        let denom = self.l1_pow_theta * self.hr_seminorm_sq;
        (denom > 0.0).then(|| self.lhs / denom)
    }
}

pub fn embedding_sides(u: &Field, r: f64, plan: &SpectralPlan) -> Result<EmbeddingSides> {
    if !(r > 0.0 && r < 1.0) {
        return Err(FpmeError::InvalidOrder(r));
    }
    let min = u.min();
    if min < 0.0 {
        return Err(FpmeError::NegativeInput(min));
    }
    let theta = 2.0 * r / u.grid().dim() as f64;
    let q = 2.0 + theta;
    let lhs = integrate(&u.map(|v| v.powf(q))?);
    let l1 = lp_norm(u, 1.0)?;
    let l2 = lp_norm(u, 2.0)?;
    Ok(EmbeddingSides {
        lhs,
        l1_pow_theta: l1.powf(theta),
        hr_seminorm_sq: bilinear_gradient(u, u, r, plan)?,
        l2_sq: l2 * l2,
        theta,
        q,
    })
}
