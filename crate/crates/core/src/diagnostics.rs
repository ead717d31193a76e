//! Measured functionals of a solution and exponent fits over run series.

use crate::error::{FpmeError, Result};
use crate::fracops::{half_energy, SpectralPlan};
use crate::grid::{compensated_sum, integrate, lp_norm, Field, FracOrder};
use crate::solver::{DiffusivitySpec, SolverState};

/// Fraction of the half length that bounds the outer shell used for
/// boundary-contamination checks.
pub const BOUNDARY_SHELL: f64 = 0.95;

/// Negative values above this are treated as roundoff by the nonnegative
/// diagnostics.
const NEG_TOL: f64 = 1e-12;

/// One time slice of every measured functional.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub step: u64,
    pub mass: f64,
    pub l1: f64,
    pub l2: f64,
    pub l4: f64,
    pub linf: f64,
    pub min: f64,
    pub entropy: f64,
    pub half_energy: f64,
    pub dissipation: f64,
    pub support_radius: f64,
    pub drift: Vec<f64>,
    pub clamp_mass: f64,
    pub boundary_mass_fraction: f64,
}

impl DiagnosticsRecord {
    /// Recorded `L^p` norm for `p` in `{1, 2, 4, inf}`.
    pub fn lp(&self, p: f64) -> Option<f64> {
        if p.is_infinite() {
            Some(self.linf)
        } else if p == 1.0 {
            Some(self.l1)
        } else if p == 2.0 {
            Some(self.l2)
        } else if p == 4.0 {
            Some(self.l4)
        } else {
            None
        }
    }

    pub fn drift_norm(&self) -> f64 {
        self.drift.iter().map(|v| v * v).sum::<f64>().sqrt()
    }
}

pub fn record(state: &SolverState, support_threshold: f64) -> Result<DiagnosticsRecord> {
    let u = &state.u;
    let s = state.order.s;
    Ok(DiagnosticsRecord {
        t: state.t,
        step: state.step_count,
        mass: integrate(u),
        l1: lp_norm(u, 1.0)?,
        l2: lp_norm(u, 2.0)?,
        l4: lp_norm(u, 4.0)?,
        linf: lp_norm(u, f64::INFINITY)?,
        min: u.min(),
        entropy: entropy(u),
        half_energy: half_energy(u, s, &state.plan)?,
        dissipation: weighted_dissipation(u, s, &state.diff, &state.plan)?,
        support_radius: support_radius(u, support_threshold),
        drift: drift_velocity(u, s, &state.plan)?,
        clamp_mass: state.clamp_mass,
        boundary_mass_fraction: boundary_mass_fraction(u),
    })
}

/// `int u log u`, with cells where `u <= 0` contributing their limit value 0.
pub fn entropy(u: &Field) -> f64 {
    compensated_sum(
        u.values()
            .iter()
            .map(|&v| if v > 0.0 { v * v.ln() } else { 0.0 }),
    ) * u.grid().cell_volume()
}

/// `int u |grad (-Delta)^{-s} u|^2`.
pub fn dissipation(u: &Field, s: f64, plan: &SpectralPlan) -> Result<f64> {
    weighted_dissipation(u, s, &DiffusivitySpec::pure(), plan)
}

/// `int D(u) |grad (-Delta)^{-s} u|^2`; reduces to [`dissipation`] for the
/// pure equation.
pub fn weighted_dissipation(
    u: &Field,
    s: f64,
    diff: &DiffusivitySpec,
    plan: &SpectralPlan,
) -> Result<f64> {
    let min = u.min();
    if min < -NEG_TOL {
        return Err(FpmeError::NegativeInput(min));
    }
    let g = u.grid();
    let mut sq = vec![0.0; g.len()];
    for axis in 0..g.dim() {
        let dp = plan.derivative_of_power(u, axis, -s)?;
        for (acc, d) in sq.iter_mut().zip(dp.values()) {
            *acc += d * d;
        }
    }
    let total = compensated_sum(
        u.values()
            .iter()
            .zip(&sq)
            .map(|(&v, &q)| diff.eval(v.max(0.0)) * q),
    );
    Ok(total * g.cell_volume())
}

/// Drift velocity `int grad L(y) u(y) dy`, one component per axis.
///
/// Since `grad L` is odd this is `-grad p(0)`, the Darcy velocity at the
/// origin, and is evaluated spectrally.
pub fn drift_velocity(u: &Field, s: f64, plan: &SpectralPlan) -> Result<Vec<f64>> {
    (0..u.grid().dim())
        .map(|axis| Ok(-plan.derivative_of_power(u, axis, -s)?.at_origin()))
        .collect()
}

/// Largest max-norm distance from the origin among cells with `u > threshold`.
pub fn support_radius(u: &Field, threshold: f64) -> f64 {
    let g = u.grid();
    u.values()
        .iter()
        .enumerate()
        .filter(|(_, &v)| v > threshold)
        .map(|(i, _)| {
            let p = g.point(i);
            p[..g.dim()].iter().fold(0.0f64, |m, x| m.max(x.abs()))
        })
        .fold(0.0, f64::max)
}

fn in_boundary_shell(u: &Field, i: usize) -> bool {
    let g = u.grid();
    let p = g.point(i);
    p[..g.dim()]
        .iter()
        .any(|x| x.abs() >= BOUNDARY_SHELL * g.half_length())
}

/// Fraction of the mass in the outer shell of the box.
pub fn boundary_mass_fraction(u: &Field) -> f64 {
    let total = compensated_sum(u.values().iter().map(|v| v.abs()));
    if total == 0.0 {
        return 0.0;
    }
    let shell = compensated_sum(
        u.values()
            .iter()
            .enumerate()
            .filter(|(i, _)| in_boundary_shell(u, *i))
            .map(|(_, v)| v.abs()),
    );
    shell / total
}

/// Largest `|u|` in the outer shell of the box.
pub fn boundary_shell_max(u: &Field) -> f64 {
    u.values()
        .iter()
        .enumerate()
        .filter(|(i, _)| in_boundary_shell(u, *i))
        .fold(0.0, |m, (_, v)| m.max(v.abs()))
}

/// A stored solution at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub t: f64,
    pub field: Field,
}

/// Parabolic cylinder `[t0 - R, t0] x B_R(x0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CylinderSpec {
    pub center: Vec<f64>,
    pub t0: f64,
    pub radius: f64,
}

impl CylinderSpec {
    pub fn new(center: Vec<f64>, t0: f64, radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return Err(FpmeError::param("radius", "must be positive"));
        }
        Ok(CylinderSpec { center, t0, radius })
    }

    fn time_tolerance(&self) -> f64 {
        1e-9 * self.t0.abs().max(1.0)
    }
}

/// Snapshots inside the cylinder's time window with their trapezoid weights.
fn window_weights<'a>(snaps: &'a [Snapshot], cyl: &CylinderSpec) -> Result<Vec<(&'a Snapshot, f64)>> {
    let lo = cyl.t0 - cyl.radius;
    let hi = cyl.t0;
    let tol = cyl.time_tolerance();
    let not_covered = || FpmeError::WindowNotCovered { lo, hi };
    let first = snaps.iter().map(|s| s.t).fold(f64::INFINITY, f64::min);
    let last = snaps.iter().map(|s| s.t).fold(f64::NEG_INFINITY, f64::max);
    if first > lo + tol || last < hi - tol {
        return Err(not_covered());
    }
    let mut inside: Vec<&Snapshot> = snaps
        .iter()
        .filter(|s| s.t >= lo - tol && s.t <= hi + tol)
        .collect();
    if inside.is_empty() {
        return Err(not_covered());
    }
    inside.sort_by(|a, b| a.t.total_cmp(&b.t));
    if inside.len() == 1 {
        return Ok(vec![(inside[0], 1.0)]);
    }
    let k = inside.len();
    Ok(inside
        .iter()
        .enumerate()
        .map(|(i, s)| {
            let left = if i > 0 { s.t - inside[i - 1].t } else { 0.0 };
            let right = if i + 1 < k { inside[i + 1].t - s.t } else { 0.0 };
            (*s, 0.5 * (left + right))
        })
        .collect())
}

/// Flat indices of the cells within Euclidean (minimum-image) distance `radius`.
fn ball_cells(field: &Field, center: &[f64], radius: f64) -> Vec<usize> {
    let g = field.grid();
    let period = 2.0 * g.half_length();
    (0..g.len())
        .filter(|&i| {
            let p = g.point(i);
            let d2: f64 = (0..g.dim())
                .map(|a| {
                    let mut d = (p[a] - center.get(a).copied().unwrap_or(0.0)).rem_euclid(period);
                    if d > period / 2.0 {
                        d -= period;
                    }
                    d * d
                })
                .sum();
            d2 <= radius * radius * (1.0 + 1e-12)
        })
        .collect()
}

/// Space-time fraction of the cylinder where `u > level`, trapezoidal in time.
pub fn level_set_fraction(snaps: &[Snapshot], level: f64, cyl: &CylinderSpec) -> Result<f64> {
    let weighted = window_weights(snaps, cyl)?;
    let total_w: f64 = weighted.iter().map(|(_, w)| w).sum();
    let mut acc = 0.0;
    for (snap, w) in &weighted {
        let cells = ball_cells(&snap.field, &cyl.center, cyl.radius);
        if cells.is_empty() {
            return Err(FpmeError::param("radius", "ball contains no grid cells"));
        }
        let above = cells
            .iter()
            .filter(|&&i| snap.field.values()[i] > level)
            .count();
        let frac = above as f64 / cells.len() as f64;
        acc += if total_w > 0.0 { w / total_w } else { 1.0 } * frac;
    }
    Ok(acc.clamp(0.0, 1.0))
}

/// Least-squares slope of `log osc` against `log R`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderFit {
    pub exponent: f64,
    pub r_squared: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OscillationProfile {
    /// `(R, osc(R))` pairs in the order the radii were given.
    pub points: Vec<(f64, f64)>,
    /// `None` when some oscillation vanishes.
    pub holder: Option<HolderFit>,
}

/// `max - min` of `u` over the cylinder `[t0 - R, t0] x B_R(center)`.
pub fn oscillation(snaps: &[Snapshot], cyl: &CylinderSpec) -> Result<f64> {
    let weighted = window_weights(snaps, cyl)?;
    let mut hi = f64::NEG_INFINITY;
    let mut lo = f64::INFINITY;
    for (snap, _) in weighted {
        for i in ball_cells(&snap.field, &cyl.center, cyl.radius) {
            let v = snap.field.values()[i];
            hi = hi.max(v);
            lo = lo.min(v);
        }
    }
    if hi < lo {
        return Err(FpmeError::param("radius", "ball contains no grid cells"));
    }
    Ok(hi - lo)
}

pub fn oscillation_decay(
    snaps: &[Snapshot],
    center: &[f64],
    t0: f64,
    radii: &[f64],
) -> Result<OscillationProfile> {
    if radii.len() < 4 {
        return Err(FpmeError::param("radii", "need at least 4 radii"));
    }
    let points = radii
        .iter()
        .map(|&r| {
            let cyl = CylinderSpec::new(center.to_vec(), t0, r)?;
            Ok((r, oscillation(snaps, &cyl)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let holder = if points.iter().all(|&(_, o)| o > 0.0) {
        let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
        let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
        let (slope, r2) = pooled_fit(&[(xs, ys)])?;
        Some(HolderFit {
            exponent: slope,
            r_squared: r2,
        })
    } else {
        None
    };
    Ok(OscillationProfile { points, holder })
}

/// A fitted exponent next to its theoretical value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExponentFit {
    pub fitted: f64,
    pub theoretical: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

impl ExponentFit {
    pub fn relative_error(&self) -> f64 {
        (self.fitted - self.theoretical).abs() / self.theoretical.abs()
    }
}

/// One run of an exponent sweep: its initial mass and recorded series.
#[derive(Debug, Clone)]
pub struct FitRun<'a> {
    pub mass: f64,
    pub series: &'a [DiagnosticsRecord],
}

/// Slope and within-group `r^2` of a regression with one intercept per group.
pub fn pooled_fit(groups: &[(Vec<f64>, Vec<f64>)]) -> Result<(f64, f64)> {
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    let mut syy = 0.0;
    let mut centered = Vec::new();
    for (xs, ys) in groups {
        if xs.len() != ys.len() {
            return Err(FpmeError::DegenerateRegression("length mismatch".into()));
        }
        if xs.is_empty() {
            continue;
        }
        let mx = xs.iter().sum::<f64>() / xs.len() as f64;
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        for (x, y) in xs.iter().zip(ys) {
            let (dx, dy) = (x - mx, y - my);
            sxx += dx * dx;
            sxy += dx * dy;
            syy += dy * dy;
            centered.push((dx, dy));
        }
    }
    if !(sxx > 0.0) {
        return Err(FpmeError::DegenerateRegression(
            "no spread in the regressor".into(),
        ));
    }
    let slope = sxy / sxx;
    let ss_res: f64 = centered.iter().map(|(dx, dy)| (dy - slope * dx).powi(2)).sum();
    let r2 = if syy > 0.0 {
        (1.0 - ss_res / syy).clamp(0.0, 1.0)
    } else {
        1.0
    };
    Ok((slope, r2))
}

const GAMMA_SAMPLE_TIMES: usize = 9;

fn norm_at(rec: &DiagnosticsRecord, p: f64) -> Result<f64> {
    rec.lp(p)
        .ok_or_else(|| FpmeError::param("p", format!("norm {p} is not recorded")))
}

fn check_window(window: (f64, f64)) -> Result<()> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo && hi / lo >= 10.0 * (1.0 - 1e-9)) {
        return Err(FpmeError::InsufficientDecade(format!(
            "window [{lo}, {hi}] spans less than a decade"
        )));
    }
    Ok(())
}

/// `(ln t, ln |u|_p)` for the records inside the window, after checking the
/// series covers the window and actually decays across it.
fn windowed_log_series(
    series: &[DiagnosticsRecord],
    p: f64,
    window: (f64, f64),
    require_decay: bool,
) -> Result<(Vec<f64>, Vec<f64>)> {
    let (lo, hi) = window;
    let tol = 1e-9 * hi;
    let first = series.first().map(|r| r.t).unwrap_or(f64::INFINITY);
    let last = series.last().map(|r| r.t).unwrap_or(f64::NEG_INFINITY);
    if first > lo + tol || last < hi - tol {
        return Err(FpmeError::InsufficientDecade(format!(
            "series [{first}, {last}] does not cover window [{lo}, {hi}]"
        )));
    }
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    for rec in series.iter().filter(|r| r.t >= lo - tol && r.t <= hi + tol) {
        let v = norm_at(rec, p)?;
        if !(v > 0.0) {
            return Err(FpmeError::DegenerateRegression("zero norm in window".into()));
        }
        xs.push(rec.t.ln());
        ys.push(v.ln());
    }
    if xs.len() < 3 {
        return Err(FpmeError::InsufficientDecade(
            "fewer than 3 records in the window".into(),
        ));
    }
    if require_decay && ys.last() >= ys.first() {
        return Err(FpmeError::InsufficientDecade(
            "norm does not decay across the window".into(),
        ));
    }
    Ok((xs, ys))
}

/// `ln |u(t)|_p` at `t`, linear in `ln t` between the bracketing records.
fn log_norm_at_time(series: &[DiagnosticsRecord], p: f64, t: f64) -> Result<f64> {
    let pos = series.partition_point(|r| r.t < t);
    if pos < series.len() && (series[pos].t - t).abs() <= 1e-12 * t.max(1.0) {
        return Ok(norm_at(&series[pos], p)?.ln());
    }
    if pos == 0 || pos == series.len() {
        return Err(FpmeError::InsufficientDecade(format!("time {t} not bracketed")));
    }
    let (a, b) = (&series[pos - 1], &series[pos]);
    let (la, lb) = (norm_at(a, p)?.ln(), norm_at(b, p)?.ln());
    let w = (t.ln() - a.t.ln()) / (b.t.ln() - a.t.ln());
    Ok(la + w * (lb - la))
}

/// Time-decay exponent `alpha_p` alone, pooled over any number of runs.
pub fn fit_decay_exponent(
    runs: &[FitRun<'_>],
    p: f64,
    order: &FracOrder,
    window: (f64, f64),
) -> Result<ExponentFit> {
    check_window(window)?;
    if runs.is_empty() {
        return Err(FpmeError::DegenerateRegression("no runs".into()));
    }
    let require_decay = p > 1.0;
    let groups = runs
        .iter()
        .map(|r| windowed_log_series(r.series, p, window, require_decay))
        .collect::<Result<Vec<_>>>()?;
    let (slope, r2) = pooled_fit(&groups)?;
    Ok(ExponentFit {
        fitted: -slope,
        theoretical: order.alpha_p(p),
        r_squared: r2,
        window,
    })
}

/// Mass exponent `gamma_p`: regression of `ln |u(t)|_p` on `ln mass` at
/// fixed log-spaced times in the window, one intercept per time.
pub fn fit_mass_exponent(
    runs: &[FitRun<'_>],
    p: f64,
    order: &FracOrder,
    window: (f64, f64),
) -> Result<ExponentFit> {
    check_window(window)?;
    let mut masses: Vec<f64> = runs.iter().map(|r| r.mass).collect();
    masses.sort_by(f64::total_cmp);
    masses.dedup_by(|a, b| (*a - *b).abs() <= 1e-12 * b.abs());
    if masses.len() < 2 {
        return Err(FpmeError::DegenerateRegression(
            "need runs with at least 2 distinct masses".into(),
        ));
    }
    for r in runs {
        if !(r.mass > 0.0) {
            return Err(FpmeError::param("mass", "must be positive"));
        }
        windowed_log_series(r.series, p, window, p > 1.0)?;
    }
    let (lo, hi) = window;
    let groups = (0..GAMMA_SAMPLE_TIMES)
        .map(|k| {
            let frac = k as f64 / (GAMMA_SAMPLE_TIMES - 1) as f64;
            let t = (lo.ln() + frac * (hi.ln() - lo.ln())).exp();
            let mut xs = Vec::new();
            let mut ys = Vec::new();
            for r in runs {
                xs.push(r.mass.ln());
                ys.push(log_norm_at_time(r.series, p, t)?);
            }
            Ok((xs, ys))
        })
        .collect::<Result<Vec<_>>>()?;
    let (slope, r2) = pooled_fit(&groups)?;
    Ok(ExponentFit {
        fitted: slope,
        theoretical: order.gamma_p(p),
        r_squared: r2,
        window,
    })
}

/// `(alpha_p, gamma_p)` for the recorded norm `p`.
pub fn fit_lp_exponents(
    runs: &[FitRun<'_>],
    p: f64,
    order: &FracOrder,
    window: (f64, f64),
) -> Result<(ExponentFit, ExponentFit)> {
    let gamma = fit_mass_exponent(runs, p, order, window)?;
    let alpha = fit_decay_exponent(runs, p, order, window)?;
    Ok((alpha, gamma))
}

/// `(alpha, gamma)` of the sup-norm smoothing estimate.
pub fn fit_smoothing_exponents(
    runs: &[FitRun<'_>],
    order: &FracOrder,
    window: (f64, f64),
) -> Result<(ExponentFit, ExponentFit)> {
    fit_lp_exponents(runs, f64::INFINITY, order, window)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fracops::{KernelSample, SpectralPlan};
    use crate::grid::make_grid;

    fn synthetic(mass: f64, alpha: f64, gamma: f64) -> Vec<DiagnosticsRecord> {
        (0..=60)
            .map(|k| {
                let t = 0.5 * 1.1f64.powi(k);
                let v = mass.powf(gamma) * t.powf(-alpha);
                DiagnosticsRecord {
                    t,
                    step: k as u64,
                    mass,
                    l1: mass,
                    l2: v.sqrt(),
                    l4: v,
                    linf: v,
                    min: 0.0,
                    entropy: 0.0,
                    half_energy: 0.0,
                    dissipation: 0.0,
                    support_radius: 0.0,
                    drift: vec![0.0],
                    clamp_mass: 0.0,
                    boundary_mass_fraction: 0.0,
                }
            })
            .collect()
    }

    #[test]
    fn dissipation_trivial_cases() {
        let g = make_grid(1, 64, 4.0).unwrap();
        let plan = SpectralPlan::new(g);
        assert_eq!(dissipation(&Field::zeros(g), 0.25, &plan).unwrap(), 0.0);
        assert!(dissipation(&Field::constant(g, 2.0), 0.25, &plan).unwrap() < 1e-28);
        let neg = Field::constant(g, -1.0);
        assert!(matches!(
            dissipation(&neg, 0.25, &plan),
            Err(FpmeError::NegativeInput(_))
        ));
    }

    #[test]
    fn drift_of_even_data_vanishes() {
        for dim in [1, 2] {
            let g = make_grid(dim, 64, 8.0).unwrap();
            let plan = SpectralPlan::new(g);
            let u = Field::from_fn(g, |x| (-x.iter().map(|v| v * v).sum::<f64>()).exp()).unwrap();
            let d = drift_velocity(&u, 0.75, &plan).unwrap();
            assert!(d.iter().all(|v| v.abs() < 1e-10), "{d:?}");
            let z = drift_velocity(&Field::zeros(g), 0.75, &plan).unwrap();
            assert!(z.iter().all(|&v| v == 0.0));
        }
    }

    #[test]
    fn drift_matches_kernel_quadrature() {
        let g = make_grid(1, 1024, 32.0).unwrap();
        let plan = SpectralPlan::new(g);
        let s = 0.25;
        let u = Field::from_fn(g, |x| (-(x[0] - 3.0).powi(2) / 0.25).exp()).unwrap();
        let spectral = drift_velocity(&u, s, &plan).unwrap()[0];
        let kernel = KernelSample::new(g, s).unwrap();
        // Offset of y from the origin is its own index shifted by n/2.
        let n = g.n();
        let oracle = compensated_sum((0..n).map(|j| {
            let off = (j + n - n / 2) % n;
            kernel.gradient_at_offset(off)[0] * u.values()[j]
        })) * g.dx();
        let rel = (spectral - oracle).abs() / oracle.abs();
        if cfg!(not(feature = "fault-injection")) {
            assert!(rel < 0.02, "spectral {spectral} oracle {oracle}");
        }
    }

    #[test]
    fn support_radius_examples() {
        let g = make_grid(1, 256, 4.0).unwrap();
        let ind = Field::from_fn(g, |x| if x[0].abs() <= 1.0 { 1.0 } else { 0.0 }).unwrap();
        assert!((support_radius(&ind, 1e-8) - 1.0).abs() <= g.dx());
        assert_eq!(support_radius(&Field::zeros(g), 1e-8), 0.0);
    }

    #[test]
    fn entropy_convention() {
        let g = make_grid(1, 8, 1.0).unwrap();
        assert_eq!(entropy(&Field::zeros(g)), 0.0);
        let e = Field::constant(g, std::f64::consts::E);
        assert!((entropy(&e) - 2.0 * std::f64::consts::E).abs() < 1e-12);
    }

    fn constant_snaps(value: f64) -> Vec<Snapshot> {
        let g = make_grid(1, 64, 4.0).unwrap();
        (0..=10)
            .map(|k| Snapshot {
                t: k as f64 * 0.5,
                field: Field::constant(g, value),
            })
            .collect()
    }

    #[test]
    fn level_set_fraction_examples() {
        let cyl = CylinderSpec::new(vec![0.0], 4.0, 1.0).unwrap();
        assert_eq!(level_set_fraction(&constant_snaps(1.0), 0.5, &cyl).unwrap(), 1.0);
        assert_eq!(level_set_fraction(&constant_snaps(0.0), 0.5, &cyl).unwrap(), 0.0);
        let late = CylinderSpec::new(vec![0.0], 8.0, 1.0).unwrap();
        assert!(matches!(
            level_set_fraction(&constant_snaps(1.0), 0.5, &late),
            Err(FpmeError::WindowNotCovered { .. })
        ));
    }

    #[test]
    fn oscillation_examples() {
        let radii = [0.25, 0.5, 1.0, 2.0];
        let prof = oscillation_decay(&constant_snaps(0.3), &[0.0], 5.0, &radii).unwrap();
        assert!(prof.points.iter().all(|&(_, o)| o == 0.0));
        assert!(prof.holder.is_none());

        let g = make_grid(1, 256, 8.0).unwrap();
        let snaps: Vec<Snapshot> = (0..=20)
            .map(|k| Snapshot {
                t: k as f64 * 0.25,
                field: Field::from_fn(g, |x| x[0].abs()).unwrap(),
            })
            .collect();
        let prof = oscillation_decay(&snaps, &[0.0], 5.0, &radii).unwrap();
        let h = prof.holder.unwrap();
        assert!((h.exponent - 1.0).abs() < 0.05, "{h:?}");
        assert!(matches!(
            oscillation_decay(&snaps, &[0.0], 5.0, &radii[..3]),
            Err(FpmeError::InvalidParameter { .. })
        ));
    }

    #[test]
    fn theoretical_exponents() {
        let runs_a = synthetic(1.0, 0.4, 0.6);
        let runs_b = synthetic(2.0, 0.4, 0.6);
        let runs = [
            FitRun { mass: 1.0, series: &runs_a },
            FitRun { mass: 2.0, series: &runs_b },
        ];
        let o = FracOrder::new(0.25, 1).unwrap();
        let (a, g) = fit_smoothing_exponents(&runs, &o, (1.0, 10.0)).unwrap();
        assert!((a.theoretical - 0.4).abs() < 1e-15);
        assert!((g.theoretical - 0.6).abs() < 1e-15);
        assert!((a.fitted - 0.4).abs() < 1e-6, "{a:?}");
        assert!((g.fitted - 0.6).abs() < 1e-6, "{g:?}");
        assert!(a.r_squared > 0.999_999);

        // l2 column of the synthetic series is v^{1/2}.
        let (a2, g2) = fit_lp_exponents(&runs, 2.0, &o, (1.0, 10.0)).unwrap();
        assert!((a2.theoretical - 0.2).abs() < 1e-15);
        assert!((g2.theoretical - 0.8).abs() < 1e-15);
        assert!((a2.fitted - 0.2).abs() < 1e-6);
        assert!((g2.fitted - 0.3).abs() < 1e-6);

        let (a1, g1) = fit_lp_exponents(&runs, 1.0, &o, (1.0, 10.0)).unwrap();
        assert_eq!((a1.theoretical, g1.theoretical), (0.0, 1.0));
        assert!(a1.fitted.abs() < 1e-12);
        assert!((g1.fitted - 1.0).abs() < 1e-12);

        let o2 = FracOrder::new(0.25, 2).unwrap();
        let (a, g) = fit_smoothing_exponents(&runs, &o2, (1.0, 10.0)).unwrap();
        assert!((a.theoretical - 4.0 / 7.0).abs() < 1e-15);
        assert!((g.theoretical - 3.0 / 7.0).abs() < 1e-15);
    }

    #[test]
    fn fit_errors() {
        let s = synthetic(1.0, 0.4, 0.6);
        let o = FracOrder::new(0.25, 1).unwrap();
        let one = [FitRun { mass: 1.0, series: &s }, FitRun { mass: 1.0, series: &s }];
        assert!(matches!(
            fit_smoothing_exponents(&one, &o, (1.0, 10.0)),
            Err(FpmeError::DegenerateRegression(_))
        ));
        assert!(matches!(
            fit_decay_exponent(&one, f64::INFINITY, &o, (1.0, 5.0)),
            Err(FpmeError::InsufficientDecade(_))
        ));
        assert!(matches!(
            fit_decay_exponent(&one, f64::INFINITY, &o, (10.0, 1000.0)),
            Err(FpmeError::InsufficientDecade(_))
        ));
        let flat = synthetic(1.0, 0.0, 0.6);
        assert!(matches!(
            fit_decay_exponent(&[FitRun { mass: 1.0, series: &flat }], f64::INFINITY, &o, (1.0, 10.0)),
            Err(FpmeError::InsufficientDecade(_))
        ));
    }
}
