//! Property suite behind `fpme check`. Every property uses fixed seeds and
//! prints no timings, so the report text is reproducible.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagnostics::{drift_velocity, DiagnosticsRecord};
use crate::error::Result;
use crate::fracops::{
    bilinear_difference, bilinear_gradient, frac_laplacian, pressure,
    truncate_above, truncate_below, KernelSample, SpectralPlan,
};
use crate::grid::{compensated_sum, integrate, lp_norm, make_grid, Field, FracOrder, GridSpec};
use crate::harness::snapshot::{decode_snapshot, encode_snapshot};
use crate::solver::{run, DiffusivitySpec, SolverState, StepControl};

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckResult {
    pub fn line(&self) -> String {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        format!("{tag} {:<32} {}", self.name, self.detail)
    }
}

type Check = (&'static str, fn() -> Result<(bool, String)>);

const CHECKS: &[Check] = &[
    ("integrate_linearity", integrate_linearity),
    ("holder_interpolation", holder_interpolation),
    ("exponent_consistency", exponent_consistency),
    ("eigenfunction_exactness", eigenfunction_exactness),
    ("self_adjointness", self_adjointness),
    ("inverse_composition", inverse_composition),
    ("truncation_reconstruction", truncation_reconstruction),
    ("positive_part_inequality", positive_part_inequality),
    ("monotone_map_positivity", monotone_map_positivity),
    ("lipschitz_map_bound", lipschitz_map_bound),
    ("opposite_sign_positivity", opposite_sign_positivity),
    ("representation_agreement", representation_agreement),
    ("pressure_vs_kernel", pressure_vs_kernel),
    ("drift_vs_kernel", drift_vs_kernel),
    ("micro_run_conservation", micro_run_conservation),
    ("micro_run_monotonicity", micro_run_monotonicity),
    ("micro_run_energy_budget", micro_run_energy_budget),
    ("micro_run_symmetric_drift", micro_run_symmetric_drift),
    ("snapshot_round_trip", snapshot_round_trip),
];

/// Runs every property in a fixed order.
pub fn run_checks() -> Vec<CheckResult> {
    CHECKS
        .iter()
        .map(|(name, f)| {
            let (passed, detail) = match f() {
                Ok(r) => r,
                Err(e) => (false, format!("error: {e}")),
            };
            CheckResult { name, passed, detail }
        })
        .collect()
}

pub fn report(results: &[CheckResult]) -> String {
    let mut out: String = results.iter().map(|r| r.line() + "\n").collect();
    let failed = results.iter().filter(|r| !r.passed).count();
    out.push_str(&format!("{} passed, {failed} failed\n", results.len() - failed));
    out
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn random_field(grid: GridSpec, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Field {
    Field::from_raw(grid, (0..grid.len()).map(|_| rng.gen_range(lo..hi)).collect())
}

fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn worst<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    it.into_iter().fold(0.0, f64::max)
}

fn integrate_linearity() -> Result<(bool, String)> {
    let mut r = rng(1);
    let mut err: f64 = 0.0;
    for dim in [1, 2] {
        let g = make_grid(dim, 32, 3.0)?;
        for _ in 0..20 {
            let (f, h) = (random_field(g, &mut r, -1.0, 1.0), random_field(g, &mut r, -1.0, 1.0));
            let (a, b) = (r.gen_range(-3.0..3.0), r.gen_range(-3.0..3.0));
            let lhs = integrate(&f.scale(a).add(&h.scale(b))?);
            let rhs = a * integrate(&f) + b * integrate(&h);
            let scale = integrate(&f.map(f64::abs)?) * a.abs() + integrate(&h.map(f64::abs)?) * b.abs();
            err = err.max((lhs - rhs).abs() / scale);
        }
    }
    Ok((err <= 1e-12, format!("max rel err {err:.2e}")))
}

fn holder_interpolation() -> Result<(bool, String)> {
    let mut r = rng(2);
    let g = make_grid(1, 64, 2.0)?;
    let ps = [1.0, 1.5, 2.0, 4.0, f64::INFINITY];
    let mut violations = 0;
    for _ in 0..100 {
        let f = random_field(g, &mut r, -2.0, 2.0);
        for (i, &p) in ps.iter().enumerate() {
            for &q in &ps[i..] {
                let expo = 1.0 / p - if q.is_infinite() { 0.0 } else { 1.0 / q };
                let bound = g.box_volume().powf(expo) * lp_norm(&f, q)?;
                if lp_norm(&f, p)? > bound * (1.0 + 1e-12) {
                    violations += 1;
                }
            }
        }
    }
    Ok((violations == 0, format!("{violations} violations over 100 fields")))
}

fn exponent_consistency() -> Result<(bool, String)> {
    let mut bad = 0;
    for dim in [1, 2] {
        for k in 1..20 {
            let o = FracOrder::new(k as f64 / 20.0, dim)?;
            let (a, b) = (o.gamma * dim as f64, (2.0 - 2.0 * o.s) * o.alpha);
            if (a - b).abs() > 4.0 * f64::EPSILON * b.abs() {
                bad += 1;
            }
        }
    }
    Ok((bad == 0, format!("{bad} mismatches")))
}

fn eigenfunction_exactness() -> Result<(bool, String)> {
    let g = make_grid(1, 64, 2.5)?;
    let plan = SpectralPlan::new(g);
    let mut err: f64 = 0.0;
    for s in [0.25, 0.5, 0.75] {
        for m in 1..g.n() / 2 {
            let k = std::f64::consts::PI * m as f64 / g.half_length();
            let f = Field::from_fn(g, |x| (k * x[0]).cos())?;
            let lf = frac_laplacian(&f, s, &plan)?;
            let diff = lf.sub(&f.scale(k.powf(2.0 * s)))?;
            err = err.max(diff.max_abs() / k.powf(2.0 * s));
        }
    }
    Ok((err <= 1e-10, format!("max rel err {err:.2e}")))
}

fn self_adjointness() -> Result<(bool, String)> {
    let mut r = rng(3);
    let mut err: f64 = 0.0;
    for (dim, n) in [(1, 64), (2, 16)] {
        let g = make_grid(dim, n, 2.0)?;
        let plan = SpectralPlan::new(g);
        for _ in 0..25 {
            let (f, h) = (random_field(g, &mut r, -1.0, 1.0), random_field(g, &mut r, -1.0, 1.0));
            let s = r.gen_range(-1.0..1.0);
            let a = integrate(&frac_laplacian(&f, s, &plan)?.mul(&h)?);
            let b = integrate(&f.mul(&frac_laplacian(&h, s, &plan)?)?);
            err = err.max(rel(a, b));
        }
    }
    Ok((err <= 1e-10, format!("max rel err {err:.2e} over 50 pairs")))
}

fn inverse_composition() -> Result<(bool, String)> {
    let mut r = rng(4);
    let mut err: f64 = 0.0;
    for dim in [1, 2] {
        let g = make_grid(dim, 32, 2.0)?;
        let plan = SpectralPlan::new(g);
        for s in [0.25, 0.5, 0.75] {
            let f = random_field(g, &mut r, -1.0, 1.0);
            let back = frac_laplacian(&frac_laplacian(&f, -s, &plan)?, s, &plan)?;
            let centered = f.sub(&Field::constant(g, f.mean()))?;
            err = err.max(back.sub(&centered)?.max_abs() / centered.max_abs());
        }
    }
    Ok((err <= 1e-10, format!("max rel err {err:.2e}")))
}

fn truncation_reconstruction() -> Result<(bool, String)> {
    let mut r = rng(5);
    let g = make_grid(1, 64, 2.0)?;
    let mut worst_ulps = 0u64;
    for _ in 0..100 {
        let u = random_field(g, &mut r, -1.0, 1.0);
        let k = r.gen_range(-1.0..1.0);
        let above = truncate_above(&u, k)?;
        let below = truncate_below(&u, k)?;
        for ((&a, &b), &v) in above.values().iter().zip(below.values()).zip(u.values()) {
            let back = a + b + k;
            let ulps = (back.to_bits() as i64 - v.to_bits() as i64).unsigned_abs();
            worst_ulps = worst_ulps.max(if back == v { 0 } else { ulps });
        }
    }
    Ok((worst_ulps <= 1, format!("max deviation {worst_ulps} ulp")))
}

fn random_level_pair(r: &mut ChaCha8Rng, g: GridSpec) -> (Field, f64, f64) {
    let u = random_field(g, r, -1.0, 1.0);
    (u, r.gen_range(-0.8..0.8), r.gen_range(0.1..0.9))
}

fn positive_part_inequality() -> Result<(bool, String)> {
    let mut r = rng(6);
    let g = make_grid(1, 32, 2.0)?;
    let mut margin = f64::INFINITY;
    for _ in 0..100 {
        let (u, k, ord) = random_level_pair(&mut r, g);
        let plus = truncate_above(&u, k)?;
        let gap = bilinear_difference(&plus, &u, ord)? - bilinear_difference(&plus, &plus, ord)?;
        margin = margin.min(gap);
    }
    Ok((margin >= -1e-12, format!("min gap {margin:.3e}")))
}

fn monotone_maps() -> [(&'static str, fn(f64) -> f64, f64); 3] {
    [
        ("identity", |v| v, 1.0),
        ("clamp", |v| v.clamp(-0.3, 0.4), 1.0),
        ("piecewise", |v| if v < 0.0 { 0.25 * v } else { 2.0 * v }, 2.0),
    ]
}

fn monotone_map_positivity() -> Result<(bool, String)> {
    let mut r = rng(7);
    let g = make_grid(1, 32, 2.0)?;
    let mut margin = f64::INFINITY;
    for _ in 0..100 {
        let (w, _, ord) = random_level_pair(&mut r, g);
        for (_, m, _) in monotone_maps() {
            margin = margin.min(bilinear_difference(&w.map(m)?, &w, ord)?);
        }
    }
    Ok((margin >= -1e-12, format!("min value {margin:.3e}")))
}

fn lipschitz_map_bound() -> Result<(bool, String)> {
    let mut r = rng(8);
    let g = make_grid(1, 32, 2.0)?;
    let mut margin = f64::INFINITY;
    for _ in 0..100 {
        let (w, _, ord) = random_level_pair(&mut r, g);
        let ww = bilinear_difference(&w, &w, ord)?;
        for (_, m, slope) in monotone_maps() {
            margin = margin.min(slope * ww - bilinear_difference(&w.map(m)?, &w, ord)?);
        }
    }
    Ok((margin >= -1e-12, format!("min slack {margin:.3e}")))
}

fn opposite_sign_positivity() -> Result<(bool, String)> {
    let mut r = rng(9);
    let g = make_grid(1, 32, 2.0)?;
    let mut margin = f64::INFINITY;
    for _ in 0..100 {
        let (u, k, ord) = random_level_pair(&mut r, g);
        let plus = truncate_above(&u, k)?;
        let minus = truncate_below(&u, k)?;
        margin = margin.min(bilinear_difference(&plus, &minus, ord)?);
    }
    Ok((margin >= -1e-12, format!("min value {margin:.3e}")))
}

fn gaussian(x: &[f64], center: &[f64], width: f64) -> f64 {
    let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
    (-r2 / (2.0 * width * width)).exp()
}

/// Relative gap between the difference and gradient forms on successively
/// finer 1D grids of a fixed box.
pub fn representation_gaps(r: f64) -> Result<Vec<f64>> {
    [64, 128, 256, 512, 1024]
        .into_iter()
        .map(|n| {
            let g = make_grid(1, n, 32.0)?;
            let plan = SpectralPlan::new(g);
            let v = Field::from_fn(g, |x| gaussian(x, &[0.0], 0.4))?;
            let w = Field::from_fn(g, |x| gaussian(x, &[0.3], 0.4) * (1.0 + x[0]))?;
            let a = bilinear_difference(&v, &w, r)?;
            let b = bilinear_gradient(&v, &w, r, &plan)?;
            Ok(rel(a, b))
        })
        .collect()
}

fn representation_agreement() -> Result<(bool, String)> {
    let mut ok = true;
    let mut detail = Vec::new();
    for r in [0.25, 0.5, 0.75] {
        let gaps = representation_gaps(r)?;
        ok &= gaps.windows(2).all(|w| w[1] < w[0]);
        detail.push(format!("r={r}: {:.2e} -> {:.2e}", gaps[0], gaps[gaps.len() - 1]));
    }
    Ok((ok, detail.join(", ")))
}

/// Offset index of `x_i - x_j`.
fn offset_index(g: &GridSpec, i: usize, j: usize) -> usize {
    let (ii, jj) = (g.unflatten(i), g.unflatten(j));
    let n = g.n();
    g.flatten([(ii[0] + n - jj[0]) % n, (ii[1] + n - jj[1]) % n])
}

/// Relative sup-norm gap between the spectral pressure and a direct kernel
/// sum, both centered, on `|x| <= R/8`.
pub fn pressure_kernel_gap(dim: usize, n: usize, half_length: f64, s: f64) -> Result<f64> {
    let g = make_grid(dim, n, half_length)?;
    let plan = SpectralPlan::new(g);
    let u = Field::from_fn(g, |x| gaussian(x, &[0.5, -0.25], 1.0))?;
    let spectral = pressure(&u, s, &plan)?;
    let kernel = KernelSample::new(g, s)?;
    let inner: Vec<usize> = (0..g.len())
        .filter(|&i| g.point(i)[..dim].iter().all(|x| x.abs() <= half_length / 8.0))
        .collect();
    let direct: Vec<f64> = inner
        .iter()
        .map(|&i| {
            compensated_sum(
                (0..g.len()).map(|j| kernel.at_offset(offset_index(&g, i, j)) * u.values()[j]),
            ) * g.cell_volume()
        })
        .collect();
    let centered = |vals: Vec<f64>| {
        let mean = compensated_sum(vals.iter().copied()) / vals.len() as f64;
        vals.into_iter().map(|v| v - mean).collect::<Vec<_>>()
    };
    let a = centered(inner.iter().map(|&i| spectral.values()[i]).collect());
    let b = centered(direct);
    let scale = worst(b.iter().map(|v| v.abs()));
    Ok(worst(a.iter().zip(&b).map(|(x, y)| (x - y).abs())) / scale)
}

const ORACLE_CASES: [(usize, usize, f64, f64); 4] = [
    (1, 2048, 64.0, 0.25),
    (1, 2048, 64.0, 0.4),
    (2, 128, 16.0, 0.6),
    (2, 128, 16.0, 0.75),
];

fn pressure_vs_kernel() -> Result<(bool, String)> {
    let mut err: f64 = 0.0;
    for (dim, n, rr, s) in ORACLE_CASES {
        err = err.max(pressure_kernel_gap(dim, n, rr, s)?);
    }
    Ok((err <= 0.03, format!("max rel gap {err:.3e}")))
}

/// Relative gap between the spectral drift and the kernel-gradient
/// quadrature `sum grad L(y) u(y) dy`.
pub fn drift_kernel_gap(dim: usize, n: usize, half_length: f64, s: f64) -> Result<f64> {
    let g = make_grid(dim, n, half_length)?;
    let plan = SpectralPlan::new(g);
    let u = Field::from_fn(g, |x| gaussian(x, &[3.0, 2.0], 0.75))?;
    let spectral = drift_velocity(&u, s, &plan)?;
    let kernel = KernelSample::new(g, s)?;
    let o = g.origin_index();
    let origin = g.flatten([o, o]);
    let norm = spectral.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut gap: f64 = 0.0;
    for (axis, v) in spectral.iter().enumerate() {
        let oracle = compensated_sum((0..g.len()).map(|j| {
            kernel.gradient_at_offset(offset_index(&g, j, origin))[axis] * u.values()[j]
        })) * g.cell_volume();
        gap = gap.max((v - oracle).abs() / norm);
    }
    Ok(gap)
}

fn drift_vs_kernel() -> Result<(bool, String)> {
    let mut err: f64 = 0.0;
    for (dim, n, rr, s) in ORACLE_CASES {
        err = err.max(drift_kernel_gap(dim, n, 2.0 * rr, s)?);
    }
    Ok((err <= 0.03, format!("max rel gap {err:.3e}")))
}

struct MicroRun {
    series: Vec<DiagnosticsRecord>,
}

fn micro_runs() -> Result<Vec<(String, MicroRun)>> {
    let ctl = StepControl {
        cfl: 0.4,
        dt_max: 0.05,
        t_end: 1.0,
        record_every: 1,
    };
    let g1 = make_grid(1, 256, 16.0)?;
    let g2 = make_grid(2, 32, 8.0)?;
    let gauss = |g: GridSpec, w: f64| {
        Field::from_fn(g, |x| (-x.iter().map(|v| v * v).sum::<f64>() / (2.0 * w * w)).exp())
    };
    let cases = [
        ("1d s=0.25", gauss(g1, 0.5)?, DiffusivitySpec::pure(), 0.25),
        ("1d s=0.75", gauss(g1, 0.5)?, DiffusivitySpec::pure(), 0.75),
        ("2d s=0.5", gauss(g2, 0.7)?, DiffusivitySpec::pure(), 0.5),
        (
            "1d d1=0.9",
            gauss(g1, 1.0)?.scale(0.8).add(&Field::constant(g1, 0.1))?,
            DiffusivitySpec::new(0.9, 0.1)?,
            0.25,
        ),
    ];
    cases
        .into_iter()
        .map(|(tag, u0, d, s)| {
            let dim = u0.grid().dim();
            let out = run(u0, d, FracOrder::new(s, dim)?, &ctl)?;
            Ok((tag.to_string(), MicroRun { series: out.series }))
        })
        .collect()
}

fn micro_run_conservation() -> Result<(bool, String)> {
    let mut drift: f64 = 0.0;
    let mut min = f64::INFINITY;
    for (_, m) in micro_runs()? {
        let m0 = m.series[0].mass;
        drift = drift.max(worst(m.series.iter().map(|r| (r.mass - m0).abs() / m0)));
        min = min.min(m.series.iter().map(|r| r.min).fold(f64::INFINITY, f64::min));
    }
    Ok((
        drift <= 1e-10 && min >= -1e-12,
        format!("mass drift {drift:.2e}, min u {min:.2e}"),
    ))
}

fn micro_run_monotonicity() -> Result<(bool, String)> {
    let mut lp: f64 = 0.0;
    let mut energy: f64 = 0.0;
    let mut ent: f64 = 0.0;
    for (_, m) in micro_runs()? {
        for w in m.series.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            for (x, y) in [(a.l2, b.l2), (a.l4, b.l4), (a.linf, b.linf)] {
                lp = lp.max(y / x - 1.0);
            }
            energy = energy.max((b.half_energy - a.half_energy) / a.half_energy);
            ent = ent.max(b.entropy - a.entropy);
        }
    }
    Ok((
        lp <= 1e-8 && energy <= 1e-8 && ent <= 1e-8,
        format!("max increase: Lp {lp:.2e}, energy {energy:.2e}, entropy {ent:.2e}"),
    ))
}

fn micro_run_energy_budget() -> Result<(bool, String)> {
    let mut excess: f64 = f64::NEG_INFINITY;
    for (_, m) in micro_runs()? {
        for w in m.series.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let budget = b.half_energy + (a.dissipation + b.dissipation) * (b.t - a.t);
            excess = excess.max(budget / a.half_energy - 1.0);
        }
    }
    Ok((excess <= 0.05, format!("max budget excess {excess:.2e}")))
}

fn micro_run_symmetric_drift() -> Result<(bool, String)> {
    let mut drift: f64 = 0.0;
    for (tag, m) in micro_runs()? {
        if tag.starts_with("1d s=0.25") || tag.starts_with("2d") {
            drift = drift.max(worst(m.series.iter().map(|r| r.drift_norm())));
        }
    }
    Ok((drift <= 1e-10, format!("max |drift| {drift:.2e}")))
}

fn snapshot_round_trip() -> Result<(bool, String)> {
    let mut r = rng(10);
    let mut ok = true;
    for dim in [1, 2] {
        let g = make_grid(dim, 16, 1.25)?;
        let mut st = SolverState::new(
            random_field(g, &mut r, 0.0, 1.0),
            DiffusivitySpec::new(0.2, 0.8)?,
            FracOrder::new(0.3, dim)?,
        )?;
        st.t = r.gen_range(0.0..10.0);
        let back = decode_snapshot(&encode_snapshot(&st))?;
        ok &= back.u.values().iter().zip(st.u.values()).all(|(a, b)| a.to_bits() == b.to_bits())
            && back.t.to_bits() == st.t.to_bits()
            && back.diff == st.diff
            && back.order == st.order;
    }
    Ok((ok, if ok { "bit-exact" } else { "mismatch" }.to_string()))
}
