//! Conservative upwind finite-volume evolution of `u_t = div(D(u) grad p)`,
//! `p = (-Delta)^{-s} u`, with forward Euler steps under an adaptive
//! stability limit.

use crate::diagnostics::{self, DiagnosticsRecord};
use crate::error::{FpmeError, Result};
use crate::fracops::SpectralPlan;
use crate::grid::{compensated_sum, integrate, Field, FracOrder, GridSpec};

/// Entries in `(-CLAMP_BAND, 0)` are set to zero after each step.
pub const CLAMP_BAND: f64 = 1e-12;
const SPEED_FLOOR: f64 = 1e-30;

/// `D(u) = d1 + d2 u`. The pure equation is `d1 = 0, d2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiffusivitySpec {
    pub d1: f64,
    pub d2: f64,
}

impl DiffusivitySpec {
    pub fn new(d1: f64, d2: f64) -> Result<Self> {
        if !(d1 >= 0.0 && d1.is_finite()) {
            return Err(FpmeError::param("diffusivity.d1", "must be finite and >= 0"));
        }
        if !d2.is_finite() {
            return Err(FpmeError::param("diffusivity.d2", "must be finite"));
        }
        Ok(DiffusivitySpec { d1, d2 })
    }

    pub fn pure() -> Self {
        DiffusivitySpec { d1: 0.0, d2: 1.0 }
    }

    /// Rescales so that `d1 + d2 = 1`.
    pub fn normalized(self) -> Result<Self> {
        let total = self.d1 + self.d2;
        if !(total > 0.0) {
            return Err(FpmeError::param("diffusivity", "d1 + d2 must be positive to normalize"));
        }
        DiffusivitySpec::new(self.d1 / total, self.d2 / total)
    }

    pub fn is_pure(&self) -> bool {
        self.d1 == 0.0 && self.d2 == 1.0
    }

    #[inline]
    pub fn eval(&self, u: f64) -> f64 {
        self.d1 + self.d2 * u
    }

    /// Extremes of `D` over `[umin, umax]`.
    pub fn range(&self, umin: f64, umax: f64) -> (f64, f64) {
        let (a, b) = (self.eval(umin), self.eval(umax));
        (a.min(b), a.max(b))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepControl {
    pub cfl: f64,
    pub dt_max: f64,
    pub t_end: f64,
    pub record_every: u64,
}

impl Default for StepControl {
    fn default() -> Self {
        StepControl {
            cfl: 0.4,
            dt_max: 0.1,
            t_end: 1.0,
            record_every: 10,
        }
    }
}

impl StepControl {
    pub fn validate(&self) -> Result<()> {
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(FpmeError::param("step.cfl", "must lie in (0, 1]"));
        }
        if !(self.dt_max > 0.0 && self.dt_max.is_finite()) {
            return Err(FpmeError::param("step.dt_max", "must be positive"));
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return Err(FpmeError::param("step.t_end", "must be positive"));
        }
        if self.record_every == 0 {
            return Err(FpmeError::param("step.record_every", "must be >= 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct SolverState {
    pub u: Field,
    pub t: f64,
    pub step_count: u64,
    pub diff: DiffusivitySpec,
    pub order: FracOrder,
    pub plan: SpectralPlan,
    /// Accumulated mass removed by the roundoff clamp.
    pub clamp_mass: f64,
}

impl SolverState {
    pub fn new(u: Field, diff: DiffusivitySpec, order: FracOrder) -> Result<Self> {
        if u.grid().dim() != order.dim {
            return Err(FpmeError::DimensionMismatch {
                expected: u.grid().dim(),
                found: order.dim,
            });
        }
        let plan = SpectralPlan::new(*u.grid());
        Ok(SolverState {
            u,
            t: 0.0,
            step_count: 0,
            diff,
            order,
            plan,
            clamp_mass: 0.0,
        })
    }

    pub fn grid(&self) -> &GridSpec {
        self.u.grid()
    }

    pub fn mass(&self) -> f64 {
        integrate(&self.u)
    }
}

/// Darcy velocity `v = -grad p`, one field per axis.
pub fn velocity(state: &SolverState) -> Result<Vec<Field>> {
    (0..state.grid().dim())
        .map(|axis| {
            let dp = state
                .plan
                .derivative_of_power(&state.u, axis, -state.order.s)?;
            Ok(dp.scale(-1.0))
        })
        .collect()
}

struct FluxEval {
    divergence: Field,
    max_face_speed: f64,
}

fn flux_eval(state: &SolverState) -> Result<FluxEval> {
    let g = *state.grid();
    let n = g.n();
    let dx = g.dx();
    let u = state.u.values();
    let vel = velocity(state)?;
    let mut out = vec![0.0; g.len()];
    let mut max_face_speed = 0.0f64;
    for (axis, v) in vel.iter().enumerate() {
        let v = v.values();
        for i in 0..g.len() {
            let mut idx = g.unflatten(i);
            idx[axis] = (idx[axis] + 1) % n;
            let j = g.flatten(idx);
            let vf = 0.5 * (v[i] + v[j]);
            max_face_speed = max_face_speed.max(vf.abs());
            let upwind = if vf >= 0.0 { u[i] } else { u[j] };
            let flux = state.diff.eval(upwind) * vf;
            out[i] -= flux / dx;
            out[j] += flux / dx;
        }
    }
    if let Some(k) = out.iter().position(|x| !x.is_finite()) {
        return Err(FpmeError::NonFinite(k));
    }
    Ok(FluxEval {
        divergence: Field::from_raw(g, out),
        max_face_speed,
    })
}

/// `-div F` with upwind face fluxes `F = D(u_upwind) * v_face`; the face
/// velocity is the mean of the two adjacent cell velocities.
pub fn flux_divergence(state: &SolverState) -> Result<Field> {
    Ok(flux_eval(state)?.divergence)
}

/// Largest eigenvalue magnitude of the scheme linearized about a constant
/// state with unit diffusivity: `max_k sum_a |sin(k_a dx)/dx * k_a| |k|^{-2s}`.
pub fn linear_stiffness(plan: &SpectralPlan, s: f64) -> f64 {
    let g = plan.grid();
    let dx = g.dx();
    let ks = plan.axis_wavenumbers();
    let kmag = plan.kmag();
    (0..g.len())
        .filter(|&i| kmag[i] > 0.0)
        .map(|i| {
            let idx = g.unflatten(i);
            let sym: f64 = (0..g.dim())
                .map(|a| ((ks[idx[a]] * dx).sin() / dx * ks[idx[a]]).abs())
                .sum();
            sym * kmag[i].powf(-2.0 * s)
        })
        .fold(0.0, f64::max)
}

/// Ingredients of the time-step restriction, exposed for auditing.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityBounds {
    pub max_face_speed: f64,
    pub max_diffusivity: f64,
    pub stiffness: f64,
    /// Transport limit at `cfl = 1`: `dx / (2 N max|v_face| max D)`.
    pub transport: f64,
    /// Linear limit at `cfl = 1`: `1 / (max D * stiffness)`.
    pub linear: f64,
}

impl StabilityBounds {
    pub fn limit(&self, cfl: f64) -> f64 {
        cfl * self.transport.min(self.linear)
    }
}

pub fn stability_bounds(state: &SolverState) -> Result<StabilityBounds> {
    let max_face_speed = flux_eval(state)?.max_face_speed;
    Ok(bounds_from(state, max_face_speed))
}

fn bounds_from(state: &SolverState, max_face_speed: f64) -> StabilityBounds {
    let g = state.grid();
    let (_, dmax) = state.diff.range(state.u.min(), state.u.max());
    let dmax = dmax.max(0.0);
    let stiffness = linear_stiffness(&state.plan, state.order.s);
    StabilityBounds {
        max_face_speed,
        max_diffusivity: dmax,
        stiffness,
        transport: g.dx() / (2.0 * g.dim() as f64 * max_face_speed * dmax + SPEED_FLOOR),
        linear: 1.0 / (dmax * stiffness + SPEED_FLOOR),
    }
}

/// Adaptive step: the smaller of `dt_max`, the remaining time, and `cfl`
/// times the transport and linear stability limits.
pub fn stable_dt(state: &SolverState, ctl: &StepControl) -> Result<f64> {
    let b = stability_bounds(state)?;
    let remaining = (ctl.t_end - state.t).max(0.0);
    Ok(b.limit(ctl.cfl).min(ctl.dt_max).min(remaining))
}

/// One forward Euler step. Consumes the state so the plan moves along.
pub fn step(mut state: SolverState, dt: f64) -> Result<SolverState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(FpmeError::param("dt", "must be positive and finite"));
    }
    let (dmin, _) = state.diff.range(state.u.min(), state.u.max());
    if dmin < 0.0 {
        return Err(FpmeError::NegativeDiffusivity(dmin));
    }
    let eval = flux_eval(&state)?;
    let limit = bounds_from(&state, eval.max_face_speed).limit(1.0);
    if dt > limit * (1.0 + 1e-12) {
        return Err(FpmeError::CflViolation { dt, limit });
    }
    let mut clamped = Vec::new();
    let next_step = state.step_count + 1;
    {
        let vals = state.u.values_mut();
        for (u, d) in vals.iter_mut().zip(eval.divergence.values()) {
            let next = *u + dt * d;
            if !next.is_finite() {
                return Err(FpmeError::NonFiniteState { step: next_step });
            }
            *u = if next < 0.0 && next > -CLAMP_BAND {
                clamped.push(-next);
                0.0
            } else {
                next
            };
        }
    }
    if !clamped.is_empty() {
        state.clamp_mass += compensated_sum(clamped) * state.grid().cell_volume();
    }
    state.t += dt;
    state.step_count = next_step;
    Ok(state)
}

#[derive(Debug, Clone, PartialEq)]
pub enum RunWarning {
    /// The solution exceeded `1e-8 max(u)` in the outer 5% shell of the box.
    BoundaryContamination { t: f64, shell_max: f64 },
}

#[derive(Debug, Clone)]
pub struct RunOutput {
    pub final_state: SolverState,
    pub series: Vec<DiagnosticsRecord>,
    pub warnings: Vec<RunWarning>,
}

/// Support threshold relative to the initial maximum.
pub const SUPPORT_THRESHOLD: f64 = 1e-8;

pub fn run(u0: Field, diff: DiffusivitySpec, order: FracOrder, ctl: &StepControl) -> Result<RunOutput> {
    run_with(u0, diff, order, ctl, |_, _| {})
}

/// Runs to `ctl.t_end`, calling `observer` at every recorded time
/// (including `t = 0` and `t_end`).
pub fn run_with<O>(
    u0: Field,
    diff: DiffusivitySpec,
    order: FracOrder,
    ctl: &StepControl,
    mut observer: O,
) -> Result<RunOutput>
where
    O: FnMut(&SolverState, &DiagnosticsRecord),
{
    ctl.validate()?;
    let u0_max = u0.max();
    let threshold = if u0_max > 0.0 {
        SUPPORT_THRESHOLD * u0_max
    } else {
        f64::MIN_POSITIVE
    };
    let mut state = SolverState::new(u0, diff, order)?;
    let mass0 = state.mass();
    let mut series = Vec::new();
    let mut warnings = Vec::new();

    let mut emit = |state: &SolverState,
                    series: &mut Vec<DiagnosticsRecord>,
                    warnings: &mut Vec<RunWarning>|
     -> Result<()> {
        let rec = diagnostics::record(state, threshold)?;
        if warnings.is_empty() {
            let shell_max = diagnostics::boundary_shell_max(&state.u);
            if shell_max > SUPPORT_THRESHOLD * state.u.max().max(0.0) && shell_max > 0.0 {
                warnings.push(RunWarning::BoundaryContamination {
                    t: state.t,
                    shell_max,
                });
            }
        }
        observer(state, &rec);
        series.push(rec);
        Ok(())
    };

    emit(&state, &mut series, &mut warnings)?;
    while state.t < ctl.t_end {
        let dt = stable_dt(&state, ctl)?;
        let finishing = dt >= ctl.t_end - state.t;
        state = step(state, dt)?;
        if finishing {
            state.t = ctl.t_end;
        }
        if state.clamp_mass > 1e-10 * mass0.abs() && state.clamp_mass > 0.0 {
            return Err(FpmeError::ClampMassExceeded {
                clamped: state.clamp_mass,
                mass: mass0,
            });
        }
        if finishing || state.step_count % ctl.record_every == 0 {
            emit(&state, &mut series, &mut warnings)?;
        }
    }
    Ok(RunOutput {
        final_state: state,
        series,
        warnings,
    })
}

/// Amplitude factor `A = C B^{-2+2s}` of the scaling group.
pub fn rescale_amplitude(s: f64, b: f64, c: f64) -> f64 {
    c * b.powf(-2.0 + 2.0 * s)
}

/// Samples `A u(B x, C t)` on the box of half length `R/B` with the same
/// spacing, i.e. exact decimation by `B`. `B` must be a power of two.
///
/// A state at time `t` maps to the rescaled solution at time `t / C`.
pub fn rescale_state(state: &SolverState, b: f64, c: f64) -> Result<SolverState> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(FpmeError::IncompatibleRescale(format!("C = {c} must be positive")));
    }
    if !(b >= 1.0 && b.is_finite() && b.fract() == 0.0 && (b as usize).is_power_of_two()) {
        return Err(FpmeError::IncompatibleRescale(format!(
            "B = {b} must be a power of two >= 1"
        )));
    }
    let g = *state.grid();
    let factor = b as usize;
    if g.n() / factor < 8 {
        return Err(FpmeError::IncompatibleRescale(format!(
            "n = {} cannot be decimated by {factor}",
            g.n()
        )));
    }
    let ng = GridSpec::new(g.dim(), g.n() / factor, g.half_length() / b)?;
    let a = rescale_amplitude(state.order.s, b, c);
    // x'_j = -R/B + j dx maps to B x'_j = -R + (B j) dx: the grid point B*j.
    let values: Vec<f64> = (0..ng.len())
        .map(|i| {
            let idx = ng.unflatten(i);
            let src = g.flatten([idx[0] * factor, idx[1] * factor]);
            a * state.u.values()[src]
        })
        .collect();
    let mut out = SolverState::new(Field::new(ng, values)?, state.diff, state.order)?;
    out.t = state.t / c;
    out.step_count = state.step_count;
    out.clamp_mass = state.clamp_mass * a / b.powi(g.dim() as i32);
    Ok(out)
}
