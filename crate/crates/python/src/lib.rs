//! Python bindings. Fields cross the boundary as flat row-major lists of
//! floats paired with a `Grid`.

use std::path::PathBuf;

use pyo3::create_exception;
use pyo3::exceptions::PyException;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use fpme::diagnostics::{self, DiagnosticsRecord, FitRun};
use fpme::fracops::{self, SpectralPlan};
use fpme::solver::{self, DiffusivitySpec, RunWarning, StepControl};
use fpme::{Field, FracOrder, GridSpec};

create_exception!(fpme_py, FpmeError, PyException);

fn py_err(e: fpme::FpmeError) -> PyErr {
    FpmeError::new_err(e.to_string())
}

#[pyclass(name = "Grid", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyGrid {
    inner: GridSpec,
}

#[pymethods]
impl PyGrid {
    #[new]
    fn new(dim: usize, n: usize, half_length: f64) -> PyResult<Self> {
        Ok(PyGrid {
            inner: GridSpec::new(dim, n, half_length).map_err(py_err)?,
        })
    }

    #[getter]
    fn dim(&self) -> usize {
        self.inner.dim()
    }

    #[getter]
    fn n(&self) -> usize {
        self.inner.n()
    }

    #[getter]
    fn half_length(&self) -> f64 {
        self.inner.half_length()
    }

    #[getter]
    fn dx(&self) -> f64 {
        self.inner.dx()
    }

    fn __len__(&self) -> usize {
        self.inner.len()
    }

    /// Coordinates along one axis.
    fn coords(&self) -> Vec<f64> {
        (0..self.inner.n()).map(|i| self.inner.coord(i)).collect()
    }

    /// Coordinates of every grid point in storage order.
    fn points(&self) -> Vec<Vec<f64>> {
        (0..self.inner.len())
            .map(|i| self.inner.point(i)[..self.inner.dim()].to_vec())
            .collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "Grid(dim={}, n={}, half_length={})",
            self.inner.dim(),
            self.inner.n(),
            self.inner.half_length()
        )
    }
}

impl PyGrid {
    fn field(&self, values: Vec<f64>) -> PyResult<Field> {
        Field::new(self.inner, values).map_err(py_err)
    }
}

#[pyclass(name = "Order", frozen, from_py_object)]
#[derive(Clone, Copy)]
struct PyOrder {
    inner: FracOrder,
}

#[pymethods]
impl PyOrder {
    #[new]
    fn new(s: f64, dim: usize) -> PyResult<Self> {
        Ok(PyOrder {
            inner: FracOrder::new(s, dim).map_err(py_err)?,
        })
    }

    #[getter]
    fn s(&self) -> f64 {
        self.inner.s
    }

    #[getter]
    fn alpha(&self) -> f64 {
        self.inner.alpha
    }

    #[getter]
    fn gamma(&self) -> f64 {
        self.inner.gamma
    }

    fn alpha_p(&self, p: f64) -> f64 {
        self.inner.alpha_p(p)
    }

    fn gamma_p(&self, p: f64) -> f64 {
        self.inner.gamma_p(p)
    }

    #[getter]
    fn outside_theory(&self) -> bool {
        self.inner.outside_theory()
    }
}

#[pyfunction]
fn integrate(grid: PyGrid, values: Vec<f64>) -> PyResult<f64> {
    Ok(fpme::integrate(&grid.field(values)?))
}

#[pyfunction]
fn lp_norm(grid: PyGrid, values: Vec<f64>, p: f64) -> PyResult<f64> {
    fpme::lp_norm(&grid.field(values)?, p).map_err(py_err)
}

#[pyfunction]
fn frac_laplacian(grid: PyGrid, values: Vec<f64>, s: f64) -> PyResult<Vec<f64>> {
    let plan = SpectralPlan::new(grid.inner);
    Ok(fracops::frac_laplacian(&grid.field(values)?, s, &plan)
        .map_err(py_err)?
        .into_values())
}

#[pyfunction]
fn pressure(grid: PyGrid, values: Vec<f64>, s: f64) -> PyResult<Vec<f64>> {
    let plan = SpectralPlan::new(grid.inner);
    Ok(fracops::pressure(&grid.field(values)?, s, &plan)
        .map_err(py_err)?
        .into_values())
}

#[pyfunction]
fn half_energy(grid: PyGrid, values: Vec<f64>, s: f64) -> PyResult<f64> {
    let plan = SpectralPlan::new(grid.inner);
    fracops::half_energy(&grid.field(values)?, s, &plan).map_err(py_err)
}

#[pyfunction]
fn bilinear_difference(grid: PyGrid, v: Vec<f64>, w: Vec<f64>, r: f64) -> PyResult<f64> {
    fracops::bilinear_difference(&grid.field(v)?, &grid.field(w)?, r).map_err(py_err)
}

#[pyfunction]
fn bilinear_gradient(grid: PyGrid, v: Vec<f64>, w: Vec<f64>, r: f64) -> PyResult<f64> {
    let plan = SpectralPlan::new(grid.inner);
    fracops::bilinear_gradient(&grid.field(v)?, &grid.field(w)?, r, &plan).map_err(py_err)
}

#[pyfunction]
fn riesz_constant(dim: usize, s: f64) -> PyResult<f64> {
    fracops::riesz_constant(dim, s).map_err(py_err)
}

#[pyfunction]
fn drift_velocity(grid: PyGrid, values: Vec<f64>, s: f64) -> PyResult<Vec<f64>> {
    let plan = SpectralPlan::new(grid.inner);
    diagnostics::drift_velocity(&grid.field(values)?, s, &plan).map_err(py_err)
}

fn record_dict<'py>(py: Python<'py>, r: &DiagnosticsRecord) -> PyResult<Bound<'py, PyDict>> {
    let d = PyDict::new(py);
    d.set_item("t", r.t)?;
    d.set_item("step", r.step)?;
    d.set_item("mass", r.mass)?;
    d.set_item("l1", r.l1)?;
    d.set_item("l2", r.l2)?;
    d.set_item("l4", r.l4)?;
    d.set_item("linf", r.linf)?;
    d.set_item("min", r.min)?;
    d.set_item("entropy", r.entropy)?;
    d.set_item("half_energy", r.half_energy)?;
    d.set_item("dissipation", r.dissipation)?;
    d.set_item("support_radius", r.support_radius)?;
    d.set_item("drift", r.drift.clone())?;
    d.set_item("clamp_mass", r.clamp_mass)?;
    d.set_item("boundary_fraction", r.boundary_mass_fraction)?;
    Ok(d)
}

fn record_from(d: &Bound<'_, PyDict>) -> PyResult<DiagnosticsRecord> {
    let get = |k: &str| -> PyResult<f64> {
        d.get_item(k)?
            .ok_or_else(|| FpmeError::new_err(format!("record lacks `{k}`")))?
            .extract()
    };
    let opt = |k: &str| -> PyResult<f64> {
        match d.get_item(k)? {
            Some(v) => v.extract(),
            None => Ok(0.0),
        }
    };
    Ok(DiagnosticsRecord {
        t: get("t")?,
        step: opt("step")? as u64,
        mass: opt("mass")?,
        l1: opt("l1")?,
        l2: opt("l2")?,
        l4: opt("l4")?,
        linf: get("linf")?,
        min: opt("min")?,
        entropy: opt("entropy")?,
        half_energy: opt("half_energy")?,
        dissipation: opt("dissipation")?,
        support_radius: opt("support_radius")?,
        drift: Vec::new(),
        clamp_mass: opt("clamp_mass")?,
        boundary_mass_fraction: opt("boundary_fraction")?,
    })
}

/// Result of `run`: final field, diagnostics series and warnings.
#[pyclass(name = "RunResult", frozen)]
struct PyRunResult {
    #[pyo3(get)]
    values: Vec<f64>,
    #[pyo3(get)]
    t: f64,
    #[pyo3(get)]
    steps: u64,
    #[pyo3(get)]
    warnings: Vec<String>,
    series: Vec<DiagnosticsRecord>,
}

#[pymethods]
impl PyRunResult {
    #[getter]
    fn series<'py>(&self, py: Python<'py>) -> PyResult<Vec<Bound<'py, PyDict>>> {
        self.series.iter().map(|r| record_dict(py, r)).collect()
    }
}

#[pyfunction]
#[pyo3(signature = (grid, values, s, t_end, d1=0.0, d2=1.0, cfl=0.4, dt_max=0.05, record_every=10))]
#[allow(clippy::too_many_arguments)]
fn run(
    py: Python<'_>,
    grid: PyGrid,
    values: Vec<f64>,
    s: f64,
    t_end: f64,
    d1: f64,
    d2: f64,
    cfl: f64,
    dt_max: f64,
    record_every: u64,
) -> PyResult<PyRunResult> {
    let u0 = grid.field(values)?;
    let order = FracOrder::new(s, grid.inner.dim()).map_err(py_err)?;
    let diff = DiffusivitySpec::new(d1, d2).map_err(py_err)?;
    let ctl = StepControl {
        cfl,
        dt_max,
        t_end,
        record_every,
    };
    let out = py
        .detach(|| solver::run(u0, diff, order, &ctl))
        .map_err(py_err)?;
    Ok(PyRunResult {
        t: out.final_state.t,
        steps: out.final_state.step_count,
        warnings: out
            .warnings
            .iter()
            .map(|w| match w {
                RunWarning::BoundaryContamination { t, .. } => format!("boundary contamination at t = {t}"),
            })
            .collect(),
        values: out.final_state.u.into_values(),
        series: out.series,
    })
}

/// Pooled exponent fits over runs with different masses.
///
/// Returns `{"alpha": (fitted, theoretical, r2), "gamma": (...)}`.
#[pyfunction]
#[pyo3(signature = (series, masses, s, dim, p=f64::INFINITY, window=(1.0, 10.0)))]
fn fit_exponents<'py>(
    py: Python<'py>,
    series: Vec<Vec<Bound<'py, PyDict>>>,
    masses: Vec<f64>,
    s: f64,
    dim: usize,
    p: f64,
    window: (f64, f64),
) -> PyResult<Bound<'py, PyDict>> {
    if series.len() != masses.len() {
        return Err(FpmeError::new_err("one mass per series is required"));
    }
    let order = FracOrder::new(s, dim).map_err(py_err)?;
    let records: Vec<Vec<DiagnosticsRecord>> = series
        .iter()
        .map(|s| {
            s.iter()
                .map(|d| {
                    let mut r = record_from(d)?;
                    // Finite norms are looked up by exponent.
                    if p.is_finite() {
                        let key = format!("l{}", p as u32);
                        if let Some(v) = d.get_item(key.as_str())? {
                            match p as u32 {
                                1 => r.l1 = v.extract()?,
                                2 => r.l2 = v.extract()?,
                                4 => r.l4 = v.extract()?,
                                _ => {}
                            }
                        }
                    }
                    Ok(r)
                })
                .collect::<PyResult<Vec<_>>>()
        })
        .collect::<PyResult<_>>()?;
    let runs: Vec<FitRun<'_>> = records
        .iter()
        .zip(&masses)
        .map(|(r, &mass)| FitRun { mass, series: r })
        .collect();
    let out = PyDict::new(py);
    let alpha = diagnostics::fit_decay_exponent(&runs, p, &order, window).map_err(py_err)?;
    out.set_item("alpha", (alpha.fitted, alpha.theoretical, alpha.r_squared))?;
    if masses.len() > 1 {
        let gamma = diagnostics::fit_mass_exponent(&runs, p, &order, window).map_err(py_err)?;
        out.set_item("gamma", (gamma.fitted, gamma.theoretical, gamma.r_squared))?;
    }
    Ok(out)
}

/// Reads a snapshot into `(grid, values, metadata)`.
#[pyfunction]
fn read_snapshot<'py>(py: Python<'py>, path: PathBuf) -> PyResult<(PyGrid, Vec<f64>, Bound<'py, PyDict>)> {
    let st = fpme::harness::read_snapshot(&path).map_err(py_err)?;
    let meta = PyDict::new(py);
    meta.set_item("t", st.t)?;
    meta.set_item("s", st.order.s)?;
    meta.set_item("d1", st.diff.d1)?;
    meta.set_item("d2", st.diff.d2)?;
    Ok((PyGrid { inner: *st.grid() }, st.u.into_values(), meta))
}

/// Runs an experiment config; returns the output directory and warnings.
#[pyfunction]
fn run_config(py: Python<'_>, path: PathBuf) -> PyResult<(String, Vec<String>)> {
    let rep = py.detach(|| fpme::harness::cli_run(&path)).map_err(py_err)?;
    Ok((rep.output_dir.display().to_string(), rep.manifest.warnings))
}

/// The property suite; returns `(report_text, all_passed)`.
#[pyfunction]
fn check(py: Python<'_>) -> (String, bool) {
    let (text, code) = py.detach(fpme::harness::cli_check);
    (text, code == 0)
}

#[pymodule]
fn fpme_py(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("FpmeError", m.py().get_type::<FpmeError>())?;
    m.add_class::<PyGrid>()?;
    m.add_class::<PyOrder>()?;
    m.add_class::<PyRunResult>()?;
    m.add_function(wrap_pyfunction!(integrate, m)?)?;
    m.add_function(wrap_pyfunction!(lp_norm, m)?)?;
    m.add_function(wrap_pyfunction!(frac_laplacian, m)?)?;
    m.add_function(wrap_pyfunction!(pressure, m)?)?;
    m.add_function(wrap_pyfunction!(half_energy, m)?)?;
    m.add_function(wrap_pyfunction!(bilinear_difference, m)?)?;
    m.add_function(wrap_pyfunction!(bilinear_gradient, m)?)?;
    m.add_function(wrap_pyfunction!(riesz_constant, m)?)?;
    m.add_function(wrap_pyfunction!(drift_velocity, m)?)?;
    m.add_function(wrap_pyfunction!(run, m)?)?;
    m.add_function(wrap_pyfunction!(fit_exponents, m)?)?;
    m.add_function(wrap_pyfunction!(read_snapshot, m)?)?;
    m.add_function(wrap_pyfunction!(run_config, m)?)?;
    m.add_function(wrap_pyfunction!(check, m)?)?;
    Ok(())
}
