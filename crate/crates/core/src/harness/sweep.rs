//! Mass and order sweeps followed by exponent fits.

use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use crate::diagnostics::{fit_decay_exponent, fit_mass_exponent, ExponentFit, FitRun};
use crate::error::{FpmeError, Result};
use crate::grid::FracOrder;
use crate::harness::config::{ExperimentConfig, RawConfig, RUN_KEYS};
use crate::harness::output::OutputDir;
use crate::harness::run::{execute, RunReport};

const SWEEP_KEYS: &[&str] = &["sweep.masses", "sweep.s", "sweep.fit_window", "sweep.p"];

#[derive(Debug, Clone)]
pub struct SweepConfig {
    pub base: RawConfig,
    pub masses: Vec<f64>,
    pub orders: Vec<f64>,
    pub window: (f64, f64),
    /// Extra finite norms to fit besides the sup norm.
    pub norms: Vec<f64>,
    pub output_dir: PathBuf,
}

impl SweepConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = RawConfig::load(path)?;
        let known: Vec<&str> = RUN_KEYS.iter().chain(SWEEP_KEYS).copied().collect();
        raw.check_known(&known, &[])?;
        // Validates the base run, including the output directory.
        let base = ExperimentConfig::from_raw(raw.clone())?;
        let masses = match raw.list("sweep.masses")? {
            Some(m) => m,
            None => vec![base.initial_condition.mass().ok_or_else(|| {
                FpmeError::param("sweep.masses", "required for snapshot initial data")
            })?],
        };
        if masses.iter().any(|m| !(*m > 0.0 && m.is_finite())) {
            return Err(FpmeError::param("sweep.masses", "masses must be positive"));
        }
        if base.initial_condition.mass().is_none() && masses.len() > 1 {
            return Err(FpmeError::param("sweep.masses", "snapshot data has a fixed mass"));
        }
        let orders = raw.list("sweep.s")?.unwrap_or_else(|| vec![base.s]);
        for &s in &orders {
            FracOrder::new(s, base.grid.dim()).map_err(|e| FpmeError::param("sweep.s", e.to_string()))?;
        }
        let window = match raw.list("sweep.fit_window")? {
            None => (1.0, 10.0),
            Some(w) if w.len() == 2 => (w[0], w[1]),
            Some(_) => return Err(FpmeError::param("sweep.fit_window", "expected `lo, hi`")),
        };
        let norms = raw.list("sweep.p")?.unwrap_or_default();
        if norms.iter().any(|p| !(*p >= 1.0)) {
            return Err(FpmeError::param("sweep.p", "norm exponents must be >= 1"));
        }
        Ok(SweepConfig {
            base: raw,
            masses,
            orders,
            window,
            norms,
            output_dir: base.output_dir,
        })
    }

    fn run_config(&self, s: f64, mass: f64) -> Result<ExperimentConfig> {
        let mut raw = self.base.clone();
        raw.set("s", format!("{s:?}"));
        let name = format!("s{s:?}_m{mass:?}");
        raw.set("name", name.clone());
        let mut cfg = ExperimentConfig::from_raw(raw)?;
        cfg.initial_condition = cfg.initial_condition.with_mass(mass);
        cfg.output_dir = self.output_dir.join("runs").join(name);
        Ok(cfg)
    }
}

#[derive(Debug, Clone)]
pub struct SummaryRow {
    pub s: f64,
    pub quantity: String,
    pub fit: std::result::Result<ExponentFit, String>,
    pub regularity_excluded: bool,
    pub outside_theory: bool,
}

#[derive(Debug)]
pub struct RunStatus {
    pub s: f64,
    pub mass: f64,
    pub result: std::result::Result<RunReport, FpmeError>,
}

#[derive(Debug)]
pub struct SweepReport {
    pub runs: Vec<RunStatus>,
    pub summary: Vec<SummaryRow>,
}

impl SweepReport {
    /// 0 when every run and fit succeeded without warnings, 1 when no run
    /// succeeded, 2 otherwise.
    pub fn exit_code(&self) -> i32 {
        let ok_runs = self.runs.iter().filter(|r| r.result.is_ok()).count();
        if ok_runs == 0 {
            return 1;
        }
        let clean = ok_runs == self.runs.len()
            && self
                .runs
                .iter()
                .all(|r| r.result.as_ref().map(|x| !x.has_warnings()).unwrap_or(false))
            && self.summary.iter().all(|r| r.fit.is_ok());
        if clean {
            0
        } else {
            2
        }
    }
}

/// Worker count: `FPME_THREADS` if set, otherwise hardware parallelism.
pub fn worker_count() -> usize {
    std::env::var("FPME_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

pub fn cli_sweep(config_path: &Path) -> Result<SweepReport> {
    sweep(&SweepConfig::load(config_path)?)
}

pub fn sweep(cfg: &SweepConfig) -> Result<SweepReport> {
    let jobs: Vec<(f64, f64)> = cfg
        .orders
        .iter()
        .flat_map(|&s| cfg.masses.iter().map(move |&m| (s, m)))
        .collect();
    let next = AtomicUsize::new(0);
    let done = Mutex::new(Vec::with_capacity(jobs.len()));
    let workers = worker_count().min(jobs.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(s, mass)) = jobs.get(i) else { break };
                let result = cfg.run_config(s, mass).and_then(|c| execute(&c));
                done.lock().expect("sweep worker panicked").push((i, RunStatus { s, mass, result }));
            });
        }
    });
    let mut done = done.into_inner().expect("sweep worker panicked");
    done.sort_by_key(|(i, _)| *i);
    let runs: Vec<RunStatus> = done.into_iter().map(|(_, r)| r).collect();

    let mut summary = Vec::new();
    for &s in &cfg.orders {
        let order = FracOrder::new(s, cfg.base.req::<usize>("grid.dim")?)?;
        let fits: Vec<FitRun<'_>> = runs
            .iter()
            .filter(|r| r.s == s)
            .filter_map(|r| r.result.as_ref().ok().map(|rep| (r.mass, rep)))
            .map(|(mass, rep)| FitRun {
                mass,
                series: &rep.output.series,
            })
            .collect();
        let failed = runs.iter().filter(|r| r.s == s && r.result.is_err()).count();
        let mut push = |quantity: String, fit: Result<ExponentFit>| {
            let fit = if failed > 0 {
                Err(format!("{failed} run(s) failed"))
            } else {
                fit.map_err(|e| e.to_string())
            };
            summary.push(SummaryRow {
                s,
                quantity,
                fit,
                regularity_excluded: order.excluded_from_regularity_fit(),
                outside_theory: order.outside_theory(),
            });
        };
        let decay = |p| fit_decay_exponent(&fits, p, &order, cfg.window);
        let mass = |p| fit_mass_exponent(&fits, p, &order, cfg.window);
        push("alpha".into(), decay(f64::INFINITY));
        push("gamma".into(), mass(f64::INFINITY));
        for &p in &cfg.norms {
            push(format!("alpha_p{p}"), decay(p));
            push(format!("gamma_p{p}"), mass(p));
        }
    }

    let mut out = OutputDir::create(&cfg.output_dir)?;
    out.write("summary.csv", summary_csv(&summary).as_bytes())?;
    out.write("runs.csv", runs_csv(&runs, &cfg.output_dir).as_bytes())?;
    Ok(SweepReport { runs, summary })
}

fn clean(msg: &str) -> String {
    msg.replace([',', '\n'], ";")
}

pub fn summary_csv(rows: &[SummaryRow]) -> String {
    let mut out = String::from("s,quantity,fitted,theoretical,r_squared,status,regularity_fit,outside_theory\n");
    for r in rows {
        let regularity = if r.regularity_excluded { "excluded" } else { "included" };
        let (fitted, theoretical, r2, status) = match &r.fit {
            Ok(f) => (
                format!("{:?}", f.fitted),
                format!("{:?}", f.theoretical),
                format!("{:?}", f.r_squared),
                "ok".to_string(),
            ),
            Err(e) => (String::new(), String::new(), String::new(), format!("failed: {}", clean(e))),
        };
        out.push_str(&format!(
            "{:?},{},{fitted},{theoretical},{r2},{status},{regularity},{}\n",
            r.s, r.quantity, r.outside_theory
        ));
    }
    out
}

fn runs_csv(runs: &[RunStatus], root: &Path) -> String {
    let mut out = String::from("s,mass,status,records,warnings,dir\n");
    for r in runs {
        match &r.result {
            Ok(rep) => {
                let dir = rep.output_dir.strip_prefix(root).unwrap_or(&rep.output_dir);
                out.push_str(&format!(
                    "{:?},{:?},ok,{},{},{}\n",
                    r.s,
                    r.mass,
                    rep.manifest.record_count,
                    rep.output.warnings.len(),
                    dir.display()
                ));
            }
            Err(e) => out.push_str(&format!("{:?},{:?},failed: {},,,\n", r.s, r.mass, clean(&e.to_string()))),
        }
    }
    out
}
