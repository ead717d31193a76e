use std::path::{Path, PathBuf};

use crate::error::Result;
use crate::harness::config::ExperimentConfig;
use crate::harness::output::{series_csv, unix_now, write_manifest, OutputDir, RunManifest};
use crate::harness::snapshot::encode_snapshot;
use crate::solver::{run_with, RunOutput, RunWarning};

#[derive(Debug, Clone)]
pub struct RunReport {
    pub output_dir: PathBuf,
    pub manifest: RunManifest,
    pub output: RunOutput,
}

impl RunReport {
    pub fn has_warnings(&self) -> bool {
        !self.output.warnings.is_empty()
    }
}

pub fn describe_warning(w: &RunWarning) -> String {
    match w {
        RunWarning::BoundaryContamination { t, shell_max } => {
            format!("boundary contamination at t = {t:?} (shell max {shell_max:e})")
        }
    }
}

pub fn cli_run(config_path: &Path) -> Result<RunReport> {
    execute(&ExperimentConfig::load(config_path)?)
}

/// Runs one experiment and writes `series.csv`, snapshots and
/// `manifest.json` into its output directory.
pub fn execute(cfg: &ExperimentConfig) -> Result<RunReport> {
    let start = unix_now();
    let u0 = cfg.initial_condition.sample(cfg.grid)?;
    let mut snapshots: Vec<(u64, Vec<u8>)> = Vec::new();
    let mut n_records = 0u64;
    let every = cfg.snapshot_every;
    let output = run_with(u0, cfg.diffusivity, cfg.order(), &cfg.step, |st, _| {
        let due = n_records == 0 || (every > 0 && n_records.is_multiple_of(every));
        if due || st.t >= cfg.step.t_end {
            snapshots.push((n_records, encode_snapshot(st)));
        }
        n_records += 1;
    })?;

    let mut dir = OutputDir::create(&cfg.output_dir)?;
    dir.write("series.csv", series_csv(cfg.grid.dim(), &output.series).as_bytes())?;
    for (idx, bytes) in &snapshots {
        dir.write(&format!("snapshot_{idx:06}.fpme"), bytes)?;
    }
    let order = cfg.order();
    let manifest = RunManifest {
        name: cfg.name.clone(),
        config: cfg
            .raw
            .entries()
            .map(|(k, v)| (k.to_string(), v.to_string()))
            .collect(),
        code_version: env!("CARGO_PKG_VERSION").to_string(),
        start_unix: start,
        end_unix: unix_now(),
        record_count: output.series.len(),
        steps: output.final_state.step_count,
        outside_theory: order.outside_theory(),
        regularity_fit_excluded: order.excluded_from_regularity_fit(),
        warnings: output.warnings.iter().map(describe_warning).collect(),
        files: dir.into_files(),
    };
    write_manifest(&cfg.output_dir, &manifest)?;
    Ok(RunReport {
        output_dir: cfg.output_dir.clone(),
        manifest,
        output,
    })
}
