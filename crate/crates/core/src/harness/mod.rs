//! Configuration, persistence and experiment orchestration behind the CLI.

pub mod check;
pub mod config;
pub mod output;
pub mod run;
pub mod snapshot;
pub mod sweep;

pub use check::{report, run_checks, CheckResult};
pub use config::{ExperimentConfig, InitialCondition, RawConfig};
pub use output::RunManifest;
pub use run::{cli_run, execute, RunReport};
pub use snapshot::{read_snapshot, read_snapshot_for_dim, write_snapshot};
pub use sweep::{cli_sweep, sweep, SweepConfig, SweepReport};

/// Exit code for the `check` subcommand: 0 iff every property passed.
pub fn cli_check() -> (String, i32) {
    let results = run_checks();
    let code = if results.iter().all(|r| r.passed) { 0 } else { 1 };
    (report(&results), code)
}

/// Human-readable header of a snapshot file.
pub fn info(path: &std::path::Path) -> crate::Result<String> {
    let st = read_snapshot(path)?;
    let g = st.grid();
    Ok(format!(
        "dim {}\nn {}\nhalf_length {:?}\ns {:?}\nd1 {:?}\nd2 {:?}\nt {:?}\nmass {:?}\nmax {:?}\n",
        g.dim(),
        g.n(),
        g.half_length(),
        st.order.s,
        st.diff.d1,
        st.diff.d2,
        st.t,
        st.mass(),
        st.u.max()
    ))
}
