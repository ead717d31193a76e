use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use fpme::harness::output::sha256_hex;
use fpme::harness::{read_snapshot, write_snapshot};
use fpme::solver::{DiffusivitySpec, SolverState};
use fpme::{make_grid, Field, FracOrder};

fn fpme(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fpme"))
        .args(args)
        .output()
        .expect("spawn fpme")
}

fn write_config(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

const GAUSSIAN: &str = "\
name = small
grid.dim = 1
grid.n = 256
grid.half_length = 16
s = 0.25
ic.kind = gaussian
ic.width = 0.5
ic.mass = 1
step.t_end = 0.5
step.record_every = 5
output.snapshot_every = 4
seed = 7
";

#[test]
fn run_writes_series_snapshots_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "a.cfg", &format!("{GAUSSIAN}output.dir = out\n"));
    let out = fpme(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let root = dir.path().join("out");
    let csv = fs::read_to_string(root.join("series.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "t,mass,l1,l2,l4,linf,entropy,half_energy,dissipation,support_radius,drift_x,clamp_mass,boundary_fraction"
    );
    let rows: Vec<&str> = lines.collect();
    assert!(rows.len() >= 3);
    assert!(rows.iter().all(|r| r.split(',').count() == 13));
    let last_t: f64 = rows.last().unwrap().split(',').next().unwrap().parse().unwrap();
    assert_eq!(last_t, 0.5);

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(root.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["record_count"].as_u64().unwrap() as usize, rows.len());
    assert_eq!(manifest["outside_theory"], false);
    let files = manifest["files"].as_array().unwrap();
    let mut listed: Vec<String> = files.iter().map(|f| f["path"].as_str().unwrap().to_string()).collect();
    for f in files {
        let bytes = fs::read(root.join(f["path"].as_str().unwrap())).unwrap();
        assert_eq!(f["sha256"].as_str().unwrap(), sha256_hex(&bytes));
    }
    let mut on_disk: Vec<String> = fs::read_dir(&root)
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .filter(|n| n != "manifest.json")
        .collect();
    listed.sort();
    on_disk.sort();
    assert_eq!(listed, on_disk);
    assert!(on_disk.iter().filter(|n| n.ends_with(".fpme")).count() >= 2);

    let snap = on_disk.iter().rev().find(|n| n.ends_with(".fpme")).unwrap();
    let info = fpme(&["info", root.join(snap).to_str().unwrap()]);
    assert_eq!(info.status.code(), Some(0));
    let text = String::from_utf8(info.stdout).unwrap();
    assert!(text.contains("dim 1") && text.contains("t 0.5"), "{text}");
}

#[test]
fn rerun_is_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = write_config(dir.path(), "a.cfg", &format!("{GAUSSIAN}output.dir = a\n"));
    let b = write_config(dir.path(), "b.cfg", &format!("{GAUSSIAN}output.dir = b\n"));
    assert_eq!(fpme(&["run", &a]).status.code(), Some(0));
    assert_eq!(fpme(&["run", &b]).status.code(), Some(0));
    for entry in fs::read_dir(dir.path().join("a")).unwrap() {
        let name = entry.unwrap().file_name();
        if name == "manifest.json" {
            continue;
        }
        assert_eq!(
            fs::read(dir.path().join("a").join(&name)).unwrap(),
            fs::read(dir.path().join("b").join(&name)).unwrap(),
            "{name:?} differs"
        );
    }
}

#[test]
fn invalid_order_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", &GAUSSIAN.replace("s = 0.25", "s = 1.5"));
    let out = fpme(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("`s`") && err.contains("line 5"), "{err}");
}

#[test]
fn parse_errors_carry_line_numbers() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.cfg", &GAUSSIAN.replace("ic.width = 0.5", "ic.width 0.5"));
    let out = fpme(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("line 7"));
    assert_eq!(fpme(&["run", "/nonexistent/config"]).status.code(), Some(1));
}

#[test]
fn boundary_contamination_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let body = GAUSSIAN
        .replace("grid.half_length = 16", "grid.half_length = 2")
        .replace("grid.n = 256", "grid.n = 64")
        .replace("ic.width = 0.5", "ic.width = 0.6");
    let cfg = write_config(dir.path(), "edge.cfg", &format!("{body}output.dir = out\n"));
    let out = fpme(&["run", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    let manifest = fs::read_to_string(dir.path().join("out/manifest.json")).unwrap();
    assert!(manifest.contains("boundary contamination"));
}

#[test]
fn snapshot_initial_data_checks_dimension() {
    let dir = tempfile::tempdir().unwrap();
    let g = make_grid(1, 32, 4.0).unwrap();
    let st = SolverState::new(
        Field::from_fn(g, |x| (-4.0 * x[0] * x[0]).exp()).unwrap(),
        DiffusivitySpec::pure(),
        FracOrder::new(0.25, 1).unwrap(),
    )
    .unwrap();
    let snap = dir.path().join("one.fpme");
    write_snapshot(&st, &snap).unwrap();
    assert_eq!(read_snapshot(&snap).unwrap().u, st.u);

    let cfg = "grid.dim = 2\ngrid.n = 32\ngrid.half_length = 4\ns = 0.25\nic.kind = snapshot\nic.path = one.fpme\nstep.t_end = 0.1\n";
    let path = write_config(dir.path(), "two.cfg", cfg);
    let out = fpme(&["run", &path]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8(out.stderr).unwrap().contains("dimension"));

    let cfg = "grid.dim = 1\ngrid.n = 32\ngrid.half_length = 4\ns = 0.25\nic.kind = snapshot\nic.path = one.fpme\nstep.t_end = 0.1\noutput.dir = cont\n";
    let path = write_config(dir.path(), "one.cfg", cfg);
    assert_eq!(fpme(&["run", &path]).status.code(), Some(0));
}

const SWEEP: &str = "\
grid.dim = 1
grid.n = 512
grid.half_length = 32
s = 0.25
ic.kind = gaussian
ic.width = 0.25
ic.mass = 1
step.t_end = 4
step.record_every = 10
sweep.masses = 0.5, 1, 2
sweep.fit_window = 0.3, 3
output.dir = sweep
";

fn summary_rows(dir: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(dir.join("sweep/summary.csv"))
        .unwrap()
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn sweep_summary_shape() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.cfg", SWEEP);
    let out = fpme(&["sweep", &cfg]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rows = summary_rows(dir.path());
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0][1], "alpha");
    assert_eq!(rows[1][1], "gamma");
    assert!(rows.iter().all(|r| r[5] == "ok" && r[6] == "included"));
    let runs = fs::read_to_string(dir.path().join("sweep/runs.csv")).unwrap();
    assert_eq!(runs.lines().count(), 4);
    for m in ["0.5", "1.0", "2.0"] {
        assert!(dir.path().join(format!("sweep/runs/s0.25_m{m}/series.csv")).exists());
    }
}

#[test]
fn sweep_marks_half_order_excluded_and_norm_rows() {
    let dir = tempfile::tempdir().unwrap();
    let body = SWEEP.replace("sweep.masses = 0.5, 1, 2", "sweep.masses = 1, 2\nsweep.s = 0.25, 0.5\nsweep.p = 2");
    let cfg = write_config(dir.path(), "sweep.cfg", &body);
    let out = std::process::Command::new(env!("CARGO_BIN_EXE_fpme"))
        .args(["sweep", &cfg])
        .env("FPME_THREADS", "1")
        .output()
        .unwrap();
    assert!(matches!(out.status.code(), Some(0) | Some(2)));
    let rows = summary_rows(dir.path());
    assert_eq!(rows.len(), 8);
    for r in &rows {
        let expected = if r[0] == "0.5" { "excluded" } else { "included" };
        assert_eq!(r[6], expected);
        assert_eq!(r[7], if r[0] == "0.5" { "true" } else { "false" });
    }
    assert!(rows.iter().any(|r| r[1] == "alpha_p2"));
}

#[test]
fn sweep_with_single_mass_marks_gamma_failed() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sweep.cfg", &SWEEP.replace("0.5, 1, 2", "1"));
    assert_eq!(fpme(&["sweep", &cfg]).status.code(), Some(2));
    let rows = summary_rows(dir.path());
    assert_eq!(rows[0][5], "ok");
    assert!(rows[1][5].starts_with("failed"));
}

#[test]
fn check_is_green_and_deterministic() {
    let a = fpme(&["check"]);
    let b = fpme(&["check"]);
    let text = String::from_utf8(a.stdout.clone()).unwrap();
    if cfg!(feature = "fault-injection") {
        assert_eq!(a.status.code(), Some(1));
        assert!(text.contains("FAIL pressure_vs_kernel"));
        assert!(text.contains("FAIL drift_vs_kernel"));
    } else {
        assert_eq!(a.status.code(), Some(0), "{text}");
        assert!(!text.contains("FAIL"));
    }
    assert_eq!(a.stdout, b.stdout);
}
