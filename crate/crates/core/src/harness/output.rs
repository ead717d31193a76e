//! Series CSV, run manifests and checksums.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::diagnostics::DiagnosticsRecord;
use crate::error::{FpmeError, Result};

pub fn series_header(dim: usize) -> String {
    let drift = if dim == 2 { "drift_x,drift_y" } else { "drift_x" };
    format!(
        "t,mass,l1,l2,l4,linf,entropy,half_energy,dissipation,support_radius,{drift},clamp_mass,boundary_fraction"
    )
}

/// Rust's `{:?}` for `f64` is the shortest string that round-trips.
fn real(out: &mut String, v: f64) {
    write!(out, "{v:?}").expect("write to string");
}

pub fn series_csv(dim: usize, series: &[DiagnosticsRecord]) -> String {
    let mut out = series_header(dim);
    out.push('\n');
    for r in series {
        let mut fields = vec![
            r.t,
            r.mass,
            r.l1,
            r.l2,
            r.l4,
            r.linf,
            r.entropy,
            r.half_energy,
            r.dissipation,
            r.support_radius,
        ];
        fields.extend(r.drift.iter().copied());
        fields.push(r.clamp_mass);
        fields.push(r.boundary_mass_fraction);
        for (i, v) in fields.into_iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            real(&mut out, v);
        }
        out.push('\n');
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::with_capacity(64), |mut s, b| {
            write!(s, "{b:02x}").expect("write to string");
            s
        })
}

#[derive(Debug, Clone, Serialize)]
pub struct FileEntry {
    pub path: String,
    pub bytes: u64,
    pub sha256: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct RunManifest {
    pub name: String,
    pub config: Vec<(String, String)>,
    pub code_version: String,
    pub start_unix: f64,
    pub end_unix: f64,
    pub record_count: usize,
    pub steps: u64,
    pub outside_theory: bool,
    pub regularity_fit_excluded: bool,
    pub warnings: Vec<String>,
    pub files: Vec<FileEntry>,
}

pub fn unix_now() -> f64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs_f64())
        .unwrap_or(0.0)
}

/// Writes files into one directory and remembers their checksums.
pub struct OutputDir {
    root: PathBuf,
    files: Vec<FileEntry>,
}

impl OutputDir {
    pub fn create(root: &Path) -> Result<Self> {
        std::fs::create_dir_all(root).map_err(|e| FpmeError::io(root, e))?;
        Ok(OutputDir {
            root: root.to_path_buf(),
            files: Vec::new(),
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn write(&mut self, name: &str, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(name);
        std::fs::write(&path, bytes).map_err(|e| FpmeError::io(&path, e))?;
        self.files.push(FileEntry {
            path: name.to_string(),
            bytes: bytes.len() as u64,
            sha256: sha256_hex(bytes),
        });
        Ok(path)
    }

    pub fn into_files(self) -> Vec<FileEntry> {
        self.files
    }
}

pub fn write_manifest(root: &Path, manifest: &RunManifest) -> Result<PathBuf> {
    let path = root.join("manifest.json");
    let text = serde_json::to_string_pretty(manifest).expect("manifest serializes");
    std::fs::write(&path, text + "\n").map_err(|e| FpmeError::io(&path, e))?;
    Ok(path)
}
