//! Flat `key = value` configuration files. `#` starts a comment; nested
//! groups use dotted keys (`grid.n = 512`).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::error::{FpmeError, Result};
use crate::grid::{integrate, Field, FracOrder, GridSpec};
use crate::harness::snapshot::read_snapshot;
use crate::solver::{DiffusivitySpec, StepControl};

/// Parsed key/value pairs with the line each key came from.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
    base_dir: PathBuf,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut entries = BTreeMap::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| FpmeError::Config {
                line,
                msg: format!("expected `key = value`, found `{content}`"),
            })?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '.' || c == '_') {
                return Err(FpmeError::Config {
                    line,
                    msg: format!("invalid key `{key}`"),
                });
            }
            if entries
                .insert(key.to_string(), (value.trim().to_string(), line))
                .is_some()
            {
                return Err(FpmeError::Config {
                    line,
                    msg: format!("duplicate key `{key}`"),
                });
            }
        }
        Ok(RawConfig {
            entries,
            base_dir: PathBuf::from("."),
        })
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| FpmeError::io(path, e))?;
        let mut cfg = RawConfig::parse(&text)?;
        cfg.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(cfg)
    }

    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        self.entries.insert(key.to_string(), (value.into(), 0));
    }

    pub fn entries(&self) -> impl Iterator<Item = (&str, &str)> {
        self.entries.iter().map(|(k, (v, _))| (k.as_str(), v.as_str()))
    }

    fn line_of(&self, key: &str) -> usize {
        self.entries.get(key).map(|e| e.1).unwrap_or(0)
    }

    fn err(&self, key: &str, msg: impl std::fmt::Display) -> FpmeError {
        FpmeError::Config {
            line: self.line_of(key),
            msg: format!("`{key}`: {msg}"),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|e| e.0.as_str())
    }

    fn require(&self, key: &str) -> Result<&str> {
        self.get(key).ok_or_else(|| FpmeError::Config {
            line: 0,
            msg: format!("missing required key `{key}`"),
        })
    }

    fn parse_value<T: std::str::FromStr>(&self, key: &str, value: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        value
            .parse::<T>()
            .map_err(|e| self.err(key, format!("cannot parse `{value}`: {e}")))
    }

    pub fn req<T: std::str::FromStr>(&self, key: &str) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        let v = self.require(key)?;
        self.parse_value(key, v)
    }

    pub fn opt<T: std::str::FromStr>(&self, key: &str, default: T) -> Result<T>
    where
        T::Err: std::fmt::Display,
    {
        match self.get(key) {
            Some(v) => self.parse_value(key, v),
            None => Ok(default),
        }
    }

    pub fn list(&self, key: &str) -> Result<Option<Vec<f64>>> {
        match self.get(key) {
            None => Ok(None),
            Some(v) => v
                .split(',')
                .map(|p| self.parse_value::<f64>(key, p.trim()))
                .collect::<Result<Vec<_>>>()
                .map(Some),
        }
    }

    /// Rejects keys outside `known` (exact) and `prefixes`.
    pub fn check_known(&self, known: &[&str], prefixes: &[&str]) -> Result<()> {
        for (k, (_, line)) in &self.entries {
            if !known.contains(&k.as_str()) && !prefixes.iter().any(|p| k.starts_with(p)) {
                return Err(FpmeError::Config {
                    line: *line,
                    msg: format!("unknown key `{k}`"),
                });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialCondition {
    Gaussian {
        center: Vec<f64>,
        width: f64,
        mass: f64,
    },
    Box {
        center: Vec<f64>,
        half_width: f64,
        mass: f64,
    },
    TwoBumps {
        centers: [Vec<f64>; 2],
        width: f64,
        masses: [f64; 2],
    },
    FromSnapshot(PathBuf),
}

impl InitialCondition {
    /// Samples the initial data; analytic profiles are normalized so the
    /// discrete mass equals the requested mass.
    pub fn sample(&self, grid: GridSpec) -> Result<Field> {
        match self {
            InitialCondition::Gaussian {
                center,
                width,
                mass,
            } => normalized(gaussian(grid, center, *width)?, *mass),
            InitialCondition::Box {
                center,
                half_width,
                mass,
            } => {
                let f = Field::from_fn(grid, |x| {
                    let inside = x
                        .iter()
                        .zip(center)
                        .all(|(xi, ci)| (xi - ci).abs() <= *half_width * (1.0 + 1e-12));
                    if inside {
                        1.0
                    } else {
                        0.0
                    }
                })?;
                normalized(f, *mass)
            }
            InitialCondition::TwoBumps {
                centers,
                width,
                masses,
            } => {
                let a = normalized(gaussian(grid, &centers[0], *width)?, masses[0])?;
                let b = normalized(gaussian(grid, &centers[1], *width)?, masses[1])?;
                a.add(&b)
            }
            InitialCondition::FromSnapshot(path) => {
                let st = read_snapshot(path)?;
                if st.grid().dim() != grid.dim() {
                    return Err(FpmeError::DimensionMismatch {
                        expected: grid.dim(),
                        found: st.grid().dim(),
                    });
                }
                if *st.grid() != grid {
                    return Err(FpmeError::param(
                        "ic.path",
                        "snapshot grid differs from grid.* settings",
                    ));
                }
                Ok(st.u)
            }
        }
    }

    pub fn mass(&self) -> Option<f64> {
        match self {
            InitialCondition::Gaussian { mass, .. } | InitialCondition::Box { mass, .. } => Some(*mass),
            InitialCondition::TwoBumps { masses, .. } => Some(masses[0] + masses[1]),
            InitialCondition::FromSnapshot(_) => None,
        }
    }

    pub fn with_mass(&self, m: f64) -> InitialCondition {
        let mut out = self.clone();
        match &mut out {
            InitialCondition::Gaussian { mass, .. } | InitialCondition::Box { mass, .. } => *mass = m,
            InitialCondition::TwoBumps { masses, .. } => {
                let total = masses[0] + masses[1];
                masses[0] *= m / total;
                masses[1] *= m / total;
            }
            InitialCondition::FromSnapshot(_) => {}
        }
        out
    }
}

fn gaussian(grid: GridSpec, center: &[f64], width: f64) -> Result<Field> {
    Field::from_fn(grid, |x| {
        let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b).powi(2)).sum();
        (-r2 / (2.0 * width * width)).exp()
    })
}

fn normalized(f: Field, mass: f64) -> Result<Field> {
    let m = integrate(&f);
    if !(m > 0.0) {
        return Err(FpmeError::param("ic", "profile has no mass on this grid"));
    }
    Ok(f.scale(mass / m))
}

#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub name: String,
    pub grid: GridSpec,
    pub s: f64,
    pub diffusivity: DiffusivitySpec,
    pub initial_condition: InitialCondition,
    pub step: StepControl,
    pub output_dir: PathBuf,
    /// Write a snapshot every this many records (0: initial and final only).
    pub snapshot_every: u64,
    pub seed: u64,
    pub raw: RawConfig,
}

pub(crate) const RUN_KEYS: &[&str] = &[
    "name",
    "grid.dim",
    "grid.n",
    "grid.half_length",
    "s",
    "diffusivity.d1",
    "diffusivity.d2",
    "diffusivity.normalize",
    "ic.kind",
    "ic.center",
    "ic.center2",
    "ic.width",
    "ic.half_width",
    "ic.mass",
    "ic.mass2",
    "ic.path",
    "step.cfl",
    "step.dt_max",
    "step.t_end",
    "step.record_every",
    "output.dir",
    "output.snapshot_every",
    "seed",
];

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let raw = RawConfig::load(path)?;
        raw.check_known(RUN_KEYS, &[])?;
        ExperimentConfig::from_raw(raw)
    }

    pub fn from_raw(raw: RawConfig) -> Result<Self> {
        let dim: usize = raw.req("grid.dim")?;
        let n: usize = raw.req("grid.n")?;
        let half_length: f64 = raw.req("grid.half_length")?;
        let grid = GridSpec::new(dim, n, half_length).map_err(|e| raw.err("grid.*", e))?;

        let s: f64 = raw.req("s")?;
        FracOrder::new(s, dim).map_err(|e| raw.err("s", e))?;

        let mut diffusivity = DiffusivitySpec::new(raw.opt("diffusivity.d1", 0.0)?, raw.opt("diffusivity.d2", 1.0)?)
            .map_err(|e| raw.err("diffusivity.d1", e))?;
        if raw.opt("diffusivity.normalize", false)? {
            diffusivity = diffusivity
                .normalized()
                .map_err(|e| raw.err("diffusivity.normalize", e))?;
        }

        let initial_condition = parse_ic(&raw, dim)?;

        let step = StepControl {
            cfl: raw.opt("step.cfl", 0.4)?,
            dt_max: raw.opt("step.dt_max", 0.05)?,
            t_end: raw.req("step.t_end")?,
            record_every: raw.opt("step.record_every", 10)?,
        };
        step.validate().map_err(|e| match &e {
            FpmeError::InvalidParameter { name, .. } => raw.err(name, e.to_string()),
            _ => raw.err("step.*", e),
        })?;

        let out: String = raw.opt("output.dir", "out".to_string())?;
        let output_dir = resolve(&raw.base_dir, &out);
        Ok(ExperimentConfig {
            name: raw.opt("name", "run".to_string())?,
            grid,
            s,
            diffusivity,
            initial_condition,
            step,
            output_dir,
            snapshot_every: raw.opt("output.snapshot_every", 0)?,
            seed: raw.opt("seed", 0)?,
            raw,
        })
    }

    pub fn order(&self) -> FracOrder {
        FracOrder::new(self.s, self.grid.dim()).expect("validated at load")
    }
}

fn resolve(base: &Path, p: &str) -> PathBuf {
    let path = PathBuf::from(p);
    if path.is_absolute() {
        path
    } else {
        base.join(path)
    }
}

fn parse_point(raw: &RawConfig, key: &str, dim: usize) -> Result<Vec<f64>> {
    match raw.list(key)? {
        None => Ok(vec![0.0; dim]),
        Some(v) if v.len() == dim => Ok(v),
        Some(v) => Err(raw.err(key, format!("expected {dim} coordinates, found {}", v.len()))),
    }
}

fn positive(raw: &RawConfig, key: &str) -> Result<f64> {
    let v: f64 = raw.req(key)?;
    if !(v > 0.0 && v.is_finite()) {
        return Err(raw.err(key, format!("must be positive, got {v}")));
    }
    Ok(v)
}

fn parse_ic(raw: &RawConfig, dim: usize) -> Result<InitialCondition> {
    let kind: String = raw.req("ic.kind")?;
    match kind.as_str() {
        "gaussian" => Ok(InitialCondition::Gaussian {
            center: parse_point(raw, "ic.center", dim)?,
            width: positive(raw, "ic.width")?,
            mass: positive(raw, "ic.mass")?,
        }),
        "box" => Ok(InitialCondition::Box {
            center: parse_point(raw, "ic.center", dim)?,
            half_width: positive(raw, "ic.half_width")?,
            mass: positive(raw, "ic.mass")?,
        }),
        "two_bumps" => Ok(InitialCondition::TwoBumps {
            centers: [
                parse_point(raw, "ic.center", dim)?,
                parse_point(raw, "ic.center2", dim)?,
            ],
            width: positive(raw, "ic.width")?,
            masses: [positive(raw, "ic.mass")?, positive(raw, "ic.mass2")?],
        }),
        "snapshot" | "from_snapshot" => {
            let p: String = raw.req("ic.path")?;
            let path = resolve(&raw.base_dir, &p);
            if !path.exists() {
                return Err(raw.err("ic.path", format!("{} does not exist", path.display())));
            }
            Ok(InitialCondition::FromSnapshot(path))
        }
        other => Err(raw.err("ic.kind", format!("unknown initial condition `{other}`"))),
    }
}
