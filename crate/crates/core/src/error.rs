use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, FpmeError>;

#[derive(Debug, Error)]
pub enum FpmeError {
    #[error("dimension must be 1 or 2, got {0}")]
    InvalidDim(usize),
    #[error("points per axis must be a power of two >= 8, got {0}")]
    NotPowerOfTwo(usize),
    #[error("half length must be positive and finite, got {0}")]
    NonpositiveLength(f64),
    #[error("norm exponent must be >= 1, got {0}")]
    InvalidExponent(f64),
    #[error("fields live on different grids")]
    GridMismatch,
    #[error("field has {len} values but grid needs {expected}")]
    LengthMismatch { len: usize, expected: usize },
    #[error("non-finite value at index {0}")]
    NonFinite(usize),
    #[error("fractional order {0} is outside the supported range")]
    OutOfRangeOrder(f64),
    #[error("double sum over {0} points exceeds the 4096-point guard")]
    GridTooLarge(usize),
    #[error("bilinear form order must lie in (0,1), got {0}")]
    InvalidOrder(f64),
    #[error("input must be nonnegative (min value {0})")]
    NegativeInput(f64),
    #[error("time step {dt} exceeds the stability limit {limit}")]
    CflViolation { dt: f64, limit: f64 },
    #[error("non-finite state after step {step}")]
    NonFiniteState { step: u64 },
    #[error("clamped mass {clamped} exceeds 1e-10 of the initial mass {mass}")]
    ClampMassExceeded { clamped: f64, mass: f64 },
    #[error("diffusivity became negative (D = {0})")]
    NegativeDiffusivity(f64),
    #[error("incompatible rescale: {0}")]
    IncompatibleRescale(String),
    #[error("snapshots do not cover the window [{lo}, {hi}]")]
    WindowNotCovered { lo: f64, hi: f64 },
    #[error("series does not span a decade of decaying data: {0}")]
    InsufficientDecade(String),
    #[error("degenerate regression: {0}")]
    DegenerateRegression(String),
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: String, reason: String },
    #[error("config line {line}: {msg}")]
    Config { line: usize, msg: String },
    #[error("snapshot magic mismatch")]
    MagicMismatch,
    #[error("unsupported or truncated snapshot (version {0})")]
    VersionUnsupported(u32),
    #[error("snapshot dimension {found} does not match expected {expected}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl FpmeError {
    pub(crate) fn param(name: &str, reason: impl Into<String>) -> Self {
        FpmeError::InvalidParameter {
            name: name.to_string(),
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        FpmeError::Io {
            path: path.into(),
            source,
        }
    }
}
