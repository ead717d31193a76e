//! Binary snapshot format, little-endian:
//!
//! ```text
//! "FPME" | u32 version=1 | u32 dim | u64 n | f64 half_length | f64 s
//!        | f64 d1 | f64 d2 | f64 t | n^dim f64 values (row-major)
//! ```

use std::path::Path;

use crate::error::{FpmeError, Result};
use crate::grid::{Field, FracOrder, GridSpec};
use crate::solver::{DiffusivitySpec, SolverState};

pub const MAGIC: &[u8; 4] = b"FPME";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 4 + 4 + 4 + 8 + 8 * 5;

pub fn encode_snapshot(state: &SolverState) -> Vec<u8> {
    let g = state.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(g.dim() as u32).to_le_bytes());
    out.extend_from_slice(&(g.n() as u64).to_le_bytes());
    for v in [
        g.half_length(),
        state.order.s,
        state.diff.d1,
        state.diff.d2,
        state.t,
    ] {
        out.extend_from_slice(&v.to_le_bytes());
    }
    for v in state.u.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
    version: u32,
}

impl Reader<'_> {
    fn take<const N: usize>(&mut self) -> Result<[u8; N]> {
        let end = self.pos + N;
        let chunk = self
            .bytes
            .get(self.pos..end)
            .ok_or(FpmeError::VersionUnsupported(self.version))?;
        self.pos = end;
        Ok(chunk.try_into().expect("slice length"))
    }

    fn u32(&mut self) -> Result<u32> {
        Ok(u32::from_le_bytes(self.take()?))
    }

    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take()?))
    }

    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_le_bytes(self.take()?))
    }
}

pub fn decode_snapshot(bytes: &[u8]) -> Result<SolverState> {
    if bytes.len() < 4 || &bytes[..4] != MAGIC {
        return Err(FpmeError::MagicMismatch);
    }
    let mut r = Reader {
        bytes,
        pos: 4,
        version: 0,
    };
    let version = r.u32()?;
    if version != VERSION {
        return Err(FpmeError::VersionUnsupported(version));
    }
    r.version = version;
    let dim = r.u32()? as usize;
    let n = r.u64()? as usize;
    let half_length = r.f64()?;
    let s = r.f64()?;
    let d1 = r.f64()?;
    let d2 = r.f64()?;
    let t = r.f64()?;
    let grid = GridSpec::new(dim, n, half_length)?;
    let expected = HEADER_LEN + 8 * grid.len();
    if bytes.len() != expected {
        return Err(FpmeError::VersionUnsupported(version));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("chunk of 8")))
        .collect();
    let mut state = SolverState::new(
        Field::new(grid, values)?,
        DiffusivitySpec::new(d1, d2)?,
        FracOrder::new(s, dim)?,
    )?;
    state.t = t;
    Ok(state)
}

pub fn write_snapshot(state: &SolverState, path: &Path) -> Result<()> {
    std::fs::write(path, encode_snapshot(state)).map_err(|e| FpmeError::io(path, e))
}

pub fn read_snapshot(path: &Path) -> Result<SolverState> {
    let bytes = std::fs::read(path).map_err(|e| FpmeError::io(path, e))?;
    decode_snapshot(&bytes)
}

/// Reads a snapshot and checks it belongs to a `dim`-dimensional experiment.
pub fn read_snapshot_for_dim(path: &Path, dim: usize) -> Result<SolverState> {
    let st = read_snapshot(path)?;
    if st.grid().dim() != dim {
        return Err(FpmeError::DimensionMismatch {
            expected: dim,
            found: st.grid().dim(),
        });
    }
    Ok(st)
}
