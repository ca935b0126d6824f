//! Binary velocity snapshots.
//!
//! Layout (all little-endian): the 8 magic bytes `ZSPARSE1`, `u32 n`,
//! `f64 L`, `f64 nu`, `f64 t`, then the three `n^3` arrays `u1, u2, u3` of
//! `f64` in `(i, j, k)` row-major order.

use std::fs;
use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::field::VectorField;
use crate::grid::Grid;

pub const MAGIC: &[u8; 8] = b"ZSPARSE1";
pub const HEADER_LEN: usize = 8 + 4 + 8 + 8 + 8;

#[derive(Debug, Clone, PartialEq)]
pub struct Snapshot {
    pub nu: f64,
    pub t: f64,
    pub velocity: VectorField,
}

impl Snapshot {
    pub fn grid(&self) -> &Grid {
        self.velocity.grid()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        let g = self.grid();
        let mut out = Vec::with_capacity(HEADER_LEN + 3 * 8 * g.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(g.n() as u32).to_le_bytes());
        out.extend_from_slice(&g.length().to_le_bytes());
        out.extend_from_slice(&self.nu.to_le_bytes());
        out.extend_from_slice(&self.t.to_le_bytes());
        for c in self.velocity.components() {
            for v in c {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < HEADER_LEN {
            return Err(Error::Format(format!(
                "truncated header: {} bytes, expected at least {HEADER_LEN}",
                bytes.len()
            )));
        }
        if &bytes[..8] != MAGIC {
            return Err(Error::Format("bad magic bytes (expected ZSPARSE1)".into()));
        }
        let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
        let f = |at: usize| f64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
        let (length, nu, t) = (f(12), f(20), f(28));
        let grid = Grid::new(n, length)?;
        let expected = HEADER_LEN + 3 * 8 * grid.len();
        if bytes.len() != expected {
            return Err(Error::Format(format!(
                "payload size mismatch: expected {expected} bytes for n = {n}, got {}",
                bytes.len()
            )));
        }
        let body = &bytes[HEADER_LEN..];
        let component = |c: usize| -> Vec<f64> {
            body[c * 8 * grid.len()..(c + 1) * 8 * grid.len()]
                .chunks_exact(8)
                .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
                .collect()
        };
        let velocity = VectorField::new(grid, [component(0), component(1), component(2)])?;
        Ok(Self { nu, t, velocity })
    }

    pub fn write(&self, path: &Path) -> Result<()> {
        let mut f = fs::File::create(path)?;
        f.write_all(&self.to_bytes())?;
        Ok(())
    }

    pub fn read(path: &Path) -> Result<Self> {
        Self::from_bytes(&fs::read(path)?)
    }
}
