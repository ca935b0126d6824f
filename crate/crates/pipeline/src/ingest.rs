//! Conversion of raw velocity dumps into snapshots.
//!
//! A raw file holds interleaved little-endian `f64` triples `(u1, u2, u3)`,
//! one per grid point in `(i, j, k)` row-major order. Its sidecar
//! `<file>.hdr` is a text file with `n`, `L`, `nu` and `t` as `key = value`
//! lines.

use std::path::{Path, PathBuf};

use serde::Serialize;
use zsparse_core::field::SpectralVectorField;
use zsparse_core::operators::max_norm;
use zsparse_core::snapshot::Snapshot;
use zsparse_core::{Grid, VectorField};

use crate::error::{PipelineError, Result};
use crate::output::{display_name, write_file};

/// Relative divergence above which a warning is logged.
pub const DIVERGENCE_WARN: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct RawHeader {
    pub n: usize,
    pub length: f64,
    pub nu: f64,
    pub t: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct IngestReport {
    pub source: String,
    pub snapshot: String,
    pub n: usize,
    pub length: f64,
    pub nu: f64,
    pub t: f64,
    /// `max |k . u_k| / ||u||_inf` over normalized coefficients.
    pub divergence: f64,
    pub solenoidal: bool,
}

pub fn header_path(raw: &Path) -> PathBuf {
    let mut s = raw.as_os_str().to_owned();
    s.push(".hdr");
    PathBuf::from(s)
}

pub fn parse_header(path: &Path, text: &str) -> Result<RawHeader> {
    let bad = |message: String| PipelineError::Schema { path: path.to_path_buf(), message };
    let (mut n, mut length, mut nu, mut t) = (None, None, None, None);
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .map(|(k, v)| (k.trim(), v.trim()))
            .ok_or_else(|| bad(format!("line {}: expected `key = value`", i + 1)))?;
        let num = |v: &str| v.parse::<f64>().map_err(|_| bad(format!("line {}: cannot parse `{v}`", i + 1)));
        match k {
            "n" => n = Some(v.parse::<usize>().map_err(|_| bad(format!("line {}: cannot parse `{v}`", i + 1)))?),
            "L" | "length" => length = Some(num(v)?),
            "nu" => nu = Some(num(v)?),
            "t" => t = Some(num(v)?),
            _ => return Err(bad(format!("line {}: unknown key `{k}`", i + 1))),
        }
    }
    let need = |v: Option<f64>, k: &str| v.ok_or_else(|| bad(format!("missing `{k}`")));
    Ok(RawHeader {
        n: n.ok_or_else(|| bad("missing `n`".into()))?,
        length: need(length, "L")?,
        nu: need(nu, "nu")?,
        t: need(t, "t")?,
    })
}

/// Decodes an interleaved payload; the size must match the header exactly.
pub fn decode(path: &Path, header: &RawHeader, payload: &[u8]) -> Result<Snapshot> {
    let grid = Grid::new(header.n, header.length)?;
    let expected = 3 * 8 * grid.len();
    if payload.len() != expected {
        return Err(PipelineError::Schema {
            path: path.to_path_buf(),
            message: format!("payload size mismatch: expected {expected} bytes for n = {}, got {}", header.n, payload.len()),
        });
    }
    let mut comps: [Vec<f64>; 3] = std::array::from_fn(|_| Vec::with_capacity(grid.len()));
    for (i, chunk) in payload.chunks_exact(8).enumerate() {
        comps[i % 3].push(f64::from_le_bytes(chunk.try_into().unwrap()));
    }
    let velocity = VectorField::new(grid, comps).map_err(|e| PipelineError::Schema {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    Ok(Snapshot { nu: header.nu, t: header.t, velocity })
}

/// Converts one raw file into `<out_dir>/<stem>.zsp`.
pub fn ingest(raw: &Path, out_dir: &Path) -> Result<IngestReport> {
    let hdr = header_path(raw);
    let text = std::fs::read_to_string(&hdr).map_err(|e| PipelineError::io(&hdr, e))?;
    let header = parse_header(&hdr, &text)?;
    let payload = std::fs::read(raw).map_err(|e| PipelineError::io(raw, e))?;
    let snap = decode(raw, &header, &payload)?;

    let u_inf = max_norm(&snap.velocity);
    let divergence = if u_inf > 0.0 {
        SpectralVectorField::forward(&snap.velocity).max_divergence() / u_inf
    } else {
        0.0
    };
    let solenoidal = divergence <= DIVERGENCE_WARN;
    if !solenoidal {
        log::warn!("{}: not divergence-free, max |k.u_k| / |u|_inf = {divergence:.3e}", raw.display());
    }

    let stem = raw.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "ingested".into());
    let out = out_dir.join(format!("{stem}.zsp"));
    write_file(&out, &snap.to_bytes())?;
    Ok(IngestReport {
        source: display_name(raw),
        snapshot: display_name(&out),
        n: header.n,
        length: header.length,
        nu: header.nu,
        t: header.t,
        divergence,
        solenoidal,
    })
}
