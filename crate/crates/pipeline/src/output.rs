//! Shared report pieces: the constants block, the schema tag and file writers.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use zsparse_core::bounds::{frozen_constants, lemma_constants, FrozenConstants, LemmaConstants};
use zsparse_core::snapshot::Snapshot;

use crate::config::RunConfig;
use crate::error::{PipelineError, Result};

pub const SCHEMA: &str = "zsparse schema v1";

/// Header line of every CSV file.
pub const CSV_HEADER: &str = "# zsparse schema v1\n";

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantsBlock {
    pub h_star: f64,
    pub m: f64,
    pub lambda_cut: f64,
    /// `|h*/2 + (1 - h*) M - 1|`.
    pub identity_residual: f64,
    /// Mixing-lemma constants at the configured `(lambda, delta)`.
    pub lemma: LemmaConstants,
}

impl ConstantsBlock {
    pub fn new(lambda: f64, delta: f64) -> Result<Self> {
        let FrozenConstants { h_star, m, lambda_cut } = frozen_constants();
        Ok(Self {
            h_star,
            m,
            lambda_cut,
            identity_residual: frozen_constants().identity_residual(),
            lemma: lemma_constants(lambda, delta)?,
        })
    }

    pub fn for_config(cfg: &RunConfig) -> Result<Self> {
        Self::new(cfg.lambda(), cfg.diagnostics.delta)
    }
}

/// Provenance fields carried by every JSON report.
#[derive(Debug, Clone, Serialize)]
pub struct Provenance {
    pub schema: &'static str,
    pub config_hash: String,
    pub constants: ConstantsBlock,
}

impl Provenance {
    pub fn new(cfg: &RunConfig) -> Result<Self> {
        Ok(Self { schema: SCHEMA, config_hash: cfg.hash(), constants: ConstantsBlock::for_config(cfg)? })
    }
}

pub fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| PipelineError::io(dir, e))?;
    }
    fs::write(path, contents).map_err(|e| PipelineError::io(path, e))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    write_file(path, text.as_bytes())
}

/// Reads a snapshot, attaching the path to I/O and format errors.
pub fn read_snapshot(path: &Path) -> Result<Snapshot> {
    use zsparse_core::Error as E;
    Snapshot::read(path).map_err(|e| match e {
        E::Io(source) => PipelineError::io(path, source),
        E::Format(message) => PipelineError::Schema { path: path.to_path_buf(), message },
        other => other.into(),
    })
}

/// File name for reports, so outputs do not depend on where inputs live.
pub fn display_name(path: &Path) -> String {
    path.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| path.display().to_string())
}

/// `none` for a missing value, shortest round-trip decimal otherwise.
pub fn csv_value(v: Option<f64>) -> String {
    v.map_or_else(|| "none".to_string(), |x| x.to_string())
}

pub fn expand_glob(pattern: &str) -> Result<Vec<PathBuf>> {
    let paths = glob::glob(pattern).map_err(|e| PipelineError::Usage(format!("bad glob `{pattern}`: {e}")))?;
    let mut out = Vec::new();
    for p in paths {
        out.push(p.map_err(|e| PipelineError::io(e.path().to_path_buf(), e.into()))?);
    }
    out.sort();
    if out.is_empty() {
        return Err(PipelineError::io(pattern, std::io::Error::new(std::io::ErrorKind::NotFound, "no files match")));
    }
    Ok(out)
}
