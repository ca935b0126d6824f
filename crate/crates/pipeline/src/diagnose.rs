use std::fmt::Write as _;
use std::io::Read;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use zsparse_core::operators::curl;
use zsparse_core::sparseness::{diagnose as diagnose_field, SparsenessReport};

use crate::config::RunConfig;
use crate::error::{PipelineError, Result};
use crate::output::{csv_value, display_name, read_snapshot, write_file, write_json, Provenance, CSV_HEADER};

pub const DIAGNOSE_REPORT: &str = "diagnose.json";
pub const FRACTIONS_FILE: &str = "fractions.csv";
pub const SCALING_FILE: &str = "scaling.csv";

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotReport {
    pub file: String,
    #[serde(flatten)]
    pub report: SparsenessReport,
}

#[derive(Debug, Clone, Serialize)]
pub struct DiagnoseReport {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub snapshot_stride: usize,
    pub snapshots: Vec<SnapshotReport>,
}

fn diagnose_one(path: &Path, cfg: &RunConfig) -> Result<SnapshotReport> {
    let snap = read_snapshot(path)?;
    let omega = curl(&snap.velocity)?;
    let report = diagnose_field(&omega, snap.t, snap.nu, &cfg.diagnose_params())?;
    log::info!(
        "{}: t = {}, |w|_inf = {:.4e}, r = {:?}",
        display_name(path),
        snap.t,
        report.omega_inf,
        report.headline_scale
    );
    Ok(SnapshotReport { file: display_name(path), report })
}

/// Checks that every snapshot shares the grid of the first one.
fn check_grids(paths: &[PathBuf]) -> Result<()> {
    let mut first = None;
    for p in paths {
        let mut head = Vec::new();
        std::fs::File::open(p)
            .and_then(|f| f.take(zsparse_core::snapshot::HEADER_LEN as u64).read_to_end(&mut head))
            .map_err(|e| PipelineError::io(p, e))?;
        let header = parse_header(&head).map_err(|message| PipelineError::Schema { path: p.clone(), message })?;
        match first {
            None => first = Some(header),
            Some(f) if f != header => {
                return Err(zsparse_core::Error::GridMismatch(format!(
                    "{}: n = {}, L = {} differs from n = {}, L = {}",
                    p.display(),
                    header.0,
                    header.1,
                    f.0,
                    f.1
                ))
                .into())
            }
            _ => {}
        }
    }
    Ok(())
}

fn parse_header(b: &[u8]) -> std::result::Result<(u32, f64), String> {
    if b.len() < zsparse_core::snapshot::HEADER_LEN {
        return Err(format!("truncated header: {} bytes", b.len()));
    }
    if &b[..8] != zsparse_core::snapshot::MAGIC {
        return Err("bad magic bytes (expected ZSPARSE1)".into());
    }
    Ok((u32::from_le_bytes(b[8..12].try_into().unwrap()), f64::from_le_bytes(b[12..20].try_into().unwrap())))
}

/// Diagnoses every `snapshot_stride`-th snapshot and writes `diagnose.json`,
/// `fractions.csv` and `scaling.csv` into `cfg.out_dir`.
pub fn diagnose(paths: &[PathBuf], cfg: &RunConfig) -> Result<DiagnoseReport> {
    let provenance = Provenance::new(cfg)?;
    let stride = cfg.diagnostics.snapshot_stride;
    if stride == 0 {
        return Err(PipelineError::Usage("snapshot_stride must be at least 1".into()));
    }
    if paths.is_empty() {
        return Err(PipelineError::Usage("no snapshots to diagnose".into()));
    }
    check_grids(paths)?;
    let selected: Vec<&PathBuf> = paths.iter().step_by(stride).collect();
    let mut snapshots: Vec<SnapshotReport> =
        selected.par_iter().map(|p| diagnose_one(p, cfg)).collect::<Result<_>>()?;
    snapshots.sort_by(|a, b| a.report.t.total_cmp(&b.report.t));

    let report = DiagnoseReport { provenance, snapshot_stride: stride, snapshots };
    write_json(&cfg.out_dir.join(DIAGNOSE_REPORT), &report)?;
    write_file(&cfg.out_dir.join(FRACTIONS_FILE), fractions_csv(&report.snapshots).as_bytes())?;
    write_file(&cfg.out_dir.join(SCALING_FILE), scaling_csv(&report.snapshots).as_bytes())?;
    Ok(report)
}

/// One row per set and radius of the fraction curves.
pub fn fractions_csv(reports: &[SnapshotReport]) -> String {
    let mut s = format!("{CSV_HEADER}t,set_id,r,max_fraction\n");
    for r in reports {
        for set in &r.report.sets {
            for (radius, frac) in &set.curve {
                writeln!(s, "{},{},{},{}", r.report.t, set.id, radius, frac).unwrap();
            }
        }
    }
    s
}

/// Per snapshot, one row per set plus a `max` row with the headline scale.
pub fn scaling_csv(reports: &[SnapshotReport]) -> String {
    let mut s = format!("{CSV_HEADER}t,omega_inf,d,r,set_id\n");
    for r in reports {
        let rep = &r.report;
        let d = csv_value(rep.diffusion_scale);
        let mut row = |scale: Option<f64>, id: &str| {
            writeln!(s, "{},{},{},{},{}", rep.t, rep.omega_inf, d, csv_value(scale), id).unwrap();
        };
        for set in &rep.sets {
            row(set.scale, &set.id);
        }
        row(rep.headline_scale, "max");
    }
    s
}
