use std::collections::BTreeMap;
use std::path::PathBuf;

use rayon::prelude::*;
use serde::Serialize;
use zsparse_core::operators::{curl, max_norm};
use zsparse_core::scaling::{escape_times, pick_s, OmegaSeries, SWindow};
use zsparse_core::sparseness::{regularity_criterion_check, CriterionReport};
use zsparse_core::VectorField;

use crate::config::RunConfig;
use crate::error::{PipelineError, Result};
use crate::output::{display_name, read_snapshot, write_json, Provenance};

pub const CRITERION_REPORT: &str = "criterion.json";

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum EscapeStatus {
    Checked,
    /// The whole window lies past the last snapshot.
    WindowOverflow,
    /// No snapshot time falls inside the window.
    NoSnapshotInWindow,
}

#[derive(Debug, Clone, Serialize)]
pub struct EscapeEntry {
    pub index: usize,
    pub t: f64,
    pub omega_inf: f64,
    pub window: SWindow,
    pub status: EscapeStatus,
    /// Snapshot index the window snapped to.
    pub snapshot: Option<usize>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SnapshotCheck {
    pub snapshot: usize,
    pub file: String,
    pub t: f64,
    pub report: Option<CriterionReport>,
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionCheckReport {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub c_m: f64,
    pub series: Vec<(f64, f64)>,
    pub escapes: Vec<EscapeEntry>,
    pub checks: Vec<SnapshotCheck>,
}

/// For every escape time of the `||w||_inf` series, snaps the admissible
/// window to a snapshot and runs the 1D sparseness check there.
pub fn criterion_check(paths: &[PathBuf], cfg: &RunConfig) -> Result<CriterionCheckReport> {
    let provenance = Provenance::new(cfg)?;
    let params = cfg.criterion_params();
    let loaded: Vec<(f64, f64, VectorField)> = paths
        .par_iter()
        .map(|p| {
            let snap = read_snapshot(p)?;
            let omega = curl(&snap.velocity)?;
            Ok((snap.t, snap.nu, omega))
        })
        .collect::<Result<_>>()?;
    let Some(first) = loaded.first() else {
        return Err(PipelineError::Usage("no snapshots to check".into()));
    };
    for (p, (_, nu, omega)) in paths.iter().zip(&loaded) {
        omega.grid().check_same(first.2.grid())?;
        if *nu != first.1 {
            return Err(PipelineError::Schema {
                path: p.clone(),
                message: format!("nu = {nu} differs from nu = {} of the first snapshot", first.1),
            });
        }
    }
    let mut order: Vec<usize> = (0..loaded.len()).collect();
    order.sort_by(|&a, &b| loaded[a].0.total_cmp(&loaded[b].0));
    let series = OmegaSeries::new(order.iter().map(|&i| (loaded[i].0, max_norm(&loaded[i].2))).collect(), first.1)?;
    let times = series.times();
    let t_end = *times.last().expect("at least one snapshot");

    let mut escapes = Vec::new();
    let mut targets = BTreeMap::new();
    for i in escape_times(&series) {
        let (t, w) = series.samples()[i];
        let window = pick_s(t, w, params.c_m)?;
        let (status, snapshot) = if window.check_within(t_end).is_err() {
            (EscapeStatus::WindowOverflow, None)
        } else if let Some(j) = window.snap(&times) {
            targets.insert(j, ());
            (EscapeStatus::Checked, Some(j))
        } else {
            (EscapeStatus::NoSnapshotInWindow, None)
        };
        escapes.push(EscapeEntry { index: i, t, omega_inf: w, window, status, snapshot });
    }

    let targets: Vec<usize> = targets.into_keys().collect();
    let checks = targets
        .par_iter()
        .map(|&j| {
            let k = order[j];
            let (report, error) = match regularity_criterion_check(&loaded[k].2, &params) {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            SnapshotCheck { snapshot: j, file: display_name(&paths[k]), t: loaded[k].0, report, error }
        })
        .collect();

    let report = CriterionCheckReport {
        provenance,
        c_m: params.c_m,
        series: series.samples().to_vec(),
        escapes,
        checks,
    };
    write_json(&cfg.out_dir.join(CRITERION_REPORT), &report)?;
    Ok(report)
}
