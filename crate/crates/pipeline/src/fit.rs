use std::path::Path;

use serde::Serialize;
use zsparse_core::scaling::{
    alpha_from_slope, class_label, fit_power_law, nearest_landmark, ClassLabel, OmegaSeries, PowerLawFit,
};

use crate::config::{FitWindow, RunConfig};
use crate::error::{PipelineError, Result};
use crate::output::{write_json, Provenance};

pub const FIT_REPORT: &str = "fit.json";

const COLUMNS: [&str; 5] = ["t", "omega_inf", "d", "r", "set_id"];

#[derive(Debug, Clone, PartialEq)]
pub struct ScalingRow {
    pub t: f64,
    pub omega_inf: f64,
    pub d: Option<f64>,
    pub r: Option<f64>,
    pub set_id: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct FitReport {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub set_id: String,
    pub window: (f64, f64),
    pub rows_in_window: usize,
    /// Rows in the window left out because `r` or `d` is `none`.
    pub rows_none: usize,
    pub beta: f64,
    pub alpha: f64,
    pub residual: f64,
    pub fit: PowerLawFit,
    pub class: ClassLabel,
    pub label: String,
    pub landmark: &'static str,
}

fn schema_err(path: &Path, message: impl Into<String>) -> PipelineError {
    PipelineError::Schema { path: path.to_path_buf(), message: message.into() }
}

fn parse_opt(path: &Path, line: u64, col: &str, v: &str) -> Result<Option<f64>> {
    if v == "none" {
        return Ok(None);
    }
    v.parse()
        .map(Some)
        .map_err(|_| schema_err(path, format!("line {line}: column `{col}` has non-numeric value `{v}`")))
}

/// Reads `scaling.csv`, requiring the columns `t, omega_inf, d, r, set_id`.
pub fn read_scaling_csv(path: &Path) -> Result<Vec<ScalingRow>> {
    let mut reader = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(path, e))?;
    let headers = reader.headers().map_err(|e| csv_err(path, e))?.clone();
    let mut idx = [0usize; 5];
    for (slot, col) in idx.iter_mut().zip(COLUMNS) {
        *slot = headers.iter().position(|h| h == col).ok_or_else(|| schema_err(path, format!("missing column `{col}`")))?;
    }
    let mut rows = Vec::new();
    for rec in reader.records() {
        let rec = rec.map_err(|e| csv_err(path, e))?;
        let line = rec.position().map_or(0, |p| p.line());
        let get = |i: usize| rec.get(idx[i]).unwrap_or("");
        let required = |i: usize| -> Result<f64> {
            parse_opt(path, line, COLUMNS[i], get(i))?
                .ok_or_else(|| schema_err(path, format!("line {line}: column `{}` may not be none", COLUMNS[i])))
        };
        rows.push(ScalingRow {
            t: required(0)?,
            omega_inf: required(1)?,
            d: parse_opt(path, line, "d", get(2))?,
            r: parse_opt(path, line, "r", get(3))?,
            set_id: get(4).to_string(),
        });
    }
    Ok(rows)
}

fn csv_err(path: &Path, e: csv::Error) -> PipelineError {
    match e.into_kind() {
        csv::ErrorKind::Io(source) => PipelineError::io(path, source),
        other => schema_err(path, format!("{other:?}")),
    }
}

/// Fits `r = C d^beta` over the rows of one set inside the configured window.
pub fn fit_rows(rows: &[ScalingRow], cfg: &RunConfig) -> Result<(FitSummary, PowerLawFit)> {
    let set_id = &cfg.diagnostics.fit_set;
    let rows: Vec<&ScalingRow> = rows.iter().filter(|r| &r.set_id == set_id).collect();
    if rows.is_empty() {
        return Err(PipelineError::Usage(format!("no rows with set_id `{set_id}`")));
    }
    let series = OmegaSeries::new(rows.iter().map(|r| (r.t, r.omega_inf)).collect(), cfg.solver.nu)?;
    let window = match cfg.diagnostics.fit_window {
        FitWindow::Growth => series.growth_window().expect("series is non-empty"),
        FitWindow::All => (rows[0].t, rows[rows.len() - 1].t),
        FitWindow::Range(lo, hi) => (lo, hi),
    };
    let in_window: Vec<&&ScalingRow> = rows.iter().filter(|r| r.t >= window.0 && r.t <= window.1).collect();
    let points: Vec<(f64, f64)> = in_window.iter().filter_map(|r| Some((r.d?, r.r?))).collect();
    let summary = FitSummary { window, rows_in_window: in_window.len(), rows_none: in_window.len() - points.len() };
    log::info!(
        "fit of set {set_id} over [{}, {}]: {} rows, {} without a scale",
        window.0,
        window.1,
        summary.rows_in_window,
        summary.rows_none
    );
    Ok((summary, fit_power_law(&points)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FitSummary {
    pub window: (f64, f64),
    pub rows_in_window: usize,
    pub rows_none: usize,
}

/// Reads `scaling_csv`, fits and writes `fit.json` into `cfg.out_dir`.
pub fn fit(scaling_csv: &Path, cfg: &RunConfig) -> Result<FitReport> {
    let provenance = Provenance::new(cfg)?;
    let rows = read_scaling_csv(scaling_csv)?;
    let (summary, fit) = fit_rows(&rows, cfg)?;
    let alpha = alpha_from_slope(fit.slope);
    let class = class_label(alpha);
    let report = FitReport {
        provenance,
        set_id: cfg.diagnostics.fit_set.clone(),
        window: summary.window,
        rows_in_window: summary.rows_in_window,
        rows_none: summary.rows_none,
        beta: fit.slope,
        alpha,
        residual: fit.residual,
        fit,
        class,
        label: class.to_string(),
        landmark: nearest_landmark(alpha),
    };
    write_json(&cfg.out_dir.join(FIT_REPORT), &report)?;
    Ok(report)
}
