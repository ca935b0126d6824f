use serde::Serialize;
use zsparse_core::solver::{self, TrajectoryRow};

use crate::config::RunConfig;
use crate::error::Result;
use crate::output::{display_name, write_json, Provenance};

pub const SIMULATE_REPORT: &str = "simulate.json";

#[derive(Debug, Clone, Serialize)]
pub struct SimulateReport {
    #[serde(flatten)]
    pub provenance: Provenance,
    pub steps: usize,
    pub snapshots: Vec<String>,
    pub t_final: f64,
    pub energy_initial: f64,
    pub energy_final: f64,
    pub omega_inf_max: f64,
}

/// Runs the solver into `cfg.out_dir`: snapshots, `trajectory.csv` and
/// `simulate.json`.
pub fn simulate(cfg: &RunConfig) -> Result<SimulateReport> {
    let provenance = Provenance::new(cfg)?;
    let traj = solver::run(&cfg.solver_config()?, &cfg.out_dir)?;
    let first = traj.rows.first().copied().expect("a run has its initial row");
    let last: TrajectoryRow = *traj.rows.last().expect("a run has its initial row");
    let report = SimulateReport {
        provenance,
        steps: traj.steps,
        snapshots: traj.snapshots.iter().map(|p| display_name(p)).collect(),
        t_final: last.t,
        energy_initial: first.energy,
        energy_final: last.energy,
        omega_inf_max: traj.rows.iter().map(|r| r.omega_inf).fold(0.0, f64::max),
    };
    write_json(&cfg.out_dir.join(SIMULATE_REPORT), &report)?;
    Ok(report)
}
