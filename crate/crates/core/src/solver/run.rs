use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use super::{FlowState, Solver, SolverConfig};
use crate::error::Result;
use crate::operators::max_norm;
use crate::snapshot::Snapshot;

pub const TRAJECTORY_FILE: &str = "trajectory.csv";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryRow {
    pub t: f64,
    pub energy: f64,
    pub omega_inf: f64,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub snapshots: Vec<PathBuf>,
    pub rows: Vec<TrajectoryRow>,
    pub steps: usize,
}

impl Trajectory {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("# zsparse schema v1\nt,energy,omega_inf\n");
        for r in &self.rows {
            writeln!(s, "{},{},{}", r.t, r.energy, r.omega_inf).unwrap();
        }
        s
    }
}

pub fn snapshot_name(step: usize) -> String {
    format!("snapshot_{step:06}.zsp")
}

fn persist(out_dir: &Path, step: usize, nu: f64, state: &FlowState) -> Result<PathBuf> {
    let path = out_dir.join(snapshot_name(step));
    Snapshot { nu, t: state.t, velocity: state.velocity()? }.write(&path)?;
    Ok(path)
}

/// Integrates from the configured initial condition to `t_end`, writing a
/// snapshot every `snapshot_every` steps (always including the first and the
/// last state) and `trajectory.csv` with one row per step.
pub fn run(config: &SolverConfig, out_dir: &Path) -> Result<Trajectory> {
    fs::create_dir_all(out_dir)?;
    let mut solver = Solver::new(config.clone())?;
    let mut state = solver.initial_state()?;
    let nu = config.nu;
    let u0 = max_norm(&state.velocity()?);
    log::info!(
        "run: n = {}, L = {}, nu = {nu}, Re = |u0|_inf L / nu = {:.4e}",
        config.grid.n(),
        config.grid.length(),
        u0 * config.grid.length() / nu
    );

    let row = |s: &FlowState| TrajectoryRow { t: s.t, energy: s.energy, omega_inf: s.omega_inf };
    let mut rows = vec![row(&state)];
    let mut snapshots = vec![persist(out_dir, 0, nu, &state)?];
    let t_end = config.t_end;
    let mut steps = 0;
    let mut last_saved = 0;
    while t_end - state.t > 1e-12 * t_end.max(1.0) {
        let next = solver.step(&state, t_end - state.t)?;
        solver.recycle(std::mem::replace(&mut state, next));
        steps += 1;
        rows.push(row(&state));
        if steps % config.snapshot_every == 0 {
            snapshots.push(persist(out_dir, steps, nu, &state)?);
            last_saved = steps;
        }
        if steps % 100 == 0 {
            log::info!("step {steps}: t = {:.4}, E = {:.6e}, |w|_inf = {:.6e}", state.t, state.energy, state.omega_inf);
        }
    }
    if last_saved != steps {
        snapshots.push(persist(out_dir, steps, nu, &state)?);
    }
    let traj = Trajectory { snapshots, rows, steps };
    fs::write(out_dir.join(TRAJECTORY_FILE), traj.to_csv())?;
    Ok(traj)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::solver::InitialCondition;

    #[test]
    fn zero_duration_writes_one_snapshot() {
        let dir = std::env::temp_dir().join(format!("zsparse-run-{}", std::process::id()));
        let cfg = SolverConfig::new(Grid::periodic_2pi(8).unwrap(), 0.1, 0.1, 0.0);
        let traj = run(&cfg, &dir).unwrap();
        assert_eq!(traj.snapshots.len(), 1);
        assert_eq!(traj.rows.len(), 1);
        let csv = fs::read_to_string(dir.join(TRAJECTORY_FILE)).unwrap();
        assert!(csv.starts_with("# zsparse schema v1\nt,energy,omega_inf\n0,"));
        let snap = Snapshot::read(&traj.snapshots[0]).unwrap();
        assert_eq!(snap.t, 0.0);
        fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn energy_never_increases_along_a_run() {
        let dir = std::env::temp_dir().join(format!("zsparse-run-e-{}", std::process::id()));
        let mut cfg = SolverConfig::new(Grid::periodic_2pi(16).unwrap(), 0.02, 0.02, 0.3);
        cfg.ic = InitialCondition::LowFreqNoise { seed: 11, k_max: 3, amplitude: 1.0 };
        cfg.snapshot_every = 4;
        let traj = run(&cfg, &dir).unwrap();
        assert_eq!(traj.steps, 15);
        // steps 0, 4, 8, 12 and the final 15
        assert_eq!(traj.snapshots.len(), 5);
        for w in traj.rows.windows(2) {
            assert!(w[1].energy <= w[0].energy * (1.0 + 1e-10));
        }
        assert!((traj.rows.last().unwrap().t - 0.3).abs() < 1e-12);
        fs::remove_dir_all(&dir).unwrap();
    }
}
