//! Run configuration: a plain `key = value` file with `[section]` headers.
//!
//! ```text
//! [solver]
//! n = 64
//! nu = 5e-3
//! ic = lowfreq_noise
//! seed = 7
//!
//! [diagnostics]
//! lambda = frozen
//! ```
//!
//! Every key has a default, `#` starts a comment and unknown sections or keys
//! are rejected with their line number.

use std::f64::consts::PI;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};
use zsparse_core::solver::{InitialCondition, SolverConfig, TimeStep, ViscousTreatment};
use zsparse_core::sparseness::{CriterionParams, DiagnoseParams};
use zsparse_core::Grid;

use crate::error::{PipelineError, Result};

/// Environment variable overriding the output directory.
pub const OUT_ENV: &str = "ZSPARSE_OUT";

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum IcKind {
    Kida,
    LowfreqNoise,
    File,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolverSection {
    pub n: usize,
    pub length: f64,
    pub nu: f64,
    pub dt: f64,
    /// When set, the step follows this Courant number instead of `dt`.
    pub cfl: Option<f64>,
    pub t_end: f64,
    pub snapshot_every: usize,
    pub ic: IcKind,
    pub seed: u64,
    pub k_max: usize,
    pub amplitude: f64,
    pub ic_path: Option<PathBuf>,
    pub dealias: bool,
    pub viscous: ViscousTreatment,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum FitWindow {
    /// Past the initial decay of `||w||_inf`: from where it first reaches
    /// half of the next peak, up to that peak.
    Growth,
    All,
    Range(f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagnosticsSection {
    /// `None` means the frozen cut `1/(2M)`.
    pub lambda: Option<f64>,
    pub delta: f64,
    pub r_min: Option<f64>,
    pub radii_per_decade: usize,
    pub n_dir: usize,
    pub m_line: usize,
    pub c_m: f64,
    pub point_stride: usize,
    pub rho_per_decade: usize,
    pub rho_decades: f64,
    /// Diagnose every `snapshot_stride`-th snapshot.
    pub snapshot_stride: usize,
    /// Set whose scale enters the fit: `max` or a set id such as `1+`.
    pub fit_set: String,
    pub fit_window: FitWindow,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunConfig {
    pub solver: SolverSection,
    pub diagnostics: DiagnosticsSection,
    /// Not part of the hash: moving the output does not change the run.
    #[serde(skip)]
    pub out_dir: PathBuf,
    pub ingest_paths: Vec<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            solver: SolverSection {
                n: 64,
                length: 2.0 * PI,
                nu: 5e-3,
                dt: 0.01,
                cfl: None,
                t_end: 1.0,
                snapshot_every: 10,
                ic: IcKind::Kida,
                seed: 0,
                k_max: 4,
                amplitude: 1.0,
                ic_path: None,
                dealias: true,
                viscous: ViscousTreatment::IntegratingFactor,
            },
            diagnostics: DiagnosticsSection {
                lambda: None,
                delta: 0.75,
                r_min: None,
                radii_per_decade: 24,
                n_dir: 64,
                m_line: 256,
                c_m: 1.0,
                point_stride: 8,
                rho_per_decade: 24,
                rho_decades: 2.0,
                snapshot_stride: 1,
                fit_set: "max".into(),
                fit_window: FitWindow::Growth,
            },
            out_dir: PathBuf::from("out"),
            ingest_paths: Vec::new(),
        }
    }
}

fn bad(line: usize, message: impl Into<String>) -> PipelineError {
    PipelineError::Config { line, message: message.into() }
}

fn parse_num<T: std::str::FromStr>(line: usize, key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| bad(line, format!("`{key}`: cannot parse `{v}`")))
}

fn parse_f64(line: usize, key: &str, v: &str) -> Result<f64> {
    // Multiples of pi, e.g. `2pi`, are accepted for lengths.
    let x = match v.strip_suffix("pi") {
        Some("") => PI,
        Some(m) => parse_num::<f64>(line, key, m)? * PI,
        None => parse_num(line, key, v)?,
    };
    if x.is_finite() {
        Ok(x)
    } else {
        Err(bad(line, format!("`{key}` must be finite")))
    }
}

fn parse_bool(line: usize, key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "on" | "yes" => Ok(true),
        "false" | "off" | "no" => Ok(false),
        _ => Err(bad(line, format!("`{key}`: expected true/false, got `{v}`"))),
    }
}

/// `none`/`auto`/`frozen` map to `None`.
fn parse_opt_f64(line: usize, key: &str, v: &str) -> Result<Option<f64>> {
    match v {
        "none" | "auto" | "frozen" => Ok(None),
        _ => parse_f64(line, key, v).map(Some),
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        let mut section = String::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            if let Some(name) = content.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
                let name = name.trim();
                if !matches!(name, "solver" | "diagnostics" | "output" | "ingest") {
                    return Err(bad(line, format!("unknown section `[{name}]`")));
                }
                section = name.to_string();
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .map(|(k, v)| (k.trim(), v.trim()))
                .ok_or_else(|| bad(line, format!("expected `key = value`, got `{content}`")))?;
            if section.is_empty() {
                return Err(bad(line, format!("key `{key}` appears before any section")));
            }
            cfg.set(&section, key, value, line)?;
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| PipelineError::io(path, e))?;
        Self::parse(&text)
    }

    fn set(&mut self, section: &str, key: &str, v: &str, line: usize) -> Result<()> {
        let s = &mut self.solver;
        let d = &mut self.diagnostics;
        match (section, key) {
            ("solver", "n") => s.n = parse_num(line, key, v)?,
            ("solver", "length") => s.length = parse_f64(line, key, v)?,
            ("solver", "nu") => s.nu = parse_f64(line, key, v)?,
            ("solver", "dt") => s.dt = parse_f64(line, key, v)?,
            ("solver", "cfl") => s.cfl = parse_opt_f64(line, key, v)?,
            ("solver", "t_end") => s.t_end = parse_f64(line, key, v)?,
            ("solver", "snapshot_every") => s.snapshot_every = parse_num(line, key, v)?,
            ("solver", "ic") => {
                s.ic = match v {
                    "kida" => IcKind::Kida,
                    "lowfreq_noise" => IcKind::LowfreqNoise,
                    "file" => IcKind::File,
                    _ => return Err(bad(line, format!("`ic`: expected kida, lowfreq_noise or file, got `{v}`"))),
                }
            }
            ("solver", "seed") => s.seed = parse_num(line, key, v)?,
            ("solver", "k_max") => s.k_max = parse_num(line, key, v)?,
            ("solver", "amplitude") => s.amplitude = parse_f64(line, key, v)?,
            ("solver", "ic_path") => s.ic_path = Some(PathBuf::from(v)),
            ("solver", "dealias") => s.dealias = parse_bool(line, key, v)?,
            ("solver", "viscous") => {
                s.viscous = match v {
                    "integrating_factor" => ViscousTreatment::IntegratingFactor,
                    "explicit" => ViscousTreatment::Explicit,
                    _ => return Err(bad(line, format!("`viscous`: expected integrating_factor or explicit, got `{v}`"))),
                }
            }
            ("diagnostics", "lambda") => d.lambda = parse_opt_f64(line, key, v)?,
            ("diagnostics", "delta") => d.delta = parse_f64(line, key, v)?,
            ("diagnostics", "r_min") => d.r_min = parse_opt_f64(line, key, v)?,
            ("diagnostics", "radii_per_decade") => d.radii_per_decade = parse_num(line, key, v)?,
            ("diagnostics", "n_dir") => d.n_dir = parse_num(line, key, v)?,
            ("diagnostics", "m_line") => d.m_line = parse_num(line, key, v)?,
            ("diagnostics", "c_m") => d.c_m = parse_f64(line, key, v)?,
            ("diagnostics", "point_stride") => d.point_stride = parse_num(line, key, v)?,
            ("diagnostics", "rho_per_decade") => d.rho_per_decade = parse_num(line, key, v)?,
            ("diagnostics", "rho_decades") => d.rho_decades = parse_f64(line, key, v)?,
            ("diagnostics", "snapshot_stride") => d.snapshot_stride = parse_num(line, key, v)?,
            ("diagnostics", "fit_set") => d.fit_set = v.to_string(),
            ("diagnostics", "fit_window") => {
                d.fit_window = match v {
                    "growth" => FitWindow::Growth,
                    "all" => FitWindow::All,
                    _ => {
                        let (a, b) = v
                            .split_once(',')
                            .ok_or_else(|| bad(line, format!("`fit_window`: expected growth, all or `lo, hi`, got `{v}`")))?;
                        FitWindow::Range(parse_f64(line, key, a.trim())?, parse_f64(line, key, b.trim())?)
                    }
                }
            }
            ("output", "dir") => self.out_dir = PathBuf::from(v),
            ("ingest", "paths") => {
                self.ingest_paths = v.split(',').map(str::trim).filter(|p| !p.is_empty()).map(PathBuf::from).collect()
            }
            _ => return Err(bad(line, format!("unknown key `{key}` in [{section}]"))),
        }
        Ok(())
    }

    /// Applies the output-directory override from the environment.
    pub fn apply_env(&mut self) {
        if let Some(dir) = std::env::var_os(OUT_ENV) {
            self.out_dir = PathBuf::from(dir);
        }
    }

    /// Hex SHA-256 of the canonical JSON form of the resolved configuration.
    pub fn hash(&self) -> String {
        let json = serde_json::to_vec(self).expect("config serializes");
        Sha256::digest(&json).iter().map(|b| format!("{b:02x}")).collect()
    }

    pub fn grid(&self) -> Result<Grid> {
        Ok(Grid::new(self.solver.n, self.solver.length)?)
    }

    pub fn solver_config(&self) -> Result<SolverConfig> {
        let s = &self.solver;
        let mut c = SolverConfig::new(self.grid()?, s.nu, s.dt, s.t_end);
        if let Some(cfl) = s.cfl {
            c.time_step = TimeStep::Cfl(cfl);
        }
        c.snapshot_every = s.snapshot_every;
        c.dealias = s.dealias;
        c.viscous = s.viscous;
        c.ic = match s.ic {
            IcKind::Kida => InitialCondition::Kida,
            IcKind::LowfreqNoise => {
                InitialCondition::LowFreqNoise { seed: s.seed, k_max: s.k_max, amplitude: s.amplitude }
            }
            IcKind::File => InitialCondition::File(
                s.ic_path.clone().ok_or_else(|| PipelineError::Usage("ic = file needs ic_path".into()))?,
            ),
        };
        c.validate()?;
        Ok(c)
    }

    pub fn lambda(&self) -> f64 {
        self.diagnostics.lambda.unwrap_or_else(|| zsparse_core::bounds::frozen_constants().lambda_cut)
    }

    pub fn diagnose_params(&self) -> DiagnoseParams {
        let d = &self.diagnostics;
        DiagnoseParams {
            lambda: self.lambda(),
            delta: d.delta,
            r_min: d.r_min,
            radii_per_decade: d.radii_per_decade,
            reference_l2: None,
        }
    }

    pub fn criterion_params(&self) -> CriterionParams {
        let d = &self.diagnostics;
        CriterionParams {
            c_m: d.c_m,
            lambda: self.lambda(),
            n_dir: d.n_dir,
            m_line: d.m_line,
            rho_per_decade: d.rho_per_decade,
            rho_decades: d.rho_decades,
            point_stride: d.point_stride,
            ..CriterionParams::default()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_config_is_the_default() {
        assert_eq!(RunConfig::parse("").unwrap(), RunConfig::default());
        assert_eq!(RunConfig::parse("# nothing\n\n").unwrap(), RunConfig::default());
    }

    #[test]
    fn parses_sections_and_values() {
        let cfg = RunConfig::parse(
            "[solver]\nn = 32   # coarse\nlength = 2pi\nnu = 1e-2\nic = lowfreq_noise\nseed = 9\ncfl = 0.5\n\
             [diagnostics]\nlambda = 0.4\nfit_window = 0.1, 0.9\n[output]\ndir = /tmp/x\n[ingest]\npaths = a.raw, b.raw\n",
        )
        .unwrap();
        assert_eq!(cfg.solver.n, 32);
        assert_eq!(cfg.solver.length, 2.0 * PI);
        assert_eq!(cfg.solver.ic, IcKind::LowfreqNoise);
        assert_eq!(cfg.solver.cfl, Some(0.5));
        assert_eq!(cfg.diagnostics.lambda, Some(0.4));
        assert_eq!(cfg.diagnostics.fit_window, FitWindow::Range(0.1, 0.9));
        assert_eq!(cfg.out_dir, PathBuf::from("/tmp/x"));
        assert_eq!(cfg.ingest_paths.len(), 2);
        assert!(matches!(cfg.solver_config().unwrap().time_step, TimeStep::Cfl(c) if c == 0.5));
    }

    #[test]
    fn errors_name_key_and_line() {
        let e = RunConfig::parse("[solver]\nn = 32\nviscosity = 1\n").unwrap_err();
        assert!(matches!(e, PipelineError::Config { line: 3, .. }));
        assert!(e.to_string().contains("viscosity") && e.to_string().contains("line 3"), "{e}");
        assert!(RunConfig::parse("[plots]\n").unwrap_err().to_string().contains("line 1"));
        assert!(RunConfig::parse("n = 3\n").is_err());
        assert!(RunConfig::parse("[solver]\nn = many\n").unwrap_err().to_string().contains("`n`"));
        assert_eq!(e.exit_code(), 1);
    }

    #[test]
    fn hash_tracks_content() {
        let a = RunConfig::default();
        let mut b = RunConfig::default();
        assert_eq!(a.hash(), b.hash());
        b.solver.seed = 1;
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 64);
    }
}
