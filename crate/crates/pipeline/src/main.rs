use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use zsparse::output::{expand_glob, ConstantsBlock};
use zsparse::{PipelineError, Result, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "zsparse", version, about = "Vorticity sparseness diagnostics for periodic Navier-Stokes runs")]
struct Cli {
    /// Key-value run configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides ZSPARSE_OUT and the config).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Snapshot files to read; defaults to `<out>/snapshot_*.zsp`.
    #[arg(long, global = true, value_name = "GLOB")]
    snapshots: Option<String>,
    /// Constant of the admissible window after an escape time.
    #[arg(long = "c-m", global = true, value_name = "FLOAT")]
    c_m: Option<f64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run the solver and write snapshots and trajectory.csv.
    Simulate,
    /// Sparseness diagnostics per snapshot: diagnose.json, fractions.csv, scaling.csv.
    Diagnose,
    /// Power-law fit of sparseness against diffusion scale: fit.json.
    Fit {
        /// Defaults to `<out>/scaling.csv`.
        scaling: Option<PathBuf>,
    },
    /// Convert raw velocity dumps (with `.hdr` sidecars) into snapshots.
    Ingest { paths: Vec<PathBuf> },
    /// Print the constants block as JSON.
    VerifyConstants,
    /// 1D sparseness check after each escape time: criterion.json.
    CriterionCheck,
}

fn snapshot_paths(cli: &Cli, cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let pattern = match &cli.snapshots {
        Some(p) => p.clone(),
        None => cfg.out_dir.join("snapshot_*.zsp").to_string_lossy().into_owned(),
    };
    expand_glob(&pattern)
}

fn print_json<T: serde::Serialize>(v: &T) {
    println!("{}", serde_json::to_string_pretty(v).expect("reports serialize"));
}

fn run(cli: &Cli) -> Result<()> {
    let mut cfg = match &cli.config {
        Some(p) => RunConfig::load(p)?,
        None => RunConfig::default(),
    };
    cfg.apply_env();
    if let Some(out) = &cli.out {
        cfg.out_dir = out.clone();
    }
    if let Some(c) = cli.c_m {
        cfg.diagnostics.c_m = c;
    }

    match &cli.command {
        Command::Simulate => {
            let r = zsparse::simulate(&cfg)?;
            println!("{} steps, {} snapshots in {}", r.steps, r.snapshots.len(), cfg.out_dir.display());
        }
        Command::Diagnose => {
            let r = zsparse::diagnose(&snapshot_paths(cli, &cfg)?, &cfg)?;
            for s in &r.snapshots {
                let fmt = |v: Option<f64>| v.map_or("none".to_string(), |x| format!("{x:.4e}"));
                println!(
                    "{}: t = {}, r = {}, r* = {}",
                    s.file,
                    s.report.t,
                    fmt(s.report.headline_scale),
                    fmt(s.report.guaranteed.map(|g| g.r_star))
                );
            }
        }
        Command::Fit { scaling } => {
            let path = scaling.clone().unwrap_or_else(|| cfg.out_dir.join(zsparse::diagnose::SCALING_FILE));
            let r = zsparse::fit(&path, &cfg)?;
            println!("beta = {}, alpha = {}, residual = {}, {} ({})", r.beta, r.alpha, r.residual, r.landmark, r.label);
        }
        Command::Ingest { paths } => {
            let paths = if paths.is_empty() { cfg.ingest_paths.clone() } else { paths.clone() };
            if paths.is_empty() {
                return Err(PipelineError::Usage("ingest needs at least one raw file".into()));
            }
            for p in &paths {
                print_json(&zsparse::ingest(p, &cfg.out_dir)?);
            }
        }
        Command::VerifyConstants => print_json(&ConstantsBlock::for_config(&cfg)?),
        Command::CriterionCheck => {
            let r = zsparse::criterion_check(&snapshot_paths(cli, &cfg)?, &cfg)?;
            for c in &r.checks {
                match (&c.report, &c.error) {
                    (Some(rep), _) => println!("{}: t = {}, passing fraction {}", c.file, c.t, rep.fraction_passing),
                    (None, Some(e)) => println!("{}: t = {}, {e}", c.file, c.t),
                    (None, None) => {}
                }
            }
            println!("{} escape times, {} snapshots checked", r.escapes.len(), r.checks.len());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
