//! `gpdrift`: experiment harness for drift estimation in Gaussian-process
//! regression. Each subcommand runs one experiment family from a JSON config
//! and writes a CSV report plus a JSON metadata sidecar.
//!
//! Exit codes: 0 all checks pass, 2 config error, 3 numerical-solver
//! failure, 4 statistical check failure.

mod config;
mod experiments;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand};
use thiserror::Error;

use config::ExperimentConfig;
use report::write_report;

/// Env var holding the default output directory for reports.
const OUT_DIR_ENV: &str = "GPDRIFT_OUT_DIR";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] gpdrift::Error),
}

#[derive(Parser)]
#[command(name = "gpdrift", version, about = "Drift-estimation experiment harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// JSON experiment configuration.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// CSV output path (overrides the config's output_path).
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads for replication-level parallelism.
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// Master seed (overrides the config's master_seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo bias / variance / normality of the estimator.
    Mc,
    /// Estimator error decay over a growing-horizon sweep.
    Consistency,
    /// Discrete-to-continuous mean-square gap over a grid-size sweep.
    D2c,
    /// Weight-solver forward residuals over a quadrature sweep.
    Residual,
    /// Fractional-operator invariant suite over random functions.
    Ops,
}

impl Command {
    fn experiment_name(&self) -> &'static str {
        match self {
            Command::Mc => "mc-bias-variance",
            Command::Consistency => "consistency-sweep",
            Command::D2c => "discrete-to-continuous",
            Command::Residual => "weight-residual",
            Command::Ops => "operator-properties",
        }
    }

    fn default_file(&self) -> &'static str {
        match self {
            Command::Mc => "mc.csv",
            Command::Consistency => "consistency.csv",
            Command::D2c => "d2c.csv",
            Command::Residual => "residual.csv",
            Command::Ops => "ops.csv",
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("gpdrift: statistical check failed");
            ExitCode::from(4)
        }
        Err(e @ CliError::Config(_)) => {
            eprintln!("gpdrift: {e}");
            ExitCode::from(2)
        }
        Err(e @ CliError::Numerical(_)) => {
            eprintln!("gpdrift: {e}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let config_path = cli
        .config
        .as_ref()
        .ok_or_else(|| CliError::Config("--config <path> is required".into()))?;
    let text = std::fs::read_to_string(config_path)
        .map_err(|e| CliError::Config(format!("cannot read {config_path:?}: {e}")))?;
    let mut cfg = ExperimentConfig::parse(&text)?;
    if let Some(seed) = cli.seed {
        cfg.master_seed = seed;
    }

    let expected = cli.command.experiment_name();
    if cfg.experiment != expected {
        return Err(CliError::Config(format!(
            "config declares experiment {:?} but the subcommand runs {expected:?}",
            cfg.experiment
        )));
    }

    let out = cli
        .out
        .clone()
        .or_else(|| cfg.output_path.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| {
            let dir = std::env::var_os(OUT_DIR_ENV)
                .map(PathBuf::from)
                .unwrap_or_else(|| PathBuf::from("."));
            dir.join(cli.command.default_file())
        });

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.workers.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Config(format!("cannot build worker pool: {e}")))?;

    let started = Instant::now();
    let result = pool.install(|| match cli.command {
        Command::Mc => experiments::run_mc(&cfg),
        Command::Consistency => experiments::run_consistency(&cfg),
        Command::D2c => experiments::run_d2c(&cfg),
        Command::Residual => experiments::run_residual(&cfg),
        Command::Ops => experiments::run_ops(&cfg),
    });
    let report = result?;
    write_report(&out, &report, cfg.master_seed, started.elapsed())?;
    println!(
        "{}: {} rows -> {} ({})",
        expected,
        report.rows.len(),
        out.display(),
        if report.all_pass { "pass" } else { "FAIL" }
    );
    if report.solver_failures > 0 {
        return Err(CliError::Numerical(gpdrift::Error::SolverFailure(format!(
            "{} replication(s) failed; see the report rows",
            report.solver_failures
        ))));
    }
    Ok(report.all_pass)
}
