use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Result;
use clap::{Parser, Subcommand};
use hopfield_core::HopfieldError;

mod config;
mod tasks;
mod units;

use config::{ConfigError, RunConfig, UnitSystem};
use tasks::{TaskContext, VerificationFailed};
use units::Units;

#[derive(Parser)]
#[command(name = "hopfield", version, about = "Polariton modes of a vacuum/polar-dielectric interface")]
struct Cli {
    #[command(subcommand)]
    task: Task,

    /// JSON run configuration (defaults apply when omitted).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Output directory for CSV/JSON artifacts.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Unit system of config values and outputs.
    #[arg(long, global = true, value_enum)]
    units: Option<UnitSystem>,

    /// Tolerance override for the task's self-checks.
    #[arg(long, global = true)]
    tol: Option<f64>,
}

#[derive(Subcommand, Clone, Copy)]
enum Task {
    /// Sweep the bulk and surface branches.
    Dispersion,
    /// Sample the Hopfield coefficients of one analytic mode.
    Mode,
    /// Diagonalize the discretized real-space operator.
    Solve,
    /// Nonlinear scattering coefficient of a set of modes.
    Scatter,
    /// Bath-dressed dielectric response and driven fields.
    Lossy,
    /// Run the numbered acceptance checks.
    Verify,
}

fn run(cli: &Cli) -> Result<Vec<PathBuf>> {
    if let Some(t) = cli.tol {
        if !(t > 0.0 && t.is_finite()) {
            return Err(ConfigError::new("", format!("--tol must be positive, got {t}")).into());
        }
    }
    let cfg = match &cli.config {
        Some(p) => config::load(p)?,
        None => RunConfig::default(),
    };
    let units = Units::resolve(&cfg, cli.units);
    let ctx = TaskContext::new(cfg, units, cli.out.clone(), cli.tol)?;
    match cli.task {
        Task::Dispersion => tasks::dispersion(&ctx),
        Task::Mode => tasks::mode(&ctx),
        Task::Solve => tasks::solve(&ctx),
        Task::Scatter => tasks::scatter(&ctx),
        Task::Lossy => tasks::lossy(&ctx),
        Task::Verify => tasks::verify(&ctx),
    }
}

fn exit_code(e: &anyhow::Error) -> u8 {
    if e.downcast_ref::<VerificationFailed>().is_some() {
        1
    } else if e.downcast_ref::<ConfigError>().is_some() {
        2
    } else {
        3
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(files) => {
            for f in files {
                println!("wrote {}", tasks::relative(&cli.out, &f));
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            if let Some(h) = e.downcast_ref::<HopfieldError>() {
                eprintln!("  cause: {h:?}");
            }
            ExitCode::from(exit_code(&e))
        }
    }
}
