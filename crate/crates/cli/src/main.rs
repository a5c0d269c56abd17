//! Command-line front end: `cuspflow <subcommand> --config <path>
//! [--out <dir>] [--jobs N]`.

mod commands;
mod config;
mod output;

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

/// Exit codes: 0 success, 1 failed verdicts, 2 configuration errors,
/// 3 geometry errors, 4 solver errors, 5 I/O errors.
#[derive(Debug)]
pub enum CliError {
    Config(String),
    Geometry(cuspflow_core::Error),
    Solver(cuspflow_core::Error),
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Geometry(e) => write!(f, "geometry error: {e}"),
            CliError::Solver(e) => write!(f, "solver error: {e}"),
            CliError::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Geometry(_) => 3,
            CliError::Solver(_) => 4,
            CliError::Io(_) => 5,
        }
    }
}

#[derive(Parser)]
#[command(
    name = "cuspflow",
    version,
    about = "Porous-medium flow studies on meshes with cusp and wedge singular ends"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Path to the run configuration (TOML).
    #[arg(long, global = true, default_value = "cuspflow.toml")]
    config: PathBuf,
    /// Output root; overrides the CUSPFLOW_OUT environment variable and the
    /// configured output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Concurrent experiment jobs (each subcommand runs a single job today;
    /// validated and recorded for reproducibility).
    #[arg(long, global = true)]
    jobs: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Classify the cusp profile and dump the mesh.
    GeometryCheck,
    /// Spectral-gap refinement study (discrete Poincare constant).
    Poincare,
    /// One semilinear resolvent solve.
    Resolvent,
    /// Run the implicit stepper and persist the trace.
    Evolve,
    /// Decay-rate fit of a perturbed constant equilibrium.
    Stability,
    /// Resolvent sup-bound sweep over a lambda grid.
    MaxPrinciple,
    /// Accretivity margins of the nonlinear operator.
    Accretivity,
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let mut config = config::parse_config(&cli.config)?;
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            return Err(CliError::Config("--jobs must be at least 1".into()));
        }
        config.output.jobs = jobs;
    }
    let out = cli.out.as_deref();
    match cli.command {
        Command::GeometryCheck => commands::geometry_check(&config, out),
        Command::Poincare => commands::poincare(&config, out),
        Command::Resolvent => commands::resolvent(&config, out),
        Command::Evolve => commands::evolve(&config, out),
        Command::Stability => commands::stability(&config, out),
        Command::MaxPrinciple => commands::max_principle(&config, out),
        Command::Accretivity => commands::accretivity(&config, out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
