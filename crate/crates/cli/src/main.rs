//! `ecmo`: solve, sweep, benchmark and gradient-check equality-constrained
//! multi-objective problems.

mod commands;
mod load;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ecmo_core::EcmoError;
use serde::Serialize;

#[derive(Debug, Parser)]
#[command(
    name = "ecmo",
    version,
    about = "Equality-constrained multi-objective optimization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve for a single preference vector.
    Solve(SolveArgs),
    /// Solve over a grid of preferences and assemble the Pareto front.
    Sweep(SweepArgs),
    /// Emit a fixture's grid-oracle front and compare a front against it.
    Bench(BenchArgs),
    /// Compare analytic gradients with central finite differences.
    Gradcheck(GradcheckArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverChoice {
    Wc,
    WcStoc,
    Ls,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DisplayMode {
    Raw,
    /// Add 1/F columns next to the raw objectives.
    Inverse,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolverArgs {
    /// Problem JSON file or `fixture:NAME`.
    #[arg(long)]
    pub problem: String,
    #[arg(long, value_enum, default_value = "wc")]
    pub solver: SolverChoice,
    /// Iteration count.
    #[arg(long = "T", default_value_t = 10_000)]
    pub iterations: usize,
    /// Step-size constant; defaults to the fixture hint or the library default.
    #[arg(long)]
    pub eta_c: Option<f64>,
    /// Penalty constant; defaults to the fixture hint or the library default.
    #[arg(long)]
    pub uv_c: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.0)]
    pub sigma_f: f64,
    #[arg(long, default_value_t = 0.0)]
    pub sigma_h: f64,
    /// Keep every N-th trace row.
    #[arg(long)]
    pub record_every: Option<usize>,
    /// Stop once the squared KKT residual falls below this value.
    #[arg(long)]
    pub stop_tol: Option<f64>,
    /// Starting point as a comma list; defaults to the fixture start or zero.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub z0: Option<Vec<f64>>,
    #[arg(long, value_enum, default_value = "raw")]
    pub display: DisplayMode,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SolveArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: SolverArgs,
    /// Preference vector as a comma list summing to 1.
    #[arg(long)]
    pub lambda: String,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct SweepArgs {
    #[command(flatten)]
    #[serde(flatten)]
    pub common: SolverArgs,
    #[arg(long, default_value_t = 10)]
    pub grid_resolution: usize,
    #[arg(long, default_value_t = ecmo_core::explorer::DEFAULT_FLOOR)]
    pub floor: f64,
    /// Worker threads; 0 uses all cores.
    #[arg(long, default_value_t = 0)]
    pub workers: usize,
    /// Largest final `|h|` admitted to the front.
    #[arg(long, default_value_t = ecmo_core::explorer::DEFAULT_ADMISSION_TOL)]
    pub admission_tol: f64,
    /// Hypervolume reference point; defaults to 1.1 * max + 0.1 per objective.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub ref_point: Option<Vec<f64>>,
    /// Oracle grid density for the epsilon indicator; defaults to the fixture's.
    #[arg(long)]
    pub grid_density: Option<usize>,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct BenchArgs {
    #[arg(long)]
    pub fixture: String,
    #[arg(long)]
    pub grid_density: Option<usize>,
    /// Front CSV to compare against the oracle.
    #[arg(long)]
    pub front: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "raw")]
    pub display: DisplayMode,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct GradcheckArgs {
    #[arg(long)]
    pub fixture: String,
    #[arg(long, default_value_t = ecmo_core::problem::DEFAULT_FD_STEP)]
    pub step: f64,
    /// Random points per function, in addition to the starting point.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Failure with the process exit code it maps to.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn input(message: impl Into<String>) -> Self {
        CliError {
            code: 1,
            message: message.into(),
        }
    }

    pub fn numerical(message: impl Into<String>) -> Self {
        CliError {
            code: 2,
            message: message.into(),
        }
    }
}

impl From<EcmoError> for CliError {
    fn from(e: EcmoError) -> Self {
        match e {
            EcmoError::Diverged { .. } => CliError::numerical(e.to_string()),
            _ => CliError::input(e.to_string()),
        }
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::Solve(args) => commands::solve(&args, &argv),
        Command::Sweep(args) => commands::sweep(&args, &argv),
        Command::Bench(args) => commands::bench(&args),
        Command::Gradcheck(args) => commands::gradcheck(&args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
