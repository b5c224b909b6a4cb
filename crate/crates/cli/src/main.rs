//! `layerpot` batch front end.

mod commands;
mod config;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use error::Failure;

#[derive(Debug, Parser)]
#[command(name = "layerpot", version, about = "Single-layer transmission problems in balls")]
pub struct Cli {
    /// JSON config for the command; flags override its fields.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// CSV output path (stdout when absent); a `.json` sidecar is written next to it.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Quadrature target tolerance.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Modulus of continuity tools.
    #[command(subcommand)]
    Modulus(ModulusCmd),
    /// Evaluate the transmission problem solution.
    #[command(subcommand)]
    Solve(SolveCmd),
    /// Closed-form reference solutions.
    #[command(subcommand)]
    Oracle(OracleCmd),
    /// Numerical experiments.
    #[command(subcommand)]
    Experiment(ExperimentCmd),
}

#[derive(Debug, Subcommand)]
pub enum ModulusCmd {
    /// Dini classification on a ladder of lower limits.
    Classify {
        #[arg(long)]
        family: Option<String>,
        /// Family parameters as a JSON object.
        #[arg(long)]
        params: Option<String>,
        /// Comma-separated, strictly decreasing deltas in (0, 1).
        #[arg(long)]
        ladder: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum SolveCmd {
    /// `u` at the points of a CSV file (one point per row).
    Eval {
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long)]
        points: Option<PathBuf>,
        /// Also report the gradient.
        #[arg(long)]
        gradient: bool,
    },
    /// Normal-derivative jump at a point of the interface.
    Jump {
        #[arg(long)]
        problem: Option<PathBuf>,
        /// Comma-separated coordinates.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<String>,
        /// Comma-separated offsets.
        #[arg(long)]
        h_ladder: Option<String>,
        #[arg(long)]
        order: Option<f64>,
    },
}

#[derive(Debug, Subcommand)]
pub enum OracleCmd {
    /// Spherical interface with constant density, n = 3.
    Radial {
        #[arg(long)]
        s: Option<f64>,
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        g0: Option<f64>,
        /// Comma-separated values of |x|.
        #[arg(long)]
        radii: Option<String>,
    },
}

#[derive(Debug, Subcommand)]
pub enum ExperimentCmd {
    /// Gradient blow-up for the counterexample graph.
    BlowupGraph {
        #[arg(long)]
        control: bool,
    },
    /// Gradient blow-up for the counterexample density.
    BlowupDensity {
        #[arg(long)]
        control: bool,
    },
    /// Curved versus tangent-plane solutions across scales.
    KeyLemma {
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Piecewise-linear approximation iteration.
    Iterate {
        #[arg(long)]
        problem: Option<PathBuf>,
        #[arg(long)]
        rho: Option<f64>,
        #[arg(long)]
        steps: Option<usize>,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        seed: Option<u64>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let threads = match cli.threads {
        Some(0) => {
            eprintln!("{}", Failure::Schema("threads: must be positive".into()));
            return ExitCode::from(2);
        }
        Some(t) => t,
        None => std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1),
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("{}", Failure::runtime(e));
            return ExitCode::from(1);
        }
    };
    match pool.install(|| commands::dispatch(&cli)) {
        Ok(status) => ExitCode::from(status),
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
