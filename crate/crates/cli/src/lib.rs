//! Command-line front end: `estimate`, `simulate`, `sweep` and `verify`.

pub mod commands;
pub mod formats;
pub mod verify;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Exit codes shared by all subcommands.
pub mod exit {
    pub const OK: i32 = 0;
    /// `verify` found a failing invariant family.
    pub const CHECK_FAILED: i32 = 1;
    pub const MAX_ITERATIONS: i32 = 2;
    pub const CYCLE_DETECTED: i32 = 3;
    pub const INPUT_ERROR: i32 = 4;
    /// The solver stopped on a numerical error or reached the boundary.
    pub const NUMERIC_ERROR: i32 = 5;
}

#[derive(Debug, Parser)]
#[command(name = "tomoml", version, about = "Maximum-likelihood quantum state tomography")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Estimate a density matrix from a POVM and a dataset.
    Estimate(EstimateArgs),
    /// Write the POVM and dataset of a built-in experiment.
    Simulate(SimulateArgs),
    /// Iteration counts over a list of stepsizes, as CSV.
    Sweep(SweepArgs),
    /// Check likelihood and solver invariants on random instances.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum RuleArg {
    Rrhor,
    Fixed,
    Armijo,
    Exact,
}

#[derive(Debug, Args)]
pub struct EstimateArgs {
    /// POVM file.
    pub povm: PathBuf,
    /// Dataset file.
    pub data: PathBuf,
    #[arg(long, value_enum, default_value = "armijo")]
    pub rule: RuleArg,
    /// Stepsize for `--rule fixed` [default: 1].
    #[arg(long)]
    pub t: Option<f64>,
    /// Largest trial stepsize for `--rule armijo` and `--rule exact` [default: 1].
    #[arg(long)]
    pub t_max: Option<f64>,
    /// Armijo sufficient-increase parameter [default: 1e-4].
    #[arg(long)]
    pub gamma: Option<f64>,
    /// Armijo backtracking interval lower end [default: 0.5].
    #[arg(long)]
    pub alpha0: Option<f64>,
    /// Armijo backtracking interval upper end [default: 0.5].
    #[arg(long)]
    pub alpha1: Option<f64>,
    /// Armijo backtracking cap per iteration [default: 60].
    #[arg(long)]
    pub max_backtracks: Option<usize>,
    /// Grid points for `--rule exact` [default: 200].
    #[arg(long)]
    pub grid: Option<usize>,
    /// Golden-section rounds for `--rule exact` [default: 60].
    #[arg(long)]
    pub refinements: Option<usize>,
    /// Stop when consecutive iterates are closer than this.
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    /// Stop when ‖Rρ − ρ‖ falls below this.
    #[arg(long, default_value_t = 1e-8)]
    pub tol_stationarity: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// `mixed` for I/d, or a JSON file holding a matrix or a result file.
    #[arg(long, default_value = "mixed")]
    pub init: String,
    /// Result file [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Per-iteration CSV log.
    #[arg(long)]
    pub log: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// `counterexample` or `w-state`.
    #[arg(long)]
    pub experiment: String,
    /// Qubit count for `w-state`.
    #[arg(long, default_value_t = 3)]
    pub qubits: usize,
    /// Sample this many outcomes instead of writing exact probabilities.
    #[arg(long)]
    pub shots: Option<u64>,
    #[arg(long, env = "TOMOML_SEED", default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out_povm: PathBuf,
    #[arg(long)]
    pub out_data: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub povm: PathBuf,
    #[arg(long)]
    pub data: PathBuf,
    /// Comma-separated values, or `log:LO:HI:COUNT` for log-spaced values.
    #[arg(long, default_value = "log:1e-3:1e3:13")]
    pub t_values: String,
    /// Comma-separated subset of `armijo,fixed`.
    #[arg(long, default_value = "armijo,fixed")]
    pub rules: String,
    #[arg(long, default_value_t = 1e-7)]
    pub tol: f64,
    #[arg(long, default_value_t = 100_000)]
    pub max_iter: usize,
    /// CSV output [default: stdout].
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Random instances per invariant family.
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, env = "TOMOML_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Largest Hilbert-space dimension sampled.
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(2..=16))]
    pub dim_max: u64,
}

/// Parses `args` and runs the command, returning the process exit code.
pub fn run<I, S>(args: I) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { exit::INPUT_ERROR } else { exit::OK };
        }
    };
    match cli.command {
        Command::Estimate(a) => commands::estimate(&a),
        Command::Simulate(a) => commands::simulate(&a),
        Command::Sweep(a) => commands::sweep(&a),
        Command::Verify(a) => verify::run(&a),
    }
}
