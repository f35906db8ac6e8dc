//! `arpgda` command-line tool: generate datasets, run the solvers, sweep
//! comparisons and compute diagnostics.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 data error,
//! 3 numerical failure.

mod commands;
mod config;
mod failure;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use arpgda::compare::Algorithm;
use clap::{Parser, Subcommand};

use config::{DataArgs, SolverArgs};

#[derive(Parser, Debug)]
#[command(name = "arpgda", version, about = "Fair PCA on the Stiefel manifold")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a synthetic dataset as CSV plus a `.meta.json` sidecar.
    Gen(GenArgs),
    /// Run one solver once per seed and write a JSON report per run.
    Solve(SolveArgs),
    /// Sweep algorithm x rank x seed on one dataset.
    Compare(CompareArgs),
    /// Diagnostics on a saved iterate.
    Metrics(MetricsArgs),
}

#[derive(clap::Args, Debug)]
pub struct GenArgs {
    #[command(subcommand)]
    kind: GenKind,
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Output CSV path.
    #[arg(short, long, global = true, default_value = "data.csv")]
    output: PathBuf,
    #[arg(long, global = true)]
    group_col: Option<String>,
}

#[derive(Subcommand, Debug)]
pub enum GenKind {
    /// One standard Gaussian sample per group.
    Gaussian {
        #[arg(long)]
        d: usize,
        #[arg(long)]
        n: usize,
    },
    /// Gaussian groups with group-specific feature scales.
    Blocks {
        #[arg(long)]
        d: usize,
        /// Comma-separated group sizes.
        #[arg(long, value_delimiter = ',', required = true)]
        sizes: Vec<usize>,
    },
}

#[derive(clap::Args, Debug)]
pub struct SolveArgs {
    #[arg(value_parser = parse_algorithm)]
    algorithm: Algorithm,
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Number of columns of U.
    #[arg(long)]
    r: Option<String>,
    /// Seeds, comma-separated; one run each.
    #[arg(long, value_delimiter = ',')]
    seed: Vec<u64>,
    /// Stop rsg once phi reaches (1 - 1e-4) times this value.
    #[arg(long)]
    ref_phi: Option<f64>,
    /// Start from this U (CSV, d rows of r values) instead of a random point.
    #[arg(long)]
    init_u: Option<PathBuf>,
    /// Orthonormality tolerance for the initial point and every iterate.
    #[arg(long)]
    tol_orth: Option<f64>,
    /// Also write the final U as `<alg>_r<r>_s<seed>_U.csv`.
    #[arg(long)]
    save_u: bool,
    /// JSON file with defaults for any of the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory for reports [default: .].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct CompareArgs {
    #[command(flatten)]
    data: DataArgs,
    #[command(flatten)]
    solver: SolverArgs,
    /// Ranks: `3`, `1:10` or `1,2,5`.
    #[arg(long)]
    r: Option<String>,
    /// Number of seeds (0..N) [default: 10].
    #[arg(long)]
    seeds: Option<u64>,
    /// Algorithms, comma-separated [default: arpgda,rsg].
    #[arg(long, value_delimiter = ',')]
    algs: Option<Vec<String>>,
    /// rsg stepsize scales to sweep; the best final phi is kept.
    #[arg(long, value_delimiter = ',')]
    c_grid: Option<Vec<f64>>,
    /// Cells run concurrently [default: 1].
    #[arg(long)]
    jobs: Option<usize>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: .].
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(clap::Args, Debug)]
pub struct MetricsArgs {
    #[arg(value_parser = ["dist-subgrad"])]
    metric: String,
    #[command(flatten)]
    data: DataArgs,
    /// Checkpoint U (CSV, d rows of r values).
    #[arg(long)]
    u: PathBuf,
    /// Groups with f_i - min f <= this x min f count as active.
    #[arg(long, default_value_t = 0.1)]
    rel_threshold: f64,
    #[arg(long)]
    tol_orth: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write the JSON result here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_algorithm(s: &str) -> Result<Algorithm, String> {
    s.parse().map_err(|e: arpgda::Error| e.to_string())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();

    let outcome = match &cli.command {
        Command::Gen(args) => commands::gen(args),
        Command::Solve(args) => commands::solve(args),
        Command::Compare(args) => commands::compare(args),
        Command::Metrics(args) => commands::metrics(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.code())
        }
    }
}
