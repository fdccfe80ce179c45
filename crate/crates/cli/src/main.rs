//! `smoothsr`: data generation, optimization, landscape analysis and
//! decoding for smooth symbolic regression.

mod commands;
mod error;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use error::CliError;

#[derive(Parser, Debug)]
#[command(name = "smoothsr", version, about = "Smooth symbolic regression experiments")]
struct Cli {
    /// Worker threads; 0 or unset uses every core.
    #[arg(long, global = true, env = "SMOOTHSR_THREADS")]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Write a regression dataset as CSV plus a manifest.
    GenData(GenDataArgs),
    /// Run CMA-ES on a smooth problem and write its trace and result.
    Optimize(OptimizeArgs),
    /// Run the landscape analysis battery and write a measure table.
    Fla(FlaArgs),
    /// Print the crisp formula of a genotype file.
    Decode(DecodeArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DataProblem {
    /// Ten uniform inputs labelled by the Poly-10 polynomial.
    Poly10,
    /// Rows of an existing CSV file given by --input.
    Csv,
}

#[derive(Args, Debug)]
pub struct GenDataArgs {
    #[arg(long, value_enum, default_value = "poly10")]
    pub problem: DataProblem,
    /// Number of rows; for csv, keeps the first rows of the input.
    #[arg(long)]
    pub rows: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sampling range of the inputs, as `lo,hi`.
    #[arg(long, default_value = "-1,1", value_parser = parse_range, allow_hyphen_values = true)]
    pub range: (f64, f64),
    /// Source file for `--problem csv`.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug)]
pub struct OptimizeArgs {
    /// Problem JSON: tree, penalty and data source.
    #[arg(long)]
    pub config: PathBuf,
    /// Dataset CSV, replacing the config's data source.
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Optimizer JSON.
    #[arg(long)]
    pub opt: Option<PathBuf>,
    /// Evaluation budget, replacing the optimizer config's.
    #[arg(long)]
    pub max_evals: Option<u64>,
    /// Seed, replacing the optimizer config's.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Share of a leaf's weight a term needs to survive decoding.
    #[arg(long, default_value_t = 0.05, value_parser = parse_threshold)]
    pub threshold: f64,
    /// Also write every single evaluation to evaluations.csv.
    #[arg(long)]
    pub record_evaluations: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug)]
pub struct FlaArgs {
    #[arg(long)]
    pub config: PathBuf,
    #[arg(long)]
    pub data: Option<PathBuf>,
    /// Comma-separated manipulator names.
    #[arg(long, default_value = "poly-1-15,poly-all-15,poly-1-2,poly-all-2,uni-1")]
    pub manipulators: String,
    /// Steps of the random walk.
    #[arg(long)]
    pub walk_length: Option<usize>,
    /// Up walks and down walks per manipulator.
    #[arg(long)]
    pub reps: Option<usize>,
    /// Candidates per adaptive step.
    #[arg(long)]
    pub neighbors: Option<usize>,
    /// Cap on accepted adaptive moves.
    #[arg(long)]
    pub max_steps: Option<usize>,
    /// Dead zone of the information analysis.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Operator penalty weight; defaults to the config's final stage.
    #[arg(long)]
    pub lambda_op: Option<f64>,
    /// Variable penalty weight; defaults to the config's final stage.
    #[arg(long)]
    pub lambda_var: Option<f64>,
    /// Also write every walk to walks.csv.
    #[arg(long)]
    pub keep_traces: bool,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub force: bool,
}

#[derive(Args, Debug)]
pub struct DecodeArgs {
    #[arg(long)]
    pub genotype: PathBuf,
    #[arg(long, default_value_t = 0.05, value_parser = parse_threshold)]
    pub threshold: f64,
}

fn parse_range(s: &str) -> Result<(f64, f64), String> {
    let (lo, hi) = s.split_once(',').ok_or_else(|| format!("expected `lo,hi`, got `{s}`"))?;
    let parse = |v: &str| v.trim().parse::<f64>().map_err(|e| format!("`{v}`: {e}"));
    let (lo, hi) = (parse(lo)?, parse(hi)?);
    if !(lo < hi && lo.is_finite() && hi.is_finite()) {
        return Err(format!("range needs finite lo < hi, got [{lo}, {hi}]"));
    }
    Ok((lo, hi))
}

fn parse_threshold(s: &str) -> Result<f64, String> {
    let t: f64 = s.parse().map_err(|e| format!("`{s}`: {e}"))?;
    if t > 0.0 && t < 1.0 {
        Ok(t)
    } else {
        Err(format!("threshold must lie in (0, 1), got {t}"))
    }
}

fn init_threads(threads: Option<usize>) -> Result<(), CliError> {
    let n = threads.unwrap_or(0);
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Runtime(format!("cannot start {n} worker threads: {e}")))
}

fn run(cli: Cli) -> Result<(), CliError> {
    init_threads(cli.threads)?;
    match cli.command {
        Command::GenData(args) => commands::gen_data(&args),
        Command::Optimize(args) => commands::optimize(&args),
        Command::Fla(args) => commands::fla(&args),
        Command::Decode(args) => commands::decode(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
