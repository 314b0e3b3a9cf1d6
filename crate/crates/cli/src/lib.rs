//! Command-line front end for the aggregation experiments.
//!
//! Every option can also come from a flat JSON file passed with `--config`; keys are
//! the long flag names (`"n"`, `"temperature"`, `"tail-c"`, `"constants.c5"`, ...).
//! A flag given on the command line wins over the file, which wins over the default.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

mod commands;
pub mod output;
pub mod settings;
pub mod svg;
pub mod tables;

/// Error kinds with distinct exit codes.
#[derive(Debug)]
pub enum Failure {
    /// Rejected before any computation: exit 2.
    Config(anyhow::Error),
    /// Failed while running or writing output: exit 1.
    Runtime(anyhow::Error),
}

impl Failure {
    pub fn exit_code(&self) -> i32 {
        match self {
            Failure::Config(_) => 2,
            Failure::Runtime(_) => 1,
        }
    }

    pub fn error(&self) -> &anyhow::Error {
        match self {
            Failure::Config(e) | Failure::Runtime(e) => e,
        }
    }
}

pub type Outcome<T> = Result<T, Failure>;

pub(crate) trait Classify<T> {
    fn config(self) -> Outcome<T>;
    fn runtime(self) -> Outcome<T>;
}

impl<T, E: Into<anyhow::Error>> Classify<T> for Result<T, E> {
    fn config(self) -> Outcome<T> {
        self.map_err(|e| Failure::Config(e.into()))
    }

    fn runtime(self) -> Outcome<T> {
        self.map_err(|e| Failure::Runtime(e.into()))
    }
}

#[derive(Debug, Parser)]
#[command(name = "aew", version, about = "Exponential-weights aggregation experiments")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Monte Carlo experiments.
    #[command(subcommand)]
    Exp(Experiment),
    /// Shell-count complexity psi(r) of a list of excess risks.
    Psi(PsiArgs),
    /// Quantile gamma1 of a normalized sum and the checks built on it.
    Gamma1(Gamma1Args),
    /// Kolmogorov distance of a normalized sum to the normal law against its Berry-Esseen bound.
    BeCheck(BeCheckArgs),
    /// Exponential weights of a vector of empirical risks.
    Weights(WeightsArgs),
}

#[derive(Debug, Subcommand)]
pub enum Experiment {
    /// Two-indicator model: exact expectation and tail with a Monte Carlo cross-check.
    TheoremA(TheoremAArgs),
    /// Large dictionary where the weights collapse on a suboptimal member.
    TheoremB(TheoremBArgs),
    /// Excess risk of the generic pipeline against the complexity bounds.
    TheoremC(TheoremCArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Flat JSON file with defaults for any option.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Master seed; required.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads (results do not depend on it). Default: available cores.
    #[arg(long)]
    pub workers: Option<usize>,
    /// Constant overrides, `key=value`; repeatable or comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub constants: Vec<String>,
    /// CSV output path (standard output when absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON output path.
    #[arg(long)]
    pub json: Option<PathBuf>,
    /// SVG log-log plot of mean excess against n.
    #[arg(long)]
    pub svg: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Sample sizes, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// Temperatures, comma-separated.
    #[arg(long, value_delimiter = ',')]
    pub temperature: Vec<f64>,
    /// Monte Carlo replicates per grid point.
    #[arg(long)]
    pub trials: Option<usize>,
}

#[derive(Debug, Args)]
pub struct TheoremAArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Tail threshold is `tail-c / sqrt(n)`.
    #[arg(long)]
    pub tail_c: Option<f64>,
}

#[derive(Debug, Args)]
pub struct TheoremBArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long)]
    pub kappa: Option<f64>,
    /// Override of the excess-risk gap lambda.
    #[arg(long)]
    pub lambda: Option<f64>,
    /// Override of the dictionary size M.
    #[arg(long)]
    pub m: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DictionaryKind {
    Bernstein,
    TheoremA,
}

#[derive(Debug, Args)]
pub struct TheoremCArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long, value_enum)]
    pub dictionary: Option<DictionaryKind>,
    /// Size of the Bernstein dictionary.
    #[arg(long)]
    pub dict_m: Option<usize>,
    /// Loss bound of the Bernstein dictionary.
    #[arg(long)]
    pub dict_b: Option<f64>,
    /// Confidence parameter.
    #[arg(long)]
    pub x: Option<f64>,
}

#[derive(Debug, Args)]
pub struct PsiArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Excess risks, comma-separated; sorted internally, the smallest must be 0.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub deltas: Vec<f64>,
    #[arg(long)]
    pub r: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ContinuousKind {
    Uniform,
    Gaussian,
}

#[derive(Debug, Args)]
pub struct Gamma1Args {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Number of independent copies of the normalized sum.
    #[arg(long)]
    pub ell: Option<usize>,
    /// The `n` in the level `1 - 1/n`.
    #[arg(long)]
    pub level_n: Option<f64>,
    /// Summands inside the normalized sum (default 1).
    #[arg(long)]
    pub inner_n: Option<usize>,
    #[arg(long, value_enum)]
    pub kind: Option<ContinuousKind>,
    /// Window for the ratio |gamma1| / sqrt(log(c3 ell / log n)), `lo,hi`.
    #[arg(long, value_delimiter = ',')]
    pub window: Vec<f64>,
    /// Also estimate gamma1 from this many Monte Carlo draws (needs --seed).
    #[arg(long)]
    pub mc_draws: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub constants: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SummandChoice {
    Uniform,
    Rademacher,
    Gaussian,
}

#[derive(Debug, Args)]
pub struct BeCheckArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Summands per normalized sum, comma-separated (default 4,16,64).
    #[arg(long, value_delimiter = ',')]
    pub inner_n: Vec<usize>,
    /// Monte Carlo samples per inner_n (default 1000000).
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long, value_enum)]
    pub kind: Option<SummandChoice>,
    /// Probability of +1 for the Rademacher summand (default 0.5).
    #[arg(long)]
    pub p_plus: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_delimiter = ',')]
    pub constants: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct WeightsArgs {
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Empirical risks, comma-separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub risks: Vec<f64>,
    /// Sample size behind the risks.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub temperature: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match commands::dispatch(cli) {
        Ok(()) => 0,
        Err(f) => {
            eprintln!("error: {:#}", f.error());
            f.exit_code()
        }
    }
}
