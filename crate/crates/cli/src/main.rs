//! `sncpa`: self-normalized conditional predictive ability tests from the
//! command line.
//!
//! Exit codes: 0 on success, 2 when a statistic is degenerate on the given
//! data, 1 on I/O or usage errors.

mod commands;
mod input;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Io(String),
    Parse(String),
    /// The data make a statistic undefined (constant series, collinear
    /// test functions, ...).
    Degenerate(String),
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Degenerate(_) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "usage error: {m}"),
            CliError::Io(m) => write!(f, "I/O error: {m}"),
            CliError::Parse(m) => write!(f, "parse error: {m}"),
            CliError::Degenerate(m) => write!(f, "{m}"),
        }
    }
}

impl From<sncpa_sim::Error> for CliError {
    fn from(e: sncpa_sim::Error) -> Self {
        use sncpa_sim::Error as E;
        match e {
            E::Stat(s) => commands::stat_error(&s),
            E::Io { .. } => CliError::Io(e.to_string()),
            E::InvalidArgument(_) | E::InvalidConfig(_) => CliError::Usage(e.to_string()),
            other => CliError::Io(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "sncpa", version, about = "Self-normalized tests of conditional predictive ability")]
struct Cli {
    /// Cap on worker threads for simulations (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test equal conditional predictive ability on a CSV of loss differentials.
    Test(TestArgs),
    /// Simulate a quantile table of a limiting distribution and write it as JSON.
    Critvals(CritvalsArgs),
    /// Rerun a published size table or power experiment and compare.
    Replicate(ReplicateArgs),
    /// Write 5%-level power curves as SVG and CSV.
    PlotPower(PlotPowerArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum StatChoice {
    /// Scalar statistic with the last test-function column.
    Q1,
    /// Statistic with all test-function columns (scalar form when q = 1).
    Q2,
    /// Self-normalized unconditional DM.
    SnDm,
    /// HAC Wald test with all test-function columns.
    Gw,
    /// HAC Diebold-Mariano.
    Dm,
    All,
}

#[derive(Args)]
pub struct CacheArgs {
    /// Critical-value cache directory (default: $SNCPA_CACHE_DIR, then the user cache dir).
    #[arg(long)]
    pub cache_dir: Option<PathBuf>,
    /// Walk steps for critical values simulated on a cache miss.
    #[arg(long, default_value_t = 20_000)]
    pub cv_steps: usize,
    /// Replications for critical values simulated on a cache miss.
    #[arg(long, default_value_t = 10_000)]
    pub cv_reps: usize,
    /// Seed for critical values simulated on a cache miss.
    #[arg(long, default_value_t = 20_240_601)]
    pub cv_seed: u64,
}

#[derive(Args)]
pub struct TestArgs {
    /// CSV file with a header row.
    pub file: PathBuf,
    /// Column holding the loss differential.
    #[arg(long, default_value = "loss_diff")]
    pub loss_col: String,
    /// Conditioning columns forming the test function (comma separated).
    #[arg(long, value_delimiter = ',')]
    pub h_cols: Vec<String>,
    /// Prepend a column of ones to the test function.
    #[arg(long)]
    pub intercept: bool,
    /// Forecast horizon.
    #[arg(long, default_value_t = 1)]
    pub tau: usize,
    #[arg(long, value_enum, default_value = "all")]
    pub stat: StatChoice,
    /// Nominal level.
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    /// Use the multistep statistics even when tau = 1.
    #[arg(long)]
    pub force_multistep: bool,
    /// HAC bandwidth: "horizon" (tau - 1), "auto", "nw94" (prewhitened plug-in) or a lag.
    #[arg(long, default_value = "horizon")]
    pub hac_bandwidth: String,
    /// Also write the results as JSON to this path ("-" for stdout).
    #[arg(long)]
    pub json: Option<PathBuf>,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Args)]
pub struct CritvalsArgs {
    /// range_ratio, matrix_cusum_form, component_range_sum or shao_scalar.
    #[arg(long)]
    pub family: String,
    #[arg(long, default_value_t = 1)]
    pub q: usize,
    /// Noncentrality vector (comma separated, length q).
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub noncentrality: Vec<f64>,
    #[arg(long, default_value_t = 200_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 10_000)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Probabilities to tabulate (default: .01 .05 .10 .25 .50 .75 .90 .95 .99).
    #[arg(long, value_delimiter = ',')]
    pub probs: Vec<f64>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ReplicateArgs {
    /// dgp1-size-tau2, dgp1-size-tau3, dgp2-size-tau2, dgp2-size-tau3, dgp1-power or dgp2-power.
    #[arg(long)]
    pub table: String,
    #[arg(long, default_value_t = 5000)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Output directory for the report and comparison files.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub cache: CacheArgs,
}

#[derive(Args)]
pub struct PlotPowerArgs {
    /// dgp1 or dgp2.
    #[arg(long)]
    pub dgp: String,
    /// rho (DGP 1) or p (DGP 2).
    #[arg(long)]
    pub param: f64,
    /// Drift (default: 0.2 for DGP 1, 0.5 for DGP 2).
    #[arg(long)]
    pub drift: Option<f64>,
    #[arg(long, default_value_t = 5000)]
    pub reps: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Sample sizes (default: 50, 100, ..., 400).
    #[arg(long, value_delimiter = ',')]
    pub n: Vec<usize>,
    /// SVG output path; the CSV is written next to it with a .csv extension.
    #[arg(long)]
    pub out: PathBuf,
    #[command(flatten)]
    pub cache: CacheArgs,
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Test(a) => commands::test(a),
        Command::Critvals(a) => commands::critvals(a),
        Command::Replicate(a) => commands::replicate(a),
        Command::PlotPower(a) => commands::plot_power(a),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.threads {
        Some(0) => Err(CliError::Usage("--threads must be at least 1".into())),
        Some(t) => sncpa_sim::with_threads(t, || run(cli)).map_err(CliError::from).and_then(|r| r),
        None => run(cli),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("sncpa: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
