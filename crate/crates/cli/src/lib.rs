//! Experiment driver for k-free Beatty counts: each subcommand runs one
//! measurement over a grid or a seeded sweep and writes a CSV table.

pub mod commands;
pub mod config;
pub mod selftest;
pub mod table;

use std::fs::File;
use std::io::{BufWriter, Write};

use beatty_kfree::Error;
use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{CommonArgs, Config, Grid};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Budget(Error),
    #[error("check failed: {0}")]
    Check(String),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

impl CliError {
    /// Budget and precision exhaustion keep their identity; everything else
    /// the kernels reject is a bad input.
    pub fn from_core(e: Error) -> CliError {
        match e {
            Error::PrecisionExhausted(_) | Error::MemoryBudgetExceeded { .. } | Error::BudgetExceeded(_) => {
                CliError::Budget(e)
            }
            Error::DegenerateFit(m) => CliError::Check(format!("degenerate fit: {m}")),
            other => CliError::Usage(other.to_string()),
        }
    }

    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Check(_) => 1,
            CliError::Usage(_) => 2,
            CliError::Budget(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::from_core(e)
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(std::io::Error::other(e))
    }
}

#[derive(Parser, Debug)]
#[command(name = "kfbeatty", version, about = "k-free numbers in Beatty sequences: measurements and checks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Count k-free terms of ⌊αn+β⌋ against x/ζ(k) on a grid of x
    Count(CommonArgs),
    /// Fit the growth exponent of the counting error and compare with the bound
    FitExponent(CommonArgs),
    /// Random sweep of exponential sums over k-free numbers against their bounds
    ExpsumSweep(SweepArgs),
    /// Discrepancy of {αm+β} on a grid of M, with its decay exponent
    Discrepancy(CommonArgs),
    /// Compare smoothed and exact Beatty counts on a grid of x
    SmoothingCheck(SmoothingArgs),
    /// Run the small-scale oracle suite
    Selftest(CommonArgs),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, ValueEnum)]
pub enum SweepBound {
    /// The double sum over h <= H and k-free n <= x
    #[default]
    Theorem2,
    /// The two sums of min(x/n, 1/‖nθ‖) type
    MinSum,
}

#[derive(Args, Debug)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, value_enum, default_value_t)]
    pub bound: SweepBound,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    /// Largest x drawn (theorem2) or largest x of the min-sum setups
    #[arg(long)]
    pub x_max: Option<u64>,
    /// Largest H drawn (theorem2) or largest M (min-sum)
    #[arg(long)]
    pub h_max: Option<u64>,
}

#[derive(Args, Debug)]
pub struct SmoothingArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Also evaluate the truncated Fourier series (costs J·Q per row)
    #[arg(long)]
    pub series: bool,
    /// Target for the series tail bound 1/(π²JΔ)
    #[arg(long, default_value_t = 0.01)]
    pub tail_tol: f64,
}

/// How a command finished when it did not error out.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Outcome {
    Pass,
    Fail(String),
}

fn common(cmd: &Command) -> &CommonArgs {
    match cmd {
        Command::Count(c) | Command::FitExponent(c) | Command::Discrepancy(c) | Command::Selftest(c) => c,
        Command::ExpsumSweep(s) => &s.common,
        Command::SmoothingCheck(s) => &s.common,
    }
}

fn default_grid(cmd: &Command) -> &'static str {
    match cmd {
        Command::Count(_) => "1e3:1e6:10",
        Command::FitExponent(_) => "1e3:1e7:3.1622776601683795",
        Command::Discrepancy(_) => "100:1e6:3.1622776601683795",
        Command::SmoothingCheck(_) => "1e3:1e5:10",
        Command::ExpsumSweep(_) | Command::Selftest(_) => "",
    }
}

/// Resolves the configuration and runs `cmd`, writing to the configured
/// output file or else to `stdout`.
pub fn execute(cmd: &Command, stdout: &mut dyn Write) -> Result<Outcome, CliError> {
    let cfg = Config::resolve(common(cmd), default_grid(cmd))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| CliError::Usage(format!("thread pool: {e}")))?;
    let mut buf: Vec<u8> = Vec::new();
    let outcome = pool.install(|| {
        let sink: &mut dyn Write = &mut buf;
        match cmd {
            Command::Count(_) => commands::count(&cfg, sink),
            Command::FitExponent(_) => commands::fit_exponent(&cfg, sink),
            Command::ExpsumSweep(a) => commands::expsum_sweep(&cfg, a, sink),
            Command::Discrepancy(_) => commands::discrepancy(&cfg, sink),
            Command::SmoothingCheck(a) => commands::smoothing_check(&cfg, a, sink),
            Command::Selftest(_) => selftest::run(&cfg, &selftest::Fixture::default(), sink),
        }
    })?;
    match &cfg.out {
        Some(path) => {
            let mut file = BufWriter::new(File::create(path)?);
            file.write_all(&buf)?;
            file.flush()?;
        }
        None => {
            stdout.write_all(&buf)?;
            stdout.flush()?;
        }
    }
    Ok(outcome)
}
