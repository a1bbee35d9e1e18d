//! `seqclass` command-line front end.
//!
//! Exit codes: 0 on success, 2 when an input fails validation, 3 when a
//! numerical routine does not converge, 1 on I/O failure.

use std::fmt;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

mod commands;
mod config;

#[derive(Debug)]
pub enum CliError {
    Validation { field: String, message: String },
    Numerical(String),
    Io(String),
}

impl CliError {
    pub fn validation(field: impl Into<String>, message: impl Into<String>) -> Self {
        CliError::Validation {
            field: field.into(),
            message: message.into(),
        }
    }

    /// Wraps a library error, attributing validation failures to `field`.
    pub fn library(field: impl Into<String>, err: seqclass::Error) -> Self {
        match err {
            seqclass::Error::NonConvergence(msg) => CliError::Numerical(msg),
            other => CliError::validation(field, other.to_string()),
        }
    }

    fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation { .. } => 2,
            CliError::Numerical(_) => 3,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation { field, message } => write!(f, "invalid {field}: {message}"),
            CliError::Numerical(msg) => write!(f, "numerical failure: {msg}"),
            CliError::Io(msg) => write!(f, "i/o error: {msg}"),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e.to_string())
    }
}

#[derive(Debug, Parser)]
#[command(name = "seqclass", version, about = "Sequential classification toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

/// Flags shared by every subcommand.
#[derive(Debug, Clone, Args)]
pub struct Common {
    /// JSON experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Master seed (overrides the config).
    #[arg(long)]
    pub seed: Option<u64>,
    /// Worker threads for simulations (overrides the config).
    #[arg(long)]
    pub workers: Option<usize>,
}

/// A pair of distributions given inline; the config's first two are used otherwise.
#[derive(Debug, Clone, Args)]
pub struct Pair {
    /// Comma-separated weights of the first distribution.
    #[arg(long, allow_hyphen_values = true)]
    pub p: Option<String>,
    /// Comma-separated weights of the second distribution.
    #[arg(long, allow_hyphen_values = true)]
    pub q: Option<String>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print GJS(p, q, alpha) in nats.
    Gjs {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: Pair,
        #[arg(long, allow_hyphen_values = true)]
        alpha: Option<f64>,
    },
    /// Print the Chernoff information C(p, q).
    Chernoff {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: Pair,
    },
    /// Print the positive root of GJS(p, q, theta) = gamma theta.
    FixedPoint {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: Pair,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
    },
    /// Write the exponent table over a gamma grid.
    Exponents {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: Pair,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        /// Comma-separated gamma values.
        #[arg(long, allow_hyphen_values = true)]
        gamma_grid: Option<String>,
    },
    /// Write the sequential-vs-Gutman Bayesian exponent comparison.
    CompareGutman {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        pair: Pair,
        #[arg(long, allow_hyphen_values = true)]
        gamma: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        gamma_grid: Option<String>,
    },
    /// Run a Monte Carlo experiment and write its report.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: commands::Overrides,
        /// Directory for per-trial trace CSVs.
        #[arg(long)]
        trace_dir: Option<PathBuf>,
        /// Traces written per hypothesis when --trace-dir is set.
        #[arg(long, default_value_t = 10)]
        trace_limit: u64,
    },
    /// Write the step-by-step trace of one sequential trial.
    Trace {
        #[command(flatten)]
        common: Common,
        #[command(flatten)]
        overrides: commands::Overrides,
        /// Name of the true distribution (overrides the config's true_class).
        #[arg(long)]
        hypothesis: Option<String>,
        #[arg(long, default_value_t = 0)]
        trial: u64,
    },
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Gjs { common, pair, alpha } => commands::gjs_value(&common, &pair, alpha),
        Command::Chernoff { common, pair } => commands::chernoff_information(&common, &pair),
        Command::FixedPoint { common, pair, gamma } => commands::fixed_point(&common, &pair, gamma),
        Command::Exponents {
            common,
            pair,
            gamma,
            gamma_grid,
        } => commands::exponents(&common, &pair, gamma, gamma_grid.as_deref()),
        Command::CompareGutman {
            common,
            pair,
            gamma,
            gamma_grid,
        } => commands::compare_gutman(&common, &pair, gamma, gamma_grid.as_deref()),
        Command::Simulate {
            common,
            overrides,
            trace_dir,
            trace_limit,
        } => commands::simulate(&common, &overrides, trace_dir.as_deref(), trace_limit),
        Command::Trace {
            common,
            overrides,
            hypothesis,
            trial,
        } => commands::trace(&common, &overrides, hypothesis.as_deref(), trial),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
