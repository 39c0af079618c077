//! Command line front end for `nicrn`.
//!
//! Every subcommand is a function from a [`RunConfig`] to an [`Outcome`], so
//! the binary is a thin wrapper and tests can drive commands in process.

mod commands;
mod config;
mod format;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

pub use config::{Command, ConfigError, RunConfig};
pub use format::{csv_header, fmt_num, trajectory_csv};

/// Everything succeeded and every checked property held.
pub const EXIT_OK: i32 = 0;
/// A condition, balance or convergence check failed.
pub const EXIT_SEMANTIC: i32 = 1;
/// The input file or the command line could not be interpreted.
pub const EXIT_CONFIG: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum Format {
    #[default]
    Text,
    Json,
}

#[derive(Debug, Parser)]
#[command(name = "nicrn", version, about = "Non-isothermal chemical reaction network toolkit")]
pub struct Cli {
    /// Report format.
    #[arg(long, value_enum, global = true, default_value_t = Format::Text)]
    pub format: Format,
    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Args)]
pub struct InitialArgs {
    /// Initial internal energy. Optional in isothermal mode, where it
    /// defaults to the bath surface.
    #[arg(long = "U0", allow_negative_numbers = true)]
    pub u0: Option<f64>,
    /// Initial amounts, comma separated in species order.
    #[arg(long = "N0", value_delimiter = ',', allow_negative_numbers = true)]
    pub n0: Option<Vec<f64>>,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Check Conditions 1 to 5.
    Validate { file: PathBuf },
    /// Print Y, D, B, Gamma, Gamma~ and kernel bases.
    Matrices {
        file: PathBuf,
        /// Same as `--format json`.
        #[arg(long)]
        json: bool,
    },
    /// Wegscheider check and a detailed balanced reference equilibrium.
    Balance { file: PathBuf },
    /// Detailed balanced equilibrium in the class of an initial state.
    Equilibrium {
        file: PathBuf,
        #[command(flatten)]
        initial: InitialArgs,
    },
    /// Integrate the dynamics and write the trajectory as CSV.
    Simulate {
        file: PathBuf,
        #[command(flatten)]
        initial: InitialArgs,
        #[arg(long = "t-end", default_value_t = 200.0)]
        t_end: f64,
        /// CSV output path; with `--sweep` run `i` goes to `<stem>_<i>.<ext>`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1e-8)]
        rtol: f64,
        #[arg(long, default_value_t = 1e-10)]
        atol: f64,
        /// Additionally run this many random perturbations of the initial state.
        #[arg(long, default_value_t = 0)]
        sweep: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

/// Exit code and captured output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

impl Outcome {
    fn ok(code: i32, stdout: String) -> Self {
        Self {
            code,
            stdout,
            stderr: String::new(),
        }
    }

    fn error(code: i32, message: impl std::fmt::Display) -> Self {
        Self {
            code,
            stdout: String::new(),
            stderr: format!("error: {message}\n"),
        }
    }
}

pub fn run(cli: Cli) -> Outcome {
    match RunConfig::from_cli(cli) {
        Ok(cfg) => commands::execute(&cfg),
        Err(e) => Outcome::error(EXIT_CONFIG, e),
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run_from<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(cli),
        Err(e) => {
            let text = e.render().to_string();
            if e.use_stderr() {
                Outcome {
                    code: EXIT_CONFIG,
                    stdout: String::new(),
                    stderr: text,
                }
            } else {
                Outcome::ok(EXIT_OK, text)
            }
        }
    }
}
