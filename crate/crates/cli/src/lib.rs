//! Command-line front end for `randecho` experiments.
//!
//! Exit codes: 0 success, 1 failed check or insufficient signal, 2 config
//! error, 3 numeric or I/O failure.

mod config;
mod output;
mod run;
mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};

pub use output::{Failure, Outcome};

#[derive(Parser, Debug)]
#[command(name = "randecho", version, about = "Noise estimation with Haar-random motion reversal")]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Experiment config (JSON).
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Overrides the config seed.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; defaults to all cores. Results do not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output directory.
    #[arg(long, global = true, default_value = ".")]
    out: PathBuf,

    /// Config override `dotted.path=value`; the value is parsed as JSON when possible.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Subcommand, Debug, Clone, Copy)]
enum Command {
    /// Single motion reversal: estimate.json.
    Estimate,
    /// Iterated motion reversal: curve.csv, fit.json.
    Decay,
    /// Loschmidt echo: curve.csv, fit.json.
    Echo,
    /// Echo with noise in both directions: curve.csv, fit.json.
    GenEcho,
    /// Continuous-time echo under a master equation: curve.csv, fit.json.
    Lindblad,
    /// Built-in numerical checks: report.json.
    Verify {
        #[arg(value_enum)]
        suite: Suite,
    },
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Lemma,
    Invariants,
    Concentration,
    Cumulants,
    Equivalence,
}

impl Suite {
    pub fn name(self) -> &'static str {
        match self {
            Suite::Lemma => "lemma",
            Suite::Invariants => "invariants",
            Suite::Concentration => "concentration",
            Suite::Cumulants => "cumulants",
            Suite::Equivalence => "equivalence",
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the exit code.
///
/// `--threads` runs the command inside a dedicated pool, so repeated calls in
/// one process may use different thread counts.
pub fn run_from<I, T>(args: I) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return e.exit_code() as u8;
        }
    };
    let result = match cli.threads {
        Some(0) => Err(Failure::config("--threads must be at least 1")),
        Some(n) => match rayon::ThreadPoolBuilder::new().num_threads(n).build() {
            Ok(pool) => pool.install(|| dispatch(&cli)),
            Err(e) => Err(Failure { code: output::EXIT_NUMERIC, message: format!("cannot start thread pool: {e}") }),
        },
        None => dispatch(&cli),
    };
    match result {
        Ok(outcome) => {
            if let Some(msg) = &outcome.message {
                eprintln!("{msg}");
            }
            outcome.code
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}

fn dispatch(cli: &Cli) -> Result<Outcome, Failure> {
    match cli.command {
        Command::Verify { suite } => verify::run(suite, cli),
        verb => run::run(verb, cli),
    }
}
