//! Command-line front end for the `twovar` equilibrium engine.
//!
//! Exit codes: 0 success or equivalent, 1 not equivalent or check failed,
//! 2 configuration error, 3 solver failure, 4 I/O error.

mod commands;
mod error;
mod format;
mod sweep;

use std::path::PathBuf;

use clap::{Parser, Subcommand, ValueEnum};
use twovar::Method;

pub use crate::error::CliError;
use crate::sweep::SweepSpec;

#[derive(Parser, Debug)]
#[command(name = "twovar", version, about = "Quantity/price oligopoly equilibria under relative-profit objectives")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(ValueEnum, Debug, Clone, Copy)]
enum MethodArg {
    Foc,
    Br,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Foc => Method::FocSolve,
            MethodArg::Br => Method::BestResponse,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve one pattern and print the equilibrium.
    Solve {
        #[arg(long)]
        params: PathBuf,
        /// One letter per player, Q (quantity) or P (price).
        #[arg(long)]
        pattern: String,
        #[arg(long, value_enum, default_value = "foc")]
        method: MethodArg,
        /// Best-response damping.
        #[arg(long, default_value_t = 0.5)]
        damping: f64,
        /// Best-response step tolerance.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Solve two patterns and test whether their outcomes coincide.
    Compare {
        #[arg(long)]
        params: PathBuf,
        /// Two patterns, comma or space separated.
        #[arg(long, num_args = 1..)]
        patterns: Vec<String>,
        #[arg(long, value_enum, default_value = "foc")]
        method: MethodArg,
        #[arg(long, default_value_t = 0.5)]
        damping: f64,
        /// Outcome deviation accepted as equivalence [default: 1e-7].
        #[arg(long)]
        tol: Option<f64>,
    },
    /// Check the four nested minimax values for every symmetric player
    /// against the alien.
    VerifyMinimax {
        #[arg(long)]
        params: PathBuf,
        /// Random frozen points per player, besides the equilibrium one.
        #[arg(long, default_value_t = 5)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Largest accepted spread [default: 1e-5].
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Evaluate the published four-firm closed forms and audit them.
    ClosedForm {
        #[arg(long)]
        params: PathBuf,
        /// Match tolerance [default: 1e-8].
        #[arg(long)]
        tol: Option<f64>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Solve several patterns over a parameter grid and emit CSV.
    Sweep {
        #[arg(long)]
        params: PathBuf,
        /// name:lo:hi:step with name one of a, b, c_alien, cost_gap.
        #[arg(long)]
        sweep: SweepSpec,
        /// Patterns to solve [default: all-Q, alien on P, alien on Q among P, all-P].
        #[arg(long, num_args = 1..)]
        patterns: Vec<String>,
        #[arg(long, value_enum, default_value = "foc")]
        method: MethodArg,
        /// One row per player instead of one per grid point.
        #[arg(long)]
        per_player: bool,
        /// Output file; stdout when absent.
        #[arg(long)]
        csv: Option<PathBuf>,
        /// Accepted for uniformity; sweeps draw no random numbers.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

fn dispatch(command: Command) -> Result<commands::Outcome, CliError> {
    match command {
        Command::Solve { params, pattern, method, damping, tol, csv } => commands::solve(&commands::SolveArgs {
            params,
            pattern,
            method: method.into(),
            damping,
            tol,
            csv,
        }),
        Command::Compare { params, patterns, method, damping, tol } => commands::compare(&commands::CompareArgs {
            params,
            patterns,
            method: method.into(),
            damping,
            tol,
        }),
        Command::VerifyMinimax { params, samples, seed, tol, csv } => {
            commands::verify_minimax(&commands::VerifyArgs { params, samples, seed, tol, csv })
        }
        Command::ClosedForm { params, tol, csv } => {
            commands::closed_form(&commands::ClosedFormArgs { params, tol, csv })
        }
        Command::Sweep { params, sweep, patterns, method, per_player, csv, seed: _ } => {
            commands::run_sweep(&commands::SweepArgs {
                params,
                sweep,
                patterns,
                method: method.into(),
                per_player,
                csv,
            })
        }
    }
}

/// Captured result of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Invocation {
    pub stdout: String,
    pub stderr: String,
    pub code: u8,
}

/// Parses `args` (program name first) and runs the command.
pub fn run<I, T>(args: I) -> Invocation
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            return if e.use_stderr() {
                Invocation { stdout: String::new(), stderr: text, code: 2 }
            } else {
                Invocation { stdout: text, stderr: String::new(), code: 0 }
            };
        }
    };
    match dispatch(cli.command) {
        Ok(outcome) => Invocation { stdout: outcome.stdout, stderr: String::new(), code: outcome.code },
        Err(e) => Invocation { stdout: String::new(), stderr: format!("twovar: {e}\n"), code: e.exit_code() },
    }
}
