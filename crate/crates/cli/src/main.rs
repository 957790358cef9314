//! `ellhyp`: evaluate multiple elliptic hypergeometric series and verify the
//! identities between them.

mod config;
mod eval;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use config::VerifyArgs;
use eval::SeriesKind;

#[derive(Parser)]
#[command(name = "ellhyp", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate one series from a JSON parameter file.
    Eval {
        #[arg(value_enum)]
        series: SeriesKind,
        params: PathBuf,
    },
    /// Run a verification sweep.
    Verify(VerifyArgs),
    /// List the registered identities.
    List,
}

/// A failure with its process exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn new(code: u8, message: impl Into<String>) -> Self {
        Self {
            code,
            message: message.into(),
        }
    }
}

pub const EXIT_FAILED: u8 = 1;
pub const EXIT_INPUT: u8 = 2;
pub const EXIT_NUMERIC: u8 = 3;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Eval { series, params } => eval::run(series, &params),
        Command::Verify(args) => verify::run(args),
        Command::List => {
            for e in ellhyp::identities::list_identities() {
                println!("{:<20} {}: {}", e.id.name(), e.anchor, e.description);
            }
            Ok(0)
        }
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
