//! Command-line front end: exact transform export, moment generation,
//! CDF/PDF reconstruction, SIR percentile curves, and convergence studies,
//! all emitting plot-ready CSV or JSON.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use metadist::precision::CmReport;

/// Anything a command can fail with, mapped onto the exit-code table:
/// 2 usage/parse, 3 precision, 4 complete-monotonicity, 5 I/O.
#[derive(Debug)]
pub enum AppError {
    Usage(String),
    Lib(metadist::Error),
    Cm(CmReport),
}

impl From<metadist::Error> for AppError {
    fn from(e: metadist::Error) -> Self {
        AppError::Lib(e)
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Lib(metadist::Error::Io(e))
    }
}

impl std::fmt::Display for AppError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AppError::Usage(msg) => write!(f, "{msg}"),
            AppError::Lib(e) => write!(f, "{e}"),
            AppError::Cm(report) => {
                write!(
                    f,
                    "moment sequence is not completely monotone ({} violation{} at tolerance {})",
                    report.violations.len(),
                    if report.violations.len() == 1 { "" } else { "s" },
                    report.tolerance
                )?;
                for v in report.violations.iter().take(3) {
                    write!(
                        f,
                        "\n  difference order k={}, index {}: {}",
                        v.k, v.index, v.value
                    )?;
                }
                Ok(())
            }
        }
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Usage(_) => 2,
            AppError::Lib(metadist::Error::PrecisionFailure { .. }) => 3,
            AppError::Lib(metadist::Error::Convergence { .. }) => 3,
            AppError::Cm(_) => 4,
            AppError::Lib(metadist::Error::Io(_)) => 5,
            AppError::Lib(_) => 2,
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Matrix(a) => commands::matrix(&a),
        Command::Moments(a) => commands::moments(&a),
        Command::Reconstruct(a) => commands::reconstruct(&a),
        Command::Percentiles(a) => commands::percentiles(&a),
        Command::Convergence(a) => commands::convergence(&a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
