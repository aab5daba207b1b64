//! Command-line harness around the library: dataset generation, encoder
//! and classifier training, one-time salience tagging, inference with a
//! salience readout, the full experiment suite and the network diagram.
//!
//! Exit codes: 0 success, 1 input error, 2 experiment/numerical failure,
//! 3 I/O failure.

mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use sann_core::Error;

fn main() -> ExitCode {
    let cli = match commands::Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // Help and version are successful outcomes; everything else is
            // a usage error.
            return match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = err.print();
                    ExitCode::SUCCESS
                }
                _ => {
                    let _ = err.print();
                    ExitCode::from(1)
                }
            };
        }
    };
    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Dimension { .. } | Error::InvalidInput(_) | Error::Format { .. } => 1,
        Error::Numeric(_) | Error::Experiment(_) => 2,
        Error::Io(_) => 3,
    }
}
