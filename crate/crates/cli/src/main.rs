//! `uss`: drive the signature simulator from the command line.
//!
//! Exit status is 0 on success, 2 when an argument or config value is
//! rejected, and 1 for any other failure.

mod args;
mod commands;

use std::process::ExitCode;

use clap::Parser;

use args::Cli;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match commands::dispatch(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let validation = err
                .downcast_ref::<uss_core::Error>()
                .is_some_and(uss_core::Error::is_validation);
            ExitCode::from(if validation { 2 } else { 1 })
        }
    }
}
