//! `swag`: function-approximation, MNIST, gradient-check and comparison runs.
//!
//! Exit codes: 0 success, 1 numeric or runtime failure, 2 usage or input error.

mod args;
mod error;
mod manifest;
mod output;
mod run;

use std::process::ExitCode;

use clap::Parser;

fn main() -> ExitCode {
    let cli = args::Cli::parse();
    match run::run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
