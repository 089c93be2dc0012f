//! `kcoreset`: build and check (ε,k,z)-coresets for k-center with outliers
//! from the command line.
//!
//! Every command prints one JSON stats record on stdout and writes its data
//! (coresets, generated instances) to the path given by `--out`.
//!
//! Exit codes: 0 success, 2 validation failure, 3 input error,
//! 4 capacity error, 5 sketch failure.

mod args;
mod commands;
mod stats;

use std::process::ExitCode;

use clap::Parser;

use crate::args::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 3 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match commands::run(cli) {
        Ok(outcome) => {
            println!("{}", outcome.stats);
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(commands::exit_code(&e))
        }
    }
}
