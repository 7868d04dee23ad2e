//! `mol`: command-line front end for universal Markov order estimation.
//!
//! Exit codes: 0 ok, 1 invariant violation, 2 I/O error, 3 invalid
//! configuration.

mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use args::{Cli, Command};
use output::Meta;

#[derive(Debug)]
pub enum CliError {
    Io(String),
    Config(String),
}

fn backend_label(command: &Command) -> String {
    match command {
        Command::Estimate(a) => a.backend.as_str().to_string(),
        Command::Profile(a) => a.backend.as_str().to_string(),
        Command::Simulate(a) => a.backend.iter().map(|b| b.as_str()).collect::<Vec<_>>().join("+"),
        Command::Verify(a) if a.faulty_backend => "constant".to_string(),
        Command::Verify(_) => "ppm+lz78".to_string(),
    }
}

fn run(cli: &Cli) -> Result<bool, CliError> {
    let meta = Meta::new(&cli.global, &cli.command, backend_label(&cli.command));
    match &cli.command {
        Command::Estimate(a) => commands::estimate(&cli.global, a, &meta).map(|_| true),
        Command::Profile(a) => commands::profile(&cli.global, a, &meta).map(|_| true),
        Command::Simulate(a) => commands::simulate(&cli.global, a, &meta).map(|_| true),
        Command::Verify(a) => commands::verify(&cli.global, a, &meta),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => ExitCode::SUCCESS,
                _ => ExitCode::from(3),
            };
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(cli.global.jobs).build() {
        Ok(pool) => pool,
        Err(e) => {
            eprintln!("error: cannot start {} worker threads: {e}", cli.global.jobs);
            return ExitCode::from(3);
        }
    };
    match pool.install(|| run(&cli)) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(CliError::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Config(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}
