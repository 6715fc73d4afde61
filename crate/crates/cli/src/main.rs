mod args;
mod config;
mod demo;
mod error;
mod output;
mod plan;
mod spv_cmd;
mod strict;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command, SpvCommand};
use error::CliError;

fn dispatch(cli: Cli) -> Result<String, CliError> {
    match cli.command {
        Command::Plan(args) => plan::run(args),
        Command::Spv { command } => match command {
            SpvCommand::Cardinality(args) => spv_cmd::cardinality(args),
            SpvCommand::Run(args) => spv_cmd::run(args),
        },
        Command::Demo(args) => demo::run(args),
        Command::StrictBound(args) => strict::run(args),
    }
}

fn main() -> ExitCode {
    // clap exits with code 2 on usage errors and 0 for --help
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(text) => {
            let mut stdout = std::io::stdout().lock();
            if stdout.write_all(text.as_bytes()).and_then(|_| stdout.flush()).is_err() {
                return ExitCode::from(3);
            }
            ExitCode::SUCCESS
        }
        Err(err) => {
            let label = match err {
                CliError::Usage(_) => "usage error",
                CliError::Compute(_) => "error",
            };
            eprintln!("{label}: {err}");
            err.exit_code()
        }
    }
}
