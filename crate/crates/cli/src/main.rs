mod args;
mod commands;
mod config;
mod error;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::{CliResult, EXIT_OK, EXIT_USAGE};

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Grid(a) => commands::grid(&a.resolve()?, "grid"),
        Command::Amplify(a) => commands::grid(&a.resolve()?, "amplify"),
        Command::Roundtrip(a) => commands::roundtrip(&a.resolve()?),
        Command::Sift(a) => commands::sift_cmd(&a.resolve()?),
        Command::Verify(a) => commands::verify(&a.resolve()?),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE as u8 } else { EXIT_OK as u8 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("phasedelta: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
