use std::process::ExitCode;

use clap::Parser;

use phstab::stabilize::with_threads;
use phstab_cli::{run, Cli, CliError};

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = with_threads(cli.threads, || run(cli.command)).unwrap_or_else(|e| Err(CliError::from(e)));
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
