use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use ratmodel::cli::{Cli, RunConfig, run};

fn main() -> ExitCode {
    let config = RunConfig::from_cli(Cli::parse());
    let outcome = run(&config);
    let _ = std::io::stdout().write_all(outcome.stdout.as_bytes());
    let _ = std::io::stderr().write_all(outcome.stderr.as_bytes());
    ExitCode::from(outcome.status.code() as u8)
}
