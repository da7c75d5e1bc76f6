mod args;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use output::{emit, render, CliError};

fn configure_threads() -> Result<(), CliError> {
    let Ok(raw) = std::env::var("EDGEDIST_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| CliError::Usage(format!("EDGEDIST_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| CliError::Usage(e.to_string()))
}

fn run(cli: &Cli, argv: &[String]) -> Result<(), CliError> {
    configure_threads()?;
    let solver = cli.solver.config();
    let report = match &cli.command {
        Command::Table(a) => commands::table(a, &solver)?,
        Command::Moments(a) => commands::moments_cmd(a, &solver)?,
        Command::Simulate(a) => commands::simulate(a, &solver)?,
        Command::Wishart(a) => commands::wishart(a, &solver)?,
        Command::Percentiles(a) => commands::percentiles(a, &solver)?,
        Command::Verify(a) => commands::verify(a, &solver)?,
    };
    emit(&render(&report, argv, cli.json), cli.output.as_deref())?;
    match report.failure {
        Some(why) => Err(CliError::Verify(why)),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let argv: Vec<String> = std::env::args().collect();
    let cli = Cli::parse();
    match run(&cli, &argv) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("edgedist: {e}");
            e.exit_code()
        }
    }
}
