mod args;
mod commands;
mod config;
mod error;
mod output;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use config::Resolver;
use error::CliError;

fn run(cli: &Cli) -> Result<(), CliError> {
    let r = Resolver::from_path(cli.global.config.as_deref())?;
    let g = &cli.global;
    match &cli.command {
        Command::Stationary(a) => commands::stationary(g, a, &r),
        Command::FastBase(a) => commands::fast_base(g, a, &r),
        Command::ContinueSlow(a) => commands::continue_slow(g, a, &r),
        Command::ContinueFast(a) => commands::continue_fast(g, a, &r),
        Command::Sweep(a) => commands::sweep(g, a, &r),
        Command::Fronts(a) => commands::fronts(g, a, &r),
        Command::Verify => commands::verify(g, &r),
    }
}

fn main() -> ExitCode {
    // clap exits with 2 on malformed flags, matching the config-error code.
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("abcd: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
