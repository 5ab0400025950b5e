mod cli;
mod commands;
mod output;

use std::process::ExitCode;

use clap::Parser;
use svarica::Error;

use cli::Cli;

/// Exit status per error kind; clap itself exits with 2 on usage errors.
fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parameter(_) | Error::Config(_) => 3,
        Error::Parse { .. } | Error::Csv(_) | Error::Io(_) => 4,
        Error::Degenerate(_)
        | Error::Dimension(_)
        | Error::Estimation { .. }
        | Error::NotPositiveDefinite { .. }
        | Error::Singular(_)
        | Error::Ambiguous(_) => 5,
        Error::Simulation { .. } | Error::MonteCarlo { .. } | Error::Internal(_) => 6,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("error: SVARICA_THREADS / --threads must be positive");
            return ExitCode::from(3);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: cannot configure thread pool: {e}");
            return ExitCode::from(6);
        }
    }
    match commands::run(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {} failed: {e}", cli.command.name());
            ExitCode::from(exit_code(&e))
        }
    }
}
