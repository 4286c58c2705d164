mod args;
mod commands;
mod error;
mod io;

use std::process::ExitCode;

use clap::Parser;

use args::{Cli, Command};
use error::{CliError, CliResult};

fn run(cli: Cli) -> CliResult<()> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::usage("--threads must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::usage(format!("cannot start {t} threads: {e}")))?;
    }
    match &cli.command {
        Command::Ingest(a) => commands::ingest(a),
        Command::Sample(a) => commands::sample(a),
        Command::Fit(a) => commands::fit(a),
        Command::Cluster(a) => commands::cluster(a),
        Command::Eval(a) => commands::eval(a),
        Command::BenchKappa(a) => commands::bench_kappa(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("dirstat: {e}");
            e.exit_code()
        }
    }
}
