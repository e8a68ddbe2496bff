//! CLI entry point. Exit codes: 0 success, 1 configuration or usage error,
//! 2 numerical failure, 3 bound violation detected by a verify sweep.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;
use semigroup_decay::config::RunConfig;
use semigroup_decay::{runner, Error};

/// Decay-envelope toolkit: evaluate resolvent-frame decay bounds, locate
/// critical lengths, tabulate optimizer profiles, and verify envelopes
/// against exactly computable matrix semigroups.
#[derive(Parser)]
#[command(name = "semigroup-decay", version)]
struct Cli {
    /// Path to the run configuration file.
    config: PathBuf,
    /// Write the CSV here, overriding the config's output path. Without
    /// either, the table goes to stdout.
    #[arg(long)]
    output: Option<PathBuf>,
    /// Override the config's random seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Size of the global worker pool (defaults to the number of cores).
    #[arg(long)]
    threads: Option<usize>,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // --help/--version print and succeed; usage mistakes are
            // configuration errors.
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(None) => ExitCode::SUCCESS,
        Ok(Some(violation)) => {
            eprintln!("bound violation: {violation}");
            ExitCode::from(3)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e {
                Error::Invalid(_) => 1,
                Error::Numerical(_) => 2,
                Error::Violation(_) => 3,
            })
        }
    }
}

fn execute(cli: Cli) -> Result<Option<String>, Error> {
    if let Some(threads) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::Invalid(format!("cannot size worker pool: {e}")))?;
    }
    let mut cfg = RunConfig::load(&cli.config)?;
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(output) = cli.output {
        cfg.output = Some(output);
    }
    let result = runner::run(&cfg)?;
    match &cfg.output {
        Some(path) => std::fs::write(path, result.csv.as_bytes()).map_err(|e| {
            Error::Invalid(format!("cannot write output {}: {e}", path.display()))
        })?,
        None => print!("{}", result.csv),
    }
    Ok(result.violation)
}
