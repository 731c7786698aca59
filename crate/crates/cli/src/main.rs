//! `don` — multi-scale point-cloud segmentation from the command line.
//!
//! Exit status: 0 on success, 2 for bad invocations (flags, config file,
//! parameter combinations), 1 for runtime failures (I/O, parsing, empty
//! classes). All numeric output is deterministic for fixed inputs and
//! flags; `--threads` changes wall time only.

mod args;
mod commands;
mod config;

use clap::Parser;

use crate::args::{Cli, Command};
use crate::config::{CliError, CliResult, FileConfig, Settings};

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(), // clap prints and exits 2 (0 for --help/--version)
    };
    match run(cli) {
        Ok(()) => {}
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
        Err(CliError::Runtime(err)) => {
            eprintln!("error: {err:#}");
            std::process::exit(1);
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };

    // One pool for the whole command; num_threads(0) lets the library pick
    // one worker per core. Thread count never changes numeric results.
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.threads)
        .build()
        .map_err(|e| CliError::Runtime(anyhow::anyhow!("building thread pool: {e}")))?;

    pool.install(|| match &cli.command {
        Command::Don(a) => {
            let settings = Settings::merge(&a.pipeline, a.input.as_deref(), &file);
            commands::cmd_don(&settings)
        }
        Command::Segment(a) => {
            let settings = Settings::merge(&a.pipeline, a.input.as_deref(), &file);
            commands::cmd_segment(&settings, a.clusters_csv.as_deref())
        }
        Command::Paramsearch(a) => {
            let settings = Settings::merge(&a.pipeline, None, &file);
            commands::cmd_paramsearch(a, &settings)
        }
        Command::Evaluate(a) => {
            let settings = Settings::merge(&a.pipeline, None, &file);
            commands::cmd_evaluate(a, &settings)
        }
        Command::Bench(a) => {
            let settings = Settings::merge(&a.pipeline, a.input.as_deref(), &file);
            commands::cmd_bench(&settings)
        }
    })
}
