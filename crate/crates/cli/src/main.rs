#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod commands;
mod config;
mod plot;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use commands::{Command, Failure, Run};
use config::RunConfig;

/// Band structures, Dirac points and domain-wall edge states of 1D periodic
/// Schrödinger operators.
#[derive(Debug, Parser)]
#[command(name = "edgeband", version)]
struct Cli {
    #[arg(value_enum)]
    command: Command,
    /// JSON run configuration; required by every command except `verify`.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory, overriding `output_dir` in the config.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write SVG plots.
    #[arg(long)]
    plots: bool,
}

fn init_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("EDGEBAND_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| Failure::Config(format!("EDGEBAND_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))
}

fn execute(cli: Cli) -> Result<(), Failure> {
    init_threads()?;
    let config = match &cli.config {
        Some(path) => RunConfig::load(path).map_err(Failure::Config)?,
        None if cli.command == Command::Verify => RunConfig::default(),
        None => return Err(Failure::Config("--config is required".into())),
    };
    let out =
        cli.out.clone().or_else(|| config.output_dir.as_ref().map(PathBuf::from)).unwrap_or_else(|| PathBuf::from("."));
    let plots = cli.plots || config.plots;
    commands::run(cli.command, &Run { config, out, plots })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("edgeband: {f}");
            ExitCode::from(f.exit_code())
        }
    }
}
