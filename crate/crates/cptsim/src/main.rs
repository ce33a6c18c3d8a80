use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cptsim::commands::{self, RunOptions};
use cptsim::error::EXIT_OK;
use cptsim::CliResult;

/// Four-level CPT simulator and fitter. Frequencies in manifests are Hz.
#[derive(Debug, Parser)]
#[command(name = "cptsim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Model spectrum, optionally with noisy scans and a thresholded sum.
    Simulate(Common),
    /// Constrained fit of one or more spectrum CSVs.
    Fit(Common),
    /// Dark-state subspace of a drive configuration, printed as JSON.
    Darkstate(Common),
    /// Spectra and dip positions over a list of magnetic fields.
    Zeeman(Common),
}

#[derive(Debug, Args)]
struct Common {
    /// JSON manifest, or a previous run's run.json.
    #[arg(long)]
    manifest: PathBuf,
    /// Overrides the manifest seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Also stream the primary output to stdout.
    #[arg(long)]
    stdout: bool,
}

impl From<Common> for RunOptions {
    fn from(c: Common) -> Self {
        RunOptions {
            manifest: c.manifest,
            seed: c.seed,
            out: c.out,
            stdout: c.stdout,
        }
    }
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Simulate(c) => commands::simulate(&c.into()),
        Command::Fit(c) => commands::run_fit(&c.into()).map(|_| ()),
        Command::Darkstate(c) => commands::darkstate(&c.into()).map(|_| ()),
        Command::Zeeman(c) => commands::zeeman(&c.into()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::from(EXIT_OK as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
