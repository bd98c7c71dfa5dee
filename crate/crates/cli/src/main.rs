use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use adiabat_cli::{execute, CliError, Command, Options, RunConfig};
use anyhow::Context;
use clap::{Parser, Subcommand};

/// Two qubits in a rotating field: spectra, adiabaticity sweeps and single
/// loop runs.
#[derive(Debug, Parser)]
#[command(name = "adiabat", version)]
struct Cli {
    /// `key = value` run configuration
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Write the primary output here instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Override the number of time steps per run
    #[arg(long, global = true)]
    n_steps: Option<usize>,

    /// Worker threads for parameter sweeps
    #[arg(long, global = true)]
    jobs: Option<usize>,

    /// Suppress the summary report
    #[arg(long, short, global = true)]
    quiet: bool,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Debug, Subcommand)]
enum Cmd {
    /// Instantaneous energies along the loop
    Spectrum,
    /// Adiabaticity metric on a (theta, g) grid
    SweepGamma,
    /// Evolve a seed around the loop and tabulate the run
    Evolve,
    /// Print the regime of a single run
    Classify,
    /// Loop phases of a pure run
    Phases,
}

impl From<&Cmd> for Command {
    fn from(c: &Cmd) -> Self {
        match c {
            Cmd::Spectrum => Command::Spectrum,
            Cmd::SweepGamma => Command::SweepGamma,
            Cmd::Evolve => Command::Evolve,
            Cmd::Classify => Command::Classify,
            Cmd::Phases => Command::Phases,
        }
    }
}

fn write_file(path: &Path, text: &str) -> anyhow::Result<()> {
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.to_path_buf(), source })?;
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    let cfg = match &cli.config {
        Some(path) => RunConfig::from_path(path).map_err(CliError::from)?,
        None => RunConfig::default(),
    };
    let opts = Options {
        n_steps: cli.n_steps,
        out: cli.out.clone().or_else(|| cfg.output_path.clone()),
        jobs: cli.jobs,
        quiet: cli.quiet,
    };
    let output = execute(Command::from(&cli.command), &cfg, &opts)?;

    let stdout = std::io::stdout();
    let mut stdout = stdout.lock();
    match &opts.out {
        Some(path) => {
            write_file(path, &output.primary)?;
            if let (false, Some(report)) = (opts.quiet, &output.report) {
                stdout.write_all(report.as_bytes()).context("writing report")?;
            }
        }
        None => {
            stdout.write_all(output.primary.as_bytes()).context("writing output")?;
            // keep stdout machine-readable
            if let (false, Some(report)) = (opts.quiet, &output.report) {
                eprint!("{report}");
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            let code = err.downcast_ref::<CliError>().map_or(1, CliError::exit_code);
            ExitCode::from(code as u8)
        }
    }
}
