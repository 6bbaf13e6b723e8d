//! Thin command-line front end over the library's experiment dispatch.

use clap::{Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;
use xmodel::config::{self, Command, ExperimentConfig, OutputFormat};

#[derive(Parser)]
#[command(
    name = "xmodel",
    about = "Overloaded X-model simulator and fluid-limit checks",
    version
)]
struct Cli {
    /// TOML experiment configuration; canonical defaults when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Master random seed.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Write the report here instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Report format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    format: Format,
    #[command(subcommand)]
    command: Sub,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Csv,
    Json,
}

#[derive(Subcommand)]
enum Sub {
    /// Integrate the fluid ODE.
    Fluid,
    /// Print the fluid stationary point and its drift data.
    Stationary,
    /// Stationary distribution of the FTSP at a fluid state.
    FtspPi,
    /// Simulate one sample path of the n-th system.
    Simulate,
    /// Functional weak law of large numbers check.
    Fwlln,
    /// Averaging-principle check at a fixed time.
    Ap,
    /// State-space collapse check.
    Ssc,
    /// Steady-state (interchange of limits) check.
    Steady,
    /// Time-expansion check of the queue-difference process.
    Expand,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match &cli.config {
        Some(path) => config::load_config(path),
        None => Ok(ExperimentConfig::canonical()),
    };
    let cfg = match cfg {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let cmd = match cli.command {
        Sub::Fluid => Command::Fluid,
        Sub::Stationary => Command::Stationary,
        Sub::FtspPi => Command::FtspPi,
        Sub::Simulate => Command::Simulate,
        Sub::Fwlln => Command::Fwlln,
        Sub::Ap => Command::Ap,
        Sub::Ssc => Command::Ssc,
        Sub::Steady => Command::Steady,
        Sub::Expand => Command::Expand,
    };
    let format = match cli.format {
        Format::Csv => OutputFormat::Csv,
        Format::Json => OutputFormat::Json,
    };
    match config::run(cmd, &cfg, cli.seed, format) {
        Ok(report) => {
            if let Some(path) = &cli.out {
                if let Err(e) = std::fs::write(path, &report) {
                    eprintln!("error: cannot write {}: {e}", path.display());
                    return ExitCode::FAILURE;
                }
            } else {
                print!("{report}");
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
