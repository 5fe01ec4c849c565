//! Command-line driver: `eigen`, `hardy`, `evolve` and `sweep` subcommands,
//! each reading a TOML config and writing `#` metadata lines followed by CSV.
//!
//! Exit codes: 0 success, 1 a computed quantity missed its tolerance,
//! 2 invalid input or a failed computation.

mod commands;
pub mod config;

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use commands::Report;
pub use config::Config;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
    #[error("{0}")]
    Io(String),
    #[error(transparent)]
    Compute(#[from] crate::Error),
}

impl CliError {
    pub fn invalid(field: impl Into<String>, message: String) -> Self {
        Self::Invalid {
            field: field.into(),
            message,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hardy-corner",
    version,
    about = "Hardy potential on corner domains: spectra, sharpness and heat-flow decay"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, clap::Args)]
pub struct IoArgs {
    /// TOML configuration file.
    #[arg(long)]
    pub config: PathBuf,
    /// Output file (stdout if omitted).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Ground state eigenvalue against the closed form.
    Eigen(IoArgs),
    /// Rayleigh quotients of the cutoff sequence.
    Hardy(IoArgs),
    /// Heat flow in self-similar variables.
    Evolve(IoArgs),
    /// Ground state and decay exponent over a grid of (N, k, λ).
    Sweep(IoArgs),
}

impl Command {
    fn io(&self) -> &IoArgs {
        match self {
            Self::Eigen(a) | Self::Hardy(a) | Self::Evolve(a) | Self::Sweep(a) => a,
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Self::Eigen(_) => "eigen",
            Self::Hardy(_) => "hardy",
            Self::Evolve(_) => "evolve",
            Self::Sweep(_) => "sweep",
        }
    }
}

/// Runs one command and returns its report.
pub fn execute(command: &Command) -> Result<Report, CliError> {
    let path = &command.io().config;
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Io(format!("cannot read config {}: {e}", path.display())))?;
    let config = Config::parse(&text)?;
    let mut report = match command {
        Command::Eigen(_) => commands::eigen(&config)?,
        Command::Hardy(_) => commands::hardy(&config)?,
        Command::Evolve(_) => commands::evolve(&config)?,
        Command::Sweep(_) => commands::sweep(&config)?,
    };
    report.set_preamble(command.name(), &config);
    Ok(report)
}

/// Entry point; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    let report = match execute(&cli.command) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    let text = report.render();
    let written = match &cli.command.io().out {
        Some(path) => std::fs::write(path, &text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| format!("cannot write to stdout: {e}")),
    };
    if let Err(e) = written {
        eprintln!("error: {e}");
        return 2;
    }
    if report.within_tolerance {
        0
    } else {
        eprintln!("tolerance exceeded: {}", report.failures.join("; "));
        1
    }
}
