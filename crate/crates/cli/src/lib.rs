//! Command-line front end of the semi-Markov pricer.
//!
//! [`run`] parses arguments, loads the TOML configuration, executes one
//! command and returns the process exit code.

pub mod commands;
pub mod config;
pub mod output;

use std::ffi::OsString;
use std::path::PathBuf;
use std::sync::OnceLock;

use clap::{Args, Parser, Subcommand};

use config::{ExperimentConfig, Format};

/// Version of every emitted record layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable capping the number of worker threads.
pub const THREADS_ENV: &str = "SM_PRICER_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Numerical(String),
    #[error("cannot write {path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => EXIT_NUMERICAL,
            CliError::Usage(_) | CliError::Io { .. } => EXIT_USAGE,
        }
    }
}

impl From<sm_pricer_core::Error> for CliError {
    fn from(e: sm_pricer_core::Error) -> Self {
        if e.is_numerical() {
            CliError::Numerical(e.to_string())
        } else {
            CliError::Usage(e.to_string())
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "sm-pricer", version, about = "European call prices under semi-Markov trading times")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Price options with one or more methods.
    Price(CommonArgs),
    /// Run a scaling sequence toward its limit price.
    Converge(CommonArgs),
    /// Measure residuals of the fractional pricing equations.
    Residual(CommonArgs),
    /// Draw random variates and compare them with their laws.
    Sample(CommonArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML experiment file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Root seed of all random streams.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

/// Settings shared by every command after flags are merged over the file.
#[derive(Debug, Clone)]
pub struct RunSettings {
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl CommonArgs {
    pub fn resolve(&self) -> Result<(ExperimentConfig, RunSettings), CliError> {
        let cfg = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        let settings = RunSettings {
            seed: self.seed.or(cfg.seed).unwrap_or(0),
            out: self.out.clone().or_else(|| cfg.out.clone()),
            format: self.format.or(cfg.format).unwrap_or_default(),
        };
        Ok((cfg, settings))
    }
}

fn configure_threads() -> Result<(), CliError> {
    static POOL: OnceLock<Result<(), String>> = OnceLock::new();
    POOL.get_or_init(|| {
        let Ok(raw) = std::env::var(THREADS_ENV) else {
            return Ok(());
        };
        let n: usize = raw
            .trim()
            .parse()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| format!("{THREADS_ENV}={raw:?} is not a positive integer"))?;
        // A pool set up earlier in the process stays in place.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        Ok(())
    })
    .clone()
    .map_err(CliError::Usage)
}

/// Runs the command line `args` (program name first) and returns the exit
/// code. Diagnostics go to standard error.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(&cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: &Command) -> Result<(), CliError> {
    configure_threads()?;
    match command {
        Command::Price(a) => {
            let (cfg, s) = a.resolve()?;
            commands::price(&cfg, &s)
        }
        Command::Converge(a) => {
            let (cfg, s) = a.resolve()?;
            commands::converge(&cfg, &s)
        }
        Command::Residual(a) => {
            let (cfg, s) = a.resolve()?;
            commands::residual(&cfg, &s)
        }
        Command::Sample(a) => {
            let (cfg, s) = a.resolve()?;
            commands::sample(&cfg, &s)
        }
    }
}
