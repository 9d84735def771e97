//! Configuration-driven experiments with JSON reports.
//!
//! `run` executes one config inside a worker pool of the configured size.
//! All parallelism lives in the estimators, which reduce in index order, so
//! a report's content does not depend on the pool size.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod config;
pub mod experiments;
pub mod report;

use std::path::PathBuf;

pub use config::ExperimentConfig;
pub use report::{report_schema_version, Report};

/// Exit statuses of the binary.
pub mod exit {
    pub const PASS: u8 = 0;
    pub const ASSERTION_FAILED: u8 = 1;
    pub const INVALID_CONFIG: u8 = 2;
    pub const RUNTIME_ERROR: u8 = 3;
}

#[derive(Debug)]
pub enum CliError {
    /// The config does not parse or is out of range.
    Config(String),
    /// A library call failed.
    Run(hypocoercivity::Error),
    Io(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "invalid config: {m}"),
            CliError::Run(e) => write!(f, "{e}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<hypocoercivity::Error> for CliError {
    fn from(e: hypocoercivity::Error) -> Self {
        CliError::Run(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        use hypocoercivity::Error as E;
        match self {
            CliError::Config(_) | CliError::Run(E::Usage(_) | E::Config(_) | E::Domain(_)) => exit::INVALID_CONFIG,
            _ => exit::RUNTIME_ERROR,
        }
    }
}

/// Command-line values that take precedence over config keys.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub workers: Option<usize>,
}

impl Overrides {
    pub fn apply(&self, cfg: &mut ExperimentConfig) -> Result<(), CliError> {
        if let Some(s) = self.seed {
            cfg.seed = s;
        }
        if let Some(o) = &self.out {
            cfg.out = Some(o.clone());
        }
        if let Some(w) = self.workers {
            cfg.workers = Some(w);
        }
        cfg.validate().map_err(CliError::Config)
    }
}

pub fn default_workers() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

/// Runs the experiment in a pool of `cfg.workers` threads and builds the
/// report. Writes the optional CSV and ρ files but not the report itself.
pub fn run(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let workers = cfg.workers.unwrap_or_else(default_workers);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| CliError::Io(format!("worker pool: {e}")))?;
    let outcome = pool.install(|| experiments::dispatch(cfg))?;
    if let (Some(path), Some(csv)) = (&cfg.csv, &outcome.csv) {
        experiments::write_file(path, csv)?;
    }
    let passed = outcome.assertions.iter().all(|a| a.passed);
    Ok(Report {
        schema_version: report::SCHEMA_VERSION.to_string(),
        experiment: cfg.experiment.kind().to_string(),
        seed: cfg.seed,
        config: cfg.resolved(),
        results: outcome.results,
        assertions: outcome.assertions,
        warnings: outcome.warnings,
        passed,
        runtime: report::Runtime {
            workers,
            tool_version: env!("CARGO_PKG_VERSION").to_string(),
        },
    })
}

/// [`run`] followed by writing the report to `cfg.out` (or stdout).
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let rep = run(cfg)?;
    match &cfg.out {
        Some(path) => experiments::write_file(path, &rep.to_json())?,
        None => print!("{}", rep.to_json()),
    }
    Ok(rep)
}
