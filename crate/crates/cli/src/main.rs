use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use hypoco::{exit, report, CliError, ExperimentConfig, Overrides};

#[derive(Parser)]
#[command(
    name = "hypoco",
    version,
    about = "Hypocoercivity bounds checked against simulation and spectral numerics"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        /// Report path; stdout when neither this nor `out` is set.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Parse and range-check a config without running it.
    Validate {
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        workers: Option<usize>,
    },
    /// Print the JSON Schema of the reports.
    Schema,
}

fn load(config: &Path, ov: Overrides) -> Result<ExperimentConfig, CliError> {
    let mut cfg = ExperimentConfig::load(config)?;
    ov.apply(&mut cfg)?;
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() {
                exit::INVALID_CONFIG
            } else {
                exit::PASS
            });
        }
    };
    let result = match cli.command {
        Command::Schema => {
            println!(
                "{}",
                serde_json::to_string_pretty(&report::schema()).expect("schema serializes")
            );
            Ok(exit::PASS)
        }
        Command::Validate {
            config,
            seed,
            out,
            workers,
        } => load(&config, Overrides { seed, out, workers }).map(|cfg| {
            println!("ok: {} (seed {})", cfg.experiment.kind(), cfg.seed);
            println!(
                "{}",
                serde_json::to_string_pretty(&cfg.resolved()).expect("config serializes")
            );
            exit::PASS
        }),
        Command::Run {
            config,
            seed,
            out,
            workers,
        } => load(&config, Overrides { seed, out, workers })
            .and_then(|cfg| hypoco::run_and_write(&cfg))
            .map(|rep| {
                for a in rep.failures() {
                    eprintln!("FAIL {}: {}", a.name, a.detail.as_deref().unwrap_or(""));
                }
                for w in &rep.warnings {
                    eprintln!("warning: {w}");
                }
                if rep.passed {
                    exit::PASS
                } else {
                    exit::ASSERTION_FAILED
                }
            }),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
