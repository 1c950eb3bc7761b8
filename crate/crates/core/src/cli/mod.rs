//! Batch front-end: configuration files, parameter sweeps, result tables and
//! the `--verify` property suite.

pub mod config;
pub mod run;
pub mod table;
pub mod verify;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub use config::{ConfigError, MethodChoice, Quantity, RunConfig, Units};
pub use run::{compare_methods, run, run_file, Overrides, RunError, RunSummary};
pub use table::{CompareRow, ResultRow};

#[derive(Debug, Parser)]
#[command(
    name = "emrates",
    version,
    about = "Radiative rates of a two-level atom near a mirror"
)]
pub struct Cli {
    /// Run the built-in property suite and exit.
    #[arg(long)]
    pub verify: bool,

    #[command(subcommand)]
    pub command: Option<Command>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Evaluate a sweep described by a TOML config.
    Run {
        config: PathBuf,
        #[arg(long, value_enum)]
        method: Option<MethodChoice>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, value_enum)]
        units: Option<Units>,
    },
}

/// Parses `args` and executes, returning the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                run::EXIT_CONFIG
            } else {
                run::EXIT_OK
            };
        }
    };
    if cli.verify {
        return match verify::run_and_report(std::io::stdout().lock()) {
            Ok(true) => run::EXIT_OK,
            _ => 1,
        };
    }
    match cli.command {
        Some(Command::Run {
            config,
            method,
            out,
            seed,
            units,
        }) => {
            let overrides = Overrides {
                method,
                out_dir: out,
                seed,
                units,
            };
            match run_file(&config, &overrides) {
                Ok(summary) => {
                    let _ = run::report(std::io::stdout().lock(), &summary);
                    run::EXIT_OK
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    e.exit_code()
                }
            }
        }
        None => {
            eprintln!("error: nothing to do; use `run <config>` or `--verify`");
            run::EXIT_CONFIG
        }
    }
}
