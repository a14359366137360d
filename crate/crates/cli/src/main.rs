//! `fpcal`: function point weight calibration from the command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod args;
mod commands;
mod config;
mod manifest;
mod render;

use std::ffi::OsString;
use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;

use crate::args::Cli;
use crate::commands::Outcome;
use crate::manifest::{sidecar_path, RunManifest};

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    /// A usage error clap has already printed.
    Reported,
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<fpcal::Error> for CliError {
    fn from(e: fpcal::Error) -> Self {
        CliError::Data(e.into())
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(e.into())
    }
}

impl From<serde_json::Error> for CliError {
    fn from(e: serde_json::Error) -> Self {
        CliError::Data(e.into())
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Data(e.into())
    }
}

fn main() -> ExitCode {
    match run(std::env::args_os().collect()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Reported) => ExitCode::from(1),
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(argv: Vec<OsString>) -> Result<(), CliError> {
    let argv = config::expand(argv)?;
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => Ok(()),
                _ => Err(CliError::Reported),
            };
        }
    };
    let outcome = commands::execute(&cli)?;
    emit(&cli, outcome)
}

/// Writes the primary output, any extra files and the run manifest. Nothing
/// is written before the command has fully succeeded.
fn emit(cli: &Cli, outcome: Outcome) -> Result<(), CliError> {
    let mut outputs = Vec::new();
    match &cli.out {
        Some(path) => {
            write_file(path, &outcome.primary)?;
            outputs.push(path.clone());
        }
        None => std::io::stdout().write_all(&outcome.primary)?,
    }
    for (path, bytes) in &outcome.extras {
        write_file(path, bytes)?;
        outputs.push(path.clone());
    }

    let manifest = RunManifest {
        tool: "fpcal",
        version: env!("CARGO_PKG_VERSION"),
        command: cli.command.name().to_string(),
        seed: cli.seed,
        config: outcome.config,
        inputs: outcome.inputs,
        outputs,
    };
    let target = cli
        .manifest
        .clone()
        .or_else(|| cli.out.as_deref().map(sidecar_path));
    match target {
        Some(path) => {
            let mut bytes = serde_json::to_vec_pretty(&manifest)?;
            bytes.push(b'\n');
            write_file(&path, &bytes)?;
        }
        None => eprintln!("{}", serde_json::to_string(&manifest)?),
    }
    Ok(())
}

fn write_file(path: &std::path::Path, bytes: &[u8]) -> Result<(), CliError> {
    std::fs::write(path, bytes)
        .map_err(|e| CliError::Data(anyhow::anyhow!("cannot write {}: {e}", path.display())))
}
