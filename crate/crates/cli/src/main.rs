mod args;
mod commands;
mod emit;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use serde_json::json;

use args::{Cli, Command, Format};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error(transparent)]
    Solver(#[from] hyperppw::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

const ASSERTION_FAILED: u8 = 2;

fn execute(cli: &Cli) -> Result<bool, CliError> {
    let report = commands::run(cli.command, &cli.config)?;
    if report.table.rows.is_empty() {
        return Err(CliError::Usage("result table is empty".into()));
    }
    let meta = json!({
        "command": cli.command,
        "config": cli.config,
        "version": env!("CARGO_PKG_VERSION"),
    });
    let default = if cli.command == Command::RatioCurve { Format::Csv } else { Format::Json };
    let text = match cli.config.format.unwrap_or(default) {
        Format::Csv => emit::csv(&report.table, &meta),
        Format::Json => {
            let mut doc = meta;
            doc["result"] = report.result;
            doc["pass"] = json!(report.pass);
            emit::json(&doc)
        }
    };
    match &cli.config.out {
        Some(path) => fs::write(path, text)?,
        None => std::io::stdout().lock().write_all(text.as_bytes())?,
    }
    Ok(report.pass)
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
            return ExitCode::FAILURE;
        }
    };
    match execute(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            eprintln!("assertion failed; see the report's pass fields");
            ExitCode::from(ASSERTION_FAILED)
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
