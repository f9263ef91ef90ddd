mod cli;
mod commands;
mod input;
mod json;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use genusavg_core::Config;

use cli::{Cli, OutputFormat};
use json::ErrorJson;

/// Usage errors exit with 2, computation errors with 1.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Compute(genusavg_core::Error),
}

impl From<genusavg_core::Error> for CliError {
    fn from(e: genusavg_core::Error) -> Self {
        CliError::Compute(e)
    }
}

fn config(cli: &Cli) -> Result<Config, CliError> {
    let mut c = Config::default();
    if let Some(v) = cli.depth_cap {
        c.oracle_depth_cap = v;
    }
    if let Some(v) = cli.enum_budget {
        c.enum_budget = v;
    }
    if let Some(v) = cli.memo_cap {
        c.memo_cap = v;
    }
    if c.oracle_depth_cap == 0 || c.enum_budget == 0 || c.memo_cap == 0 {
        return Err(CliError::Usage("caps must be positive".into()));
    }
    Ok(c)
}

/// Write a line to stdout; a closed pipe is not an error.
fn emit(s: &str) {
    let _ = writeln!(std::io::stdout().lock(), "{s}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let as_json = cli.json || cli.output == OutputFormat::Json;
    let result = config(&cli).and_then(|c| commands::run(&cli.command, c));
    match result {
        Ok(out) => {
            let body = if as_json { serde_json::to_string_pretty(&out.json).expect("serializable") } else { out.text };
            emit(&body);
            if out.success {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
        Err(CliError::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Compute(e)) => {
            let obj = ErrorJson { error: e.kind(), message: e.to_string() };
            emit(&serde_json::to_string(&obj).expect("serializable"));
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
