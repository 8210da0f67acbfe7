mod config;
mod run;

use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;

use config::{Cli, RunConfig};
use run::Failure;

const EXIT_IO: u8 = 1;
const EXIT_VALIDATION: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Serialize)]
struct Diagnostic<'a> {
    status: &'static str,
    error: String,
    config: &'a config::Resolved,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let resolved = match RunConfig::from_cli(&cli).and_then(|c| c.resolve()) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_VALIDATION);
        }
    };
    match run::run(&resolved) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_IO)
        }
        Err(Failure::Numerical(e)) => {
            let diag = Diagnostic {
                status: "numerical-failure",
                error: e.to_string(),
                config: &resolved,
            };
            let text = serde_json::to_string_pretty(&diag).unwrap_or_else(|_| e.to_string());
            eprintln!("{text}");
            let _ = std::fs::write(resolved.out.join("diagnostic.json"), text + "\n");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
