//! `energy`: command-line front end for energy-core.
//!
//! Every run writes one record: the resolved configuration, the crate version,
//! a timestamp and the result. JSON is the canonical format; `--format csv`
//! writes a flat table of the main numbers instead.

mod args;
mod run;

use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::json;

use args::{Cli, Format};
use run::{run, Outcome};

fn render(outcome: &Outcome, format: Format) -> String {
    match format {
        Format::Json => {
            let record = json!({
                "tool": "energy",
                "version": env!("CARGO_PKG_VERSION"),
                "timestamp": chrono::Utc::now().to_rfc3339_opts(chrono::SecondsFormat::Millis, true),
                "command": outcome.command,
                "config": outcome.config,
                "result": outcome.result,
            });
            let mut s = serde_json::to_string_pretty(&record).expect("serializable record");
            s.push('\n');
            s
        }
        Format::Csv => {
            let mut s = String::new();
            s.push_str(&outcome.table.header.join(","));
            s.push('\n');
            for row in &outcome.table.rows {
                s.push_str(&row.join(","));
                s.push('\n');
            }
            s
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match run(&cli.common, &cli.command) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {}", e.message());
            return ExitCode::from(e.exit_code());
        }
    };
    let text = render(&outcome, cli.common.format);
    let written = match &cli.common.output {
        Some(path) => fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
        None => std::io::stdout()
            .write_all(text.as_bytes())
            .map_err(|e| format!("cannot write output: {e}")),
    };
    match written {
        Ok(()) => ExitCode::SUCCESS,
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::FAILURE
        }
    }
}
