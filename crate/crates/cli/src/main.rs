mod args;
mod commands;

use std::process::ExitCode;

use clap::error::ErrorKind as ClapKind;
use clap::Parser;
use serde_json::json;

use jumpclust::error::ErrorKind;

use crate::args::Cli;

fn emit_error(code: &str, kind: &str, message: &str) {
    let body = json!({ "error": { "code": code, "kind": kind, "message": message } });
    eprintln!("{body}");
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();

    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), ClapKind::DisplayHelp | ClapKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            emit_error("usage", "usage", e.to_string().trim());
            return ExitCode::from(1);
        }
    };

    match commands::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, status) = match e.kind() {
                ErrorKind::Usage => ("usage", 1),
                ErrorKind::Data => ("data", 2),
                ErrorKind::Numeric => ("numeric", 3),
            };
            emit_error(e.code(), kind, &e.to_string());
            ExitCode::from(status)
        }
    }
}
