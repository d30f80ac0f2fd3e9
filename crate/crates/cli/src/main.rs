use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use fairglasso_cli::{commands, Cli};

fn fail(msg: &str) -> ExitCode {
    eprintln!("error: {}", msg.trim().replace('\n', " "));
    ExitCode::FAILURE
}

fn main() -> ExitCode {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => e.exit(),
        Err(e) => {
            // clap's first line carries the message; the rest is usage help
            let text = e.to_string();
            let first = text.lines().next().unwrap_or_default();
            return fail(first.strip_prefix("error: ").unwrap_or(first));
        }
    };
    match commands::execute(&cli.command, &args) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => fail(&e.to_string()),
    }
}
