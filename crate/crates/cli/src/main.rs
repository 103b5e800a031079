mod config;
mod run;

use std::process::ExitCode;

use clap::Parser;

use config::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                print!("{e}");
                return ExitCode::SUCCESS;
            }
            report("validation", &e.to_string());
            return ExitCode::from(2);
        }
    };
    match run::execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            let (kind, code) = if e.is_validation() {
                ("validation", 2)
            } else if e.is_resource() {
                ("resource", 3)
            } else {
                ("runtime", 4)
            };
            report(kind, &e.to_string());
            ExitCode::from(code)
        }
    }
}

/// One line on stderr: `error kind=<kind> message=<json string>`.
fn report(kind: &str, message: &str) {
    let first = message
        .lines()
        .map(str::trim)
        .filter(|l| !l.is_empty())
        .collect::<Vec<_>>()
        .join(" ");
    let first = first.strip_prefix("error: ").unwrap_or(&first);
    eprintln!(
        "error kind={kind} message={}",
        serde_json::to_string(first).expect("string serializes")
    );
}
