use std::process::ExitCode;

use bayescrisis_cli::args::Cli;
use bayescrisis_cli::error::CliError;
use clap::error::ErrorKind;
use clap::Parser;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let msg = e.kind().to_string();
            let detail = e.to_string();
            let first = detail.lines().next().unwrap_or(&msg).trim_start_matches("error: ");
            eprintln!("{}", CliError::Usage(first.to_string()).to_json_line());
            return ExitCode::from(1);
        }
    };
    match bayescrisis_cli::run(&cli) {
        Ok(outcome) => ExitCode::from(outcome.exit_code() as u8),
        Err(e) => {
            eprintln!("{}", e.to_json_line());
            ExitCode::from(1)
        }
    }
}
