use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::Parser;
use selfdecl_cli::{Cli, CliError};

fn main() -> ExitCode {
    let argv: Vec<std::ffi::OsString> = std::env::args_os().collect();
    let error_json = argv.iter().any(|a| a == "--error-json");
    let cli = match Cli::try_parse_from(&argv) {
        Ok(cli) => cli,
        Err(e) if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) => {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            if error_json {
                eprintln!("{}", CliError::usage(e.kind().to_string()).to_json());
            } else {
                let _ = e.print();
            }
            return ExitCode::from(1);
        }
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match selfdecl_cli::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if cli.error_json {
                eprintln!("{}", e.to_json());
            } else {
                eprintln!("error: {e}");
            }
            ExitCode::from(e.kind.exit_code())
        }
    }
}
