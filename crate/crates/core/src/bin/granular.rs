use std::io::Write;
use std::process::ExitCode;

use granular::cli::{run_from, CliError};

fn main() -> ExitCode {
    match run_from(std::env::args_os()) {
        Ok(out) => {
            if std::io::stdout().lock().write_all(out.text.as_bytes()).is_err() {
                return ExitCode::from(1);
            }
            match out.failure {
                Some(msg) => {
                    eprintln!("granular: {msg}");
                    ExitCode::from(1)
                }
                None => ExitCode::SUCCESS,
            }
        }
        Err(CliError::Info(text)) => {
            print!("{text}");
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("granular: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
