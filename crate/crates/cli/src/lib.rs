//! `kantian` — command-line front end for the equilibrium, frontier, and
//! shift-construction machinery in `kantian-core`.

use std::io::Write;

use clap::Parser;

pub mod args;
pub mod commands;
pub mod game_file;

/// A command that cannot proceed: carries the process exit code.
/// Code 2 marks rejected input, code 1 a solver or verification failure.
#[derive(Debug)]
pub struct Failure {
    pub code: i32,
    pub message: String,
}

impl From<kantian_core::Error> for Failure {
    fn from(e: kantian_core::Error) -> Self {
        use kantian_core::Error::*;
        let code = match &e {
            InvalidGame(_)
            | PlayerIndex { .. }
            | DimensionMismatch { .. }
            | InvalidProfile(_)
            | InvalidConfig(_) => 2,
            _ => 1,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

/// Parses the command line, runs the command, writes the CSV, and returns
/// the process exit code.
pub fn run() -> i32 {
    let cli = args::Cli::parse();
    match commands::execute(cli) {
        Ok(output) => {
            if let Some(csv) = output.csv {
                let result = match &output.out {
                    Some(path) => std::fs::write(path, csv.as_bytes())
                        .map_err(|e| format!("cannot write {}: {e}", path.display())),
                    None => {
                        let stdout = std::io::stdout();
                        let mut lock = stdout.lock();
                        lock.write_all(csv.as_bytes())
                            .and_then(|()| lock.flush())
                            .map_err(|e| format!("cannot write to stdout: {e}"))
                    }
                };
                if let Err(msg) = result {
                    eprintln!("error: {msg}");
                    return 2;
                }
            }
            output.code
        }
        Err(failure) => {
            eprintln!("error: {}", failure.message);
            failure.code
        }
    }
}
