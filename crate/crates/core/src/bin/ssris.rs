use std::process::ExitCode;

use clap::Parser;
use ssris::cli::{self, Cli, Outcome};

fn main() -> ExitCode {
    let args = Cli::parse();
    match cli::run(&args) {
        Ok(outcome) => ExitCode::from(outcome as u8),
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(Outcome::ValidationError as u8)
        }
    }
}
