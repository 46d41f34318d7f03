use std::process::ExitCode;

use clap::Parser;
use superres::cli::{run, Cli};

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("superres: {e}");
            ExitCode::from(2)
        }
    }
}
