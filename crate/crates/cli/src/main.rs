use std::process::ExitCode;

use clap::Parser;
use kinetic_interface_cli::commands::{run, Cli, WORKERS_ENV};

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Ok(text) = std::env::var(WORKERS_ENV) {
        match text.trim().parse::<usize>() {
            Ok(n) if n > 0 => {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("warning: cannot size the worker pool: {e}");
                }
            }
            _ => eprintln!("warning: ignoring {WORKERS_ENV}={text}; expected a positive integer"),
        }
    }
    match run(cli) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
