use std::process::ExitCode;

use clap::Parser;
use pmd_dop::config::Cli;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => e.exit(),
    };
    match pmd_dop::run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("pmd-dop: {err}");
            err.exit_code()
        }
    }
}
