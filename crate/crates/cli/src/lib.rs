//! Command-line front end: prior tables, information-gain ratios, Monte Carlo
//! ensembles and the validation suite.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod validate;

use config::{Cli, Command, CommandKind, RunConfig};
pub use error::CliError;

/// Executes a parsed command line.
pub fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Prior(args) => {
            let cfg = RunConfig::from_args(CommandKind::Prior, &args)?;
            commands::cmd_prior(&cfg, output::open(cfg.output.as_deref())?)
        }
        Command::Infogain(args) => {
            let cfg = RunConfig::from_args(CommandKind::Infogain, &args)?;
            commands::cmd_infogain(&cfg, output::open(cfg.output.as_deref())?)
        }
        Command::Simulate(args) => {
            if args.bins == 0 {
                return Err(CliError::Usage("--bins must be at least 1".into()));
            }
            let cfg = RunConfig::from_args(CommandKind::Simulate, &args.common)?;
            commands::cmd_simulate(&cfg, args.bins, output::open(cfg.output.as_deref())?)
        }
        Command::Validate(args) => {
            let cfg = RunConfig::from_args(CommandKind::Validate, &args.common)?;
            validate::cmd_validate(
                &cfg,
                args.inject_fault.as_deref(),
                output::open(cfg.output.as_deref())?,
            )
        }
    }
}
