//! Command-line surface and the validated run configuration.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use pmd_dop_core::pmd::MIN_GRID_POINTS;

use crate::error::CliError;

#[derive(Debug, Parser)]
#[command(
    name = "pmd-dop",
    version,
    about = "DOP priors under PMD and coherent vs incoherent information gain"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Tabulate the prior DOP density (columns m,density).
    Prior(CommonArgs),
    /// Coherent and incoherent mean information gain and their ratio.
    Infogain(CommonArgs),
    /// Monte Carlo DOP histogram with mutual-information estimates.
    Simulate(SimulateArgs),
    /// Run the full consistency suite and print a pass/fail table.
    Validate(ValidateArgs),
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// PMD (rms DGD) in ps; comma-separated list, `inf` for the uniform limit.
    #[arg(long = "pmd-ps", value_delimiter = ',', default_value = "20,30,40")]
    pub pmd_ps: Vec<PmdValue>,

    /// Pulse spread σ in ps.
    #[arg(long = "sigma-ps", default_value_t = 10.0)]
    pub sigma_ps: f64,

    /// Points of the uniform DOP grid.
    #[arg(long, default_value_t = 2001)]
    pub grid_points: usize,

    /// Monte Carlo ensemble size.
    #[arg(long, default_value_t = 1_000_000)]
    pub samples: usize,

    /// Master seed for the Monte Carlo streams.
    #[arg(long, env = "DOP_SEED", default_value_t = 1)]
    pub seed: u64,

    /// Output file; standard output when absent.
    #[arg(long, short)]
    pub output: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Histogram bins over [0, 1].
    #[arg(long, default_value_t = 100)]
    pub bins: usize,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    #[command(flatten)]
    pub common: CommonArgs,

    /// Shift the expected value of the named check (test hook).
    #[arg(long, hide = true)]
    pub inject_fault: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Tsv,
}

impl Format {
    pub fn delimiter(self) -> u8 {
        match self {
            Format::Csv => b',',
            Format::Tsv => b'\t',
        }
    }
}

/// A PMD value: finite picoseconds or the `inf` uniform-prior sentinel.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PmdValue {
    Finite(f64),
    Infinite,
}

impl FromStr for PmdValue {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("inf") {
            return Ok(PmdValue::Infinite);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(PmdValue::Finite(v)),
            Ok(v) => Err(format!("PMD must be positive and finite or `inf`, got {v}")),
            Err(e) => Err(format!("invalid PMD {s:?}: {e}")),
        }
    }
}

impl fmt::Display for PmdValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PmdValue::Finite(v) => f.write_str(&crate::output::sig6(*v)),
            PmdValue::Infinite => f.write_str("inf"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Prior,
    Infogain,
    Simulate,
    Validate,
}

/// Validated settings shared by all subcommands.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: CommandKind,
    pub pmd_ps: Vec<PmdValue>,
    pub sigma_ps: f64,
    pub grid_points: usize,
    pub samples: usize,
    pub seed: u64,
    pub output: Option<PathBuf>,
    pub format: Format,
}

impl RunConfig {
    pub fn from_args(command: CommandKind, args: &CommonArgs) -> Result<Self, CliError> {
        if !(args.sigma_ps.is_finite() && args.sigma_ps > 0.0) {
            return Err(CliError::Usage(format!(
                "--sigma-ps must be positive, got {}",
                args.sigma_ps
            )));
        }
        if args.grid_points < MIN_GRID_POINTS {
            return Err(CliError::Usage(format!(
                "--grid-points must be at least {MIN_GRID_POINTS}, got {}",
                args.grid_points
            )));
        }
        if args.samples < 1 {
            return Err(CliError::Usage("--samples must be at least 1".into()));
        }
        if args.pmd_ps.is_empty() {
            return Err(CliError::Usage("--pmd-ps needs at least one value".into()));
        }
        if command == CommandKind::Simulate && args.pmd_ps.contains(&PmdValue::Infinite) {
            return Err(CliError::Usage(
                "`inf` PMD cannot be sampled; use a large finite value".into(),
            ));
        }
        Ok(Self {
            command,
            pmd_ps: args.pmd_ps.clone(),
            sigma_ps: args.sigma_ps,
            grid_points: args.grid_points,
            samples: args.samples,
            seed: args.seed,
            output: args.output.clone(),
            format: args.format,
        })
    }

    /// More than one PMD value: rows carry a leading `pmd_ps` key column.
    pub fn long_format(&self) -> bool {
        self.pmd_ps.len() > 1
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(args: &[&str]) -> Result<Cli, clap::Error> {
        Cli::try_parse_from(std::iter::once("pmd-dop").chain(args.iter().copied()))
    }

    #[test]
    fn pmd_list_and_sentinel() {
        let cli = parse(&["infogain", "--pmd-ps", "20,30,inf"]).unwrap();
        let Command::Infogain(args) = cli.command else {
            panic!()
        };
        assert_eq!(
            args.pmd_ps,
            [
                PmdValue::Finite(20.0),
                PmdValue::Finite(30.0),
                PmdValue::Infinite
            ]
        );
        assert_eq!(args.sigma_ps, 10.0);
        assert_eq!(args.grid_points, 2001);
        assert_eq!(args.samples, 1_000_000);
        assert_eq!(args.format, Format::Csv);
    }

    #[test]
    fn bad_pmd_is_a_parse_error() {
        assert!(parse(&["prior", "--pmd-ps", "-3"]).is_err());
        assert!(parse(&["prior", "--pmd-ps", "abc"]).is_err());
        assert!(parse(&["prior", "--pmd-ps", "nan"]).is_err());
    }

    #[test]
    fn config_validation() {
        let cli = parse(&["prior", "--grid-points", "50"]).unwrap();
        let Command::Prior(args) = cli.command else {
            panic!()
        };
        assert!(matches!(
            RunConfig::from_args(CommandKind::Prior, &args),
            Err(CliError::Usage(_))
        ));

        let cli = parse(&["simulate", "--pmd-ps", "inf"]).unwrap();
        let Command::Simulate(args) = cli.command else {
            panic!()
        };
        assert!(RunConfig::from_args(CommandKind::Simulate, &args.common).is_err());

        let cli = parse(&["prior", "--sigma-ps", "0"]).unwrap();
        let Command::Prior(args) = cli.command else {
            panic!()
        };
        assert!(RunConfig::from_args(CommandKind::Prior, &args).is_err());
    }

    #[test]
    fn display_round_trips_values() {
        assert_eq!(PmdValue::Finite(20.0).to_string(), "20");
        assert_eq!(PmdValue::Finite(12.5).to_string(), "12.5");
        assert_eq!(PmdValue::Infinite.to_string(), "inf");
    }
}
