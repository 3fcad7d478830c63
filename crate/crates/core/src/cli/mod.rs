//! Command-line front end: configuration, commands and reports.

mod commands;
mod config;
mod report;

pub use commands::{cmd_family, cmd_reconstruct, cmd_solve, cmd_verify, run_points};
pub use config::{
    ChiSource, EpsilonConfig, Expect, GridConfig, OutputConfig, ReconstructConfig, RunConfig, SolveConfig,
    Tolerances, CHECKS,
};
pub use report::{
    grid_table, EpsilonRow, EpsilonTable, ReconstructionSummary, RunReport, Section, SectionBody, SolveSummary,
    SCHEMA,
};

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::{Error, Result};

#[derive(Debug, Parser)]
#[command(name = "isoembed", version, about = "Curvature bounds and embeddability checks for convex hypersurfaces")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Where to write the JSON report (overrides output.report).
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Grid points per axis and chart.
    #[arg(long, global = true)]
    pub resolution: Option<usize>,
    /// Comma-separated subset of the verify checks.
    #[arg(long, global = true, value_delimiter = ',')]
    pub checks: Option<Vec<String>>,
    /// Do not print the text report.
    #[arg(long, global = true)]
    pub quiet: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Evaluate the curvature bounds and identity residuals.
    Verify,
    /// Solve for the second fundamental form and test integrability.
    Solve,
    /// Rebuild an embedded patch from the metric.
    Reconstruct,
    /// Tabulate the shifted radial-graph family.
    Family,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Verify => "verify",
            Command::Solve => "solve",
            Command::Reconstruct => "reconstruct",
            Command::Family => "family",
        }
    }
}

/// Loads the configuration and applies command-line overrides.
pub fn resolve_config(cli: &Cli) -> Result<RunConfig> {
    let path = cli
        .config
        .as_deref()
        .ok_or_else(|| Error::Config("--config is required".into()))?;
    let mut config = RunConfig::load(path)?;
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(res) = cli.resolution {
        config.grid.resolution = res;
    }
    if let Some(checks) = &cli.checks {
        config.checks = checks.iter().map(|c| c.trim().to_string()).collect();
    }
    if let Some(out) = &cli.out {
        config.output.report = Some(out.clone());
    }
    config.validate()?;
    Ok(config)
}

/// Runs one command and writes its outputs.
pub fn execute(command: Command, config: &RunConfig) -> Result<RunReport> {
    let report = match command {
        Command::Verify => {
            let (report, sample) = cmd_verify(config)?;
            if let Some(path) = &config.output.grid_table {
                write(path, &grid_table(&sample))?;
            }
            report
        }
        Command::Solve => cmd_solve(config)?,
        Command::Reconstruct => cmd_reconstruct(config)?,
        Command::Family => cmd_family(config)?,
    };
    if let Some(path) = &config.output.report {
        write(path, &report.to_json()?)?;
    }
    Ok(report)
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

/// Exit status: 0 pass, 1 check failure, 2 configuration error, 3
/// numerical-domain error.
pub fn run(cli: &Cli) -> i32 {
    let result = resolve_config(cli).and_then(|config| execute(cli.command, &config));
    match result {
        Ok(report) => {
            if !cli.quiet {
                print!("{}", report.render_text());
            }
            if report.pass {
                0
            } else {
                1
            }
        }
        Err(e) => {
            eprintln!("isoembed {}: {e}", cli.command.name());
            e.exit_code()
        }
    }
}

pub fn main_entry() -> i32 {
    run(&Cli::parse())
}
