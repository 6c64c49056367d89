//! Command-line front end for the photon-pair source toolkit.
//!
//! Every subcommand reads one TOML config (see README) and writes a
//! deterministic JSON, CSV, or text table to stdout or --out. Exit
//! codes: 0 success, 1 invalid inputs, 2 numerical failure.

mod commands;
mod config;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Parser, Subcommand, ValueEnum};
use spdc_core::estimator::EstimatorError;
use spdc_core::filters::FilterError;
use spdc_core::forward_model::ModelError;
use spdc_core::gating::GatingError;
use spdc_core::monte_carlo::SimError;
use spdc_core::quad::QuadError;
use spdc_core::records::RecordError;

use crate::config::ToolkitConfig;

#[derive(Parser)]
#[command(
    name = "spdc",
    version,
    about = "Characterize pulsed photon-pair sources: filter integrals, \
             count predictions, gate-level simulation, and estimation \
             from measured counts"
)]
struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Random seed override for `simulate`.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Output file; stdout when omitted.
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,

    /// Output encoding; each command has a natural default.
    #[arg(long, global = true, value_enum)]
    format: Option<OutputFormat>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compare filter shapes: bandwidth, spectral integrals, and the
    /// singles-to-coincidence bandwidth ratio.
    Filters,
    /// Scan the normalized coincidence overlap across filter detuning.
    Sweep {
        /// Lowest detuning, GHz; falls back to [sweep] in the config.
        #[arg(long, allow_negative_numbers = true)]
        min_ghz: Option<f64>,
        /// Highest detuning, GHz.
        #[arg(long, allow_negative_numbers = true)]
        max_ghz: Option<f64>,
        /// Number of sweep points.
        #[arg(long)]
        points: Option<usize>,
    },
    /// Predict per-gate count probabilities for the configured source.
    Predict,
    /// Simulate detection gate by gate with the configured seed.
    Simulate,
    /// Recover source figures of merit from a measurement CSV
    /// (label,gates,counts_a,counts_b,coincidences[,fluorescence_mw]).
    Estimate { measurements: PathBuf },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Json,
    Csv,
    Table,
}

/// Failures split by exit code: bad inputs (1) vs numerical trouble in
/// an otherwise valid computation (2).
#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Numerical(String),
}

impl From<QuadError> for CliError {
    fn from(e: QuadError) -> Self {
        match e {
            QuadError::InvalidInterval { .. } => CliError::Validation(e.to_string()),
            QuadError::NonFinite { .. } | QuadError::NotConverged { .. } => {
                CliError::Numerical(e.to_string())
            }
        }
    }
}

impl From<FilterError> for CliError {
    fn from(e: FilterError) -> Self {
        match e {
            FilterError::Quadrature(q) => q.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<GatingError> for CliError {
    fn from(e: GatingError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match e {
            ModelError::Filter(f) => f.into(),
            ModelError::Gating(g) => g.into(),
            ModelError::AccidentalMismatch { .. } => CliError::Numerical(e.to_string()),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Model(m) => m.into(),
            SimError::Filter(f) => f.into(),
            other => CliError::Validation(other.to_string()),
        }
    }
}

impl From<EstimatorError> for CliError {
    fn from(e: EstimatorError) -> Self {
        CliError::Validation(e.to_string())
    }
}

impl From<RecordError> for CliError {
    fn from(e: RecordError) -> Self {
        CliError::Validation(e.to_string())
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e)
            if matches!(
                e.kind(),
                ErrorKind::DisplayHelp
                    | ErrorKind::DisplayVersion
                    | ErrorKind::DisplayHelpOnMissingArgumentOrSubcommand
            ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Validation(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(CliError::Numerical(msg)) => {
            eprintln!("numerical error: {msg}");
            ExitCode::from(2)
        }
    }
}


fn run(cli: Cli) -> Result<(), CliError> {
    let config = cli.config.as_deref().map(ToolkitConfig::load).transpose()?;
    let require = |what: &str| {
        config.as_ref().ok_or_else(|| {
            CliError::Validation(format!("`{what}` needs --config <FILE>"))
        })
    };
    let format = |natural: OutputFormat| cli.format.unwrap_or(natural);

    let content = match &cli.command {
        Command::Filters => commands::cmd_filters(config.as_ref(), format(OutputFormat::Table))?,
        Command::Sweep {
            min_ghz,
            max_ghz,
            points,
        } => commands::cmd_sweep(
            require("sweep")?,
            *min_ghz,
            *max_ghz,
            *points,
            format(OutputFormat::Csv),
        )?,
        Command::Predict => commands::cmd_predict(require("predict")?, format(OutputFormat::Json))?,
        Command::Simulate => commands::cmd_simulate(
            require("simulate")?,
            cli.seed,
            format(OutputFormat::Json),
        )?,
        Command::Estimate { measurements } => commands::cmd_estimate(
            require("estimate")?,
            measurements,
            format(OutputFormat::Json),
        )?,
    };
    output::emit(cli.out.as_deref(), &content)
}
