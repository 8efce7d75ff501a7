//! Command-line driver for the forecasting pipeline.
//!
//! Subcommands cover the whole flow over plain files: `generate` a
//! synthetic corpus, `featurize` it into fused vectors, `serialize` it
//! into language-model paragraphs, `train` and `predict` with the MLP
//! regressor, `forecast-ts` with history-only baselines, `evaluate`
//! predictions into grouped reports, and `report-series` for plot-ready
//! per-job series.
//!
//! Every subcommand prints one machine-readable JSON summary line on
//! stdout and is idempotent for fixed inputs and seed. Exit codes: 0 on
//! success, 1 on runtime or data errors, 2 on usage errors.

mod commands;
mod config;

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

/// Fixed default seed so reruns reproduce byte-identical artifacts.
pub const DEFAULT_SEED: u64 = 13;

/// Environment variable naming the default data directory.
pub const DATA_DIR_ENV: &str = "JOBCAST_DATA_DIR";

pub(crate) fn data_dir() -> PathBuf {
    std::env::var_os(DATA_DIR_ENV)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from("."))
}

pub(crate) fn default_file(name: &str) -> PathBuf {
    data_dir().join(name)
}

#[derive(Parser)]
#[command(
    name = "jobcast",
    version,
    about = "Job application count forecasting pipeline",
    propagate_version = true
)]
pub struct Cli {
    /// Flat key=value file supplying defaults for omitted flags.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Generate a synthetic corpus (jobs, observations, splits, skills).
    Generate(commands::generate::GenerateArgs),
    /// Fuse per-modality embeddings into a feature matrix.
    Featurize(commands::featurize::FeaturizeArgs),
    /// Render jobs as language-model paragraphs, one JSONL file per split.
    Serialize(commands::serialize::SerializeArgs),
    /// Train the MLP regressor on a feature matrix.
    Train(commands::train::TrainArgs),
    /// Predict with trained model files over a feature matrix.
    Predict(commands::predict::PredictArgs),
    /// Forecast counts per job from its own history.
    ForecastTs(commands::forecast::ForecastArgs),
    /// Score predictions against observations into a grouped report.
    Evaluate(commands::evaluate::EvaluateArgs),
    /// Emit actual-vs-predicted series for selected jobs.
    ReportSeries(commands::series::SeriesArgs),
}

/// Parses and runs; returns the process exit code.
pub fn run_from<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let overrides = match config::Overrides::load(cli.config.as_deref()) {
        Ok(o) => o,
        Err(e) => {
            eprintln!("error: {e:#}");
            return 1;
        }
    };
    match commands::dispatch(cli.command, &overrides) {
        Ok(summary) => {
            println!("{summary}");
            0
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            1
        }
    }
}
