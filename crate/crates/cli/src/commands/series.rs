use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde_json::json;

use jobcast_core::evalreport::{emit_series_csv, load_predictions};

use crate::config::Overrides;

#[derive(Args)]
pub struct SeriesArgs {
    #[arg(long, value_name = "FILE")]
    pub jobs: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub obs: Option<PathBuf>,

    /// Optional predictions to place alongside the actuals.
    #[arg(long, value_name = "FILE")]
    pub pred: Option<PathBuf>,

    /// Job to include; repeat for several jobs.
    #[arg(long = "job-id", value_name = "ID")]
    pub job_ids: Vec<String>,

    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn run(args: SeriesArgs, _overrides: &Overrides) -> Result<serde_json::Value> {
    let jobs_path = args.jobs.unwrap_or_else(|| crate::default_file("jobs.jsonl"));
    let obs_path = args.obs.unwrap_or_else(|| crate::default_file("observations.jsonl"));
    let out = args.out.unwrap_or_else(|| crate::default_file("series.csv"));

    let dataset = super::load_dataset(&jobs_path, &obs_path, None)?;
    let predictions = match &args.pred {
        Some(path) => load_predictions(path)?,
        None => Vec::new(),
    };
    emit_series_csv(&args.job_ids, &dataset, &predictions, &out)?;

    Ok(json!({
        "command": "report-series",
        "jobs": args.job_ids.len(),
        "out": out,
    }))
}
