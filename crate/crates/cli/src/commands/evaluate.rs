use std::path::PathBuf;

use anyhow::Result;
use clap::Args;
use serde_json::json;

use jobcast_core::evalreport::{
    evaluate_grouped, load_predictions, score_against, write_report_csv, GroupBy,
};

use crate::config::Overrides;

#[derive(Args)]
pub struct EvaluateArgs {
    /// Predictions CSV (job_id,t,prediction).
    #[arg(long, value_name = "FILE")]
    pub pred: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub jobs: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub obs: Option<PathBuf>,

    /// day, jac, or overall.
    #[arg(long, value_name = "MODE", default_value = "day")]
    pub group_by: String,

    /// Drop predictions with no matching observation instead of failing;
    /// the summary reports how many were dropped.
    #[arg(long)]
    pub skip_unmatched: bool,

    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn run(args: EvaluateArgs, _overrides: &Overrides) -> Result<serde_json::Value> {
    let pred_path = args
        .pred
        .unwrap_or_else(|| crate::default_file("predictions.csv"));
    let jobs_path = args.jobs.unwrap_or_else(|| crate::default_file("jobs.jsonl"));
    let obs_path = args.obs.unwrap_or_else(|| crate::default_file("observations.jsonl"));
    let out = args.out.unwrap_or_else(|| crate::default_file("report.csv"));

    let group_by = GroupBy::parse(&args.group_by)?;
    let dataset = super::load_dataset(&jobs_path, &obs_path, None)?;
    let mut predictions = load_predictions(&pred_path)?;
    let mut unmatched = 0usize;
    if args.skip_unmatched {
        let observed: std::collections::HashSet<(&str, u32)> = dataset
            .observations()
            .iter()
            .map(|o| (o.job_id.as_str(), o.t))
            .collect();
        let before = predictions.len();
        predictions.retain(|p| observed.contains(&(p.job_id.as_str(), p.t)));
        unmatched = before - predictions.len();
    }
    let scored = score_against(&dataset, &predictions)?;
    let report = evaluate_grouped(&scored, group_by)?;
    write_report_csv(&out, &report)?;

    Ok(json!({
        "command": "evaluate",
        "group_by": group_by.as_str(),
        "instances": scored.len(),
        "unmatched_dropped": unmatched,
        "rows": report.rows.len(),
        "out": out,
    }))
}
