use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde_json::json;

use jobcast_core::lmserialize::{export_lm_dataset, TemplateConfig};

use crate::config::Overrides;

#[derive(Args)]
pub struct SerializeArgs {
    #[arg(long, value_name = "FILE")]
    pub jobs: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub obs: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub splits: Option<PathBuf>,

    /// Directory receiving lm_dataset.{train,test,val}.jsonl.
    #[arg(long, value_name = "DIR")]
    pub out_dir: Option<PathBuf>,

    /// Include the day sentence in each paragraph (joint training).
    #[arg(long)]
    pub joint: bool,
}

pub fn run(args: SerializeArgs, overrides: &Overrides) -> Result<serde_json::Value> {
    let jobs_path = args.jobs.unwrap_or_else(|| crate::default_file("jobs.jsonl"));
    let obs_path = args.obs.unwrap_or_else(|| crate::default_file("observations.jsonl"));
    let splits_path = args.splits.unwrap_or_else(|| crate::default_file("splits.csv"));
    let out_dir = args.out_dir.unwrap_or_else(crate::data_dir);
    let joint = args.joint || overrides.bool("joint")?.unwrap_or(false);

    let dataset = super::load_dataset(&jobs_path, &obs_path, Some(&splits_path))?;
    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating output directory {}", out_dir.display()))?;
    let template = TemplateConfig::default();
    let counts = export_lm_dataset(&dataset, &template, joint, &out_dir)?;

    Ok(json!({
        "command": "serialize",
        "out_dir": out_dir,
        "joint": joint,
        "template_version": template.version,
        "lines": counts
            .iter()
            .map(|(split, n)| (split.to_string(), *n))
            .collect::<std::collections::BTreeMap<_, _>>(),
    }))
}
