use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde_json::json;

use jobcast_core::datamodel::{load_skill_table, SkillEmbeddingTable, Split};
use jobcast_core::featfusion::{
    featurize_corpus, write_feature_csv, CategoricalSchemas, FusionConfig, SalaryStats,
};

use crate::config::Overrides;

#[derive(Args)]
pub struct FeaturizeArgs {
    #[arg(long, value_name = "FILE")]
    pub jobs: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub obs: Option<PathBuf>,

    /// Split tags; schemas and salary statistics come from the train split.
    #[arg(long, value_name = "FILE")]
    pub splits: Option<PathBuf>,

    /// Skill embedding TSV; omitted skills fall back to hashed vectors.
    #[arg(long, value_name = "FILE")]
    pub skills: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub out_features: Option<PathBuf>,

    /// Where to write the fusion config used (needed to train comparable
    /// models and embedded into model files).
    #[arg(long, value_name = "FILE")]
    pub out_config: Option<PathBuf>,

    /// Append a day one-hot block (joint training).
    #[arg(long)]
    pub joint: bool,

    /// Day values for the one-hot block; defaults to the distinct observed
    /// days.
    #[arg(long, value_delimiter = ',', value_name = "DAYS")]
    pub days: Option<Vec<u32>>,

    #[arg(long, value_name = "D")]
    pub d_company: Option<usize>,

    #[arg(long, value_name = "D")]
    pub d_title: Option<usize>,

    #[arg(long, value_name = "D")]
    pub d_desc: Option<usize>,

    /// Skill embedding dimension when no table is given.
    #[arg(long, value_name = "D")]
    pub skill_dim: Option<usize>,
}

pub fn run(args: FeaturizeArgs, overrides: &Overrides) -> Result<serde_json::Value> {
    let jobs_path = args.jobs.unwrap_or_else(|| crate::default_file("jobs.jsonl"));
    let obs_path = args.obs.unwrap_or_else(|| crate::default_file("observations.jsonl"));
    let splits_path = args.splits.unwrap_or_else(|| crate::default_file("splits.csv"));
    let out_features = args
        .out_features
        .unwrap_or_else(|| crate::default_file("features.csv"));
    let out_config = args
        .out_config
        .unwrap_or_else(|| crate::default_file("fusion.json"));

    let dataset = super::load_dataset(&jobs_path, &obs_path, Some(&splits_path))?;

    let table = match &args.skills {
        Some(path) => load_skill_table(path)?,
        None => {
            let dim = args.skill_dim.or(overrides.usize("skill-dim")?).unwrap_or(16);
            SkillEmbeddingTable::empty(dim)
        }
    };

    let train_jobs: Vec<_> = dataset.jobs_in_split(Split::Train).collect();
    anyhow::ensure!(!train_jobs.is_empty(), "no jobs tagged train in {}", splits_path.display());
    let schemas = CategoricalSchemas::from_jobs(train_jobs.iter().copied());
    let mut config = FusionConfig::new(schemas, table.dim());
    config.salary_stats = SalaryStats::from_jobs(train_jobs.iter().copied());
    if let Some(d) = args.d_company.or(overrides.usize("d-company")?) {
        config.d_company = d;
    }
    if let Some(d) = args.d_title.or(overrides.usize("d-title")?) {
        config.d_title = d;
    }
    if let Some(d) = args.d_desc.or(overrides.usize("d-desc")?) {
        config.d_desc = d;
    }
    let joint = args.joint || overrides.bool("joint")?.unwrap_or(false);
    if joint {
        let days = match args.days.or(overrides.list("days")?) {
            Some(days) => days,
            None => {
                let mut days: Vec<u32> = dataset.observations().iter().map(|o| o.t).collect();
                days.sort_unstable();
                days.dedup();
                days
            }
        };
        config.day_values = Some(days);
    }
    config.validate()?;

    let features = featurize_corpus(&dataset, &table, &config)?;
    write_feature_csv(&out_features, &features)?;
    let config_json = serde_json::to_string(&config)?;
    std::fs::write(&out_config, config_json + "\n")
        .with_context(|| format!("writing {}", out_config.display()))?;

    Ok(json!({
        "command": "featurize",
        "rows": features.rows.len(),
        "dim": features.dim,
        "joint": joint,
        "out_features": out_features,
        "out_config": out_config,
    }))
}
