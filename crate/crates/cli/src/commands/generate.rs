use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::Args;
use serde_json::json;

use jobcast_core::datamodel;
use jobcast_core::synthgen::{generate_corpus, write_skill_table, GenConfig};

use crate::config::Overrides;

#[derive(Args)]
pub struct GenerateArgs {
    /// Output directory for jobs.jsonl, observations.jsonl, splits.csv,
    /// and skills.tsv (defaults to the data directory).
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,

    #[arg(long, value_name = "N")]
    pub n_jobs: Option<usize>,

    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,

    /// How strongly job features determine counts, in [0, 1].
    #[arg(long, value_name = "X")]
    pub signal_strength: Option<f64>,

    /// Day values at which counts are observed.
    #[arg(long, value_delimiter = ',', value_name = "DAYS")]
    pub horizons: Option<Vec<u32>>,

    #[arg(long, value_name = "N")]
    pub max_jac: Option<u32>,

    /// train,test,val ratio components.
    #[arg(long, value_delimiter = ',', value_name = "A,B,C")]
    pub split_ratio: Option<Vec<u32>>,

    /// Dimension of the emitted skill embedding table.
    #[arg(long, value_name = "D")]
    pub skill_dim: Option<usize>,

    #[arg(long, value_name = "N")]
    pub vocab_titles: Option<usize>,

    #[arg(long, value_name = "N")]
    pub vocab_companies: Option<usize>,

    #[arg(long, value_name = "N")]
    pub vocab_skills: Option<usize>,
}

pub fn run(args: GenerateArgs, overrides: &Overrides) -> Result<serde_json::Value> {
    let out = args
        .out
        .or_else(|| overrides.raw("out").map(PathBuf::from))
        .unwrap_or_else(crate::data_dir);
    let n_jobs = args.n_jobs.or(overrides.usize("n-jobs")?).unwrap_or(1000);
    let seed = args.seed.or(overrides.u64("seed")?).unwrap_or(crate::DEFAULT_SEED);

    let mut config = GenConfig::new(n_jobs, seed);
    if let Some(s) = args.signal_strength.or(overrides.f64("signal-strength")?) {
        config.signal_strength = s;
    }
    if let Some(h) = args.horizons.or(overrides.list("horizons")?) {
        config.horizons = h;
    }
    if let Some(m) = args.max_jac.or(overrides.u32("max-jac")?) {
        config.max_jac = m;
    }
    if let Some(ratio) = args.split_ratio.or(overrides.list("split-ratio")?) {
        anyhow::ensure!(ratio.len() == 3, "--split-ratio needs exactly 3 components");
        config.split_ratio = (ratio[0], ratio[1], ratio[2]);
    }
    if let Some(n) = args.vocab_titles.or(overrides.usize("vocab-titles")?) {
        config.n_titles = n;
    }
    if let Some(n) = args.vocab_companies.or(overrides.usize("vocab-companies")?) {
        config.n_companies = n;
    }
    if let Some(n) = args.vocab_skills.or(overrides.usize("vocab-skills")?) {
        config.n_skills = n;
    }
    let skill_dim = args.skill_dim.or(overrides.usize("skill-dim")?).unwrap_or(16);

    let dataset = generate_corpus(&config)?;
    std::fs::create_dir_all(&out)
        .with_context(|| format!("creating output directory {}", out.display()))?;
    datamodel::write_jobs(out.join("jobs.jsonl"), dataset.jobs())?;
    datamodel::write_observations(out.join("observations.jsonl"), dataset.observations())?;
    datamodel::write_splits(out.join("splits.csv"), dataset.splits())?;
    write_skill_table(out.join("skills.tsv"), &config, skill_dim)?;

    Ok(json!({
        "command": "generate",
        "out": out,
        "jobs": dataset.jobs().len(),
        "observations": dataset.size(),
        "seed": seed,
        "signal_strength": config.signal_strength,
    }))
}
