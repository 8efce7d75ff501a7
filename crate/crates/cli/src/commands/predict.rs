use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Args;
use serde_json::json;

use jobcast_core::evalreport::{write_predictions, Prediction};
use jobcast_core::mlptrain::load_model;

use crate::config::Overrides;

#[derive(Args)]
pub struct PredictArgs {
    #[arg(long, value_name = "FILE")]
    pub features: Option<PathBuf>,

    /// Embeddings TSV as the feature source instead of --features; needs
    /// --jobs and --obs.
    #[arg(long, value_name = "FILE", conflicts_with = "features")]
    pub embeddings: Option<PathBuf>,

    /// Jobs file, only with --embeddings.
    #[arg(long, value_name = "FILE", requires = "embeddings")]
    pub jobs: Option<PathBuf>,

    /// Observations file, only with --embeddings.
    #[arg(long, value_name = "FILE", requires = "embeddings")]
    pub obs: Option<PathBuf>,

    /// Model file(s); repeat the flag for day-specific models. A model
    /// carrying a day only scores rows with that day value.
    #[arg(long = "model", value_name = "FILE", required = true)]
    pub models: Vec<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

pub fn run(args: PredictArgs, _overrides: &Overrides) -> Result<serde_json::Value> {
    let out = args.out.unwrap_or_else(|| crate::default_file("predictions.csv"));
    let features = super::train::load_features(
        args.features,
        args.embeddings.as_deref(),
        args.jobs,
        args.obs,
    )?;

    let mut by_key: BTreeMap<(String, u32), f64> = BTreeMap::new();
    for model_path in &args.models {
        let loaded = load_model(model_path)?;
        if loaded.model.input_dim != features.dim {
            bail!(
                "{}: model expects dimension {}, features have {}",
                model_path.display(),
                loaded.model.input_dim,
                features.dim
            );
        }
        for row in &features.rows {
            if let Some(day) = loaded.day {
                if row.t != day {
                    continue;
                }
            }
            let value = loaded.model.forward(&row.values)?;
            if by_key.insert((row.job_id.clone(), row.t), value).is_some() {
                bail!(
                    "models overlap: (job_id {:?}, t {}) predicted twice",
                    row.job_id,
                    row.t
                );
            }
        }
    }

    let predictions: Vec<Prediction> = by_key
        .into_iter()
        .map(|((job_id, t), value)| Prediction { job_id, t, value })
        .collect();
    write_predictions(&out, &predictions)?;

    Ok(json!({
        "command": "predict",
        "models": args.models,
        "rows": features.rows.len(),
        "predictions": predictions.len(),
        "out": out,
    }))
}
