use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::{Args, ValueEnum};
use serde_json::json;

use jobcast_core::datamodel::load_splits;
use jobcast_core::featfusion::{load_feature_csv, FeatureSet, FusionConfig};
use jobcast_core::mlptrain::{
    save_model, train, write_history_csv, TrainConfig, DEFAULT_HIDDEN_DIMS,
};

use crate::config::Overrides;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TrainMode {
    /// One model per observed day value.
    Separate,
    /// One model over all rows (day carried as a feature).
    Joint,
}

#[derive(Args)]
pub struct TrainArgs {
    #[arg(long, value_name = "FILE")]
    pub features: Option<PathBuf>,

    /// Externally produced embeddings TSV (job_id, t, v1..vk) used as the
    /// feature source instead of --features; needs --jobs and --obs for
    /// the labels.
    #[arg(long, value_name = "FILE", conflicts_with = "features")]
    pub embeddings: Option<PathBuf>,

    /// Jobs file, only with --embeddings.
    #[arg(long, value_name = "FILE", requires = "embeddings")]
    pub jobs: Option<PathBuf>,

    /// Observations file, only with --embeddings.
    #[arg(long, value_name = "FILE", requires = "embeddings")]
    pub obs: Option<PathBuf>,

    #[arg(long, value_name = "FILE")]
    pub splits: Option<PathBuf>,

    /// Model output path. Separate mode inserts `.day<t>` before the
    /// extension, one file per day.
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,

    #[arg(long, value_enum, default_value_t = TrainMode::Joint)]
    pub mode: TrainMode,

    /// Fusion config produced by `featurize`; embedded into the model file
    /// so `predict` can check compatibility.
    #[arg(long, value_name = "FILE")]
    pub fusion_config: Option<PathBuf>,

    /// Optional per-epoch history CSV path (suffixed like the model in
    /// separate mode).
    #[arg(long, value_name = "FILE")]
    pub history: Option<PathBuf>,

    #[arg(long, value_delimiter = ',', value_name = "DIMS")]
    pub hidden: Option<Vec<usize>>,

    #[arg(long, value_name = "LR")]
    pub learning_rate: Option<f64>,

    #[arg(long, value_name = "N")]
    pub batch_size: Option<usize>,

    #[arg(long, value_name = "N")]
    pub max_epochs: Option<usize>,

    #[arg(long, value_name = "N")]
    pub patience: Option<usize>,

    #[arg(long, value_name = "SEED")]
    pub seed: Option<u64>,
}

fn with_day_suffix(path: &Path, day: u32) -> PathBuf {
    match path.extension().and_then(|e| e.to_str()) {
        Some(ext) => path.with_extension(format!("day{day}.{ext}")),
        None => path.with_extension(format!("day{day}")),
    }
}

/// Feature rows from either a fused-feature CSV or an embeddings TSV joined
/// with the observations.
pub(crate) fn load_features(
    features: Option<PathBuf>,
    embeddings: Option<&Path>,
    jobs: Option<PathBuf>,
    obs: Option<PathBuf>,
) -> Result<FeatureSet> {
    match embeddings {
        Some(embeddings_path) => {
            let jobs_path = jobs.unwrap_or_else(|| crate::default_file("jobs.jsonl"));
            let obs_path = obs.unwrap_or_else(|| crate::default_file("observations.jsonl"));
            let dataset = super::load_dataset(&jobs_path, &obs_path, None)?;
            let table = jobcast_core::lmserialize::import_embeddings(embeddings_path)?;
            Ok(table.feature_set(&dataset)?)
        }
        None => {
            let path = features.unwrap_or_else(|| crate::default_file("features.csv"));
            Ok(load_feature_csv(&path)?)
        }
    }
}

pub fn run(args: TrainArgs, overrides: &Overrides) -> Result<serde_json::Value> {
    let splits_path = args.splits.unwrap_or_else(|| crate::default_file("splits.csv"));
    let model_path = args.model.unwrap_or_else(|| crate::default_file("model.json"));

    let features = load_features(
        args.features,
        args.embeddings.as_deref(),
        args.jobs,
        args.obs,
    )?;
    let splits = load_splits(&splits_path)?;
    let fusion: Option<FusionConfig> = match &args.fusion_config {
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading {}", path.display()))?;
            Some(serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?)
        }
        None => None,
    };

    let hidden = args
        .hidden
        .or(overrides.list("hidden")?)
        .unwrap_or_else(|| DEFAULT_HIDDEN_DIMS.to_vec());
    let mut config = TrainConfig {
        seed: args.seed.or(overrides.u64("seed")?).unwrap_or(crate::DEFAULT_SEED),
        ..TrainConfig::default()
    };
    if let Some(lr) = args.learning_rate.or(overrides.f64("learning-rate")?) {
        config.learning_rate = lr;
    }
    if let Some(b) = args.batch_size.or(overrides.usize("batch-size")?) {
        config.batch_size = b;
    }
    if let Some(e) = args.max_epochs.or(overrides.usize("max-epochs")?) {
        config.max_epochs = e;
    }
    if let Some(p) = args.patience.or(overrides.usize("patience")?) {
        config.patience = p;
    }

    let mut trained = Vec::new();
    match args.mode {
        TrainMode::Joint => {
            let outcome = train(&features, &splits, &hidden, &config)?;
            save_model(&model_path, &outcome.model, fusion.as_ref(), None)?;
            if let Some(history_path) = &args.history {
                write_history_csv(history_path, &outcome.history)?;
            }
            trained.push(json!({
                "model": model_path,
                "day": serde_json::Value::Null,
                "epochs": outcome.history.len(),
                "best_epoch": outcome.best_epoch,
                "best_val_mae": outcome.best_val_mae,
                "stopped_early": outcome.stopped_early,
            }));
        }
        TrainMode::Separate => {
            let mut days: Vec<u32> = features.rows.iter().map(|r| r.t).collect();
            days.sort_unstable();
            days.dedup();
            anyhow::ensure!(!days.is_empty(), "feature file has no rows");
            for day in days {
                let rows: Vec<_> = features
                    .rows
                    .iter()
                    .filter(|r| r.t == day)
                    .cloned()
                    .collect();
                let day_features = FeatureSet {
                    dim: features.dim,
                    layout: features.layout.clone(),
                    rows,
                };
                let outcome = train(&day_features, &splits, &hidden, &config)
                    .with_context(|| format!("training day {day}"))?;
                let path = with_day_suffix(&model_path, day);
                save_model(&path, &outcome.model, fusion.as_ref(), Some(day))?;
                if let Some(history_path) = &args.history {
                    write_history_csv(with_day_suffix(history_path, day), &outcome.history)?;
                }
                trained.push(json!({
                    "model": path,
                    "day": day,
                    "epochs": outcome.history.len(),
                    "best_epoch": outcome.best_epoch,
                    "best_val_mae": outcome.best_val_mae,
                    "stopped_early": outcome.stopped_early,
                }));
            }
        }
    }

    Ok(json!({
        "command": "train",
        "mode": match args.mode {
            TrainMode::Joint => "joint",
            TrainMode::Separate => "separate",
        },
        "rows": features.rows.len(),
        "dim": features.dim,
        "hidden": hidden,
        "models": trained,
    }))
}
