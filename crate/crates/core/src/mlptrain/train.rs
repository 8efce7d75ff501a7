//! Training loop: mini-batch Adam with patience-based early stopping and
//! best-epoch weight restoration, plus model file I/O.

use std::collections::BTreeMap;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::model::{batch_gradients, Layer, MlpModel};
use super::optim::{adam_step, AdamState, TrainConfig};
use crate::datamodel::{csv_error, Split};
use crate::error::{Error, Result};
use crate::evalreport::{mae, Prediction};
use crate::featfusion::{FeatureLayout, FeatureSet, FusionConfig};
use crate::hashing::mix_seed;

/// Per-epoch training record.
#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub val_mae: f64,
}

/// Outcome of one early-stopping observation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopDecision {
    /// Validation improved; caller should snapshot the weights.
    Improved,
    /// No improvement for this many consecutive epochs so far.
    Wait(usize),
    /// Patience exhausted; stop after this epoch.
    Stop,
}

/// Patience-based stopper. An epoch counts as an improvement when its
/// validation MAE drops at least `min_delta` below the best seen so far.
#[derive(Debug, Clone)]
pub struct EarlyStopping {
    patience: usize,
    min_delta: f64,
    best: f64,
    best_epoch: usize,
    wait: usize,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> EarlyStopping {
        EarlyStopping::with_min_delta(patience, 1e-6)
    }

    pub fn with_min_delta(patience: usize, min_delta: f64) -> EarlyStopping {
        EarlyStopping {
            patience,
            min_delta,
            best: f64::INFINITY,
            best_epoch: 0,
            wait: 0,
        }
    }

    pub fn observe(&mut self, epoch: usize, val_mae: f64) -> StopDecision {
        if val_mae <= self.best - self.min_delta {
            self.best = val_mae;
            self.best_epoch = epoch;
            self.wait = 0;
            StopDecision::Improved
        } else {
            self.wait += 1;
            if self.wait >= self.patience {
                StopDecision::Stop
            } else {
                StopDecision::Wait(self.wait)
            }
        }
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }

    pub fn best_value(&self) -> f64 {
        self.best
    }
}

/// Trained model plus its training trace.
#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub model: MlpModel,
    pub history: Vec<EpochStats>,
    pub best_epoch: usize,
    pub best_val_mae: f64,
    pub stopped_early: bool,
}

/// Trains on the rows whose jobs are tagged `train`, validating after each
/// epoch on the rows tagged `val`. Returns the weights of the best
/// validation epoch. Batch order reshuffles every epoch from the run seed;
/// fixed seed and data give identical weights.
pub fn train(
    features: &FeatureSet,
    splits: &BTreeMap<String, Split>,
    hidden_dims: &[usize],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    let mut train_idx = Vec::new();
    let mut val_idx = Vec::new();
    for (i, row) in features.rows.iter().enumerate() {
        match splits.get(&row.job_id) {
            Some(Split::Train) => train_idx.push(i),
            Some(Split::Val) => val_idx.push(i),
            _ => {}
        }
    }
    if train_idx.is_empty() {
        return Err(Error::EmptyInput("train split"));
    }
    if val_idx.is_empty() {
        return Err(Error::EmptyInput("val split"));
    }
    for row in &features.rows {
        if row.values.len() != features.dim {
            return Err(Error::DimensionMismatch {
                context: "feature row",
                expected: features.dim,
                got: row.values.len(),
            });
        }
    }

    let mut model = MlpModel::init(features.dim, hidden_dims, config.seed)?;
    let mut state = AdamState::new(&model);
    let mut stopper = EarlyStopping::new(config.patience);
    let mut history = Vec::new();
    let mut best_model = model.clone();
    let mut improved_once = false;
    let mut stopped_early = false;
    let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(config.seed, "batch-order", 0));

    let val_labels: Vec<f64> = val_idx.iter().map(|&i| features.rows[i].label).collect();

    for epoch in 1..=config.max_epochs {
        train_idx.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in train_idx.chunks(config.batch_size) {
            let inputs: Vec<&[f64]> = chunk
                .iter()
                .map(|&i| features.rows[i].values.as_slice())
                .collect();
            let targets: Vec<f64> = chunk.iter().map(|&i| features.rows[i].label).collect();
            let (batch_loss, grads) = batch_gradients(&model, &inputs, &targets)?;
            adam_step(&mut model, &mut state, &grads, config)?;
            loss_sum += batch_loss * chunk.len() as f64;
        }
        let train_loss = loss_sum / train_idx.len() as f64;

        let val_preds: Vec<f64> = val_idx
            .iter()
            .map(|&i| model.forward(&features.rows[i].values))
            .collect::<Result<_>>()?;
        let val_mae = mae(&val_preds, &val_labels)?;
        history.push(EpochStats {
            epoch,
            train_loss,
            val_mae,
        });

        match stopper.observe(epoch, val_mae) {
            StopDecision::Improved => {
                best_model = model.clone();
                improved_once = true;
            }
            StopDecision::Wait(_) => {}
            StopDecision::Stop => {
                stopped_early = true;
                break;
            }
        }
    }

    Ok(TrainOutcome {
        model: if improved_once { best_model } else { model },
        history,
        best_epoch: stopper.best_epoch(),
        best_val_mae: stopper.best_value(),
        stopped_early,
    })
}

/// Raw model outputs for every row (no clamping; evaluation clamps).
pub fn predict(model: &MlpModel, features: &FeatureSet) -> Result<Vec<Prediction>> {
    features
        .rows
        .iter()
        .map(|row| {
            Ok(Prediction {
                job_id: row.job_id.clone(),
                t: row.t,
                value: model.forward(&row.values)?,
            })
        })
        .collect()
}

pub const MODEL_FILE_VERSION: u32 = 1;

#[derive(Debug, Clone, Serialize, Deserialize)]
struct ModelFile {
    version: u32,
    input_dim: usize,
    hidden_dims: Vec<usize>,
    layers: Vec<Layer>,
    feature_layout: Option<FeatureLayout>,
    fusion: Option<FusionConfig>,
    day: Option<u32>,
}

/// A model loaded from disk together with its feature descriptor.
#[derive(Debug, Clone)]
pub struct LoadedModel {
    pub model: MlpModel,
    pub fusion: Option<FusionConfig>,
    pub layout: Option<FeatureLayout>,
    /// Set for models trained on a single day value.
    pub day: Option<u32>,
}

/// Writes the model as JSON: version, dimensions, per-layer weight/bias
/// arrays, the feature descriptor (fusion config including normalization
/// statistics), and the day for day-specific models.
pub fn save_model(
    path: impl AsRef<Path>,
    model: &MlpModel,
    fusion: Option<&FusionConfig>,
    day: Option<u32>,
) -> Result<()> {
    let path = path.as_ref();
    let file = ModelFile {
        version: MODEL_FILE_VERSION,
        input_dim: model.input_dim,
        hidden_dims: model.hidden_dims.clone(),
        layers: model.layers.clone(),
        feature_layout: fusion.map(FusionConfig::layout),
        fusion: fusion.cloned(),
        day,
    };
    let out = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = std::io::BufWriter::new(out);
    serde_json::to_writer(&mut w, &file).map_err(|e| Error::io(path, e.into()))?;
    use std::io::Write;
    w.write_all(b"\n").map_err(|e| Error::io(path, e))?;
    w.flush().map_err(|e| Error::io(path, e))
}

pub fn load_model(path: impl AsRef<Path>) -> Result<LoadedModel> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let parsed: ModelFile = serde_json::from_reader(std::io::BufReader::new(file))
        .map_err(|e| Error::malformed(path, 1, e.to_string()))?;
    if parsed.version != MODEL_FILE_VERSION {
        return Err(Error::Invalid(format!(
            "unsupported model file version {} (expected {})",
            parsed.version, MODEL_FILE_VERSION
        )));
    }
    let model = MlpModel::from_layers(parsed.input_dim, parsed.layers)?;
    if model.hidden_dims != parsed.hidden_dims {
        return Err(Error::Invalid(
            "model file hidden_dims disagree with layer shapes".into(),
        ));
    }
    Ok(LoadedModel {
        model,
        fusion: parsed.fusion,
        layout: parsed.feature_layout,
        day: parsed.day,
    })
}

/// Writes the per-epoch history as CSV `epoch,train_loss,val_mae`.
pub fn write_history_csv(path: impl AsRef<Path>, history: &[EpochStats]) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path).map_err(|e| csv_error(path, e))?;
    w.write_record(["epoch", "train_loss", "val_mae"])
        .map_err(|e| csv_error(path, e))?;
    for row in history {
        w.write_record([
            row.epoch.to_string(),
            row.train_loss.to_string(),
            row.val_mae.to_string(),
        ])
        .map_err(|e| csv_error(path, e))?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::featfusion::FeatureRow;
    use rand::Rng;

    #[test]
    fn early_stopping_patience_arithmetic() {
        // trace [5,4,4,4,4,4,4] with patience 5: stops after epoch 7,
        // best epoch is 2
        let mut stopper = EarlyStopping::new(5);
        let trace = [5.0, 4.0, 4.0, 4.0, 4.0, 4.0, 4.0];
        let mut stopped_at = None;
        for (i, &v) in trace.iter().enumerate() {
            if let StopDecision::Stop = stopper.observe(i + 1, v) {
                stopped_at = Some(i + 1);
                break;
            }
        }
        assert_eq!(stopped_at, Some(7));
        assert_eq!(stopper.best_epoch(), 2);
        assert_eq!(stopper.best_value(), 4.0);
    }

    #[test]
    fn early_stopping_resets_wait_on_improvement() {
        let mut stopper = EarlyStopping::new(5);
        let trace = [5.0, 6.0, 6.0, 4.0, 6.0, 6.0, 6.0, 6.0, 6.0];
        let mut stopped_at = None;
        for (i, &v) in trace.iter().enumerate() {
            if let StopDecision::Stop = stopper.observe(i + 1, v) {
                stopped_at = Some(i + 1);
                break;
            }
        }
        assert_eq!(stopped_at, Some(9));
        assert_eq!(stopper.best_epoch(), 4);
    }

    #[test]
    fn early_stopping_requires_min_delta() {
        let mut stopper = EarlyStopping::new(2);
        assert_eq!(stopper.observe(1, 1.0), StopDecision::Improved);
        // a drop smaller than min_delta is not an improvement
        assert_eq!(stopper.observe(2, 1.0 - 1e-9), StopDecision::Wait(1));
        assert_eq!(stopper.observe(3, 1.0 - 1e-3), StopDecision::Improved);
    }

    /// Random features with a constant label; split round-robin so both
    /// train and val are populated.
    fn constant_label_features(n: usize, dim: usize, label: f64, seed: u64) -> (FeatureSet, BTreeMap<String, Split>) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut splits = BTreeMap::new();
        for i in 0..n {
            let job_id = format!("job-{i:04}");
            splits.insert(
                job_id.clone(),
                if i % 5 == 4 { Split::Val } else { Split::Train },
            );
            rows.push(FeatureRow {
                job_id,
                t: 7,
                label,
                values: (0..dim).map(|_| rng.random_range(0.0..1.0)).collect(),
            });
        }
        (FeatureSet { dim, layout: None, rows }, splits)
    }

    #[test]
    fn max_epochs_zero_returns_initialized_model() {
        let (features, splits) = constant_label_features(20, 4, 3.0, 1);
        let config = TrainConfig {
            max_epochs: 0,
            ..TrainConfig::default()
        };
        let outcome = train(&features, &splits, &[4], &config).unwrap();
        assert!(outcome.history.is_empty());
        assert_eq!(outcome.best_epoch, 0);
        let initial = MlpModel::init(4, &[4], config.seed).unwrap();
        assert_eq!(outcome.model, initial);
    }

    #[test]
    fn converges_to_constant_label() {
        // the bias path alone can absorb a constant target
        let (features, splits) = constant_label_features(200, 8, 3.0, 2);
        let config = TrainConfig {
            batch_size: 4,
            max_epochs: 50,
            patience: 50,
            ..TrainConfig::default()
        };
        let outcome = train(&features, &splits, &[16, 8], &config).unwrap();
        let train_rows: Vec<&FeatureRow> = features
            .rows
            .iter()
            .filter(|r| splits[&r.job_id] == Split::Train)
            .collect();
        let preds: Vec<f64> = train_rows
            .iter()
            .map(|r| outcome.model.forward(&r.values).unwrap())
            .collect();
        let labels: Vec<f64> = train_rows.iter().map(|r| r.label).collect();
        let train_mae = mae(&preds, &labels).unwrap();
        assert!(train_mae < 0.1, "train MAE {train_mae} after 50 epochs");
    }

    #[test]
    fn training_is_deterministic() {
        let (features, splits) = constant_label_features(60, 6, 2.0, 3);
        let config = TrainConfig {
            batch_size: 8,
            max_epochs: 5,
            ..TrainConfig::default()
        };
        let a = train(&features, &splits, &[8], &config).unwrap();
        let b = train(&features, &splits, &[8], &config).unwrap();
        assert_eq!(a.model, b.model);
        assert_eq!(a.history, b.history);
    }

    #[test]
    fn returned_model_matches_best_recorded_epoch() {
        let (features, splits) = constant_label_features(100, 6, 4.0, 4);
        let config = TrainConfig {
            batch_size: 16,
            max_epochs: 12,
            patience: 3,
            ..TrainConfig::default()
        };
        let outcome = train(&features, &splits, &[8, 4], &config).unwrap();
        let best_from_history = outcome
            .history
            .iter()
            .map(|e| e.val_mae)
            .fold(f64::INFINITY, f64::min);
        assert_eq!(outcome.best_val_mae, best_from_history);
        // recompute val MAE of the returned weights: must equal the best epoch
        let val_rows: Vec<&FeatureRow> = features
            .rows
            .iter()
            .filter(|r| splits[&r.job_id] == Split::Val)
            .collect();
        let preds: Vec<f64> = val_rows
            .iter()
            .map(|r| outcome.model.forward(&r.values).unwrap())
            .collect();
        let labels: Vec<f64> = val_rows.iter().map(|r| r.label).collect();
        let recomputed = mae(&preds, &labels).unwrap();
        assert!((recomputed - outcome.best_val_mae).abs() < 1e-12);
    }

    #[test]
    fn empty_splits_are_errors() {
        let (features, mut splits) = constant_label_features(20, 4, 1.0, 5);
        for v in splits.values_mut() {
            *v = Split::Train;
        }
        assert!(matches!(
            train(&features, &splits, &[4], &TrainConfig::default()),
            Err(Error::EmptyInput("val split"))
        ));
    }

    #[test]
    fn model_file_roundtrip_preserves_outputs() {
        let model = MlpModel::init(5, &[6, 3], 9).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        save_model(f.path(), &model, None, Some(7)).unwrap();
        let loaded = load_model(f.path()).unwrap();
        assert_eq!(loaded.day, Some(7));
        assert_eq!(loaded.model, model);
        let x = [0.1, -0.4, 2.0, 0.0, 1.5];
        assert_eq!(
            model.forward(&x).unwrap(),
            loaded.model.forward(&x).unwrap()
        );
    }

    #[test]
    fn history_csv_format() {
        let history = vec![EpochStats {
            epoch: 1,
            train_loss: 1.5,
            val_mae: 2.25,
        }];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_history_csv(f.path(), &history).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        assert_eq!(text, "epoch,train_loss,val_mae\n1,1.5,2.25\n");
    }
}
