//! From-scratch multilayer-perceptron regressor.
//!
//! ReLU hidden layers (256/128/64/32 by default) with a single identity
//! output unit, Glorot-initialized weights, mean L1 loss, Adam updates, and
//! patience-based early stopping that restores the best validation epoch.

mod model;
mod optim;
mod train;

pub use model::{
    batch_gradients, batch_l1_loss, glorot_init, l1_loss, Gradients, Layer, LayerGrad, MlpModel,
    DEFAULT_HIDDEN_DIMS,
};
pub use optim::{adam_step, AdamState, TrainConfig};
pub use train::{
    load_model, predict, save_model, train, write_history_csv, EarlyStopping, EpochStats,
    LoadedModel, StopDecision, TrainOutcome, MODEL_FILE_VERSION,
};
