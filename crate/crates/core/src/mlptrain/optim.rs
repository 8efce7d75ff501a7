//! Adam optimizer and training hyperparameters.

use serde::{Deserialize, Serialize};

use super::model::{Gradients, LayerGrad, MlpModel};
use crate::error::{Error, Result};

/// Training hyperparameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    /// Consecutive non-improving validation epochs tolerated before stopping.
    pub patience: usize,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            learning_rate: 1e-3,
            batch_size: 256,
            max_epochs: 50,
            patience: 5,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            seed: 13,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig {
                what: "learning_rate",
                message: "must be positive".into(),
            });
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidConfig {
                what: "batch_size",
                message: "must be >= 1".into(),
            });
        }
        if self.patience == 0 {
            return Err(Error::InvalidConfig {
                what: "patience",
                message: "must be >= 1".into(),
            });
        }
        for (what, b) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&b) {
                return Err(Error::InvalidConfig {
                    what: "adam beta",
                    message: format!("{what} must be in [0, 1), got {b}"),
                });
            }
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::InvalidConfig {
                what: "epsilon",
                message: "must be positive".into(),
            });
        }
        Ok(())
    }
}

/// First/second-moment accumulators plus the step counter; shapes mirror
/// the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct AdamState {
    pub m: Vec<LayerGrad>,
    pub v: Vec<LayerGrad>,
    pub step: u64,
}

impl AdamState {
    pub fn new(model: &MlpModel) -> AdamState {
        let zeros = Gradients::zeros_like(model);
        AdamState {
            m: zeros.layers.clone(),
            v: zeros.layers,
            step: 0,
        }
    }
}

/// One Adam update with bias correction:
/// `m <- b1 m + (1-b1) g`, `v <- b2 v + (1-b2) g^2`,
/// `w <- w - lr * m_hat / (sqrt(v_hat) + eps)`.
pub fn adam_step(
    model: &mut MlpModel,
    state: &mut AdamState,
    grads: &Gradients,
    config: &TrainConfig,
) -> Result<()> {
    if grads.layers.len() != model.layers.len() || state.m.len() != model.layers.len() {
        return Err(Error::LengthMismatch {
            left: grads.layers.len(),
            right: model.layers.len(),
        });
    }
    state.step += 1;
    let bias1 = 1.0 - config.beta1.powi(state.step as i32);
    let bias2 = 1.0 - config.beta2.powi(state.step as i32);
    for (layer_idx, layer) in model.layers.iter_mut().enumerate() {
        let grad = &grads.layers[layer_idx];
        if grad.weights.len() != layer.weights.len() || grad.bias.len() != layer.bias.len() {
            return Err(Error::DimensionMismatch {
                context: "gradient shape",
                expected: layer.weights.len(),
                got: grad.weights.len(),
            });
        }
        let m = &mut state.m[layer_idx];
        let v = &mut state.v[layer_idx];
        update_slice(
            &mut layer.weights,
            &grad.weights,
            &mut m.weights,
            &mut v.weights,
            config,
            bias1,
            bias2,
        );
        update_slice(
            &mut layer.bias,
            &grad.bias,
            &mut m.bias,
            &mut v.bias,
            config,
            bias1,
            bias2,
        );
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn update_slice(
    params: &mut [f64],
    grads: &[f64],
    m: &mut [f64],
    v: &mut [f64],
    config: &TrainConfig,
    bias1: f64,
    bias2: f64,
) {
    for i in 0..params.len() {
        let g = grads[i];
        m[i] = config.beta1 * m[i] + (1.0 - config.beta1) * g;
        v[i] = config.beta2 * v[i] + (1.0 - config.beta2) * g * g;
        let m_hat = m[i] / bias1;
        let v_hat = v[i] / bias2;
        params[i] -= config.learning_rate * m_hat / (v_hat.sqrt() + config.epsilon);
    }
}

#[cfg(test)]
mod tests {
    use super::super::model::Layer;
    use super::*;

    fn scalar_model(weight: f64) -> MlpModel {
        MlpModel::from_layers(
            1,
            vec![Layer {
                in_dim: 1,
                out_dim: 1,
                weights: vec![weight],
                bias: vec![0.0],
            }],
        )
        .unwrap()
    }

    fn scalar_grads(g_w: f64, g_b: f64) -> Gradients {
        Gradients {
            layers: vec![LayerGrad {
                weights: vec![g_w],
                bias: vec![g_b],
            }],
        }
    }

    #[test]
    fn first_step_matches_closed_form() {
        // after bias correction the first update is -lr * g / (|g| + eps)
        let config = TrainConfig::default();
        let mut model = scalar_model(1.0);
        let mut state = AdamState::new(&model);
        adam_step(&mut model, &mut state, &scalar_grads(0.5, 0.0), &config).unwrap();
        let expected = 1.0 - config.learning_rate * 0.5 / (0.5 + config.epsilon);
        assert!((model.layers[0].weights[0] - expected).abs() < 1e-12);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn zero_gradient_leaves_parameters_but_counts_step() {
        let config = TrainConfig::default();
        let mut model = scalar_model(2.5);
        let mut state = AdamState::new(&model);
        adam_step(&mut model, &mut state, &scalar_grads(0.0, 0.0), &config).unwrap();
        assert_eq!(model.layers[0].weights[0], 2.5);
        assert_eq!(model.layers[0].bias[0], 0.0);
        assert_eq!(state.step, 1);
    }

    #[test]
    fn first_step_is_odd_in_the_gradient() {
        let config = TrainConfig::default();
        for g in [0.01, 0.5, 3.0] {
            let mut up = scalar_model(0.0);
            let mut down = scalar_model(0.0);
            let mut up_state = AdamState::new(&up);
            let mut down_state = AdamState::new(&down);
            adam_step(&mut up, &mut up_state, &scalar_grads(g, 0.0), &config).unwrap();
            adam_step(&mut down, &mut down_state, &scalar_grads(-g, 0.0), &config).unwrap();
            let du = up.layers[0].weights[0];
            let dd = down.layers[0].weights[0];
            assert!((du + dd).abs() < 1e-15, "updates not symmetric: {du} vs {dd}");
        }
    }

    #[test]
    fn rejects_mismatched_shapes() {
        let config = TrainConfig::default();
        let mut model = scalar_model(0.0);
        let mut state = AdamState::new(&model);
        let bad = Gradients {
            layers: vec![LayerGrad {
                weights: vec![0.0, 0.0],
                bias: vec![0.0],
            }],
        };
        assert!(adam_step(&mut model, &mut state, &bad, &config).is_err());
    }

    #[test]
    fn config_validation() {
        let mut config = TrainConfig::default();
        assert!(config.validate().is_ok());
        config.patience = 0;
        assert!(config.validate().is_err());
        config = TrainConfig { learning_rate: 0.0, ..TrainConfig::default() };
        assert!(config.validate().is_err());
    }
}
