//! Network structure, initialization, forward pass, and backpropagation.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hashing::mix_seed;

/// Hidden layer widths used throughout unless overridden.
pub const DEFAULT_HIDDEN_DIMS: [usize; 4] = [256, 128, 64, 32];

/// One dense layer; weights are row-major `(out_dim, in_dim)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Layer {
    pub in_dim: usize,
    pub out_dim: usize,
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Layer {
    fn apply(&self, input: &[f64], output: &mut Vec<f64>) {
        output.clear();
        for row in 0..self.out_dim {
            let w = &self.weights[row * self.in_dim..(row + 1) * self.in_dim];
            let mut acc = self.bias[row];
            for (wi, xi) in w.iter().zip(input) {
                acc += wi * xi;
            }
            output.push(acc);
        }
    }
}

/// Feed-forward regressor: ReLU on hidden layers, identity on the single
/// output unit.
#[derive(Debug, Clone, PartialEq)]
pub struct MlpModel {
    pub input_dim: usize,
    pub hidden_dims: Vec<usize>,
    pub layers: Vec<Layer>,
}

/// Glorot-uniform weight matrix: entries i.i.d. on `[-L, L]` with
/// `L = sqrt(6 / (fan_in + fan_out))`, row-major `(fan_out, fan_in)`.
pub fn glorot_init(fan_in: usize, fan_out: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    glorot_matrix(fan_in, fan_out, &mut rng)
}

fn glorot_matrix(fan_in: usize, fan_out: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
    (0..fan_in * fan_out)
        .map(|_| rng.random_range(-limit..limit))
        .collect()
}

impl MlpModel {
    /// Builds a model with Glorot-initialized weights and zero biases.
    pub fn init(input_dim: usize, hidden_dims: &[usize], seed: u64) -> Result<MlpModel> {
        if input_dim == 0 {
            return Err(Error::InvalidConfig {
                what: "input_dim",
                message: "must be >= 1".into(),
            });
        }
        if hidden_dims.contains(&0) {
            return Err(Error::InvalidConfig {
                what: "hidden_dims",
                message: "all layer widths must be >= 1".into(),
            });
        }
        let mut dims = vec![input_dim];
        dims.extend_from_slice(hidden_dims);
        dims.push(1);
        let layers = dims
            .windows(2)
            .enumerate()
            .map(|(i, pair)| {
                let (fan_in, fan_out) = (pair[0], pair[1]);
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, "glorot", i as u64));
                Layer {
                    in_dim: fan_in,
                    out_dim: fan_out,
                    weights: glorot_matrix(fan_in, fan_out, &mut rng),
                    bias: vec![0.0; fan_out],
                }
            })
            .collect();
        Ok(MlpModel {
            input_dim,
            hidden_dims: hidden_dims.to_vec(),
            layers,
        })
    }

    /// Builds a model from explicit layers, checking that dimensions chain
    /// and the output is a single unit.
    pub fn from_layers(input_dim: usize, layers: Vec<Layer>) -> Result<MlpModel> {
        let mut prev = input_dim;
        for layer in &layers {
            if layer.in_dim != prev {
                return Err(Error::DimensionMismatch {
                    context: "layer input",
                    expected: prev,
                    got: layer.in_dim,
                });
            }
            if layer.weights.len() != layer.in_dim * layer.out_dim
                || layer.bias.len() != layer.out_dim
            {
                return Err(Error::DimensionMismatch {
                    context: "layer parameters",
                    expected: layer.in_dim * layer.out_dim,
                    got: layer.weights.len(),
                });
            }
            prev = layer.out_dim;
        }
        if prev != 1 {
            return Err(Error::DimensionMismatch {
                context: "output layer",
                expected: 1,
                got: prev,
            });
        }
        let hidden_dims = layers[..layers.len() - 1].iter().map(|l| l.out_dim).collect();
        Ok(MlpModel {
            input_dim,
            hidden_dims,
            layers,
        })
    }

    /// Scalar prediction for one feature vector.
    pub fn forward(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.input_dim {
            return Err(Error::DimensionMismatch {
                context: "forward input",
                expected: self.input_dim,
                got: x.len(),
            });
        }
        let mut current = x.to_vec();
        let mut next = Vec::new();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            layer.apply(&current, &mut next);
            if i != last {
                for v in &mut next {
                    *v = v.max(0.0);
                }
            }
            std::mem::swap(&mut current, &mut next);
        }
        Ok(current[0])
    }

    /// Forward pass that records every post-activation vector (input
    /// excluded); used by backpropagation.
    fn forward_cached(&self, x: &[f64], activations: &mut Vec<Vec<f64>>) -> f64 {
        activations.clear();
        let last = self.layers.len() - 1;
        for (i, layer) in self.layers.iter().enumerate() {
            let mut out = Vec::with_capacity(layer.out_dim);
            let input: &[f64] = if i == 0 { x } else { &activations[i - 1] };
            layer.apply(input, &mut out);
            if i != last {
                for v in &mut out {
                    *v = v.max(0.0);
                }
            }
            activations.push(out);
        }
        activations[last][0]
    }
}

/// Absolute-error loss for one prediction.
pub fn l1_loss(prediction: f64, target: f64) -> f64 {
    (prediction - target).abs()
}

/// Mean absolute-error loss over a batch.
pub fn batch_l1_loss(predictions: &[f64], targets: &[f64]) -> Result<f64> {
    if predictions.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: predictions.len(),
            right: targets.len(),
        });
    }
    if predictions.is_empty() {
        return Err(Error::EmptyInput("batch"));
    }
    Ok(predictions
        .iter()
        .zip(targets)
        .map(|(&p, &t)| l1_loss(p, t))
        .sum::<f64>()
        / predictions.len() as f64)
}

/// Per-layer parameter gradients; shapes mirror the model.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub layers: Vec<LayerGrad>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LayerGrad {
    pub weights: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Gradients {
    pub fn zeros_like(model: &MlpModel) -> Gradients {
        Gradients {
            layers: model
                .layers
                .iter()
                .map(|l| LayerGrad {
                    weights: vec![0.0; l.weights.len()],
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }
}

fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}

/// Mean L1 loss over the batch and its gradient for every weight and bias.
/// `dL/dŷ_i = sign(ŷ_i - y_i) / batch_size`, with `sign(0) = 0`.
pub fn batch_gradients(
    model: &MlpModel,
    inputs: &[&[f64]],
    targets: &[f64],
) -> Result<(f64, Gradients)> {
    if inputs.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: inputs.len(),
            right: targets.len(),
        });
    }
    if inputs.is_empty() {
        return Err(Error::EmptyInput("batch"));
    }
    let mut grads = Gradients::zeros_like(model);
    let mut activations: Vec<Vec<f64>> = Vec::new();
    let mut loss = 0.0;
    let batch = inputs.len() as f64;
    let last = model.layers.len() - 1;
    // delta[l] = dL/d(pre-activation of layer l)
    let mut delta: Vec<f64> = Vec::new();
    let mut delta_prev: Vec<f64> = Vec::new();
    for (&x, &y) in inputs.iter().zip(targets) {
        if x.len() != model.input_dim {
            return Err(Error::DimensionMismatch {
                context: "forward input",
                expected: model.input_dim,
                got: x.len(),
            });
        }
        let prediction = model.forward_cached(x, &mut activations);
        loss += l1_loss(prediction, y) / batch;

        delta.clear();
        delta.push(sign(prediction - y) / batch);
        for l in (0..=last).rev() {
            let layer = &model.layers[l];
            let input: &[f64] = if l == 0 { x } else { &activations[l - 1] };
            let grad = &mut grads.layers[l];
            for (row, &d) in delta.iter().enumerate() {
                if d != 0.0 {
                    let w_row = &mut grad.weights[row * layer.in_dim..(row + 1) * layer.in_dim];
                    for (g, xi) in w_row.iter_mut().zip(input) {
                        *g += d * xi;
                    }
                    grad.bias[row] += d;
                }
            }
            if l > 0 {
                delta_prev.clear();
                delta_prev.resize(layer.in_dim, 0.0);
                for (row, &d) in delta.iter().enumerate() {
                    if d != 0.0 {
                        let w_row = &layer.weights[row * layer.in_dim..(row + 1) * layer.in_dim];
                        for (dp, wi) in delta_prev.iter_mut().zip(w_row) {
                            *dp += d * wi;
                        }
                    }
                }
                // ReLU subgradient: pass through only where the unit fired
                for (dp, &a) in delta_prev.iter_mut().zip(&activations[l - 1]) {
                    if a <= 0.0 {
                        *dp = 0.0;
                    }
                }
                std::mem::swap(&mut delta, &mut delta_prev);
            }
        }
    }
    Ok((loss, grads))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn single_linear(weight: f64, bias: f64) -> MlpModel {
        MlpModel::from_layers(
            1,
            vec![Layer {
                in_dim: 1,
                out_dim: 1,
                weights: vec![weight],
                bias: vec![bias],
            }],
        )
        .unwrap()
    }

    #[test]
    fn glorot_bound_is_closed_form() {
        // fan (2, 4): L = sqrt(6/6) = 1
        let w = glorot_init(2, 4, 7);
        assert_eq!(w.len(), 8);
        assert!(w.iter().all(|v| v.abs() <= 1.0));
        assert!(w.iter().any(|v| v.abs() > 0.5));
    }

    #[test]
    fn glorot_same_seed_is_identical() {
        assert_eq!(glorot_init(16, 8, 3), glorot_init(16, 8, 3));
        assert_ne!(glorot_init(16, 8, 3), glorot_init(16, 8, 4));
    }

    #[test]
    fn glorot_variance_matches_uniform_moment() {
        // uniform on [-L, L] has variance L^2 / 3
        let limit = (6.0f64 / 384.0).sqrt();
        let target = limit * limit / 3.0;
        let mut samples = Vec::new();
        for seed in 0..4 {
            samples.extend(glorot_init(256, 128, seed));
        }
        assert!(samples.len() >= 100_000);
        let mean = samples.iter().sum::<f64>() / samples.len() as f64;
        let var = samples.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / samples.len() as f64;
        assert!(
            (var - target).abs() / target < 0.05,
            "var {var} vs target {target}"
        );
    }

    #[test]
    fn forward_all_zero_parameters_gives_zero() {
        let model = MlpModel::from_layers(
            3,
            vec![
                Layer { in_dim: 3, out_dim: 2, weights: vec![0.0; 6], bias: vec![0.0; 2] },
                Layer { in_dim: 2, out_dim: 1, weights: vec![0.0; 2], bias: vec![0.0] },
            ],
        )
        .unwrap();
        assert_eq!(model.forward(&[1.0, -4.0, 2.5]).unwrap(), 0.0);
    }

    #[test]
    fn forward_single_linear_layer() {
        let model = single_linear(2.0, 0.0);
        assert_eq!(model.forward(&[3.0]).unwrap(), 6.0);
    }

    #[test]
    fn forward_relu_clamps_hidden_units() {
        // hidden pre-activations (-1, 2) -> ReLU (0, 2) -> sum with ones = 2
        let model = MlpModel::from_layers(
            1,
            vec![
                Layer { in_dim: 1, out_dim: 2, weights: vec![-1.0, 2.0], bias: vec![0.0, 0.0] },
                Layer { in_dim: 2, out_dim: 1, weights: vec![1.0, 1.0], bias: vec![0.0] },
            ],
        )
        .unwrap();
        assert_eq!(model.forward(&[1.0]).unwrap(), 2.0);
    }

    #[test]
    fn forward_rejects_wrong_dimension() {
        let model = single_linear(1.0, 0.0);
        assert!(matches!(
            model.forward(&[1.0, 2.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn l1_loss_cases() {
        assert_eq!(l1_loss(5.0, 5.0), 0.0);
        assert_eq!(l1_loss(0.5, 0.0), 0.5);
        assert_eq!(batch_l1_loss(&[1.0, 3.0], &[2.0, 5.0]).unwrap(), 1.5);
    }

    #[test]
    fn backward_linear_hand_chain_rule() {
        // y = w*x, w=2, x=3, target 5 -> pred 6, dL/dw = sign(1)*3 = 3
        let model = single_linear(2.0, 0.0);
        let (loss, grads) = batch_gradients(&model, &[&[3.0]], &[5.0]).unwrap();
        assert_eq!(loss, 1.0);
        assert_eq!(grads.layers[0].weights, vec![3.0]);
        assert_eq!(grads.layers[0].bias, vec![1.0]);
    }

    #[test]
    fn backward_exact_prediction_gives_zero_gradients() {
        let model = single_linear(2.0, 0.0);
        let (loss, grads) = batch_gradients(&model, &[&[3.0]], &[6.0]).unwrap();
        assert_eq!(loss, 0.0);
        assert!(grads.layers[0].weights.iter().all(|&g| g == 0.0));
        assert!(grads.layers[0].bias.iter().all(|&g| g == 0.0));
    }

    fn relative_error(a: f64, n: f64) -> f64 {
        (a - n).abs() / (a.abs() + n.abs()).max(1e-3)
    }

    /// Builds a random small model and batch whose residuals and hidden
    /// pre-activations stay away from the L1 and ReLU kinks, so central
    /// differences are trustworthy.
    fn kink_free_case(seed: u64) -> Option<(MlpModel, Vec<Vec<f64>>, Vec<f64>)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let dims = [
            4usize,
            rng.random_range(2..8),
            rng.random_range(2..8),
        ];
        let mut layers = Vec::new();
        let mut prev = dims[0];
        for &d in &dims[1..] {
            layers.push(Layer {
                in_dim: prev,
                out_dim: d,
                weights: (0..prev * d).map(|_| rng.random_range(-0.9..0.9)).collect(),
                bias: (0..d).map(|_| rng.random_range(-0.3..0.3)).collect(),
            });
            prev = d;
        }
        layers.push(Layer {
            in_dim: prev,
            out_dim: 1,
            weights: (0..prev).map(|_| rng.random_range(-0.9..0.9)).collect(),
            bias: vec![rng.random_range(-0.3..0.3)],
        });
        let model = MlpModel::from_layers(dims[0], layers).unwrap();
        let batch: Vec<Vec<f64>> = (0..4)
            .map(|_| (0..dims[0]).map(|_| rng.random_range(-1.0..1.0)).collect())
            .collect();
        let mut targets = Vec::new();
        for x in &batch {
            let pred = model.forward(x).unwrap();
            // push targets off the prediction so sign() is stable
            targets.push(pred + if rng.random::<bool>() { 0.5 } else { -0.5 });
        }
        // reject batches with hidden units too close to the ReLU kink
        let mut activations = Vec::new();
        for x in &batch {
            model.forward_cached(x, &mut activations);
            for layer in &activations[..activations.len() - 1] {
                if layer.iter().any(|&a| a.abs() < 1e-3) {
                    return None;
                }
            }
        }
        Some((model, batch, targets))
    }

    #[test]
    fn backward_matches_central_finite_differences() {
        let mut checked = 0;
        let mut seed = 0u64;
        while checked < 5 {
            let Some((model, batch, targets)) = kink_free_case(seed) else {
                seed += 1;
                continue;
            };
            seed += 1;
            checked += 1;
            let refs: Vec<&[f64]> = batch.iter().map(Vec::as_slice).collect();
            let (_, grads) = batch_gradients(&model, &refs, &targets).unwrap();
            let h = 1e-5;
            let mut max_err: f64 = 0.0;
            for l in 0..model.layers.len() {
                for w in 0..model.layers[l].weights.len() {
                    let mut plus = model.clone();
                    plus.layers[l].weights[w] += h;
                    let mut minus = model.clone();
                    minus.layers[l].weights[w] -= h;
                    let lp = batch_gradients(&plus, &refs, &targets).unwrap().0;
                    let lm = batch_gradients(&minus, &refs, &targets).unwrap().0;
                    let numeric = (lp - lm) / (2.0 * h);
                    max_err = max_err.max(relative_error(grads.layers[l].weights[w], numeric));
                }
                for b in 0..model.layers[l].bias.len() {
                    let mut plus = model.clone();
                    plus.layers[l].bias[b] += h;
                    let mut minus = model.clone();
                    minus.layers[l].bias[b] -= h;
                    let lp = batch_gradients(&plus, &refs, &targets).unwrap().0;
                    let lm = batch_gradients(&minus, &refs, &targets).unwrap().0;
                    let numeric = (lp - lm) / (2.0 * h);
                    max_err = max_err.max(relative_error(grads.layers[l].bias[b], numeric));
                }
            }
            assert!(max_err < 1e-4, "seed {seed}: max relative error {max_err}");
        }
    }

    #[test]
    fn zeroing_a_layer_makes_output_constant() {
        let mut model = MlpModel::init(6, &[8, 4], 2).unwrap();
        for w in &mut model.layers[1].weights {
            *w = 0.0;
        }
        let a = model.forward(&[1.0, -2.0, 0.5, 3.0, -1.0, 2.0]).unwrap();
        let b = model.forward(&[0.0; 6]).unwrap();
        assert_eq!(a, b);
        // equal to the biases propagated through the remaining layers
        let mut value: Vec<f64> = model.layers[1].bias.iter().map(|v| v.max(0.0)).collect();
        let mut next = Vec::new();
        for layer in &model.layers[2..] {
            layer.apply(&value, &mut next);
            if layer.out_dim != 1 {
                for v in &mut next {
                    *v = v.max(0.0);
                }
            }
            std::mem::swap(&mut value, &mut next);
        }
        assert!((a - value[0]).abs() < 1e-12);
    }
}
