use rand::Rng;
use serde::{Deserialize, Serialize};

use super::loss::{loss, loss_gradient, LossKind};
use super::{relu, softmax, FeatureStats, ReplicaClassMap, NUM_FEATURES};
use crate::error::{Error, Result};

/// A stack of dense layers. `weights[l]` is the row-major
/// `layer_sizes[l + 1] x layer_sizes[l]` matrix of layer `l`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionModel {
    pub layer_sizes: Vec<usize>,
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
    pub class_map: ReplicaClassMap,
    pub feature_stats: FeatureStats,
    pub loss_kind: LossKind,
}

/// Same shapes as the model's parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients {
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<Vec<f64>>,
}

impl Gradients {
    pub fn zeros_like(model: &PredictionModel) -> Self {
        Gradients {
            weights: model.weights.iter().map(|w| vec![0.0; w.len()]).collect(),
            biases: model.biases.iter().map(|b| vec![0.0; b.len()]).collect(),
        }
    }

    pub fn scale(&mut self, k: f64) {
        for v in self.weights.iter_mut().chain(self.biases.iter_mut()).flatten() {
            *v *= k;
        }
    }

    fn accumulate(&mut self, other: &Gradients) {
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        for (a, b) in self.biases.iter_mut().zip(&other.biases) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
    }
}

impl PredictionModel {
    /// Glorot-uniform weights in ±sqrt(6 / (fan_in + fan_out)), zero biases.
    pub fn init<R: Rng>(
        hidden: &[usize],
        class_map: ReplicaClassMap,
        feature_stats: FeatureStats,
        loss_kind: LossKind,
        rng: &mut R,
    ) -> Self {
        let mut layer_sizes = vec![NUM_FEATURES];
        layer_sizes.extend_from_slice(hidden);
        layer_sizes.push(class_map.len());
        let mut weights = Vec::new();
        let mut biases = Vec::new();
        for pair in layer_sizes.windows(2) {
            let (fan_in, fan_out) = (pair[0], pair[1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            weights.push((0..fan_in * fan_out).map(|_| rng.gen_range(-limit..=limit)).collect());
            biases.push(vec![0.0; fan_out]);
        }
        PredictionModel {
            layer_sizes,
            weights,
            biases,
            class_map,
            feature_stats,
            loss_kind,
        }
    }

    pub fn zeros(hidden: &[usize], class_map: ReplicaClassMap, feature_stats: FeatureStats, loss_kind: LossKind) -> Self {
        let mut layer_sizes = vec![NUM_FEATURES];
        layer_sizes.extend_from_slice(hidden);
        layer_sizes.push(class_map.len());
        let weights = layer_sizes.windows(2).map(|p| vec![0.0; p[0] * p[1]]).collect();
        let biases = layer_sizes.windows(2).map(|p| vec![0.0; p[1]]).collect();
        PredictionModel {
            layer_sizes,
            weights,
            biases,
            class_map,
            feature_stats,
            loss_kind,
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.weights.iter().map(Vec::len).sum::<usize>() + self.biases.iter().map(Vec::len).sum::<usize>()
    }

    pub fn check(&self) -> Result<()> {
        let sizes = &self.layer_sizes;
        if sizes.len() < 2 || sizes[0] != NUM_FEATURES {
            return Err(Error::DimensionMismatch(format!("layer sizes {sizes:?}")));
        }
        if *sizes.last().unwrap() != self.class_map.len() {
            return Err(Error::DimensionMismatch(format!(
                "output width {} != {} classes",
                sizes.last().unwrap(),
                self.class_map.len()
            )));
        }
        if self.weights.len() != sizes.len() - 1 || self.biases.len() != sizes.len() - 1 {
            return Err(Error::DimensionMismatch("layer count".into()));
        }
        for (l, pair) in sizes.windows(2).enumerate() {
            if self.weights[l].len() != pair[0] * pair[1] || self.biases[l].len() != pair[1] {
                return Err(Error::DimensionMismatch(format!("layer {l} parameter shape")));
            }
        }
        self.feature_stats.validate()
    }

    /// Activations of every layer for a standardized input; the last entry
    /// holds the output logits.
    fn activations(&self, x: &[f64]) -> Vec<Vec<f64>> {
        let last = self.weights.len() - 1;
        let mut acts = vec![x.to_vec()];
        for (l, (w, b)) in self.weights.iter().zip(&self.biases).enumerate() {
            let input = acts.last().unwrap();
            let n_in = input.len();
            let out: Vec<f64> = b
                .iter()
                .enumerate()
                .map(|(o, &bias)| {
                    let row = &w[o * n_in..(o + 1) * n_in];
                    let z = bias + row.iter().zip(input).map(|(a, b)| a * b).sum::<f64>();
                    if l == last {
                        z
                    } else {
                        relu(z)
                    }
                })
                .collect();
            acts.push(out);
        }
        acts
    }

    pub fn logits(&self, x: &[f64]) -> Vec<f64> {
        self.activations(x).pop().unwrap()
    }

    /// Loss and parameter gradients for one standardized sample.
    pub fn backward(&self, x: &[f64], label: usize) -> (f64, Gradients) {
        let acts = self.activations(x);
        let probs = softmax(acts.last().unwrap());
        let mut target = vec![0.0; probs.len()];
        target[label] = 1.0;
        let value = loss(self.loss_kind, &probs, &target);

        let mut grads = Gradients::zeros_like(self);
        let mut delta = loss_gradient(self.loss_kind, &probs, &target);
        for l in (0..self.weights.len()).rev() {
            let input = &acts[l];
            let n_in = input.len();
            for (o, &d) in delta.iter().enumerate() {
                grads.biases[l][o] = d;
                for (i, &a) in input.iter().enumerate() {
                    grads.weights[l][o * n_in + i] = d * a;
                }
            }
            if l == 0 {
                break;
            }
            // back through W then the ReLU of the layer below
            let w = &self.weights[l];
            delta = (0..n_in)
                .map(|i| {
                    if input[i] <= 0.0 {
                        0.0
                    } else {
                        delta.iter().enumerate().map(|(o, &d)| d * w[o * n_in + i]).sum()
                    }
                })
                .collect();
        }
        (value, grads)
    }

    /// Mean loss and mean gradient over a batch of standardized samples.
    pub fn batch_gradients(&self, batch: &[([f64; NUM_FEATURES], usize)]) -> (f64, Gradients) {
        let mut total = Gradients::zeros_like(self);
        let mut loss_sum = 0.0;
        for (x, label) in batch {
            let (l, g) = self.backward(x, *label);
            loss_sum += l;
            total.accumulate(&g);
        }
        let n = batch.len().max(1) as f64;
        total.scale(1.0 / n);
        (loss_sum / n, total)
    }
}
