//! Feed-forward replica-count classifier.
//!
//! Inputs are (memory, CPUs, request rate), standardized with statistics
//! stored in the model. Hidden layers use ReLU; the output layer is a softmax
//! over replica-count classes.

mod dataset;
mod loss;
mod metrics;
mod network;
mod train;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::ContainerConfig;

pub use dataset::{read_dataset, write_dataset};
pub use loss::{loss, loss_gradient, LossKind, PROB_EPSILON};
pub use metrics::{evaluate, ConfusionMatrix, EvalMetrics};
pub use network::{Gradients, PredictionModel};
pub use train::{train, EpochMetrics, Hyperparams, Optimizer, TrainingHistory};

pub const NUM_FEATURES: usize = 3;

/// Ordered replica counts that the classifier chooses between.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<u32>", into = "Vec<u32>")]
pub struct ReplicaClassMap(Vec<u32>);

impl TryFrom<Vec<u32>> for ReplicaClassMap {
    type Error = Error;

    fn try_from(classes: Vec<u32>) -> Result<Self> {
        ReplicaClassMap::new(classes)
    }
}

impl From<ReplicaClassMap> for Vec<u32> {
    fn from(m: ReplicaClassMap) -> Self {
        m.0
    }
}

impl Default for ReplicaClassMap {
    fn default() -> Self {
        ReplicaClassMap(vec![5, 10, 15, 20, 25, 30])
    }
}

impl ReplicaClassMap {
    pub fn new(classes: Vec<u32>) -> Result<Self> {
        if classes.is_empty() {
            return Err(Error::invalid("class map", "no classes"));
        }
        if classes[0] == 0 || classes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::invalid("class map", "classes must be positive and strictly increasing"));
        }
        Ok(ReplicaClassMap(classes))
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn replicas(&self, index: usize) -> u32 {
        self.0[index]
    }

    pub fn index_of(&self, replicas: u32) -> Option<usize> {
        self.0.iter().position(|&r| r == replicas)
    }

    pub fn classes(&self) -> &[u32] {
        &self.0
    }

    pub fn largest(&self) -> u32 {
        *self.0.last().expect("non-empty")
    }
}

/// Raw (unstandardized) model inputs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector {
    pub mem_mb: f64,
    pub cpus: f64,
    pub request_rate: f64,
}

impl FeatureVector {
    pub fn new(container: &ContainerConfig, request_rate: f64) -> Self {
        FeatureVector {
            mem_mb: container.mem_mb,
            cpus: container.cpus,
            request_rate,
        }
    }

    pub fn as_array(&self) -> [f64; NUM_FEATURES] {
        [self.mem_mb, self.cpus, self.request_rate]
    }

    pub fn is_finite(&self) -> bool {
        self.as_array().iter().all(|v| v.is_finite())
    }
}

/// Per-feature mean and standard deviation from the training split.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureStats {
    pub mean: [f64; NUM_FEATURES],
    pub std: [f64; NUM_FEATURES],
}

impl FeatureStats {
    pub fn identity() -> Self {
        FeatureStats {
            mean: [0.0; NUM_FEATURES],
            std: [1.0; NUM_FEATURES],
        }
    }

    /// A feature with zero spread gets unit scale so it stays finite.
    pub fn fit<'a>(features: impl IntoIterator<Item = &'a FeatureVector>) -> Self {
        let rows: Vec<[f64; NUM_FEATURES]> = features.into_iter().map(FeatureVector::as_array).collect();
        let n = rows.len().max(1) as f64;
        let mut mean = [0.0; NUM_FEATURES];
        for r in &rows {
            for k in 0..NUM_FEATURES {
                mean[k] += r[k] / n;
            }
        }
        let mut std = [0.0; NUM_FEATURES];
        for r in &rows {
            for k in 0..NUM_FEATURES {
                std[k] += (r[k] - mean[k]).powi(2) / n;
            }
        }
        for s in &mut std {
            *s = s.sqrt();
            if !(*s > 1e-12) {
                *s = 1.0;
            }
        }
        FeatureStats { mean, std }
    }

    pub fn standardize(&self, x: &FeatureVector) -> [f64; NUM_FEATURES] {
        let raw = x.as_array();
        std::array::from_fn(|k| (raw[k] - self.mean[k]) / self.std[k])
    }

    pub fn validate(&self) -> Result<()> {
        if self.std.iter().any(|s| !(s.is_finite() && *s > 0.0)) || self.mean.iter().any(|m| !m.is_finite()) {
            return Err(Error::invalid("feature stats", "std must be positive and finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrainingSample {
    pub features: FeatureVector,
    /// Index into the class map.
    pub label: usize,
}

pub fn relu(h: f64) -> f64 {
    h.max(0.0)
}

/// Max-shifted softmax.
pub fn softmax(q: &[f64]) -> Vec<f64> {
    let max = q.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = q.iter().map(|&v| (v - max).exp()).collect();
    let total: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / total).collect()
}

/// Class probabilities for a raw feature vector.
pub fn forward(model: &PredictionModel, x: &FeatureVector) -> Result<Vec<f64>> {
    model.check()?;
    Ok(softmax(&model.logits(&model.feature_stats.standardize(x))))
}

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Replica count of the most probable class, preferring fewer replicas on ties.
pub fn predict_replicas(model: &PredictionModel, w: &ContainerConfig, rate: f64) -> Result<u32> {
    let p = forward(model, &FeatureVector::new(w, rate))?;
    Ok(model.class_map.replicas(argmax(&p)))
}

impl PredictionModel {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let model: PredictionModel = serde_json::from_str(&text).map_err(|e| Error::json(path, e))?;
        model.check()?;
        Ok(model)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relu_values() {
        assert_eq!(relu(-3.2), 0.0);
        assert_eq!(relu(0.0), 0.0);
        assert_eq!(relu(7.5), 7.5);
    }

    #[test]
    fn softmax_examples() {
        let p = softmax(&[0.0, 0.0, 0.0]);
        for v in &p {
            assert!((v - 1.0 / 3.0).abs() < 1e-15);
        }

        let p = softmax(&[-0.62, 8.12, 2.53]);
        assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert_eq!(argmax(&p), 1);
        assert!(p[1] > 0.99);

        // 1/(1+e^-1000) is 1 to double precision, e^-1000 underflows to 0
        let p = softmax(&[1000.0, 0.0]);
        assert_eq!(p, vec![1.0, 0.0]);
    }

    #[test]
    fn class_map_rules() {
        assert!(ReplicaClassMap::new(vec![]).is_err());
        assert!(ReplicaClassMap::new(vec![5, 5]).is_err());
        assert!(ReplicaClassMap::new(vec![0, 5]).is_err());
        let m = ReplicaClassMap::default();
        assert_eq!(m.replicas(2), 15);
        assert_eq!(m.index_of(30), Some(5));
        assert!(serde_json::from_str::<ReplicaClassMap>("[3,2]").is_err());
    }

    #[test]
    fn stats_handle_constant_features() {
        let xs = [
            FeatureVector { mem_mb: 512.0, cpus: 1.0, request_rate: 1.0 },
            FeatureVector { mem_mb: 512.0, cpus: 2.0, request_rate: 3.0 },
        ];
        let s = FeatureStats::fit(&xs);
        assert_eq!(s.std[0], 1.0);
        assert_eq!(s.mean[2], 2.0);
        assert_eq!(s.std[2], 1.0);
        s.validate().unwrap();
    }
}
