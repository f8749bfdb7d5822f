use std::collections::BTreeSet;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, EvalMetrics};
use super::{FeatureStats, Gradients, LossKind, PredictionModel, ReplicaClassMap, TrainingSample, NUM_FEATURES};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Optimizer {
    Sgd,
    Adam,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Hyperparams {
    pub hidden: Vec<usize>,
    pub learning_rate: f64,
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub loss: LossKind,
    pub optimizer: Optimizer,
    /// Share of each class held out for validation.
    pub validation_fraction: f64,
}

impl Default for Hyperparams {
    fn default() -> Self {
        Hyperparams {
            hidden: vec![64, 64],
            learning_rate: 0.01,
            epochs: 500,
            batch_size: 32,
            seed: 0,
            loss: LossKind::Cce,
            optimizer: Optimizer::Adam,
            validation_fraction: 0.2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpochMetrics {
    pub epoch: usize,
    pub train_loss: f64,
    /// Held-out metrics (training set when nothing could be held out).
    pub validation: EvalMetrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingHistory {
    pub epochs: Vec<EpochMetrics>,
    pub train_size: usize,
    pub validation_size: usize,
    /// The held-out samples behind `validation`.
    #[serde(skip)]
    pub held_out: Vec<TrainingSample>,
}

impl TrainingHistory {
    pub fn last(&self) -> Option<&EpochMetrics> {
        self.epochs.last()
    }

    /// `epoch,train_loss,loss,accuracy,f1,precision,recall`
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["epoch", "train_loss", "loss", "accuracy", "f1", "precision", "recall"])?;
        for e in &self.epochs {
            let v = &e.validation;
            w.write_record([
                e.epoch.to_string(),
                e.train_loss.to_string(),
                v.loss.to_string(),
                v.accuracy.to_string(),
                v.f1.to_string(),
                v.precision.to_string(),
                v.recall.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Stratified seeded split: every class with at least two samples puts
/// `ceil(fraction * n)` of them (at least one, never all) into validation.
fn split(samples: &[TrainingSample], fraction: f64, rng: &mut ChaCha8Rng) -> (Vec<TrainingSample>, Vec<TrainingSample>) {
    let labels: BTreeSet<usize> = samples.iter().map(|s| s.label).collect();
    let (mut train, mut held) = (Vec::new(), Vec::new());
    for label in labels {
        let mut group: Vec<TrainingSample> = samples.iter().filter(|s| s.label == label).copied().collect();
        group.shuffle(rng);
        let n = group.len();
        let k = if n < 2 || fraction <= 0.0 {
            0
        } else {
            ((fraction * n as f64).ceil() as usize).clamp(1, n - 1)
        };
        held.extend_from_slice(&group[..k]);
        train.extend_from_slice(&group[k..]);
    }
    train.shuffle(rng);
    (train, held)
}

struct Adam {
    m: Gradients,
    v: Gradients,
    step: i32,
}

const BETA1: f64 = 0.9;
const BETA2: f64 = 0.999;
const ADAM_EPS: f64 = 1e-8;

impl Adam {
    fn new(model: &PredictionModel) -> Self {
        Adam {
            m: Gradients::zeros_like(model),
            v: Gradients::zeros_like(model),
            step: 0,
        }
    }

    fn apply(&mut self, model: &mut PredictionModel, g: &Gradients, lr: f64) {
        self.step += 1;
        let c1 = 1.0 - BETA1.powi(self.step);
        let c2 = 1.0 - BETA2.powi(self.step);
        let update = |params: &mut [f64], grads: &[f64], m: &mut [f64], v: &mut [f64]| {
            for i in 0..params.len() {
                m[i] = BETA1 * m[i] + (1.0 - BETA1) * grads[i];
                v[i] = BETA2 * v[i] + (1.0 - BETA2) * grads[i] * grads[i];
                params[i] -= lr * (m[i] / c1) / ((v[i] / c2).sqrt() + ADAM_EPS);
            }
        };
        for l in 0..model.weights.len() {
            update(&mut model.weights[l], &g.weights[l], &mut self.m.weights[l], &mut self.v.weights[l]);
            update(&mut model.biases[l], &g.biases[l], &mut self.m.biases[l], &mut self.v.biases[l]);
        }
    }
}

fn sgd_step(model: &mut PredictionModel, g: &Gradients, lr: f64) {
    for (p, d) in model.weights.iter_mut().zip(&g.weights) {
        p.iter_mut().zip(d).for_each(|(w, d)| *w -= lr * d);
    }
    for (p, d) in model.biases.iter_mut().zip(&g.biases) {
        p.iter_mut().zip(d).for_each(|(w, d)| *w -= lr * d);
    }
}

/// Mini-batch gradient descent with backpropagation. Deterministic for a
/// given seed: the split, initialization and batch order all derive from it.
pub fn train(
    samples: &[TrainingSample],
    class_map: &ReplicaClassMap,
    hyper: &Hyperparams,
) -> Result<(PredictionModel, TrainingHistory)> {
    if samples.is_empty() {
        return Err(Error::DegenerateDataset("no samples".into()));
    }
    if let Some(bad) = samples.iter().find(|s| s.label >= class_map.len()) {
        return Err(Error::invalid("dataset", format!("label {} outside {} classes", bad.label, class_map.len())));
    }
    let distinct: BTreeSet<usize> = samples.iter().map(|s| s.label).collect();
    if distinct.len() < 2 {
        return Err(Error::DegenerateDataset("all samples share one label".into()));
    }
    if hyper.batch_size == 0 || !(hyper.learning_rate > 0.0) {
        return Err(Error::invalid("hyperparameters", "batch_size and learning_rate must be positive"));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(hyper.seed);
    let (train_set, held_out) = split(samples, hyper.validation_fraction, &mut rng);
    let stats = FeatureStats::fit(train_set.iter().map(|s| &s.features));
    let mut model = PredictionModel::init(&hyper.hidden, class_map.clone(), stats, hyper.loss, &mut rng);

    let mut data: Vec<([f64; NUM_FEATURES], usize)> =
        train_set.iter().map(|s| (stats.standardize(&s.features), s.label)).collect();
    let eval_set = if held_out.is_empty() { &train_set } else { &held_out };

    let mut adam = Adam::new(&model);
    let mut epochs = Vec::with_capacity(hyper.epochs);
    for epoch in 1..=hyper.epochs {
        data.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in data.chunks(hyper.batch_size) {
            let (loss, grads) = model.batch_gradients(batch);
            loss_sum += loss * batch.len() as f64;
            match hyper.optimizer {
                Optimizer::Adam => adam.apply(&mut model, &grads, hyper.learning_rate),
                Optimizer::Sgd => sgd_step(&mut model, &grads, hyper.learning_rate),
            }
        }
        epochs.push(EpochMetrics {
            epoch,
            train_loss: loss_sum / data.len() as f64,
            validation: evaluate(&model, eval_set)?,
        });
    }
    Ok((
        model,
        TrainingHistory {
            epochs,
            train_size: train_set.len(),
            validation_size: held_out.len(),
            held_out,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::predictor::FeatureVector;

    fn separable(n: usize) -> Vec<TrainingSample> {
        // label 1 iff rate > 2 * cpus
        let mut out = Vec::new();
        for i in 0..n {
            let cpus = 0.5 + (i % 7) as f64 * 0.5;
            let rate = (i * 37 % 101) as f64 / 10.0;
            if (rate - 2.0 * cpus).abs() < 0.3 {
                continue;
            }
            out.push(TrainingSample {
                features: FeatureVector { mem_mb: 1024.0, cpus, request_rate: rate },
                label: usize::from(rate > 2.0 * cpus),
            });
        }
        out
    }

    fn two() -> ReplicaClassMap {
        ReplicaClassMap::new(vec![5, 10]).unwrap()
    }

    #[test]
    fn degenerate_inputs() {
        let map = two();
        assert!(matches!(train(&[], &map, &Hyperparams::default()), Err(Error::DegenerateDataset(_))));
        let one: Vec<TrainingSample> = separable(50).into_iter().map(|mut s| {
            s.label = 0;
            s
        }).collect();
        assert!(matches!(train(&one, &map, &Hyperparams::default()), Err(Error::DegenerateDataset(_))));
    }

    #[test]
    fn separable_set_is_learned() {
        let data = separable(300);
        let hyper = Hyperparams {
            hidden: vec![16],
            epochs: 200,
            seed: 7,
            ..Hyperparams::default()
        };
        let (_, history) = train(&data, &two(), &hyper).unwrap();
        assert!(history.validation_size > 0);
        let last = history.last().unwrap();
        assert!(last.validation.accuracy >= 0.99, "{:?}", last);
    }

    #[test]
    fn small_learning_rate_reduces_loss() {
        let data = separable(200);
        let hyper = Hyperparams {
            hidden: vec![8, 8],
            epochs: 30,
            learning_rate: 1e-3,
            seed: 1,
            ..Hyperparams::default()
        };
        for optimizer in [Optimizer::Adam, Optimizer::Sgd] {
            let (_, h) = train(&data, &two(), &Hyperparams { optimizer, ..hyper.clone() }).unwrap();
            assert!(h.epochs.last().unwrap().train_loss <= h.epochs[0].train_loss);
        }
    }

    #[test]
    fn fixed_seed_is_bit_identical() {
        let data = separable(120);
        let hyper = Hyperparams {
            hidden: vec![8],
            epochs: 20,
            seed: 42,
            ..Hyperparams::default()
        };
        let (a, ha) = train(&data, &two(), &hyper).unwrap();
        let (b, hb) = train(&data, &two(), &hyper).unwrap();
        assert_eq!(a, b);
        assert_eq!(ha, hb);
        let (c, _) = train(&data, &two(), &Hyperparams { seed: 43, ..hyper }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn split_is_stratified() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let samples: Vec<TrainingSample> = (0..23)
            .map(|i| TrainingSample {
                features: FeatureVector { mem_mb: 1.0, cpus: 1.0, request_rate: i as f64 },
                label: if i < 3 { 2 } else if i < 4 { 1 } else { 0 },
            })
            .collect();
        let (train, held) = split(&samples, 0.2, &mut rng);
        assert_eq!(train.len() + held.len(), 23);
        // class 1 has one sample: kept for training; class 2 has three: one held out
        assert_eq!(held.iter().filter(|s| s.label == 1).count(), 0);
        assert_eq!(held.iter().filter(|s| s.label == 2).count(), 1);
        assert_eq!(held.iter().filter(|s| s.label == 0).count(), 4);
    }
}
