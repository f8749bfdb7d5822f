use serde::{Deserialize, Serialize};

use super::{argmax, loss::loss, softmax, PredictionModel, TrainingSample};
use crate::error::{Error, Result};

/// `counts[truth][predicted]`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfusionMatrix {
    pub counts: Vec<Vec<u64>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalMetrics {
    pub accuracy: f64,
    pub f1: f64,
    pub precision: f64,
    pub recall: f64,
    pub loss: f64,
}

impl ConfusionMatrix {
    pub fn new(classes: usize) -> Self {
        ConfusionMatrix {
            counts: vec![vec![0; classes]; classes],
        }
    }

    pub fn from_pairs(classes: usize, pairs: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut m = ConfusionMatrix::new(classes);
        for (truth, pred) in pairs {
            m.record(truth, pred);
        }
        m
    }

    pub fn record(&mut self, truth: usize, predicted: usize) {
        self.counts[truth][predicted] += 1;
    }

    pub fn classes(&self) -> usize {
        self.counts.len()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().flatten().sum()
    }

    pub fn accuracy(&self) -> f64 {
        let total = self.total();
        if total == 0 {
            return 0.0;
        }
        let correct: u64 = (0..self.classes()).map(|c| self.counts[c][c]).sum();
        correct as f64 / total as f64
    }

    /// Per-class (precision, recall, f1); empty denominators yield 0.
    pub fn per_class(&self) -> Vec<(f64, f64, f64)> {
        let k = self.classes();
        (0..k)
            .map(|c| {
                let tp = self.counts[c][c] as f64;
                let predicted: u64 = (0..k).map(|t| self.counts[t][c]).sum();
                let actual: u64 = self.counts[c].iter().sum();
                let ratio = |num: f64, den: u64| if den == 0 { 0.0 } else { num / den as f64 };
                let (p, r) = (ratio(tp, predicted), ratio(tp, actual));
                let f1 = if p + r > 0.0 { 2.0 * p * r / (p + r) } else { 0.0 };
                (p, r, f1)
            })
            .collect()
    }

    /// Macro averages over every class, including classes with no samples.
    pub fn macro_scores(&self) -> (f64, f64, f64) {
        let per = self.per_class();
        let k = per.len().max(1) as f64;
        let (p, r, f) = per
            .iter()
            .fold((0.0, 0.0, 0.0), |acc, &(p, r, f)| (acc.0 + p, acc.1 + r, acc.2 + f));
        (p / k, r / k, f / k)
    }
}

pub fn evaluate(model: &PredictionModel, samples: &[TrainingSample]) -> Result<EvalMetrics> {
    if samples.is_empty() {
        return Err(Error::invalid("evaluation set", "no samples"));
    }
    model.check()?;
    let k = model.class_map.len();
    let mut cm = ConfusionMatrix::new(k);
    let mut loss_sum = 0.0;
    for s in samples {
        if s.label >= k {
            return Err(Error::invalid("sample", format!("label {} outside {k} classes", s.label)));
        }
        let p = softmax(&model.logits(&model.feature_stats.standardize(&s.features)));
        let mut target = vec![0.0; k];
        target[s.label] = 1.0;
        loss_sum += loss(model.loss_kind, &p, &target);
        cm.record(s.label, argmax(&p));
    }
    let (precision, recall, f1) = cm.macro_scores();
    Ok(EvalMetrics {
        accuracy: cm.accuracy(),
        f1,
        precision,
        recall,
        loss: loss_sum / samples.len() as f64,
    })
}
