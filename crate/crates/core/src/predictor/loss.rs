use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Probabilities are clipped to at least this before taking logarithms.
pub const PROB_EPSILON: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LossKind {
    /// Categorical cross-entropy.
    Cce,
    /// Kullback-Leibler divergence.
    Klde,
    /// Poisson.
    Psse,
}

impl LossKind {
    pub const ALL: [LossKind; 3] = [LossKind::Cce, LossKind::Klde, LossKind::Psse];

    pub fn as_str(self) -> &'static str {
        match self {
            LossKind::Cce => "cce",
            LossKind::Klde => "klde",
            LossKind::Psse => "psse",
        }
    }
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LossKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "cce" => Ok(LossKind::Cce),
            "klde" | "kld" => Ok(LossKind::Klde),
            "psse" | "poisson" => Ok(LossKind::Psse),
            other => Err(format!("unknown loss kind {other:?} (expected cce, klde or psse)")),
        }
    }
}

fn clip(p: f64) -> f64 {
    p.clamp(PROB_EPSILON, 1.0)
}

pub fn loss(kind: LossKind, predicted: &[f64], target: &[f64]) -> f64 {
    debug_assert_eq!(predicted.len(), target.len());
    let pairs = predicted.iter().zip(target).map(|(&p, &t)| (clip(p), t));
    match kind {
        LossKind::Cce => pairs.map(|(p, t)| -t * p.ln()).sum(),
        LossKind::Klde => pairs
            .map(|(p, t)| if t > 0.0 { t * (t / p).ln() } else { 0.0 })
            .sum(),
        LossKind::Psse => pairs.map(|(p, t)| p - t * p.ln()).sum(),
    }
}

/// Gradient of the loss with respect to the softmax logits, given the
/// softmax output `predicted`.
pub fn loss_gradient(kind: LossKind, predicted: &[f64], target: &[f64]) -> Vec<f64> {
    // dL/dp, with the clip making the log terms flat below epsilon
    let active = |p: f64| (PROB_EPSILON..=1.0).contains(&p);
    let dp: Vec<f64> = predicted
        .iter()
        .zip(target)
        .map(|(&p, &t)| {
            let log_term = if active(p) { -t / p } else { 0.0 };
            match kind {
                LossKind::Cce | LossKind::Klde => log_term,
                LossKind::Psse => log_term + if active(p) { 1.0 } else { 0.0 },
            }
        })
        .collect();
    // softmax Jacobian: dq_j = p_j (dp_j - sum_i dp_i p_i)
    let dot: f64 = dp.iter().zip(predicted).map(|(g, p)| g * p).sum();
    predicted.iter().zip(&dp).map(|(p, g)| p * (g - dot)).collect()
}
