//! Discrete-event simulation of a pipeline under a set of configurations.
//!
//! Each stage is a multi-server FIFO queue with one server per replica.
//! Requests visit the stages in pipeline order. A replica is cold until it
//! serves its first request, which pays the function's init time on top of
//! its service time.

mod datagen;
mod engine;

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use datagen::{
    evaluate_stage, generate_function_data, generate_training_data, stage_budget, stage_meets_slo, DataGenOptions, FunctionDataset, StageOutcome,
};
pub use engine::{pack_replicas, simulate, simulate_with};

pub const DEFAULT_QUANTILE: f64 = 0.95;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ArrivalKind {
    /// Evenly spaced at 1/rate.
    Uniform,
    /// Poisson process conditioned on its count: sorted uniform arrival times.
    Poisson,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WorkloadSpec {
    pub rate: f64,
    pub duration_s: f64,
    pub arrival_kind: ArrivalKind,
    #[serde(default)]
    pub seed: u64,
}

impl WorkloadSpec {
    pub fn uniform(rate: f64, duration_s: f64) -> Self {
        WorkloadSpec {
            rate,
            duration_s,
            arrival_kind: ArrivalKind::Uniform,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rate.is_finite() && self.rate > 0.0 && self.duration_s.is_finite() && self.duration_s > 0.0) {
            return Err(Error::invalid("workload", "rate and duration must be > 0"));
        }
        Ok(())
    }

    /// floor(rate * duration), so offered load never exceeds the rate.
    pub fn request_count(&self) -> usize {
        (self.rate * self.duration_s + 1e-9).floor() as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimOptions {
    /// Gateway latency added between consecutive stages.
    pub hop_latency_s: f64,
}

impl Default for SimOptions {
    fn default() -> Self {
        SimOptions { hop_latency_s: 0.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageRecord {
    pub arrival: f64,
    pub queue_wait: f64,
    /// Cold-start time charged to this request (zero on a warm replica).
    pub init: f64,
    pub service: f64,
    pub replica: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestRecord {
    pub id: usize,
    pub arrival: f64,
    pub stages: Vec<StageRecord>,
    pub hop_total: f64,
    pub completion: f64,
}

impl RequestRecord {
    pub fn pct(&self) -> f64 {
        self.completion - self.arrival
    }

    pub fn init_share(&self) -> f64 {
        self.stages.iter().map(|s| s.init).sum()
    }

    pub fn total_service(&self) -> f64 {
        self.stages.iter().map(|s| s.service).sum()
    }

    pub fn total_queue_wait(&self) -> f64 {
        self.stages.iter().map(|s| s.queue_wait).sum()
    }

    /// Completion time rebuilt from its parts.
    pub fn decomposed_pct(&self) -> f64 {
        self.init_share() + self.total_service() + self.total_queue_wait() + self.hop_total
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationResult {
    pub records: Vec<RequestRecord>,
    /// PCT of every request, drained past the horizon, in request order.
    pub pct_values: Vec<f64>,
    pub duration_s: f64,
    pub deadline_s: f64,
    /// Requests completed by the horizon (`duration_s`).
    pub completed: usize,
    pub throughput: f64,
    pub slo_met_fraction: f64,
    pub containers_started: usize,
    pub init_time_total: f64,
}

impl SimulationResult {
    pub fn arrivals(&self) -> usize {
        self.records.len()
    }

    pub fn in_flight_at_horizon(&self) -> usize {
        self.records.iter().filter(|r| r.completion > self.duration_s).count()
    }

    /// Per-request trace CSV:
    /// `request,arrival,completion,pct,queue_wait,init,service,stage_waits`
    /// where `stage_waits` joins per-stage waits with `;`.
    pub fn write_trace_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["request", "arrival", "completion", "pct", "queue_wait", "init", "service", "stage_waits"])?;
        for r in &self.records {
            let waits: Vec<String> = r.stages.iter().map(|s| s.queue_wait.to_string()).collect();
            w.write_record([
                r.id.to_string(),
                r.arrival.to_string(),
                r.completion.to_string(),
                r.pct().to_string(),
                r.total_queue_wait().to_string(),
                r.init_share().to_string(),
                r.total_service().to_string(),
                waits.join(";"),
            ])?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }

    pub fn summary(&self, quantile: f64) -> SimulationSummary {
        SimulationSummary {
            arrivals: self.arrivals(),
            completed: self.completed,
            throughput: self.throughput,
            slo_met_fraction: self.slo_met_fraction,
            pct_quantile: quantile,
            pct_at_quantile: pct_quantile(&self.pct_values, quantile),
            pct_mean: if self.pct_values.is_empty() {
                0.0
            } else {
                self.pct_values.iter().sum::<f64>() / self.pct_values.len() as f64
            },
            containers_started: self.containers_started,
            init_time_total: self.init_time_total,
        }
    }
}

/// JSON summary of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationSummary {
    pub arrivals: usize,
    pub completed: usize,
    pub throughput: f64,
    pub slo_met_fraction: f64,
    pub pct_quantile: f64,
    pub pct_at_quantile: f64,
    pub pct_mean: f64,
    pub containers_started: usize,
    pub init_time_total: f64,
}

/// Nearest-rank quantile; 0 on an empty slice.
pub fn pct_quantile(values: &[f64], quantile: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let q = quantile.clamp(0.0, 1.0);
    let rank = ((q * sorted.len() as f64).ceil() as usize).clamp(1, sorted.len());
    sorted[rank - 1]
}

/// The chosen PCT quantile is within the deadline (inclusive).
pub fn meets_slo(result: &SimulationResult, deadline_s: f64, quantile: f64) -> bool {
    !result.pct_values.is_empty() && pct_quantile(&result.pct_values, quantile) <= deadline_s
}

/// Requests finished by the horizon and within the deadline, per second.
pub fn measured_throughput(result: &SimulationResult) -> f64 {
    if result.duration_s <= 0.0 {
        return 0.0;
    }
    let ok = result
        .records
        .iter()
        .filter(|r| r.completion <= result.duration_s && r.pct() <= result.deadline_s)
        .count();
    ok as f64 / result.duration_s
}
