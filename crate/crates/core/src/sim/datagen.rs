//! Simulator-labelled training data.
//!
//! A pipeline's deadline is split across its stages in proportion to their
//! reference execution times. A stage configuration meets its SLO when its
//! replicas can sustain the target rate and the chosen PCT quantile of a
//! single-stage simulation fits inside the stage's share of the deadline.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{meets_slo, pct_quantile, simulate_with, ArrivalKind, SimOptions, WorkloadSpec, DEFAULT_QUANTILE};
use crate::error::{Error, Result};
use crate::model::{exec_time, ClusterSpec, Configuration, ContainerConfig, FunctionId, FunctionSet, FunctionSpec, PipelineSpec};
use crate::predictor::{FeatureVector, ReplicaClassMap, TrainingSample};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DataGenOptions {
    pub duration_s: f64,
    pub arrival_kind: ArrivalKind,
    pub seed: u64,
    pub quantile: f64,
    pub hop_latency_s: f64,
}

impl Default for DataGenOptions {
    fn default() -> Self {
        DataGenOptions {
            duration_s: 30.0,
            arrival_kind: ArrivalKind::Uniform,
            seed: 0,
            quantile: DEFAULT_QUANTILE,
            hop_latency_s: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionDataset {
    pub function: FunctionId,
    pub samples: Vec<TrainingSample>,
}

/// The share of the pipeline deadline given to `function`.
pub fn stage_budget(pipeline: &PipelineSpec, functions: &FunctionSet, function: &FunctionId) -> Result<f64> {
    let mut total = 0.0;
    for id in &pipeline.functions {
        total += functions.get(id)?.base_exec_time;
    }
    if !pipeline.functions.contains(function) {
        return Err(Error::Missing {
            what: "pipeline function",
            id: function.0.clone(),
        });
    }
    Ok(pipeline.deadline_s * functions.get(function)?.base_exec_time / total)
}

/// One stage simulated on its own against its deadline share.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageOutcome {
    /// replicas / exec_time covers the offered rate.
    pub sustains_rate: bool,
    pub throughput: f64,
    pub pct_at_quantile: f64,
    pub slo_met: bool,
}

/// Simulates one stage under `cfg`. `None` when the configuration does not
/// fit or cannot be packed into the cluster; a container below the
/// function's memory floor is an error.
pub fn evaluate_stage(
    f: &FunctionSpec,
    cfg: &Configuration,
    rate: f64,
    budget: f64,
    cluster: &ClusterSpec,
    opts: &DataGenOptions,
) -> Result<Option<StageOutcome>> {
    let service = exec_time(f, &cfg.container)?;
    let pipeline = PipelineSpec {
        id: format!("stage-{}", f.id).as_str().into(),
        functions: vec![f.id.clone()],
        deadline_s: budget,
        target_rate: rate,
    };
    let functions = FunctionSet::from_iter([f.clone()]);
    let configs = BTreeMap::from([(f.id.clone(), *cfg)]);
    let workload = WorkloadSpec {
        rate,
        duration_s: opts.duration_s,
        arrival_kind: opts.arrival_kind,
        seed: opts.seed,
    };
    let sim_opts = SimOptions {
        hop_latency_s: opts.hop_latency_s,
    };
    match simulate_with(&pipeline, &functions, &configs, cluster, &workload, &sim_opts) {
        Ok(result) => {
            let sustains_rate = sustains(cfg, service, rate);
            Ok(Some(StageOutcome {
                sustains_rate,
                throughput: result.throughput,
                pct_at_quantile: pct_quantile(&result.pct_values, opts.quantile),
                slo_met: sustains_rate && meets_slo(&result, budget, opts.quantile),
            }))
        }
        Err(Error::DoesNotFitCluster { .. } | Error::PackingFailed { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

fn sustains(cfg: &Configuration, service: f64, rate: f64) -> bool {
    f64::from(cfg.replicas) / service >= rate
}

/// Whether one stage under `cfg` sustains `rate` and meets `budget`.
/// Skips the simulation when capacity alone already rules it out.
pub fn stage_meets_slo(
    f: &FunctionSpec,
    cfg: &Configuration,
    rate: f64,
    budget: f64,
    cluster: &ClusterSpec,
    opts: &DataGenOptions,
) -> Result<bool> {
    if !sustains(cfg, exec_time(f, &cfg.container)?, rate) {
        return Ok(false);
    }
    Ok(evaluate_stage(f, cfg, rate, budget, cluster, opts)?.is_some_and(|o| o.slo_met))
}

/// Smallest class index whose replica count meets the stage SLO, or the
/// last class when none does.
fn label_for(
    f: &FunctionSpec,
    container: ContainerConfig,
    rate: f64,
    budget: f64,
    cluster: &ClusterSpec,
    class_map: &ReplicaClassMap,
    opts: &DataGenOptions,
) -> Result<usize> {
    for (idx, &replicas) in class_map.classes().iter().enumerate() {
        let cfg = Configuration::new(replicas, container)?;
        if stage_meets_slo(f, &cfg, rate, budget, cluster, opts)? {
            return Ok(idx);
        }
    }
    Ok(class_map.len() - 1)
}

/// One sample per (container, rate) per pipeline function, labelled by
/// simulation. Output order is pipeline order, then container-major,
/// rate-minor.
pub fn generate_training_data(
    pipeline: &PipelineSpec,
    functions: &FunctionSet,
    cluster: &ClusterSpec,
    grid: &[ContainerConfig],
    class_map: &ReplicaClassMap,
    rates: &[f64],
    opts: &DataGenOptions,
) -> Result<Vec<FunctionDataset>> {
    pipeline
        .functions
        .iter()
        .map(|id| generate_function_data(pipeline, functions, id, cluster, grid, class_map, rates, opts))
        .collect()
}

/// The samples of a single pipeline function. Cells run in parallel; the
/// result does not depend on scheduling.
#[allow(clippy::too_many_arguments)]
pub fn generate_function_data(
    pipeline: &PipelineSpec,
    functions: &FunctionSet,
    function: &FunctionId,
    cluster: &ClusterSpec,
    grid: &[ContainerConfig],
    class_map: &ReplicaClassMap,
    rates: &[f64],
    opts: &DataGenOptions,
) -> Result<FunctionDataset> {
    if grid.is_empty() {
        return Err(Error::invalid("configuration grid", "must not be empty"));
    }
    if let Some(bad) = rates.iter().find(|r| !(r.is_finite() && **r > 0.0)) {
        return Err(Error::invalid("rates", format!("{bad} is not a positive rate")));
    }
    pipeline.validate()?;
    let f = functions.get(function)?;
    let budget = stage_budget(pipeline, functions, function)?;
    let cells: Vec<(ContainerConfig, f64)> = grid.iter().flat_map(|&c| rates.iter().map(move |&r| (c, r))).collect();
    let samples = cells
        .par_iter()
        .map(|&(container, rate)| {
            let label = label_for(f, container, rate, budget, cluster, class_map, opts)?;
            Ok(TrainingSample {
                features: FeatureVector::new(&container, rate),
                label,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(FunctionDataset {
        function: function.clone(),
        samples,
    })
}
