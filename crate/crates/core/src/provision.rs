//! Configuration selection: enumerate candidate configurations, pick the
//! cheapest predictor-backed one per function, and check it against an
//! exhaustive simulated grid search.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{
    exec_time, fits_cluster, monthly_cost, ClusterSpec, Configuration, ContainerConfig, FunctionId, FunctionSet, PipelineId,
    PipelineSpec, PricingScheme,
};
use crate::predictor::{argmax, forward, FeatureVector, PredictionModel, ReplicaClassMap};
use crate::sim::{evaluate_stage, simulate_with, stage_budget, DataGenOptions, SimOptions, SimulationResult, WorkloadSpec};

/// The candidate set: every container in the grid times every replica class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawCatalog")]
pub struct ConfigurationCatalog {
    pub container_grid: Vec<ContainerConfig>,
    pub class_map: ReplicaClassMap,
}

#[derive(Deserialize)]
struct RawCatalog {
    container_grid: Vec<ContainerConfig>,
    #[serde(default)]
    class_map: ReplicaClassMap,
}

impl TryFrom<RawCatalog> for ConfigurationCatalog {
    type Error = Error;

    fn try_from(raw: RawCatalog) -> Result<Self> {
        ConfigurationCatalog::new(raw.container_grid, raw.class_map)
    }
}

impl ConfigurationCatalog {
    pub fn new(container_grid: Vec<ContainerConfig>, class_map: ReplicaClassMap) -> Result<Self> {
        if container_grid.is_empty() {
            return Err(Error::invalid("catalog", "container grid is empty"));
        }
        for (i, a) in container_grid.iter().enumerate() {
            if container_grid[..i].contains(a) {
                return Err(Error::invalid("catalog", format!("duplicate container {a}")));
            }
        }
        Ok(ConfigurationCatalog { container_grid, class_map })
    }

    /// Largest container (by memory, then CPU) at the largest class.
    pub fn naive_max(&self) -> Configuration {
        let container = *self
            .container_grid
            .iter()
            .max_by(|a, b| a.mem_mb.total_cmp(&b.mem_mb).then(a.cpus.total_cmp(&b.cpus)))
            .expect("non-empty grid");
        Configuration {
            replicas: self.class_map.largest(),
            container,
        }
    }
}

/// Container-major, replicas-minor cross product.
pub fn enumerate(catalog: &ConfigurationCatalog) -> Vec<Configuration> {
    catalog
        .container_grid
        .iter()
        .flat_map(|&container| {
            catalog
                .class_map
                .classes()
                .iter()
                .map(move |&replicas| Configuration { replicas, container })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub configuration: Configuration,
    pub probabilities: Vec<f64>,
    /// Softmax mass on classes at or above the predicted one.
    pub slo_probability: f64,
    pub monthly_cost: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSelection {
    pub function: FunctionId,
    pub configuration: Configuration,
    pub probabilities: Vec<f64>,
    pub slo_probability: f64,
    pub monthly_cost: f64,
    pub candidates: Vec<Candidate>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleComparison {
    pub configurations: BTreeMap<FunctionId, Configuration>,
    pub monthly_cost: f64,
    /// Selected cost over oracle cost.
    pub cost_ratio: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub table_path: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub pipeline: PipelineId,
    pub rate: f64,
    pub functions: Vec<FunctionSelection>,
    pub monthly_cost: f64,
    pub cost_saving_vs_naive: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleComparison>,
}

impl SelectionReport {
    pub fn configurations(&self) -> BTreeMap<FunctionId, Configuration> {
        self.functions.iter().map(|s| (s.function.clone(), s.configuration)).collect()
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let text = serde_json::to_string_pretty(self).map_err(|e| Error::json(path, e))?;
        std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
    }
}

/// Context shared by selection and the oracle.
#[derive(Debug, Clone, Copy)]
pub struct ProvisionContext<'a> {
    pub pipeline: &'a PipelineSpec,
    pub functions: &'a FunctionSet,
    pub catalog: &'a ConfigurationCatalog,
    pub cluster: &'a ClusterSpec,
    pub pricing: &'a PricingScheme,
}

fn selection_order(a: &Candidate, b: &Candidate) -> std::cmp::Ordering {
    let (x, y) = (&a.configuration, &b.configuration);
    a.monthly_cost
        .total_cmp(&b.monthly_cost)
        .then(x.replicas.cmp(&y.replicas))
        .then(x.container.mem_mb.total_cmp(&y.container.mem_mb))
        .then(x.container.cpus.total_cmp(&y.container.cpus))
}

/// Picks one configuration per function at `rate`.
///
/// For each container the model predicts a replica class. A candidate is
/// feasible when it fits the cluster, the container clears the memory floor,
/// its replicas sustain `rate`, and one request fits in the stage's share of
/// the deadline. The cheapest feasible candidate wins.
pub fn select_configuration(
    ctx: ProvisionContext<'_>,
    models: &BTreeMap<FunctionId, PredictionModel>,
    rate: f64,
) -> Result<SelectionReport> {
    ctx.pipeline.validate()?;
    if !(rate.is_finite() && rate > 0.0) {
        return Err(Error::invalid("rate", "must be > 0"));
    }
    let mut selections = Vec::with_capacity(ctx.pipeline.functions.len());
    for id in &ctx.pipeline.functions {
        let f = ctx.functions.get(id)?;
        let model = models.get(id).ok_or_else(|| Error::Missing {
            what: "model",
            id: id.0.clone(),
        })?;
        if model.class_map != ctx.catalog.class_map {
            return Err(Error::invalid(
                "model",
                format!("{id}: class map {:?} differs from the catalog's", model.class_map.classes()),
            ));
        }
        let budget = stage_budget(ctx.pipeline, ctx.functions, id)?;
        let mut candidates = Vec::with_capacity(ctx.catalog.container_grid.len());
        for &container in &ctx.catalog.container_grid {
            let probabilities = forward(model, &FeatureVector::new(&container, rate))?;
            let class = argmax(&probabilities);
            let configuration = Configuration {
                replicas: model.class_map.replicas(class),
                container,
            };
            let feasible = fits_cluster(&configuration, ctx.cluster)
                && exec_time(f, &container)
                    .is_ok_and(|t| t <= budget && f64::from(configuration.replicas) / t >= rate);
            candidates.push(Candidate {
                configuration,
                slo_probability: probabilities[class..].iter().sum(),
                probabilities,
                monthly_cost: monthly_cost(&configuration, ctx.pricing),
                feasible,
            });
        }
        let best = candidates
            .iter()
            .filter(|c| c.feasible)
            .min_by(|a, b| selection_order(a, b))
            .cloned()
            .ok_or_else(|| Error::NoFeasibleConfiguration(format!("{id} at {rate} req/s")))?;
        selections.push(FunctionSelection {
            function: id.clone(),
            configuration: best.configuration,
            probabilities: best.probabilities,
            slo_probability: best.slo_probability,
            monthly_cost: best.monthly_cost,
            candidates,
        });
    }
    let chosen: Vec<Configuration> = selections.iter().map(|s| s.configuration).collect();
    Ok(SelectionReport {
        pipeline: ctx.pipeline.id.clone(),
        rate,
        monthly_cost: selections.iter().map(|s| s.monthly_cost).sum(),
        cost_saving_vs_naive: pipeline_cost_saving(&chosen, ctx.catalog, ctx.pricing),
        functions: selections,
        oracle: None,
    })
}

/// One cell of the oracle's table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleRow {
    pub function: FunctionId,
    pub mem_mb: f64,
    pub cpus: f64,
    pub replicas: u32,
    pub throughput: f64,
    pub monthly_cost: f64,
    /// Empty when the configuration could not be simulated.
    pub pct_quantile: Option<f64>,
    pub slo_met: bool,
}

impl OracleRow {
    pub fn configuration(&self) -> Configuration {
        Configuration {
            replicas: self.replicas,
            container: ContainerConfig {
                mem_mb: self.mem_mb,
                cpus: self.cpus,
            },
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub choices: BTreeMap<FunctionId, Configuration>,
    pub monthly_cost: f64,
    pub table: Vec<OracleRow>,
}

impl OracleResult {
    /// `function,mem_mb,cpus,replicas,throughput,monthly_cost,pct_quantile,slo_met`
    pub fn write_table_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        for row in &self.table {
            w.serialize(row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))
    }
}

/// Cheapest configuration of `rows` that meets the SLO, using the same tie
/// order as selection.
pub fn cheapest_meeting_slo(rows: &[OracleRow]) -> Option<&OracleRow> {
    rows.iter().filter(|r| r.slo_met).min_by(|a, b| {
        a.monthly_cost
            .total_cmp(&b.monthly_cost)
            .then(a.replicas.cmp(&b.replicas))
            .then(a.mem_mb.total_cmp(&b.mem_mb))
            .then(a.cpus.total_cmp(&b.cpus))
    })
}

/// Simulates every catalog configuration for every function (each stage
/// against its deadline share, independently) and keeps the cheapest that
/// meets the SLO. Cells run in parallel.
pub fn grid_search_oracle(ctx: ProvisionContext<'_>, workload: &WorkloadSpec, quantile: f64) -> Result<OracleResult> {
    ctx.pipeline.validate()?;
    workload.validate()?;
    let opts = DataGenOptions {
        duration_s: workload.duration_s,
        arrival_kind: workload.arrival_kind,
        seed: workload.seed,
        quantile,
        hop_latency_s: 0.0,
    };
    let configs = enumerate(ctx.catalog);
    let mut choices = BTreeMap::new();
    let mut table = Vec::new();
    for id in &ctx.pipeline.functions {
        let f = ctx.functions.get(id)?;
        let budget = stage_budget(ctx.pipeline, ctx.functions, id)?;
        let rows = configs
            .par_iter()
            .map(|cfg| {
                let outcome = match evaluate_stage(f, cfg, workload.rate, budget, ctx.cluster, &opts) {
                    Err(Error::InsufficientMemory { .. }) => None,
                    other => other?,
                };
                Ok(OracleRow {
                    function: id.clone(),
                    mem_mb: cfg.container.mem_mb,
                    cpus: cfg.container.cpus,
                    replicas: cfg.replicas,
                    throughput: outcome.map_or(0.0, |o| o.throughput),
                    monthly_cost: monthly_cost(cfg, ctx.pricing),
                    pct_quantile: outcome.map(|o| o.pct_at_quantile),
                    slo_met: outcome.is_some_and(|o| o.slo_met),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let best = cheapest_meeting_slo(&rows)
            .ok_or_else(|| Error::NoFeasibleConfiguration(format!("{id}: no catalog configuration meets the SLO")))?;
        choices.insert(id.clone(), best.configuration());
        table.extend(rows);
    }
    let monthly_cost = choices.values().map(|c| monthly_cost(c, ctx.pricing)).sum();
    Ok(OracleResult {
        choices,
        monthly_cost,
        table,
    })
}

/// End-to-end run of a chosen set of configurations.
pub fn simulate_selection(
    ctx: ProvisionContext<'_>,
    configs: &BTreeMap<FunctionId, Configuration>,
    workload: &WorkloadSpec,
    options: &SimOptions,
) -> Result<SimulationResult> {
    simulate_with(ctx.pipeline, ctx.functions, configs, ctx.cluster, workload, options)
}

/// `|1 - (thr_agnostic - thr_similar) / thr_similar| * 100`.
pub fn performance_similarity(thr_agnostic: f64, thr_similar: f64) -> Result<f64> {
    if thr_similar == 0.0 {
        return Err(Error::ZeroBaseline);
    }
    Ok((1.0 - (thr_agnostic - thr_similar) / thr_similar).abs() * 100.0)
}

/// Percent saved against the largest container at the largest class.
pub fn cost_saving_vs_naive(selected: &Configuration, catalog: &ConfigurationCatalog, pricing: &PricingScheme) -> f64 {
    pipeline_cost_saving(std::slice::from_ref(selected), catalog, pricing)
}

/// Saving of a whole pipeline against running every function at naive max.
pub fn pipeline_cost_saving(selected: &[Configuration], catalog: &ConfigurationCatalog, pricing: &PricingScheme) -> f64 {
    let naive = monthly_cost(&catalog.naive_max(), pricing) * selected.len() as f64;
    let cost: f64 = selected.iter().map(|c| monthly_cost(c, pricing)).sum();
    (1.0 - cost / naive) * 100.0
}
