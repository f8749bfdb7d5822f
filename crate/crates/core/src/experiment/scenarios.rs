use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::callgraph::approx_ged;
use crate::error::{Error, Result};
use crate::model::{Configuration, FunctionId, PipelineSpec};
use crate::predictor::{argmax, forward, train, ConfusionMatrix, EvalMetrics, Hyperparams, LossKind, PredictionModel, TrainingHistory, TrainingSample};
use crate::provision::{grid_search_oracle, performance_similarity, select_configuration, OracleRow, ProvisionContext};
use crate::registry::{AgnosticContext, AgnosticOutcome, KnownPipelineEntry, Registry};
use crate::sim::{generate_function_data, meets_slo, pct_quantile, simulate_with, SimOptions, WorkloadSpec};
use crate::suite::{edit_alphabet, perturb, spearman, variant_for_graph, Suite, SuiteWorkload};

/// Training samples of one suite function.
#[derive(Debug, Clone, PartialEq)]
pub struct FunctionData {
    pub workload: String,
    pub function: FunctionId,
    pub samples: Vec<TrainingSample>,
}

/// Simulator-labelled samples for every function of the suite.
pub fn suite_datasets(suite: &Suite) -> Result<Vec<FunctionData>> {
    let mut out = Vec::new();
    for w in &suite.workloads {
        for f in w.function_specs() {
            let data = generate_function_data(
                &w.pipeline,
                &w.functions,
                &f.id,
                &suite.cluster,
                &suite.catalog.container_grid,
                &suite.catalog.class_map,
                &suite.training_rates(f),
                &suite.datagen,
            )?;
            out.push(FunctionData {
                workload: w.name.clone(),
                function: f.id.clone(),
                samples: data.samples,
            });
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainedFunction {
    pub workload: String,
    pub function: FunctionId,
    pub model: PredictionModel,
    pub history: TrainingHistory,
}

/// One model per function, trained in parallel.
pub fn train_all(data: &[FunctionData], suite: &Suite, hyper: &Hyperparams) -> Result<Vec<TrainedFunction>> {
    data.par_iter()
        .map(|d| {
            let (model, history) = train(&d.samples, &suite.catalog.class_map, hyper)?;
            Ok(TrainedFunction {
                workload: d.workload.clone(),
                function: d.function.clone(),
                model,
                history,
            })
        })
        .collect()
}

pub fn model_map(trained: &[TrainedFunction]) -> BTreeMap<FunctionId, PredictionModel> {
    trained.iter().map(|t| (t.function.clone(), t.model.clone())).collect()
}

/// Held-out metrics over the union of every model's held-out samples. The
/// loss is the mean of the per-model final validation losses.
pub fn pooled_metrics(trained: &[TrainedFunction]) -> Result<EvalMetrics> {
    let classes = trained.first().map_or(0, |t| t.model.class_map.len());
    let mut matrix = ConfusionMatrix::new(classes);
    for t in trained {
        for s in &t.history.held_out {
            matrix.record(s.label, argmax(&forward(&t.model, &s.features)?));
        }
    }
    let (precision, recall, f1) = matrix.macro_scores();
    let losses: Vec<f64> = trained.iter().filter_map(|t| t.history.last()).map(|e| e.validation.loss).collect();
    Ok(EvalMetrics {
        accuracy: matrix.accuracy(),
        f1,
        precision,
        recall,
        loss: losses.iter().sum::<f64>() / losses.len().max(1) as f64,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LossRow {
    pub loss_kind: LossKind,
    pub metrics: EvalMetrics,
}

/// Trains the suite once per loss with the same seed and split.
pub fn loss_comparison(data: &[FunctionData], suite: &Suite, hyper: &Hyperparams) -> Result<Vec<LossRow>> {
    LossKind::ALL
        .iter()
        .map(|&loss| {
            let trained = train_all(data, suite, &Hyperparams { loss, ..hyper.clone() })?;
            Ok(LossRow {
                loss_kind: loss,
                metrics: pooled_metrics(&trained)?,
            })
        })
        .collect()
}

fn context<'a>(suite: &'a Suite, pipeline: &'a PipelineSpec, w: &'a SuiteWorkload) -> ProvisionContext<'a> {
    ProvisionContext {
        pipeline,
        functions: &w.functions,
        catalog: &suite.catalog,
        cluster: &suite.cluster,
        pricing: &suite.pricing,
    }
}

fn workload_at(suite: &Suite, rate: f64, seed: u64) -> WorkloadSpec {
    WorkloadSpec {
        rate,
        duration_s: suite.datagen.duration_s,
        arrival_kind: suite.datagen.arrival_kind,
        seed,
    }
}

/// End-to-end run of `configs`; packing failures count as a miss.
fn run_pipeline(
    suite: &Suite,
    pipeline: &PipelineSpec,
    w: &SuiteWorkload,
    configs: &BTreeMap<FunctionId, Configuration>,
    workload: &WorkloadSpec,
) -> Result<Option<crate::sim::SimulationResult>> {
    let opts = SimOptions {
        hop_latency_s: suite.datagen.hop_latency_s,
    };
    match simulate_with(pipeline, &w.functions, configs, &suite.cluster, workload, &opts) {
        Ok(r) => Ok(Some(r)),
        Err(Error::PackingFailed { .. } | Error::DoesNotFitCluster { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionCase {
    pub case: usize,
    pub workload: String,
    pub rate: f64,
    /// Empty when selection found nothing feasible.
    pub selected: Option<BTreeMap<FunctionId, Configuration>>,
    pub selected_cost: Option<f64>,
    pub oracle_cost: f64,
    pub cost_ratio: Option<f64>,
    pub pct_at_quantile: Option<f64>,
    pub slo_met: bool,
    pub saving_vs_naive: Option<f64>,
}

/// Seeded pipelines (suite workload and target rate) provisioned by the
/// predictor, checked end to end in simulation and priced against the
/// grid-search oracle.
pub fn selection_cases(
    suite: &Suite,
    models: &BTreeMap<FunctionId, PredictionModel>,
    cases: usize,
    seed: u64,
) -> Result<Vec<SelectionCase>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let plan: Vec<(usize, f64)> = (0..cases)
        .map(|i| {
            let w = &suite.workloads[i % suite.workloads.len()];
            let (lo, hi) = suite.selection_rate_range(w);
            (i % suite.workloads.len(), rng.gen_range(lo..hi))
        })
        .collect();
    plan.par_iter()
        .enumerate()
        .map(|(case, &(wi, rate))| {
            let w = &suite.workloads[wi];
            let pipeline = PipelineSpec {
                target_rate: rate,
                ..w.pipeline.clone()
            };
            let ctx = context(suite, &pipeline, w);
            let workload = workload_at(suite, rate, seed.wrapping_add(case as u64));
            let oracle = grid_search_oracle(ctx, &workload, suite.datagen.quantile)?;
            let mut row = SelectionCase {
                case,
                workload: w.name.clone(),
                rate,
                selected: None,
                selected_cost: None,
                oracle_cost: oracle.monthly_cost,
                cost_ratio: None,
                pct_at_quantile: None,
                slo_met: false,
                saving_vs_naive: None,
            };
            let report = match select_configuration(ctx, models, rate) {
                Ok(r) => r,
                Err(Error::NoFeasibleConfiguration(_)) => return Ok(row),
                Err(e) => return Err(e),
            };
            let configs = report.configurations();
            if let Some(sim) = run_pipeline(suite, &pipeline, w, &configs, &workload)? {
                row.pct_at_quantile = Some(pct_quantile(&sim.pct_values, suite.datagen.quantile));
                row.slo_met = meets_slo(&sim, pipeline.deadline_s, suite.datagen.quantile);
            }
            row.selected = Some(configs);
            row.selected_cost = Some(report.monthly_cost);
            row.cost_ratio = Some(report.monthly_cost / oracle.monthly_cost);
            row.saving_vs_naive = Some(report.cost_saving_vs_naive);
            Ok(row)
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThroughputCostRow {
    pub workload: String,
    #[serde(flatten)]
    pub row: OracleRow,
    pub selected: bool,
    pub oracle_optimal: bool,
}

/// Per-configuration throughput and monthly cost for every suite function
/// at the middle of its workload's selection range, with the predictor's
/// and the oracle's choices marked.
pub fn throughput_cost(
    suite: &Suite,
    models: &BTreeMap<FunctionId, PredictionModel>,
    seed: u64,
) -> Result<(Vec<ThroughputCostRow>, Vec<(String, f64)>)> {
    let mut rows = Vec::new();
    let mut savings = Vec::new();
    for w in &suite.workloads {
        let (lo, hi) = suite.selection_rate_range(w);
        let rate = (lo + hi) / 2.0;
        let pipeline = PipelineSpec {
            target_rate: rate,
            ..w.pipeline.clone()
        };
        let ctx = context(suite, &pipeline, w);
        let oracle = grid_search_oracle(ctx, &workload_at(suite, rate, seed), suite.datagen.quantile)?;
        let report = select_configuration(ctx, models, rate)?;
        let chosen = report.configurations();
        for sel in &report.functions {
            savings.push((sel.function.0.clone(), crate::provision::cost_saving_vs_naive(&sel.configuration, &suite.catalog, &suite.pricing)));
        }
        for r in oracle.table {
            rows.push(ThroughputCostRow {
                workload: w.name.clone(),
                selected: chosen.get(&r.function) == Some(&r.configuration()),
                oracle_optimal: oracle.choices.get(&r.function) == Some(&r.configuration()),
                row: r,
            });
        }
    }
    Ok((rows, savings))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderRow {
    pub trial: usize,
    pub workload: String,
    pub edits: usize,
    pub ged: f64,
    pub matched: Option<String>,
    pub throughput: Option<f64>,
    pub baseline_throughput: Option<f64>,
    pub ps: Option<f64>,
}

pub const LADDER_LEVELS: [usize; 5] = [0, 1, 2, 4, 8];

/// Registry of the suite's workloads, each provisioned by the predictor at
/// the middle of its rate range, with the throughput measured there.
pub fn suite_registry(suite: &Suite, models: &BTreeMap<FunctionId, PredictionModel>, seed: u64) -> Result<Registry> {
    let mut registry = Registry::in_memory();
    for w in &suite.workloads {
        let rate = ladder_rate(suite, w);
        let pipeline = PipelineSpec {
            target_rate: rate,
            ..w.pipeline.clone()
        };
        let report = select_configuration(context(suite, &pipeline, w), models, rate)?;
        let sim = run_pipeline(suite, &pipeline, w, &report.configurations(), &workload_at(suite, rate, seed))?
            .ok_or_else(|| Error::PackingFailed { replicas: 0 })?;
        registry.register(KnownPipelineEntry {
            pipeline,
            functions: w.functions.clone(),
            callgraph: w.callgraph.clone(),
            models: w
                .pipeline
                .functions
                .iter()
                .map(|id| Ok((id.clone(), models.get(id).cloned().ok_or_else(|| Error::Missing { what: "model", id: id.0.clone() })?)))
                .collect::<Result<_>>()?,
            observed_throughput: sim.throughput,
        })?;
    }
    Ok(registry)
}

fn ladder_rate(suite: &Suite, w: &SuiteWorkload) -> f64 {
    let (lo, hi) = suite.selection_rate_range(w);
    (lo + hi) / 2.0
}

/// Perturbs each suite call graph by 0, 1, 2, 4 and 8 random edits,
/// provisions the perturbed pipeline from its most similar registered
/// pipeline, and compares throughputs.
///
/// The perturbed pipeline keeps its source's stages; service times scale
/// with the call graph's size. Configurations transfer stage by stage.
pub fn agnostic_ladder(
    suite: &Suite,
    registry: &Registry,
    trials: usize,
    threshold: f64,
    seed: u64,
) -> Result<Vec<LadderRow>> {
    let alphabet = edit_alphabet();
    let cells: Vec<(usize, usize)> = (0..trials).flat_map(|t| LADDER_LEVELS.map(|k| (t, k))).collect();
    let ctx = AgnosticContext {
        catalog: &suite.catalog,
        cluster: &suite.cluster,
        pricing: &suite.pricing,
    };
    cells
        .par_iter()
        .map(|&(trial, edits)| {
            let w = &suite.workloads[trial % suite.workloads.len()];
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((trial as u64) << 8) ^ edits as u64);
            let (g, _) = perturb(&w.callgraph, edits, &alphabet, &mut rng);
            let ged = approx_ged(&w.callgraph, &g).distance;
            let (pipeline, functions) = variant_for_graph(w, &g, &format!("t{trial}-k{edits}"));
            let rate = ladder_rate(suite, w);
            let mut row = LadderRow {
                trial,
                workload: w.name.clone(),
                edits,
                ged,
                matched: None,
                throughput: None,
                baseline_throughput: None,
                ps: None,
            };
            let outcome = match registry.provision_agnostic(&g, rate, pipeline.deadline_s, threshold, ctx) {
                Ok(o) => o,
                Err(Error::NoFeasibleConfiguration(_)) => return Ok(row),
                Err(e) => return Err(e),
            };
            let AgnosticOutcome::Provisioned { decision, report } = outcome else {
                return Ok(row);
            };
            let matched = decision.matched.expect("provisioned outcome has a match");
            let entry = registry.get(&matched).expect("matched entry");
            let borrowed: Vec<Configuration> = report.functions.iter().map(|s| s.configuration).collect();
            let configs: BTreeMap<FunctionId, Configuration> = pipeline
                .functions
                .iter()
                .enumerate()
                .map(|(i, id)| (id.clone(), borrowed[i.min(borrowed.len() - 1)]))
                .collect();
            let variant = SuiteWorkload {
                functions,
                pipeline: pipeline.clone(),
                ..w.clone()
            };
            row.matched = Some(matched.0.clone());
            row.baseline_throughput = Some(entry.observed_throughput);
            if let Some(sim) = run_pipeline(suite, &pipeline, &variant, &configs, &workload_at(suite, rate, seed))? {
                row.throughput = Some(sim.throughput);
                row.ps = Some(performance_similarity(sim.throughput, entry.observed_throughput)?);
            }
            Ok(row)
        })
        .collect()
}

/// Spearman correlation of GED against ps over rows that produced a ps.
pub fn ladder_correlation(rows: &[LadderRow]) -> Option<f64> {
    let (g, p): (Vec<f64>, Vec<f64>) = rows.iter().filter_map(|r| r.ps.map(|ps| (r.ged, ps))).unzip();
    spearman(&g, &p)
}
