//! The operations behind each command-line subcommand. Each one reads its
//! inputs from files, writes its outputs to files, and returns a value the
//! binary prints.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::callgraph::{approx_ged, exact_ged, CallGraph, GedResult, DEFAULT_EXACT_LIMIT};
use crate::error::{Error, Result};
use crate::experiment::{run_experiment, suite_datasets, ExperimentOutcome, ExperimentSpec};
use crate::formats::{read_json, PipelineDescriptor};
use crate::model::{ClusterSpec, PricingScheme};
use crate::predictor::{read_dataset, train, write_dataset, EvalMetrics, Hyperparams, PredictionModel};
use crate::provision::{
    grid_search_oracle, select_configuration, ConfigurationCatalog, OracleComparison, ProvisionContext,
    SelectionReport,
};
use crate::sim::{WorkloadSpec, DEFAULT_QUANTILE};
use crate::suite::{Suite, RATE_PER_GB_SECOND};

/// Where `cmd_train` puts the per-epoch metrics when no path is given:
/// next to the model, as `<stem>.metrics.csv`.
pub fn default_metrics_path(model: &Path) -> PathBuf {
    let stem = model.file_stem().and_then(|s| s.to_str()).unwrap_or("model");
    model.with_file_name(format!("{stem}.metrics.csv"))
}

#[derive(Debug, Clone)]
pub struct TrainArgs {
    pub dataset: PathBuf,
    pub out: PathBuf,
    pub metrics: Option<PathBuf>,
    pub hyperparams: Hyperparams,
    /// Supplies the class map; the desk catalog's when absent.
    pub catalog: Option<PathBuf>,
}

/// Trains one model. Returns the final held-out metrics.
pub fn cmd_train(args: &TrainArgs) -> Result<EvalMetrics> {
    let catalog = load_catalog(args.catalog.as_deref())?;
    let samples = read_dataset(&args.dataset, &catalog.class_map)?;
    let (model, history) = train(&samples, &catalog.class_map, &args.hyperparams)?;
    if let Some(dir) = args.out.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    model.save(&args.out)?;
    let metrics = args.metrics.clone().unwrap_or_else(|| default_metrics_path(&args.out));
    history.write_csv(metrics)?;
    Ok(history.last().expect("at least one epoch").validation)
}

#[derive(Debug, Clone)]
pub struct SelectArgs {
    pub pipeline: PathBuf,
    pub cluster: PathBuf,
    pub catalog: PathBuf,
    /// Holds one `<function id>.json` model per function.
    pub model_dir: PathBuf,
    pub pricing: Option<PathBuf>,
    /// Request rate; the descriptor's target rate when absent.
    pub rate: Option<f64>,
    pub out: Option<PathBuf>,
    /// Runs the grid-search oracle too and writes its table here.
    pub oracle_table: Option<PathBuf>,
    /// Simulation settings for the oracle; the rate is overridden.
    pub workload: Option<PathBuf>,
    pub quantile: f64,
}

impl SelectArgs {
    pub fn new(pipeline: PathBuf, cluster: PathBuf, catalog: PathBuf, model_dir: PathBuf) -> Self {
        SelectArgs {
            pipeline,
            cluster,
            catalog,
            model_dir,
            pricing: None,
            rate: None,
            out: None,
            oracle_table: None,
            workload: None,
            quantile: DEFAULT_QUANTILE,
        }
    }
}

pub fn cmd_select(args: &SelectArgs) -> Result<SelectionReport> {
    let descriptor = PipelineDescriptor::load(&args.pipeline)?;
    let pipeline = descriptor.spec();
    let functions = descriptor.function_set()?;
    let cluster: ClusterSpec = read_json(&args.cluster)?;
    cluster.validate()?;
    let catalog = load_catalog(Some(&args.catalog))?;
    let pricing = load_pricing(args.pricing.as_deref())?;
    let models = pipeline
        .functions
        .iter()
        .map(|id| Ok((id.clone(), PredictionModel::load(args.model_dir.join(format!("{id}.json")))?)))
        .collect::<Result<BTreeMap<_, _>>>()?;
    let ctx = ProvisionContext {
        pipeline: &pipeline,
        functions: &functions,
        catalog: &catalog,
        cluster: &cluster,
        pricing: &pricing,
    };
    let rate = args.rate.unwrap_or(pipeline.target_rate);
    let mut report = select_configuration(ctx, &models, rate)?;

    if let Some(table) = &args.oracle_table {
        let mut workload = match &args.workload {
            Some(p) => read_json::<WorkloadSpec>(p)?,
            None => WorkloadSpec::uniform(rate, Suite::desk().datagen.duration_s),
        };
        workload.rate = rate;
        let oracle = grid_search_oracle(ctx, &workload, args.quantile)?;
        oracle.write_table_csv(table)?;
        report.oracle = Some(OracleComparison {
            configurations: oracle.choices.clone(),
            monthly_cost: oracle.monthly_cost,
            cost_ratio: report.monthly_cost / oracle.monthly_cost,
            table_path: Some(table.display().to_string()),
        });
    }
    if let Some(out) = &args.out {
        report.save(out)?;
    }
    Ok(report)
}

/// Approximate distance by default; `exact` runs the bounded search.
pub fn cmd_ged(a: &Path, b: &Path, exact: bool) -> Result<GedResult> {
    let g1 = CallGraph::load(a)?;
    let g2 = CallGraph::load(b)?;
    if exact {
        exact_ged(&g1, &g2, DEFAULT_EXACT_LIMIT)
    } else {
        Ok(approx_ged(&g1, &g2))
    }
}

/// Overrides the command line can apply on top of an experiment file.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExperimentOverrides {
    pub seed: Option<u64>,
    pub threshold: Option<f64>,
    pub quantile: Option<f64>,
}

/// Runs a scenario and writes its bundle. The outcome is returned on
/// success; any failed acceptance check becomes `AcceptanceFailed` after
/// all artifacts are written.
pub fn cmd_experiment(spec_path: &Path, overrides: ExperimentOverrides) -> Result<ExperimentOutcome> {
    let mut spec = ExperimentSpec::load(spec_path)?;
    if let Some(seed) = overrides.seed {
        spec.seed = seed;
    }
    if let Some(t) = overrides.threshold {
        spec.threshold = t;
    }
    if let Some(q) = overrides.quantile {
        spec.quantile = q;
    }
    let outcome = run_experiment(&spec)?;
    if !outcome.passed() {
        let failed: Vec<String> = outcome.checks.iter().filter(|c| !c.passed).map(|c| c.line()).collect();
        return Err(Error::AcceptanceFailed(failed.join("; ")));
    }
    Ok(outcome)
}

/// Writes one training CSV per suite function into `out_dir` and returns
/// the paths.
pub fn cmd_datagen(out_dir: &Path, seed: u64) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut suite = Suite::desk();
    suite.datagen.seed = seed;
    let mut paths = Vec::new();
    for d in suite_datasets(&suite)? {
        let path = out_dir.join(format!("{}.csv", d.function));
        write_dataset(&path, &d.samples, &suite.catalog.class_map)?;
        paths.push(path);
    }
    Ok(paths)
}

fn load_catalog(path: Option<&Path>) -> Result<ConfigurationCatalog> {
    match path {
        Some(p) => read_json(p),
        None => Ok(Suite::desk().catalog),
    }
}

fn load_pricing(path: Option<&Path>) -> Result<PricingScheme> {
    match path {
        Some(p) => {
            let raw: PricingScheme = read_json(p)?;
            let mut pricing = PricingScheme::new(raw.rate_per_gb_second)?;
            pricing.seconds_per_month = raw.seconds_per_month;
            Ok(pricing)
        }
        None => PricingScheme::new(RATE_PER_GB_SECOND),
    }
}
