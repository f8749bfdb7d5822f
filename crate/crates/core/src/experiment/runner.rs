//! Experiment descriptors and the artifact bundle each scenario writes.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::scenarios::*;
use crate::callgraph::CallGraph;
use crate::error::{Error, Result};
use crate::formats::{read_json, resolve, write_json, PipelineDescriptor};
use crate::model::{ClusterSpec, Configuration, PricingScheme};
use crate::predictor::{write_dataset, EvalMetrics, Hyperparams, LossKind};
use crate::provision::ConfigurationCatalog;
use crate::sim::{WorkloadSpec, DEFAULT_QUANTILE};
use crate::suite::{Suite, SuiteWorkload};

/// Savings the original evaluation reports against the naive configuration.
pub const REFERENCE_SAVING_RANGE: (f64, f64) = (64.86, 68.32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    TrainEval,
    LossComparison,
    ThroughputCost,
    AgnosticGed,
}

impl Scenario {
    pub fn as_str(self) -> &'static str {
        match self {
            Scenario::TrainEval => "train-eval",
            Scenario::LossComparison => "loss-comparison",
            Scenario::ThroughputCost => "throughput-cost",
            Scenario::AgnosticGed => "agnostic-ged",
        }
    }
}

fn default_cases() -> usize {
    50
}

fn default_trials() -> usize {
    30
}

fn default_threshold() -> f64 {
    crate::registry::DEFAULT_THRESHOLD
}

fn default_quantile() -> f64 {
    DEFAULT_QUANTILE
}

/// An experiment descriptor. Omitted inputs fall back to the built-in
/// desk-scale suite; relative paths resolve against the descriptor file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub scenario: Scenario,
    #[serde(default)]
    pub pipelines: Vec<PathBuf>,
    #[serde(default)]
    pub cluster: Option<PathBuf>,
    #[serde(default)]
    pub catalog: Option<PathBuf>,
    /// Duration, arrival process and seed of every simulation; the rate
    /// field is ignored because each scenario sets its own rates.
    #[serde(default)]
    pub workload: Option<PathBuf>,
    #[serde(default)]
    pub pricing: Option<PathBuf>,
    #[serde(default)]
    pub seed: u64,
    pub output_dir: PathBuf,
    /// Training settings; the seed always comes from `seed`.
    #[serde(default)]
    pub hyperparams: Hyperparams,
    #[serde(default)]
    pub rates_per_function: Option<usize>,
    #[serde(default = "default_cases")]
    pub selection_cases: usize,
    #[serde(default = "default_trials")]
    pub ladder_trials: usize,
    /// Registry threshold; ladder rows record whether they fall within it.
    #[serde(default = "default_threshold")]
    pub threshold: f64,
    #[serde(default = "default_quantile")]
    pub quantile: f64,
}

impl ExperimentSpec {
    pub fn new(scenario: Scenario, output_dir: impl Into<PathBuf>) -> Self {
        ExperimentSpec {
            scenario,
            pipelines: Vec::new(),
            cluster: None,
            catalog: None,
            workload: None,
            pricing: None,
            seed: 0,
            output_dir: output_dir.into(),
            hyperparams: Hyperparams::default(),
            rates_per_function: None,
            selection_cases: default_cases(),
            ladder_trials: default_trials(),
            threshold: default_threshold(),
            quantile: default_quantile(),
        }
    }

    /// Reads a descriptor and makes its paths absolute.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut spec: ExperimentSpec = read_json(path)?;
        let fix = |p: &mut PathBuf| *p = resolve(path, p);
        spec.pipelines.iter_mut().for_each(fix);
        spec.cluster.iter_mut().for_each(fix);
        spec.catalog.iter_mut().for_each(fix);
        spec.workload.iter_mut().for_each(fix);
        spec.pricing.iter_mut().for_each(fix);
        fix(&mut spec.output_dir);
        Ok(spec)
    }

    /// The suite this experiment runs on.
    pub fn suite(&self) -> Result<Suite> {
        let mut suite = Suite::desk();
        if !self.pipelines.is_empty() {
            suite.workloads = self.pipelines.iter().map(load_workload).collect::<Result<_>>()?;
        }
        if let Some(p) = &self.cluster {
            let cluster: ClusterSpec = read_json(p)?;
            cluster.validate()?;
            suite.cluster = cluster;
        }
        if let Some(p) = &self.catalog {
            suite.catalog = read_json::<ConfigurationCatalog>(p)?;
        }
        if let Some(p) = &self.pricing {
            let pricing: PricingScheme = read_json(p)?;
            suite.pricing = PricingScheme::new(pricing.rate_per_gb_second)?;
            suite.pricing.seconds_per_month = pricing.seconds_per_month;
        }
        if let Some(p) = &self.workload {
            let w: WorkloadSpec = read_json(p)?;
            w.validate()?;
            suite.datagen.duration_s = w.duration_s;
            suite.datagen.arrival_kind = w.arrival_kind;
        }
        if let Some(n) = self.rates_per_function {
            suite.rates_per_function = n;
        }
        if !(0.0..=1.0).contains(&self.quantile) {
            return Err(Error::invalid("experiment", "quantile must be within [0, 1]"));
        }
        suite.datagen.quantile = self.quantile;
        suite.datagen.seed = self.seed;
        Ok(suite)
    }
}

/// A pipeline descriptor as a suite workload. Without a call graph the
/// pipeline gets a chain of its function ids.
fn load_workload(path: &PathBuf) -> Result<SuiteWorkload> {
    let d = PipelineDescriptor::load(path)?;
    let callgraph = match &d.callgraph {
        Some(g) => CallGraph::load(g)?,
        None => {
            let labels: Vec<&str> = d.functions.iter().map(|f| f.id.0.as_str()).collect();
            let edges: Vec<(usize, usize)> = (1..labels.len()).map(|i| (i - 1, i)).collect();
            CallGraph::from_labels(&labels, &edges)?
        }
    };
    Ok(SuiteWorkload {
        name: d.id.0.clone(),
        pipeline: d.spec(),
        functions: d.function_set()?,
        callgraph,
    })
}

/// One line of the acceptance checklist.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub criterion: u8,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(criterion: u8, name: &str, passed: bool, detail: String) -> Self {
        Check {
            criterion,
            name: name.to_string(),
            passed,
            detail,
        }
    }

    pub fn line(&self) -> String {
        let mark = if self.passed { "PASS" } else { "FAIL" };
        format!("[{mark}] criterion {}: {} ({})", self.criterion, self.name, self.detail)
    }
}

/// Predictor quality thresholds on pooled held-out metrics.
pub fn check_predictor(m: &EvalMetrics) -> Vec<Check> {
    vec![
        Check::new(5, "held-out accuracy >= 0.90", m.accuracy >= 0.90, format!("accuracy {:.4}", m.accuracy)),
        Check::new(5, "held-out macro-F1 >= 0.85", m.f1 >= 0.85, format!("macro-F1 {:.4}", m.f1)),
    ]
}

/// CCE accuracy within two points of the best loss.
pub fn check_loss_ranking(rows: &[LossRow]) -> Check {
    let best = rows.iter().map(|r| r.metrics.accuracy).fold(f64::NEG_INFINITY, f64::max);
    let cce = rows
        .iter()
        .find(|r| r.loss_kind == LossKind::Cce)
        .map_or(f64::NEG_INFINITY, |r| r.metrics.accuracy);
    Check::new(
        5,
        "CCE accuracy within 2 points of the best loss",
        best - cce <= 0.02 + 1e-12,
        format!("cce {cce:.4}, best {best:.4}"),
    )
}

/// SLO hit rate, per-case cost against the oracle, and average saving.
pub fn check_selection(cases: &[SelectionCase]) -> Vec<Check> {
    let met = cases.iter().filter(|c| c.slo_met).count();
    let share = met as f64 / cases.len().max(1) as f64;
    let ratios: Vec<f64> = cases.iter().filter(|c| c.slo_met).filter_map(|c| c.cost_ratio).collect();
    let worst = ratios.iter().copied().fold(0.0, f64::max);
    let savings: Vec<f64> = cases.iter().filter_map(|c| c.saving_vs_naive).collect();
    let mean_saving = savings.iter().sum::<f64>() / savings.len().max(1) as f64;
    vec![
        Check::new(6, "selection meets the SLO on >= 90% of cases", share >= 0.90, format!("{met}/{} cases", cases.len())),
        Check::new(
            6,
            "cost <= 1.25 x oracle on every SLO-meeting case",
            !ratios.is_empty() && worst <= 1.25 + 1e-9,
            format!("worst ratio {worst:.4}"),
        ),
        Check::new(
            7,
            "average saving vs naive max >= 50%",
            mean_saving >= 50.0,
            format!(
                "{mean_saving:.2}% (reference range {:.2}-{:.2}%)",
                REFERENCE_SAVING_RANGE.0, REFERENCE_SAVING_RANGE.1
            ),
        ),
    ]
}

fn mean_ps(rows: &[LadderRow], keep: impl Fn(&LadderRow) -> bool) -> Option<f64> {
    let v: Vec<f64> = rows.iter().filter(|r| keep(r)).map(|r| r.ps.unwrap_or(0.0)).collect();
    (!v.is_empty()).then(|| v.iter().sum::<f64>() / v.len() as f64)
}

/// ps at GED 0 and GED <= 2 (mean over trials; a row without a ps counts
/// as 0) and the GED/ps rank correlation.
pub fn check_ladder(rows: &[LadderRow]) -> Vec<Check> {
    let at0 = mean_ps(rows, |r| r.ged == 0.0);
    let upto2 = mean_ps(rows, |r| r.ged <= 2.0);
    let rho = ladder_correlation(rows);
    let show = |v: Option<f64>| v.map_or("n/a".to_string(), |v| format!("{v:.2}%"));
    vec![
        Check::new(8, "ps at GED 0 >= 95%", at0.is_some_and(|v| v >= 95.0), format!("mean {}", show(at0))),
        Check::new(8, "ps at GED <= 2 >= 90%", upto2.is_some_and(|v| v >= 90.0), format!("mean {}", show(upto2))),
        Check::new(
            8,
            "Spearman(GED, ps) <= -0.8",
            rho.is_some_and(|r| r <= -0.8),
            format!(
                "rho {}; with |1 - |A - S| / S| similarity instead: {}",
                rho.map_or("n/a".into(), |r| format!("{r:.4}")),
                symmetric_correlation(rows).map_or("n/a".into(), |r| format!("{r:.4}"))
            ),
        ),
    ]
}

/// Rank correlation of GED against `(1 - |A - S| / S) * 100`, reported next
/// to the formula-exact ps for comparison.
pub fn symmetric_correlation(rows: &[LadderRow]) -> Option<f64> {
    let (g, p): (Vec<f64>, Vec<f64>) = rows
        .iter()
        .filter_map(|r| {
            let (a, s) = (r.throughput?, r.baseline_throughput?);
            Some((r.ged, (1.0 - (a - s).abs() / s) * 100.0))
        })
        .unzip();
    crate::suite::spearman(&g, &p)
}

/// What a run produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentOutcome {
    pub scenario: Scenario,
    pub output_dir: PathBuf,
    pub checks: Vec<Check>,
}

impl ExperimentOutcome {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

fn create_dir(path: &Path) -> Result<()> {
    std::fs::create_dir_all(path).map_err(|e| Error::io(path, e))
}

fn csv_writer(path: &Path) -> Result<csv::Writer<std::fs::File>> {
    Ok(csv::Writer::from_path(path)?)
}

fn finish(mut w: csv::Writer<std::fs::File>, path: &Path) -> Result<()> {
    w.flush().map_err(|e| Error::io(path, e))
}

fn opt(v: Option<f64>) -> String {
    v.map_or(String::new(), |v| v.to_string())
}

fn describe(configs: &std::collections::BTreeMap<crate::model::FunctionId, Configuration>) -> String {
    configs.iter().map(|(f, c)| format!("{f}={c}")).collect::<Vec<_>>().join(";")
}

fn metrics_record(m: &EvalMetrics) -> [String; 5] {
    [m.accuracy, m.f1, m.precision, m.recall, m.loss].map(|v| v.to_string())
}

/// Runs one scenario and writes its bundle into `spec.output_dir`:
/// CSV tables, `summary.md` with the acceptance checklist, and
/// `metadata.json`, the only file that carries a timestamp.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutcome> {
    let suite = spec.suite()?;
    let out = &spec.output_dir;
    create_dir(out)?;
    let hyper = Hyperparams {
        seed: spec.seed,
        ..spec.hyperparams.clone()
    };
    let mut summary = String::new();
    writeln!(summary, "# {} experiment", spec.scenario.as_str()).unwrap();
    writeln!(summary).unwrap();
    writeln!(summary, "seed: {}", spec.seed).unwrap();
    let workload_names: Vec<&str> = suite.workloads.iter().map(|w| w.name.as_str()).collect();
    writeln!(summary, "workloads: {}", workload_names.join(", ")).unwrap();
    writeln!(summary).unwrap();

    let data = suite_datasets(&suite)?;
    let checks = match spec.scenario {
        Scenario::TrainEval => train_eval(&suite, &data, &hyper, out, &mut summary)?,
        Scenario::LossComparison => loss_table(&suite, &data, &hyper, out, &mut summary)?,
        Scenario::ThroughputCost => {
            let trained = train_all(&data, &suite, &hyper)?;
            throughput_and_cost(&suite, &trained, spec, out, &mut summary)?
        }
        Scenario::AgnosticGed => {
            let trained = train_all(&data, &suite, &hyper)?;
            ladder(&suite, &trained, spec, out, &mut summary)?
        }
    };

    writeln!(summary, "## Acceptance checklist").unwrap();
    writeln!(summary).unwrap();
    for c in &checks {
        writeln!(summary, "- {}", c.line()).unwrap();
    }
    std::fs::write(out.join("summary.md"), &summary).map_err(|e| Error::io(out.join("summary.md"), e))?;
    write_json(out.join("checks.json"), &checks)?;
    let generated_at = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map_or(0, |d| d.as_secs());
    write_json(
        out.join("metadata.json"),
        &serde_json::json!({
            "scenario": spec.scenario,
            "seed": spec.seed,
            "crate_version": env!("CARGO_PKG_VERSION"),
            "generated_at_unix": generated_at,
        }),
    )?;
    Ok(ExperimentOutcome {
        scenario: spec.scenario,
        output_dir: out.clone(),
        checks,
    })
}

fn train_eval(suite: &Suite, data: &[FunctionData], hyper: &Hyperparams, out: &Path, summary: &mut String) -> Result<Vec<Check>> {
    for dir in ["datasets", "models", "metrics"] {
        create_dir(&out.join(dir))?;
    }
    for d in data {
        write_dataset(out.join("datasets").join(format!("{}.csv", d.function)), &d.samples, &suite.catalog.class_map)?;
    }
    let trained = train_all(data, suite, hyper)?;
    let path = out.join("train_eval.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["workload", "function", "samples", "accuracy", "f1", "precision", "recall", "loss"])?;
    writeln!(summary, "| workload | function | accuracy | macro-F1 |\n|---|---|---|---|").unwrap();
    for t in &trained {
        t.model.save(out.join("models").join(format!("{}.json", t.function)))?;
        t.history.write_csv(out.join("metrics").join(format!("{}.csv", t.function)))?;
        let m = &t.history.last().expect("at least one epoch").validation;
        let n = t.history.train_size + t.history.validation_size;
        let mut record = vec![t.workload.clone(), t.function.0.clone(), n.to_string()];
        record.extend(metrics_record(m));
        w.write_record(&record)?;
        writeln!(summary, "| {} | {} | {:.4} | {:.4} |", t.workload, t.function, m.accuracy, m.f1).unwrap();
    }
    let pooled = pooled_metrics(&trained)?;
    let mut record = vec!["all".to_string(), "pooled".to_string(), String::new()];
    record.extend(metrics_record(&pooled));
    w.write_record(&record)?;
    finish(w, &path)?;
    writeln!(summary, "| all | pooled | {:.4} | {:.4} |\n", pooled.accuracy, pooled.f1).unwrap();
    Ok(check_predictor(&pooled))
}

fn loss_table(suite: &Suite, data: &[FunctionData], hyper: &Hyperparams, out: &Path, summary: &mut String) -> Result<Vec<Check>> {
    let mut rows = Vec::new();
    for loss in LossKind::ALL {
        let trained = train_all(data, suite, &Hyperparams { loss, ..hyper.clone() })?;
        let dir = out.join("metrics").join(loss.as_str());
        create_dir(&dir)?;
        for t in &trained {
            t.history.write_csv(dir.join(format!("{}.csv", t.function)))?;
        }
        rows.push(LossRow {
            loss_kind: loss,
            metrics: pooled_metrics(&trained)?,
        });
    }
    let mut ranked = rows.clone();
    // best accuracy first, F1 breaks ties, then the fixed loss order
    ranked.sort_by(|a, b| {
        b.metrics
            .accuracy
            .total_cmp(&a.metrics.accuracy)
            .then(b.metrics.f1.total_cmp(&a.metrics.f1))
    });
    let path = out.join("loss_comparison.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["rank", "loss_kind", "accuracy", "f1", "precision", "recall", "loss"])?;
    writeln!(summary, "| rank | loss | accuracy | macro-F1 | precision | recall |\n|---|---|---|---|---|---|").unwrap();
    for (i, r) in ranked.iter().enumerate() {
        let mut record = vec![(i + 1).to_string(), r.loss_kind.to_string()];
        record.extend(metrics_record(&r.metrics));
        w.write_record(&record)?;
        let m = &r.metrics;
        writeln!(
            summary,
            "| {} | {} | {:.4} | {:.4} | {:.4} | {:.4} |",
            i + 1,
            r.loss_kind,
            m.accuracy,
            m.f1,
            m.precision,
            m.recall
        )
        .unwrap();
    }
    finish(w, &path)?;
    writeln!(summary).unwrap();
    let cce = rows.iter().find(|r| r.loss_kind == LossKind::Cce).expect("cce row");
    let mut checks = check_predictor(&cce.metrics);
    checks.push(check_loss_ranking(&rows));
    Ok(checks)
}

fn throughput_and_cost(
    suite: &Suite,
    trained: &[TrainedFunction],
    spec: &ExperimentSpec,
    out: &Path,
    summary: &mut String,
) -> Result<Vec<Check>> {
    let models = model_map(trained);
    let (table, savings) = throughput_cost(suite, &models, spec.seed)?;
    let path = out.join("throughput_cost.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        "workload",
        "function",
        "mem_mb",
        "cpus",
        "replicas",
        "throughput",
        "monthly_cost",
        "pct_quantile",
        "slo_met",
        "selected",
        "oracle_optimal",
    ])?;
    for r in &table {
        let o = &r.row;
        w.write_record([
            r.workload.clone(),
            o.function.0.clone(),
            o.mem_mb.to_string(),
            o.cpus.to_string(),
            o.replicas.to_string(),
            o.throughput.to_string(),
            o.monthly_cost.to_string(),
            opt(o.pct_quantile),
            o.slo_met.to_string(),
            r.selected.to_string(),
            r.oracle_optimal.to_string(),
        ])?;
    }
    finish(w, &path)?;

    let path = out.join("savings.csv");
    let mut w = csv_writer(&path)?;
    w.write_record(["function", "saving_vs_naive_percent"])?;
    writeln!(summary, "| function | saving vs naive max |\n|---|---|").unwrap();
    for (f, s) in &savings {
        w.write_record([f.clone(), s.to_string()])?;
        writeln!(summary, "| {f} | {s:.2}% |").unwrap();
    }
    finish(w, &path)?;
    writeln!(
        summary,
        "\nReference savings from the original evaluation: {:.2}-{:.2}%.\n",
        REFERENCE_SAVING_RANGE.0, REFERENCE_SAVING_RANGE.1
    )
    .unwrap();

    let cases = selection_cases(suite, &models, spec.selection_cases, spec.seed)?;
    let path = out.join("selection_cases.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        "case",
        "workload",
        "rate",
        "selected",
        "selected_cost",
        "oracle_cost",
        "cost_ratio",
        "pct_quantile",
        "slo_met",
        "saving_vs_naive",
    ])?;
    for c in &cases {
        w.write_record([
            c.case.to_string(),
            c.workload.clone(),
            c.rate.to_string(),
            c.selected.as_ref().map_or(String::new(), describe),
            opt(c.selected_cost),
            c.oracle_cost.to_string(),
            opt(c.cost_ratio),
            opt(c.pct_at_quantile),
            c.slo_met.to_string(),
            opt(c.saving_vs_naive),
        ])?;
    }
    finish(w, &path)?;
    let met = cases.iter().filter(|c| c.slo_met).count();
    writeln!(summary, "Selection cases meeting the SLO: {met}/{}.\n", cases.len()).unwrap();
    Ok(check_selection(&cases))
}

fn ladder(
    suite: &Suite,
    trained: &[TrainedFunction],
    spec: &ExperimentSpec,
    out: &Path,
    summary: &mut String,
) -> Result<Vec<Check>> {
    let models = model_map(trained);
    let dir = out.join("registry");
    if dir.exists() {
        std::fs::remove_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
    }
    let mut registry = crate::registry::Registry::open(&dir)?;
    for entry in suite_registry(suite, &models, spec.seed)?.iter() {
        registry.register(entry.clone())?;
    }
    let rows = agnostic_ladder(suite, &registry, spec.ladder_trials, f64::INFINITY, spec.seed)?;
    let path = out.join("ladder.csv");
    let mut w = csv_writer(&path)?;
    w.write_record([
        "trial",
        "workload",
        "edits",
        "ged",
        "within_threshold",
        "matched",
        "throughput",
        "baseline_throughput",
        "ps",
    ])?;
    for r in &rows {
        w.write_record([
            r.trial.to_string(),
            r.workload.clone(),
            r.edits.to_string(),
            r.ged.to_string(),
            (r.ged <= spec.threshold).to_string(),
            r.matched.clone().unwrap_or_default(),
            opt(r.throughput),
            opt(r.baseline_throughput),
            opt(r.ps),
        ])?;
    }
    finish(w, &path)?;
    writeln!(summary, "| edits | mean GED | mean ps |\n|---|---|---|").unwrap();
    for k in LADDER_LEVELS {
        let level: Vec<&LadderRow> = rows.iter().filter(|r| r.edits == k).collect();
        let n = level.len().max(1) as f64;
        let ged = level.iter().map(|r| r.ged).sum::<f64>() / n;
        let ps = level.iter().map(|r| r.ps.unwrap_or(0.0)).sum::<f64>() / n;
        writeln!(summary, "| {k} | {ged:.2} | {ps:.2}% |").unwrap();
    }
    writeln!(summary).unwrap();
    Ok(check_ladder(&rows))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn descriptor_defaults_and_paths() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.json");
        std::fs::write(&path, r#"{"scenario":"agnostic-ged","output_dir":"out","seed":3}"#).unwrap();
        let spec = ExperimentSpec::load(&path).unwrap();
        assert_eq!(spec.scenario, Scenario::AgnosticGed);
        assert_eq!(spec.output_dir, dir.path().join("out"));
        assert_eq!(spec.selection_cases, 50);
        assert_eq!(spec.threshold, 5.0);
        std::fs::write(&path, r#"{"scenario":"nope","output_dir":"out"}"#).unwrap();
        assert!(ExperimentSpec::load(&path).is_err());
    }

    #[test]
    fn checklist_lines() {
        let c = check_predictor(&EvalMetrics {
            accuracy: 0.95,
            f1: 0.8,
            precision: 0.9,
            recall: 0.9,
            loss: 0.1,
        });
        assert!(c[0].passed);
        assert!(!c[1].passed);
        assert!(c[1].line().starts_with("[FAIL] criterion 5"));
    }
}
