//! Trains models for the sensor-correlation pipeline, picks a configuration
//! per function, and checks it against the exhaustive grid search.
//!
//!     cargo run --release --example select_configuration -- [rate]

use faasprov::experiment::{suite_datasets, model_map, train_all};
use faasprov::predictor::Hyperparams;
use faasprov::provision::{grid_search_oracle, select_configuration, simulate_selection, ProvisionContext};
use faasprov::sim::{SimOptions, WorkloadSpec};
use faasprov::suite::Suite;

fn main() -> faasprov::error::Result<()> {
    let mut suite = Suite::desk();
    suite.workloads.retain(|w| w.name == "sensor-correlation");
    let w = &suite.workloads[0];
    let (lo, hi) = suite.selection_rate_range(w);
    let rate: f64 = std::env::args().nth(1).map_or((lo + hi) / 2.0, |s| s.parse().expect("rate must be a number"));

    let trained = train_all(&suite_datasets(&suite)?, &suite, &Hyperparams::default())?;
    let models = model_map(&trained);
    let ctx = ProvisionContext {
        pipeline: &w.pipeline,
        functions: &w.functions,
        catalog: &suite.catalog,
        cluster: &suite.cluster,
        pricing: &suite.pricing,
    };

    let report = select_configuration(ctx, &models, rate)?;
    println!("{} at {rate:.1} req/s, deadline {:.2}s", w.name, w.pipeline.deadline_s);
    for s in &report.functions {
        println!(
            "  {:<11} {}  P(SLO) {:.3}  ${:.2}/month",
            s.function.0, s.configuration, s.slo_probability, s.monthly_cost
        );
    }
    println!("  saving vs naive max: {:.1}%", report.cost_saving_vs_naive);

    let workload = WorkloadSpec::uniform(rate, suite.datagen.duration_s);
    let sim = simulate_selection(ctx, &report.configurations(), &workload, &SimOptions::default())?.summary(0.95);
    println!("simulated: {:.2} req/s, p95 PCT {:.3}s", sim.throughput, sim.pct_at_quantile);

    let oracle = grid_search_oracle(ctx, &workload, 0.95)?;
    println!("oracle: ${:.2}/month vs selected ${:.2}/month", oracle.monthly_cost, report.monthly_cost);
    for (f, c) in &oracle.choices {
        println!("  {:<11} {c}", f.0);
    }
    Ok(())
}
