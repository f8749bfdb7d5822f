//! Runs one evaluation scenario from code and prints its checklist. The
//! same bundle comes out of `faasprov experiment <descriptor>`.
//!
//!     cargo run --release --example run_experiment -- [scenario] [out-dir]

use faasprov::experiment::{run_experiment, ExperimentSpec, Scenario};

fn main() -> faasprov::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let scenario = match args.next().as_deref().unwrap_or("throughput-cost") {
        "train-eval" => Scenario::TrainEval,
        "loss-comparison" => Scenario::LossComparison,
        "throughput-cost" => Scenario::ThroughputCost,
        "agnostic-ged" => Scenario::AgnosticGed,
        other => panic!("unknown scenario {other}"),
    };
    let out = args.next().unwrap_or_else(|| format!("experiment-{}", scenario.as_str()));
    let spec = ExperimentSpec {
        selection_cases: 20,
        ladder_trials: 10,
        ..ExperimentSpec::new(scenario, out)
    };
    let outcome = run_experiment(&spec)?;
    for c in &outcome.checks {
        println!("{}", c.line());
    }
    println!("artifacts in {}", outcome.output_dir.display());
    Ok(())
}
