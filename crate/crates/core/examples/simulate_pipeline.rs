//! Runs the processing pipeline through the discrete-event simulator at a
//! fixed configuration and prints where the completion time goes.
//!
//!     cargo run --example simulate_pipeline -- [rate] [trace.csv]

use std::collections::BTreeMap;

use faasprov::model::{Configuration, ContainerConfig};
use faasprov::sim::{simulate_with, ArrivalKind, SimOptions, WorkloadSpec};
use faasprov::suite::Suite;

fn main() -> faasprov::error::Result<()> {
    let mut args = std::env::args().skip(1);
    let rate: f64 = args.next().map_or(40.0, |s| s.parse().expect("rate must be a number"));
    let trace = args.next();

    let suite = Suite::desk();
    let w = suite.workload("processing").expect("built-in workload");
    let container = ContainerConfig::new(1024.0, 1.0)?;
    let configs: BTreeMap<_, _> = w
        .pipeline
        .functions
        .iter()
        .map(|id| (id.clone(), Configuration { replicas: 10, container }))
        .collect();
    let workload = WorkloadSpec {
        arrival_kind: ArrivalKind::Poisson,
        seed: 7,
        ..WorkloadSpec::uniform(rate, 30.0)
    };
    let result = simulate_with(&w.pipeline, &w.functions, &configs, &suite.cluster, &workload, &SimOptions { hop_latency_s: 0.002 })?;

    let s = result.summary(0.95);
    println!("{} arrivals, {} completed in {:.0}s", s.arrivals, s.completed, result.duration_s);
    println!("throughput {:.2} req/s, p95 PCT {:.3}s, deadline {:.3}s", s.throughput, s.pct_at_quantile, w.pipeline.deadline_s);
    println!("{:.1}% of requests within the deadline, {} cold starts", 100.0 * s.slo_met_fraction, s.containers_started);

    let n = result.records.len() as f64;
    let mean = |f: &dyn Fn(&faasprov::sim::RequestRecord) -> f64| result.records.iter().map(f).sum::<f64>() / n;
    println!(
        "mean PCT {:.4}s = init {:.4} + service {:.4} + queue {:.4} + hops {:.4}",
        mean(&|r| r.pct()),
        mean(&|r| r.init_share()),
        mean(&|r| r.total_service()),
        mean(&|r| r.total_queue_wait()),
        mean(&|r| r.hop_total),
    );
    if let Some(path) = trace {
        result.write_trace_csv(&path)?;
        println!("trace written to {path}");
    }
    Ok(())
}
