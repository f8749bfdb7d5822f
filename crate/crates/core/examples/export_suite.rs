//! Writes the built-in desk-scale suite as descriptor files: one pipeline
//! plus call graph per workload, and the cluster, catalog, workload and
//! pricing documents.
//!
//!     cargo run --example export_suite -- data

use std::path::PathBuf;

use faasprov::formats::{write_json, PipelineDescriptor};
use faasprov::sim::WorkloadSpec;
use faasprov::suite::Suite;

fn main() -> faasprov::error::Result<()> {
    let out = PathBuf::from(std::env::args().nth(1).unwrap_or_else(|| "suite-export".into()));
    let suite = Suite::desk();
    std::fs::create_dir_all(out.join("pipelines")).expect("create output directory");
    for w in &suite.workloads {
        let mut d = PipelineDescriptor::from_parts(&w.pipeline, &w.functions)?;
        d.callgraph = Some(format!("{}.callgraph.json", w.name).into());
        write_json(out.join("pipelines").join(format!("{}.json", w.name)), &d)?;
        write_json(out.join("pipelines").join(format!("{}.callgraph.json", w.name)), &w.callgraph)?;
        println!("{}: {} functions, deadline {:.3}s", w.name, w.pipeline.functions.len(), w.pipeline.deadline_s);
    }
    write_json(out.join("cluster.json"), &suite.cluster)?;
    write_json(out.join("catalog.json"), &suite.catalog)?;
    write_json(out.join("pricing.json"), &suite.pricing)?;
    let workload = WorkloadSpec {
        seed: suite.datagen.seed,
        arrival_kind: suite.datagen.arrival_kind,
        ..WorkloadSpec::uniform(10.0, suite.datagen.duration_s)
    };
    write_json(out.join("workload.json"), &workload)?;
    println!("wrote {}", out.display());
    Ok(())
}
