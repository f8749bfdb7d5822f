//! Provisions a pipeline known only by its call graph: builds an on-disk
//! registry of known pipelines, then matches a perturbed graph against it
//! and reuses the closest entry's models.
//!
//!     cargo run --release --example agnostic_provisioning -- [registry-dir]

use faasprov::experiment::{model_map, suite_datasets, suite_registry, train_all};
use faasprov::predictor::Hyperparams;
use faasprov::registry::{AgnosticContext, AgnosticOutcome, Registry, DEFAULT_THRESHOLD};
use faasprov::suite::{edit_alphabet, perturb, Suite};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> faasprov::error::Result<()> {
    let dir = std::env::args().nth(1).unwrap_or_else(|| "registry-example".into());
    let _ = std::fs::remove_dir_all(&dir);

    let suite = Suite::desk();
    let models = model_map(&train_all(&suite_datasets(&suite)?, &suite, &Hyperparams::default())?);
    let mut registry = Registry::open(&dir)?;
    for entry in suite_registry(&suite, &models, 0)?.iter() {
        registry.register(entry.clone())?;
    }
    println!("registry at {dir} holds {} pipelines", registry.len());

    let known = suite.workload("clustering").expect("built-in workload");
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let (unknown, edits) = perturb(&known.callgraph, 1, &edit_alphabet(), &mut rng);
    println!("new call graph: clustering after {edits:?}");

    let ctx = AgnosticContext {
        catalog: &suite.catalog,
        cluster: &suite.cluster,
        pricing: &suite.pricing,
    };
    let (lo, hi) = suite.selection_rate_range(known);
    let rate = (lo + hi) / 2.0;
    match registry.provision_agnostic(&unknown, rate, known.pipeline.deadline_s, DEFAULT_THRESHOLD, ctx)? {
        AgnosticOutcome::Provisioned { decision, report } => {
            println!("matched {:?} at distance {}", decision.matched, decision.distance.distance);
            for s in &report.functions {
                println!("  {} {}", s.function, s.configuration);
            }
        }
        AgnosticOutcome::NoSimilarPipeline { decision } => {
            println!("nothing within {}; ranking {:?}", decision.threshold_used, decision.ranking);
        }
    }
    Ok(())
}
