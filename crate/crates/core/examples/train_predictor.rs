//! Labels a training set for one function with the simulator, trains the
//! replica-class network with each loss, and queries the CCE model.
//!
//!     cargo run --release --example train_predictor -- [function]

use faasprov::model::ContainerConfig;
use faasprov::predictor::{forward, train, FeatureVector, Hyperparams, LossKind};
use faasprov::sim::generate_function_data;
use faasprov::suite::Suite;

fn main() -> faasprov::error::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "linpack".into());
    let suite = Suite::desk();
    let (w, f) = suite
        .workloads
        .iter()
        .find_map(|w| w.function_specs().find(|f| f.id.0 == name).map(|f| (w, f)))
        .unwrap_or_else(|| panic!("no suite function named {name}"));

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
    println!("{}: {} labelled samples", f.id, data.samples.len());

    let mut cce = None;
    for loss in LossKind::ALL {
        let hyper = Hyperparams { loss, ..Hyperparams::default() };
        let (model, history) = train(&data.samples, &suite.catalog.class_map, &hyper)?;
        let m = history.last().expect("trained for at least one epoch").validation;
        println!("{loss}: held-out accuracy {:.3}, macro-F1 {:.3}", m.accuracy, m.f1);
        if loss == LossKind::Cce {
            cce = Some(model);
        }
    }

    let model = cce.expect("cce is one of the losses");
    let container = ContainerConfig::new(2048.0, 2.0)?;
    let rate = suite.max_rate(f) / 2.0;
    let p = forward(&model, &FeatureVector::new(&container, rate))?;
    println!("class probabilities on {container} at {rate:.1} req/s:");
    for (class, prob) in model.class_map.classes().iter().zip(&p) {
        println!("  {class:>3} replicas  {prob:.3}");
    }
    Ok(())
}
