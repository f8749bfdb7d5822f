use faasprov::model::ContainerConfig;
use faasprov::predictor::{
    argmax, forward, predict_replicas, read_dataset, softmax, train, write_dataset, FeatureStats, FeatureVector,
    Hyperparams, LossKind, PredictionModel, ReplicaClassMap, TrainingSample,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn classes() -> ReplicaClassMap {
    ReplicaClassMap::new(vec![5, 10, 15, 20, 25, 30]).unwrap()
}

/// Label grows with rate per CPU, so the classes are learnable.
fn samples() -> Vec<TrainingSample> {
    let mut out = Vec::new();
    for cpus in [0.5, 1.0, 2.0, 4.0] {
        for i in 1..=30 {
            let rate = i as f64 * 2.0;
            let label = ((rate / (cpus * 12.0)) as usize).min(5);
            out.push(TrainingSample {
                features: FeatureVector {
                    mem_mb: cpus * 1024.0,
                    cpus,
                    request_rate: rate,
                },
                label,
            });
        }
    }
    out
}

proptest! {
    #[test]
    fn argmax_survives_monotone_transforms(q in prop::collection::vec(-50.0..50.0f64, 1..8), a in 0.1..5.0f64, b in -10.0..10.0f64) {
        let mapped: Vec<f64> = q.iter().map(|v| a * v + b).collect();
        let cubed: Vec<f64> = q.iter().map(|v| v.powi(3)).collect();
        let k = argmax(&softmax(&q));
        prop_assert_eq!(k, argmax(&softmax(&mapped)));
        prop_assert_eq!(k, argmax(&cubed));
        prop_assert_eq!(k, argmax(&q));
    }

    #[test]
    fn softmax_is_a_distribution(q in prop::collection::vec(-1e3..1e3f64, 1..10)) {
        let p = softmax(&q);
        prop_assert!(p.iter().all(|v| (0.0..=1.0).contains(v)));
        prop_assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-9);
    }
}

#[test]
fn ties_prefer_fewer_replicas() {
    let model = PredictionModel::zeros(&[4], classes(), FeatureStats::identity(), LossKind::Cce);
    let w = ContainerConfig::new(1024.0, 1.0).unwrap();
    assert_eq!(predict_replicas(&model, &w, 10.0).unwrap(), 5);
}

#[test]
fn training_is_bit_deterministic() {
    let hyper = Hyperparams {
        epochs: 40,
        hidden: vec![16, 16],
        ..Hyperparams::default()
    };
    let (m1, h1) = train(&samples(), &classes(), &hyper).unwrap();
    let (m2, h2) = train(&samples(), &classes(), &hyper).unwrap();
    assert_eq!(m1, m2);
    assert_eq!(h1, h2);
    let (m3, _) = train(&samples(), &classes(), &Hyperparams { seed: 1, ..hyper }).unwrap();
    assert_ne!(m1, m3);
}

#[test]
fn learns_a_separable_rule() {
    let (model, history) = train(&samples(), &classes(), &Hyperparams { epochs: 300, ..Hyperparams::default() }).unwrap();
    let last = history.last().unwrap();
    assert!(last.validation.accuracy >= 0.8, "{:?}", last.validation);
    let p = forward(&model, &FeatureVector { mem_mb: 512.0, cpus: 0.5, request_rate: 2.0 }).unwrap();
    assert_eq!(argmax(&p), 0);
}

#[test]
fn dataset_and_model_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let data = dir.path().join("d.csv");
    write_dataset(&data, &samples(), &classes()).unwrap();
    assert_eq!(read_dataset(&data, &classes()).unwrap(), samples());

    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let model = PredictionModel::init(&[8], classes(), FeatureStats::identity(), LossKind::Psse, &mut rng);
    let path = dir.path().join("m.json");
    model.save(&path).unwrap();
    assert_eq!(PredictionModel::load(&path).unwrap(), model);

    std::fs::write(&data, "mem_mb,cpus,request_rate,replica_label\n512,0.5,3,7\n").unwrap();
    assert!(read_dataset(&data, &classes()).is_err());
}
