mod common;

use std::collections::BTreeMap;

use faasprov::model::{ClusterSpec, Configuration, ContainerConfig, FunctionId, FunctionSet, FunctionSpec, PipelineId, PipelineSpec};
use faasprov::sim::{pack_replicas, simulate, ArrivalKind, SimulationResult, WorkloadSpec};
use proptest::prelude::*;

#[derive(Debug, Clone)]
struct Case {
    pipeline: PipelineSpec,
    functions: FunctionSet,
    configs: BTreeMap<FunctionId, Configuration>,
    workload: WorkloadSpec,
}

fn case() -> impl Strategy<Value = Case> {
    let stage = (0.01..0.3f64, 0.0..0.6f64, 1u32..5, prop::sample::select(vec![0.5, 1.0, 2.0]));
    (prop::collection::vec(stage, 1..4), 1.0..40.0f64, any::<u64>(), any::<bool>()).prop_map(|(stages, rate, seed, poisson)| {
        let mut functions = FunctionSet::new();
        let mut configs = BTreeMap::new();
        let mut ids = Vec::new();
        for (i, (base, init, replicas, cpus)) in stages.into_iter().enumerate() {
            let id = FunctionId(format!("f{i}"));
            functions
                .insert(FunctionSpec {
                    id: id.clone(),
                    name: id.0.clone(),
                    base_exec_time: base,
                    ref_cpu: 1.0,
                    ref_mem: 256.0,
                    cpu_scaling_exponent: 0.8,
                    init_time: init,
                })
                .unwrap();
            configs.insert(id.clone(), Configuration::new(replicas, ContainerConfig::new(512.0, cpus).unwrap()).unwrap());
            ids.push(id);
        }
        Case {
            pipeline: PipelineSpec {
                id: PipelineId("p".into()),
                functions: ids,
                deadline_s: 1.0,
                target_rate: rate,
            },
            functions,
            configs,
            workload: WorkloadSpec {
                rate,
                duration_s: 5.0,
                arrival_kind: if poisson { ArrivalKind::Poisson } else { ArrivalKind::Uniform },
                seed,
            },
        }
    })
}

fn run(c: &Case) -> SimulationResult {
    simulate(&c.pipeline, &c.functions, &c.configs, &ClusterSpec::uniform(8, 16.0, 32768.0), &c.workload).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn conservation_and_identity(c in case()) {
        let r = run(&c);
        prop_assert_eq!(r.arrivals(), r.completed + r.in_flight_at_horizon());
        prop_assert_eq!(r.arrivals(), c.workload.request_count());
        for rec in &r.records {
            prop_assert!((rec.pct() - rec.decomposed_pct()).abs() <= 1e-9);
            prop_assert!(rec.stages.iter().all(|s| s.queue_wait >= 0.0 && s.init >= 0.0));
        }
        prop_assert!(r.throughput <= r.completed as f64 / r.duration_s + 1e-12);
    }

    #[test]
    fn identical_seeds_identical_traces(c in case()) {
        prop_assert_eq!(run(&c), run(&c));
    }

    #[test]
    // downstream stages can see more wait: earlier upstream departures arrive
    // there in tighter bursts
    fn extra_replica_never_adds_wait_upstream(c in case(), pick in any::<prop::sample::Index>()) {
        let before = run(&c);
        let k = pick.index(c.pipeline.functions.len());
        let mut more = c.clone();
        more.configs.get_mut(&c.pipeline.functions[k]).unwrap().replicas += 1;
        let after = run(&more);
        for (a, b) in before.records.iter().zip(&after.records) {
            for s in 0..=k {
                prop_assert!(b.stages[s].queue_wait <= a.stages[s].queue_wait + 1e-9,
                    "request {} stage {s}: {} -> {}", a.id, a.stages[s].queue_wait, b.stages[s].queue_wait);
            }
        }
    }

    #[test]
    fn quantile_is_nearest_rank(values in prop::collection::vec(0.0..10.0f64, 1..50), q in 0.0..=1.0f64) {
        prop_assert_eq!(faasprov::sim::pct_quantile(&values, q), common::nearest_rank(&values, q));
    }
}

#[test]
fn first_fit_decreasing_fills_nodes_in_order() {
    let big = Configuration::new(3, ContainerConfig::new(4096.0, 4.0).unwrap()).unwrap();
    let small = Configuration::new(4, ContainerConfig::new(1024.0, 1.0).unwrap()).unwrap();
    let cluster = ClusterSpec::uniform(2, 8.0, 16384.0);
    // bigs place first: two fill node 0's CPUs, the third and all smalls share node 1
    let nodes = pack_replicas(&[small, big], &cluster).unwrap();
    assert_eq!(nodes, vec![1, 1, 1, 1, 0, 0, 1]);
    let tiny = ClusterSpec::uniform(1, 8.0, 16384.0);
    assert!(pack_replicas(&[small, big], &tiny).is_err());
}
