mod common;

use std::collections::BTreeMap;

use faasprov::model::{exec_time, fits_cluster, monthly_cost, ClusterSpec, Configuration, ContainerConfig, FunctionSpec, PricingScheme};
use faasprov::provision::{cost_saving_vs_naive, enumerate, grid_search_oracle, simulate_selection, ProvisionContext};
use faasprov::sim::{meets_slo, SimOptions, WorkloadSpec};
use faasprov::suite::Suite;
use proptest::prelude::*;

fn function(base: f64, exponent: f64) -> FunctionSpec {
    FunctionSpec {
        id: "f".into(),
        name: "f".into(),
        base_exec_time: base,
        ref_cpu: 1.0,
        ref_mem: 256.0,
        cpu_scaling_exponent: exponent,
        init_time: 0.1,
    }
}

proptest! {
    #[test]
    fn exec_time_scaling(base in 0.001..1.0f64, exp in 0.0..1.5f64, c1 in 0.1..8.0f64, c2 in 0.1..8.0f64, m in 256.0..8192.0f64) {
        let f = function(base, exp);
        let (lo, hi) = if c1 <= c2 { (c1, c2) } else { (c2, c1) };
        let at = |cpus: f64, mem: f64| exec_time(&f, &ContainerConfig::new(mem, cpus).unwrap()).unwrap();
        prop_assert!(at(hi, m) <= at(lo, m));
        prop_assert_eq!(at(lo, m), at(lo, 256.0));
        prop_assert!(exec_time(&f, &ContainerConfig::new(128.0, lo).unwrap()).is_err());
    }

    #[test]
    fn cost_grows_with_replicas_and_memory(r in 1u32..50, m in 128.0..8192.0f64, dm in 1.0..1024.0f64) {
        let p = PricingScheme::new(0.000017).unwrap();
        let cfg = |r: u32, m: f64| Configuration::new(r, ContainerConfig::new(m, 1.0).unwrap()).unwrap();
        prop_assert!(monthly_cost(&cfg(r + 1, m), &p) > monthly_cost(&cfg(r, m), &p));
        prop_assert!(monthly_cost(&cfg(r, m + dm), &p) > monthly_cost(&cfg(r, m), &p));
        prop_assert!((monthly_cost(&cfg(r, m), &p) - common::month_cost(r, m, 0.000017)).abs() < 1e-9);
    }

    #[test]
    fn shrinking_keeps_a_fit(m in 64.0..40000.0f64, c in 0.1..20.0f64, s in 0.1..1.0f64) {
        let cluster = ClusterSpec::uniform(2, 16.0, 32768.0);
        let big = Configuration::new(1, ContainerConfig::new(m, c).unwrap()).unwrap();
        let small = Configuration::new(1, ContainerConfig::new(m * s, c * s).unwrap()).unwrap();
        prop_assert!(!fits_cluster(&big, &cluster) || fits_cluster(&small, &cluster));
    }
}

#[test]
fn savings_stay_below_100_percent_off_naive() {
    let suite = Suite::desk();
    let naive = suite.catalog.naive_max();
    for cfg in enumerate(&suite.catalog) {
        let s = cost_saving_vs_naive(&cfg, &suite.catalog, &suite.pricing);
        if cfg == naive {
            assert_eq!(s, 0.0);
        } else {
            assert!((0.0..100.0).contains(&s), "{cfg}: {s}");
        }
    }
}

#[test]
fn oracle_choice_meets_slo_when_resimulated() {
    let suite = Suite::desk();
    for w in &suite.workloads {
        let (lo, hi) = suite.selection_rate_range(w);
        let rate = (lo + hi) / 2.0;
        let pipeline = faasprov::model::PipelineSpec {
            target_rate: rate,
            ..w.pipeline.clone()
        };
        let ctx = ProvisionContext {
            pipeline: &pipeline,
            functions: &w.functions,
            catalog: &suite.catalog,
            cluster: &suite.cluster,
            pricing: &suite.pricing,
        };
        let workload = WorkloadSpec::uniform(rate, suite.datagen.duration_s);
        let oracle = grid_search_oracle(ctx, &workload, 0.95).unwrap();
        assert_eq!(oracle.table.len(), 24 * w.pipeline.functions.len());
        for (id, cfg) in &oracle.choices {
            // each stage alone, against its share of the deadline
            let f = w.functions.get(id).unwrap();
            let total: f64 = w.function_specs().map(|g| g.base_exec_time).sum();
            let single = faasprov::model::PipelineSpec {
                id: pipeline.id.clone(),
                functions: vec![id.clone()],
                deadline_s: pipeline.deadline_s * f.base_exec_time / total,
                target_rate: rate,
            };
            let one: BTreeMap<_, _> = [(id.clone(), *cfg)].into();
            let r = simulate_selection(
                ProvisionContext { pipeline: &single, ..ctx },
                &one,
                &workload,
                &SimOptions::default(),
            )
            .unwrap();
            assert!(meets_slo(&r, single.deadline_s, 0.95), "{} {id} {cfg}", w.name);
            let cheaper = oracle
                .table
                .iter()
                .filter(|row| &row.function == id && row.slo_met)
                .all(|row| row.monthly_cost >= oracle.table.iter().find(|x| &x.function == id && x.configuration() == *cfg).unwrap().monthly_cost);
            assert!(cheaper, "{id}: a cheaper SLO-meeting row exists");
        }
    }
}
