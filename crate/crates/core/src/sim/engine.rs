use std::cmp::Ordering;
use std::collections::{BTreeMap, BinaryHeap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{ArrivalKind, RequestRecord, SimOptions, SimulationResult, StageRecord, WorkloadSpec};
use crate::error::{Error, Result};
use crate::model::{exec_time, fits_cluster, ClusterSpec, Configuration, FunctionId, FunctionSet, PipelineSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum EventKind {
    Arrive { request: usize, stage: usize },
    Finish { request: usize, stage: usize, replica: usize },
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl Ord for Event {
    // min-heap on (time, seq)
    fn cmp(&self, other: &Self) -> Ordering {
        other.time.total_cmp(&self.time).then_with(|| other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct Stage {
    service: f64,
    init: f64,
    busy: Vec<bool>,
    warm: Vec<bool>,
    queue: VecDeque<usize>,
}

impl Stage {
    /// Idle replica to use, warm ones first, lowest index first.
    fn idle_replica(&self) -> Option<usize> {
        let idle = |i: &usize| !self.busy[*i];
        (0..self.busy.len())
            .filter(idle)
            .find(|&i| self.warm[i])
            .or_else(|| (0..self.busy.len()).find(|i| idle(i)))
    }
}

/// First-fit-decreasing (by CPU, then memory) placement of every replica.
/// Returns the node index of each container in input order.
pub fn pack_replicas(configs: &[Configuration], cluster: &ClusterSpec) -> Result<Vec<usize>> {
    let mut containers: Vec<(usize, f64, f64)> = Vec::new();
    for cfg in configs {
        if !fits_cluster(cfg, cluster) {
            return Err(Error::DoesNotFitCluster {
                cpus: cfg.container.cpus,
                mem_mb: cfg.container.mem_mb,
            });
        }
        for _ in 0..cfg.replicas {
            containers.push((containers.len(), cfg.container.cpus, cfg.container.mem_mb));
        }
    }
    let mut order: Vec<usize> = (0..containers.len()).collect();
    order.sort_by(|&a, &b| {
        containers[b]
            .1
            .total_cmp(&containers[a].1)
            .then(containers[b].2.total_cmp(&containers[a].2))
            .then(a.cmp(&b))
    });
    let mut free: Vec<(f64, f64)> = cluster.nodes.iter().map(|n| (n.cpus, n.mem_mb)).collect();
    let mut placement = vec![0usize; containers.len()];
    // tolerance for fractional CPU sums such as 0.1 * 10
    const EPS: f64 = 1e-9;
    for idx in order {
        let (_, cpus, mem) = containers[idx];
        let node = free
            .iter()
            .position(|&(c, m)| c + EPS >= cpus && m + EPS >= mem)
            .ok_or(Error::PackingFailed {
                replicas: containers.len(),
            })?;
        free[node].0 -= cpus;
        free[node].1 -= mem;
        placement[idx] = node;
    }
    Ok(placement)
}

fn arrival_times(workload: &WorkloadSpec) -> Vec<f64> {
    let n = workload.request_count();
    match workload.arrival_kind {
        ArrivalKind::Uniform => (0..n).map(|i| i as f64 / workload.rate).collect(),
        ArrivalKind::Poisson => {
            let mut rng = ChaCha8Rng::seed_from_u64(workload.seed);
            let mut t: Vec<f64> = (0..n).map(|_| rng.gen_range(0.0..workload.duration_s)).collect();
            t.sort_by(f64::total_cmp);
            t
        }
    }
}

pub fn simulate(
    pipeline: &PipelineSpec,
    functions: &FunctionSet,
    configs: &BTreeMap<FunctionId, Configuration>,
    cluster: &ClusterSpec,
    workload: &WorkloadSpec,
) -> Result<SimulationResult> {
    simulate_with(pipeline, functions, configs, cluster, workload, &SimOptions::default())
}

pub fn simulate_with(
    pipeline: &PipelineSpec,
    functions: &FunctionSet,
    configs: &BTreeMap<FunctionId, Configuration>,
    cluster: &ClusterSpec,
    workload: &WorkloadSpec,
    options: &SimOptions,
) -> Result<SimulationResult> {
    pipeline.validate()?;
    cluster.validate()?;
    workload.validate()?;

    let mut stages = Vec::with_capacity(pipeline.functions.len());
    let mut stage_configs = Vec::with_capacity(pipeline.functions.len());
    for id in &pipeline.functions {
        let f = functions.get(id)?;
        let cfg = *configs.get(id).ok_or_else(|| Error::Missing {
            what: "configuration",
            id: id.0.clone(),
        })?;
        let service = exec_time(f, &cfg.container)?;
        let n = cfg.replicas as usize;
        stages.push(Stage {
            service,
            init: f.init_time,
            busy: vec![false; n],
            warm: vec![false; n],
            queue: VecDeque::new(),
        });
        stage_configs.push(cfg);
    }
    pack_replicas(&stage_configs, cluster)?;

    let arrivals = arrival_times(workload);
    let n_stages = stages.len();
    let mut records: Vec<RequestRecord> = arrivals
        .iter()
        .enumerate()
        .map(|(id, &t)| RequestRecord {
            id,
            arrival: t,
            stages: Vec::with_capacity(n_stages),
            hop_total: 0.0,
            completion: f64::NAN,
        })
        .collect();

    let mut heap = BinaryHeap::with_capacity(arrivals.len() * 2);
    let mut seq = 0u64;
    let mut push = |heap: &mut BinaryHeap<Event>, time: f64, kind: EventKind| {
        heap.push(Event { time, seq, kind });
        seq += 1;
    };
    for (request, &t) in arrivals.iter().enumerate() {
        push(&mut heap, t, EventKind::Arrive { request, stage: 0 });
    }

    let mut containers_started = 0usize;
    let mut init_time_total = 0.0;

    // Starts `request` on `replica` of stage `k` at time `now`; returns finish time.
    let mut start = |stages: &mut [Stage], records: &mut [RequestRecord], k: usize, replica: usize, request: usize, now: f64| {
        let stage = &mut stages[k];
        stage.busy[replica] = true;
        let init = if stage.warm[replica] {
            0.0
        } else {
            stage.warm[replica] = true;
            containers_started += 1;
            init_time_total += stage.init;
            stage.init
        };
        let rec = records[request].stages.last_mut().expect("stage arrival recorded");
        rec.queue_wait = now - rec.arrival;
        rec.init = init;
        rec.service = stage.service;
        rec.replica = replica;
        now + init + stage.service
    };

    while let Some(ev) = heap.pop() {
        let now = ev.time;
        match ev.kind {
            EventKind::Arrive { request, stage: k } => {
                records[request].stages.push(StageRecord {
                    arrival: now,
                    queue_wait: 0.0,
                    init: 0.0,
                    service: 0.0,
                    replica: 0,
                });
                match stages[k].idle_replica() {
                    Some(replica) => {
                        let done = start(&mut stages, &mut records, k, replica, request, now);
                        push(&mut heap, done, EventKind::Finish { request, stage: k, replica });
                    }
                    None => stages[k].queue.push_back(request),
                }
            }
            EventKind::Finish { request, stage: k, replica } => {
                stages[k].busy[replica] = false;
                if k + 1 < n_stages {
                    records[request].hop_total += options.hop_latency_s;
                    push(
                        &mut heap,
                        now + options.hop_latency_s,
                        EventKind::Arrive { request, stage: k + 1 },
                    );
                } else {
                    records[request].completion = now;
                }
                if let Some(next) = stages[k].queue.pop_front() {
                    let done = start(&mut stages, &mut records, k, replica, next, now);
                    push(&mut heap, done, EventKind::Finish { request: next, stage: k, replica });
                }
            }
        }
    }

    let pct_values: Vec<f64> = records.iter().map(RequestRecord::pct).collect();
    let duration = workload.duration_s;
    let completed = records.iter().filter(|r| r.completion <= duration).count();
    let within = pct_values.iter().filter(|&&p| p <= pipeline.deadline_s).count();
    let mut result = SimulationResult {
        slo_met_fraction: if records.is_empty() {
            1.0
        } else {
            within as f64 / records.len() as f64
        },
        records,
        pct_values,
        duration_s: duration,
        deadline_s: pipeline.deadline_s,
        completed,
        throughput: 0.0,
        containers_started,
        init_time_total,
    };
    result.throughput = super::measured_throughput(&result);
    Ok(result)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{ContainerConfig, FunctionSpec};
    use crate::sim::{measured_throughput, meets_slo};

    fn function(id: &str, exec: f64, init: f64) -> FunctionSpec {
        FunctionSpec {
            id: id.into(),
            name: id.into(),
            base_exec_time: exec,
            ref_cpu: 1.0,
            ref_mem: 128.0,
            cpu_scaling_exponent: 1.0,
            init_time: init,
        }
    }

    fn single(exec: f64, init: f64, replicas: u32, deadline: f64) -> (PipelineSpec, FunctionSet, BTreeMap<FunctionId, Configuration>) {
        let f = function("f", exec, init);
        let pipeline = PipelineSpec {
            id: "p".into(),
            functions: vec![f.id.clone()],
            deadline_s: deadline,
            target_rate: 1.0,
        };
        let cfg = Configuration::new(replicas, ContainerConfig::new(256.0, 1.0).unwrap()).unwrap();
        let configs = BTreeMap::from([(f.id.clone(), cfg)]);
        (pipeline, FunctionSet::from_iter([f]), configs)
    }

    fn cluster() -> ClusterSpec {
        ClusterSpec::uniform(4, 8.0, 16384.0)
    }

    #[test]
    fn one_request_pays_init_once() {
        let (p, fs, cfg) = single(0.3, 0.7, 1, 10.0);
        let r = simulate(&p, &fs, &cfg, &cluster(), &WorkloadSpec::uniform(1.0, 1.0)).unwrap();
        assert_eq!(r.records.len(), 1);
        let rec = &r.records[0];
        assert!((rec.pct() - 1.0).abs() < 1e-12);
        assert_eq!(rec.total_queue_wait(), 0.0);
        assert_eq!(rec.init_share(), 0.7);
        assert_eq!(r.containers_started, 1);
        assert_eq!(r.init_time_total, 0.7);
    }

    #[test]
    fn simultaneous_arrivals_queue() {
        // rate high enough that both arrive at t = 0 and 1e-9
        let (p, fs, cfg) = single(1.0, 0.0, 1, 10.0);
        let w = WorkloadSpec::uniform(1e9, 2e-9);
        let r = simulate(&p, &fs, &cfg, &cluster(), &w).unwrap();
        assert_eq!(r.records.len(), 2);
        let second = &r.records[1];
        assert!((second.total_queue_wait() - (1.0 - 1e-9)).abs() < 1e-12);
        assert!((second.pct() - (2.0 - 1e-9)).abs() < 1e-12);

        let (p, fs, cfg) = single(1.0, 0.5, 1, 10.0);
        let r = simulate(&p, &fs, &cfg, &cluster(), &w).unwrap();
        // init + 2 s of service path
        assert!((r.records[1].pct() - (2.5 - 1e-9)).abs() < 1e-12);
        assert_eq!(r.records[1].init_share(), 0.0);
    }

    #[test]
    fn light_load_meets_slo() {
        let (p, fs, cfg) = single(0.05, 0.0, 5, 0.2);
        let r = simulate(&p, &fs, &cfg, &cluster(), &WorkloadSpec::uniform(10.0, 30.0)).unwrap();
        assert_eq!(r.slo_met_fraction, 1.0);
        assert!(meets_slo(&r, 0.2, 0.95));
        assert!(r.records.iter().all(|x| x.total_queue_wait() == 0.0));
    }

    #[test]
    fn saturated_stage_caps_throughput() {
        // 2 replicas at 0.1 s each serve 20/s; offer 100/s
        let (p, fs, cfg) = single(0.1, 0.0, 2, 1e9);
        let r = simulate(&p, &fs, &cfg, &cluster(), &WorkloadSpec::uniform(100.0, 20.0)).unwrap();
        let thr = measured_throughput(&r);
        assert!((thr - 20.0).abs() <= 0.2, "{thr}");
        assert_eq!(r.arrivals(), r.completed + r.in_flight_at_horizon());
    }

    #[test]
    fn two_stage_pipeline_with_hops() {
        let a = function("a", 0.1, 0.2);
        let b = function("b", 0.3, 0.0);
        let p = PipelineSpec {
            id: "p".into(),
            functions: vec![a.id.clone(), b.id.clone()],
            deadline_s: 5.0,
            target_rate: 4.0,
        };
        let c = ContainerConfig::new(256.0, 1.0).unwrap();
        let configs = BTreeMap::from([
            (a.id.clone(), Configuration::new(1, c).unwrap()),
            (b.id.clone(), Configuration::new(2, c).unwrap()),
        ]);
        let fs = FunctionSet::from_iter([a, b]);
        let opts = SimOptions { hop_latency_s: 0.01 };
        let r = simulate_with(&p, &fs, &configs, &cluster(), &WorkloadSpec::uniform(4.0, 5.0), &opts).unwrap();
        for rec in &r.records {
            assert_eq!(rec.stages.len(), 2);
            assert!((rec.pct() - rec.decomposed_pct()).abs() < 1e-9);
            assert!((rec.hop_total - 0.01).abs() < 1e-15);
        }
        assert_eq!(r.containers_started, 3);
    }

    #[test]
    fn errors() {
        let (p, fs, mut cfg) = single(0.1, 0.0, 1, 1.0);
        let w = WorkloadSpec::uniform(1.0, 1.0);
        cfg.insert("f".into(), Configuration::new(1, ContainerConfig::new(64.0, 1.0).unwrap()).unwrap());
        assert!(matches!(simulate(&p, &fs, &cfg, &cluster(), &w), Err(Error::InsufficientMemory { .. })));
        cfg.insert("f".into(), Configuration::new(1, ContainerConfig::new(256.0, 9.0).unwrap()).unwrap());
        assert!(matches!(simulate(&p, &fs, &cfg, &cluster(), &w), Err(Error::DoesNotFitCluster { .. })));
        cfg.insert("f".into(), Configuration::new(40, ContainerConfig::new(256.0, 1.0).unwrap()).unwrap());
        assert!(matches!(simulate(&p, &fs, &cfg, &cluster(), &w), Err(Error::PackingFailed { .. })));
        assert!(matches!(
            simulate(&p, &fs, &BTreeMap::new(), &cluster(), &w),
            Err(Error::Missing { .. })
        ));
    }

    #[test]
    fn packing_first_fit_decreasing() {
        let cluster = ClusterSpec::uniform(2, 4.0, 8192.0);
        let big = Configuration::new(2, ContainerConfig::new(1024.0, 3.0).unwrap()).unwrap();
        let small = Configuration::new(2, ContainerConfig::new(1024.0, 1.0).unwrap()).unwrap();
        assert_eq!(pack_replicas(&[small, big], &cluster).unwrap(), vec![0, 1, 0, 1]);
        let fractional = Configuration::new(10, ContainerConfig::new(100.0, 0.1).unwrap()).unwrap();
        assert!(pack_replicas(&[fractional], &ClusterSpec::uniform(1, 1.0, 1000.0)).is_ok());
    }

    #[test]
    fn poisson_is_seeded() {
        let (p, fs, cfg) = single(0.05, 0.1, 3, 1.0);
        let w = WorkloadSpec {
            rate: 20.0,
            duration_s: 10.0,
            arrival_kind: ArrivalKind::Poisson,
            seed: 9,
        };
        let a = simulate(&p, &fs, &cfg, &cluster(), &w).unwrap();
        let b = simulate(&p, &fs, &cfg, &cluster(), &w).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.records.len(), 200);
        let c = simulate(&p, &fs, &cfg, &cluster(), &WorkloadSpec { seed: 10, ..w }).unwrap();
        assert_ne!(a.pct_values, c.pct_values);
    }
}
