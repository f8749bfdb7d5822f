//! The desk-scale synthetic workload suite.
//!
//! Three pipeline types modelled on a processing pipeline (AES encryption,
//! LINPACK, matrix multiply), a sensor-correlation pipeline (Pearson
//! correlation, k-nearest neighbours) and a clustering pipeline (k-means).
//! Service times are scaled so that a full sweep simulates in seconds.

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::callgraph::CallGraph;
use crate::model::{exec_time, ClusterSpec, ContainerConfig, FunctionSet, FunctionSpec, PipelineSpec, PricingScheme};
use crate::predictor::ReplicaClassMap;
use crate::provision::ConfigurationCatalog;
use crate::sim::DataGenOptions;

/// Price per GB-second used throughout the suite.
pub const RATE_PER_GB_SECOND: f64 = 0.000017;

/// Deadline as a multiple of the pipeline's summed reference service time.
pub const DEADLINE_FACTOR: f64 = 8.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteWorkload {
    pub name: String,
    pub pipeline: PipelineSpec,
    pub functions: FunctionSet,
    pub callgraph: CallGraph,
}

impl SuiteWorkload {
    pub fn function_specs(&self) -> impl Iterator<Item = &FunctionSpec> {
        self.pipeline.functions.iter().map(|id| self.functions.get(id).expect("suite function"))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suite {
    pub workloads: Vec<SuiteWorkload>,
    pub catalog: ConfigurationCatalog,
    pub cluster: ClusterSpec,
    pub pricing: PricingScheme,
    pub datagen: DataGenOptions,
    /// Training rates per function.
    pub rates_per_function: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct FunctionShape {
    id: &'static str,
    base: f64,
    exponent: f64,
    mem: f64,
    init: f64,
}

const SHAPES: [FunctionShape; 6] = [
    FunctionShape { id: "jaes", base: 0.05, exponent: 0.55, mem: 256.0, init: 0.25 },
    FunctionShape { id: "linpack", base: 0.08, exponent: 0.9, mem: 256.0, init: 0.3 },
    FunctionShape { id: "matmul", base: 0.1, exponent: 0.95, mem: 384.0, init: 0.3 },
    FunctionShape { id: "pypearsons", base: 0.4, exponent: 0.8, mem: 512.0, init: 0.5 },
    FunctionShape { id: "knn", base: 0.2, exponent: 0.7, mem: 256.0, init: 0.4 },
    FunctionShape { id: "kmeans", base: 0.25, exponent: 0.85, mem: 512.0, init: 0.6 },
];

fn function(shape: &FunctionShape) -> FunctionSpec {
    FunctionSpec {
        id: shape.id.into(),
        name: shape.id.to_string(),
        base_exec_time: shape.base,
        ref_cpu: 1.0,
        ref_mem: shape.mem,
        cpu_scaling_exponent: shape.exponent,
        init_time: shape.init,
    }
}

fn workload(name: &str, ids: &[&str], labels: &[&str], edges: &[(usize, usize)]) -> SuiteWorkload {
    let specs: Vec<FunctionSpec> = ids
        .iter()
        .map(|id| function(SHAPES.iter().find(|s| s.id == *id).expect("known shape")))
        .collect();
    let total: f64 = specs.iter().map(|f| f.base_exec_time).sum();
    SuiteWorkload {
        name: name.to_string(),
        pipeline: PipelineSpec {
            id: name.into(),
            functions: specs.iter().map(|f| f.id.clone()).collect(),
            deadline_s: DEADLINE_FACTOR * total,
            target_rate: 1.0,
        },
        functions: specs.into_iter().collect(),
        callgraph: CallGraph::from_labels(labels, edges).expect("suite call graph"),
    }
}

/// Processing: AES encryption, LINPACK, matrix multiply.
pub fn processing() -> SuiteWorkload {
    workload(
        "processing",
        &["jaes", "linpack", "matmul"],
        &[
            "gateway.handler",
            "jaes.main",
            "aes.key_schedule",
            "aes.ctr_encrypt",
            "linpack.main",
            "linpack.dgefa",
            "linpack.dgesl",
            "matmul.main",
            "numpy.dot",
            "storage.put",
        ],
        &[(0, 1), (1, 2), (1, 3), (0, 4), (4, 5), (4, 6), (0, 7), (7, 8), (7, 9)],
    )
}

/// Sensor correlation: Pearson correlation, then k-nearest neighbours.
pub fn sensor_correlation() -> SuiteWorkload {
    workload(
        "sensor-correlation",
        &["pypearsons", "knn"],
        &[
            "gateway.handler",
            "pypearsons.main",
            "sensors.fetch",
            "numpy.corrcoef",
            "knn.main",
            "geo.haversine",
            "heap.select",
            "json.dumps",
        ],
        &[(0, 1), (1, 2), (1, 3), (0, 4), (4, 2), (4, 5), (4, 6), (4, 7)],
    )
}

/// Clustering: k-means over a small batch.
pub fn clustering() -> SuiteWorkload {
    workload(
        "clustering",
        &["kmeans"],
        &[
            "gateway.handler",
            "kmeans.main",
            "storage.get",
            "sklearn.fit",
            "numpy.dot",
            "json.dumps",
        ],
        &[(0, 1), (1, 2), (1, 3), (3, 4), (1, 5)],
    )
}

/// Labels used by random edits: every suite label plus a few library calls.
pub fn edit_alphabet() -> Vec<String> {
    let mut labels: Vec<String> = [processing(), sensor_correlation(), clustering()]
        .iter()
        .flat_map(|w| w.callgraph.vertices().iter().map(|v| v.label.clone()).collect::<Vec<_>>())
        .chain(["log.info", "cache.get", "http.post", "zlib.compress"].map(String::from))
        .collect();
    labels.sort();
    labels.dedup();
    labels
}

impl Default for Suite {
    fn default() -> Self {
        Suite::desk()
    }
}

impl Suite {
    pub fn desk() -> Self {
        let grid = [(512.0, 0.5), (1024.0, 1.0), (2048.0, 2.0), (4096.0, 4.0)]
            .map(|(m, c)| ContainerConfig::new(m, c).expect("valid container"));
        Suite {
            workloads: vec![processing(), sensor_correlation(), clustering()],
            catalog: ConfigurationCatalog::new(grid.to_vec(), ReplicaClassMap::default()).expect("valid catalog"),
            cluster: ClusterSpec::uniform(16, 16.0, 32768.0),
            pricing: PricingScheme::new(RATE_PER_GB_SECOND).expect("valid pricing"),
            datagen: DataGenOptions::default(),
            rates_per_function: 40,
        }
    }

    /// The 1-CPU container of the catalog (or the first one).
    fn reference_container(&self) -> ContainerConfig {
        let grid = &self.catalog.container_grid;
        *grid.iter().find(|c| c.cpus == 1.0).unwrap_or(&grid[0])
    }

    /// Highest training rate for `f`: a little past what the largest class
    /// sustains on the reference container.
    pub fn max_rate(&self, f: &FunctionSpec) -> f64 {
        let t = exec_time(f, &self.reference_container()).expect("suite containers clear the memory floor");
        1.2 * f64::from(self.catalog.class_map.largest()) / t
    }

    /// Evenly spaced training rates in `(0, max_rate]`.
    pub fn training_rates(&self, f: &FunctionSpec) -> Vec<f64> {
        let n = self.rates_per_function;
        let top = self.max_rate(f);
        (1..=n).map(|i| top * i as f64 / n as f64).collect()
    }

    /// Rate range for selection cases on `w`: every function keeps inside
    /// its training range and below what the largest class sustains on
    /// the reference container.
    pub fn selection_rate_range(&self, w: &SuiteWorkload) -> (f64, f64) {
        let cap = w
            .function_specs()
            .map(|f| self.max_rate(f) / 1.2)
            .fold(f64::INFINITY, f64::min);
        (0.05 * cap, 0.95 * cap)
    }

    pub fn workload(&self, name: &str) -> Option<&SuiteWorkload> {
        self.workloads.iter().find(|w| w.name == name)
    }
}

/// One random call-graph edit.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub enum GraphEdit {
    /// New vertex called from an existing one.
    AddCallee { caller: usize, label: String },
    AddEdge { from: usize, to: usize },
    RemoveEdge { from: usize, to: usize },
    Relabel { vertex: usize, label: String },
}

/// Applies `count` random edits, each of which changes the graph.
pub fn perturb<R: Rng>(g: &CallGraph, count: usize, alphabet: &[String], rng: &mut R) -> (CallGraph, Vec<GraphEdit>) {
    let mut g = g.clone();
    let mut applied = Vec::with_capacity(count);
    while applied.len() < count {
        let n = g.vertex_count();
        let edit = match rng.gen_range(0..4) {
            0 => GraphEdit::AddCallee {
                caller: rng.gen_range(0..n),
                label: alphabet.choose(rng).expect("non-empty alphabet").clone(),
            },
            1 => {
                let (from, to) = (rng.gen_range(0..n), rng.gen_range(0..n));
                if from == to || g.has_edge(from, to) || g.has_edge(to, from) {
                    continue;
                }
                GraphEdit::AddEdge { from, to }
            }
            2 => {
                let edges: Vec<(usize, usize)> = g.edges().collect();
                let Some(&(from, to)) = edges.choose(rng) else { continue };
                GraphEdit::RemoveEdge { from, to }
            }
            _ => {
                let vertex = rng.gen_range(0..n);
                let label = alphabet.choose(rng).expect("non-empty alphabet");
                if g.label(vertex) == label {
                    continue;
                }
                GraphEdit::Relabel {
                    vertex,
                    label: label.clone(),
                }
            }
        };
        match &edit {
            GraphEdit::AddCallee { caller, label } => {
                let v = g.add_vertex(label.clone());
                g.add_edge(*caller, v);
            }
            GraphEdit::AddEdge { from, to } => {
                g.add_edge(*from, *to);
            }
            GraphEdit::RemoveEdge { from, to } => {
                g.remove_edge(*from, *to);
            }
            GraphEdit::Relabel { vertex, label } => g.relabel(*vertex, label.clone()),
        }
        applied.push(edit);
    }
    (g, applied)
}

/// Code-size proxy for how much work a call graph does per request.
pub fn graph_work(g: &CallGraph) -> f64 {
    (g.vertex_count() + g.edge_count()) as f64
}

/// A pipeline with the same stages as `w` whose service times scale with
/// the work of `g` relative to `w`'s own call graph.
pub fn variant_for_graph(w: &SuiteWorkload, g: &CallGraph, suffix: &str) -> (PipelineSpec, FunctionSet) {
    let scale = graph_work(g) / graph_work(&w.callgraph);
    let functions: FunctionSet = w
        .function_specs()
        .map(|f| FunctionSpec {
            base_exec_time: f.base_exec_time * scale,
            ..f.clone()
        })
        .collect();
    let pipeline = PipelineSpec {
        id: format!("{}-{suffix}", w.pipeline.id).as_str().into(),
        ..w.pipeline.clone()
    };
    (pipeline, functions)
}

/// Spearman rank correlation with average ranks for ties. `None` when
/// either side is constant or the lengths differ.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut cov = 0.0;
    let (mut vx, mut vy) = (0.0, 0.0);
    for (a, b) in rx.iter().zip(&ry) {
        cov += (a - mx) * (b - my);
        vx += (a - mx).powi(2);
        vy += (b - my).powi(2);
    }
    if vx == 0.0 || vy == 0.0 {
        return None;
    }
    Some(cov / (vx * vy).sqrt())
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..v.len()).collect();
    order.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && v[order[j + 1]] == v[order[i]] {
            j += 1;
        }
        let rank = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            out[k] = rank;
        }
        i = j + 1;
    }
    out
}
