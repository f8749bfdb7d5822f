//! Known pipelines and call-graph matching for pipelines with no history.
//!
//! A registry directory holds `index.json` (entry directories in insertion
//! order) and one directory per entry with `entry.json`, `callgraph.json`
//! and one model file per function.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::callgraph::{approx_ged, CallGraph, GedResult};
use crate::error::{Error, Result};
use crate::formats::{read_json, resolve, write_json, PipelineDescriptor};
use crate::model::{FunctionId, FunctionSet, PipelineId, PipelineSpec};
use crate::predictor::PredictionModel;
use crate::provision::{select_configuration, ProvisionContext, SelectionReport};

pub const DEFAULT_THRESHOLD: f64 = 5.0;

#[derive(Debug, Clone, PartialEq)]
pub struct KnownPipelineEntry {
    pub pipeline: PipelineSpec,
    pub functions: FunctionSet,
    pub callgraph: CallGraph,
    pub models: BTreeMap<FunctionId, PredictionModel>,
    /// Requests/second measured at the pipeline's selected configuration.
    pub observed_throughput: f64,
}

impl KnownPipelineEntry {
    pub fn validate(&self) -> Result<()> {
        self.pipeline.validate()?;
        for id in &self.pipeline.functions {
            self.functions.get(id)?;
            self.models
                .get(id)
                .ok_or_else(|| Error::Missing {
                    what: "model",
                    id: format!("{}/{id}", self.pipeline.id),
                })?
                .check()?;
        }
        if !(self.observed_throughput.is_finite() && self.observed_throughput > 0.0) {
            return Err(Error::invalid(
                "registry entry",
                format!("{}: observed throughput must be > 0", self.pipeline.id),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchDecision {
    pub matched: Option<PipelineId>,
    /// Distance to the matched entry, or the smallest distance seen.
    pub distance: GedResult,
    pub threshold_used: f64,
    /// Every entry with its distance, most similar first.
    pub ranking: Vec<(PipelineId, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum AgnosticOutcome {
    Provisioned {
        decision: MatchDecision,
        report: SelectionReport,
    },
    /// Nothing within the threshold; the caller falls back to a grid search
    /// or a default configuration.
    NoSimilarPipeline { decision: MatchDecision },
}

impl AgnosticOutcome {
    pub fn decision(&self) -> &MatchDecision {
        match self {
            AgnosticOutcome::Provisioned { decision, .. } | AgnosticOutcome::NoSimilarPipeline { decision } => decision,
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
struct EntryDescriptor {
    pipeline: PipelineDescriptor,
    models: BTreeMap<FunctionId, PathBuf>,
    observed_throughput: f64,
}

#[derive(Debug, Default)]
pub struct Registry {
    entries: Vec<KnownPipelineEntry>,
    dir: Option<PathBuf>,
}

impl Registry {
    /// A registry that is never written to disk.
    pub fn in_memory() -> Self {
        Registry::default()
    }

    /// Opens (creating if needed) a registry directory.
    pub fn open(dir: impl Into<PathBuf>) -> Result<Self> {
        let dir = dir.into();
        std::fs::create_dir_all(&dir).map_err(|e| Error::io(&dir, e))?;
        let index = dir.join("index.json");
        let mut registry = Registry {
            entries: Vec::new(),
            dir: Some(dir.clone()),
        };
        if !index.exists() {
            return Ok(registry);
        }
        let names: Vec<String> = read_json(&index)?;
        for name in names {
            registry.entries.push(load_entry(&dir.join(name).join("entry.json"))?);
        }
        Ok(registry)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Entries in insertion order.
    pub fn iter(&self) -> impl Iterator<Item = &KnownPipelineEntry> {
        self.entries.iter()
    }

    pub fn get(&self, id: &PipelineId) -> Option<&KnownPipelineEntry> {
        self.entries.iter().find(|e| &e.pipeline.id == id)
    }

    /// Adds an entry and persists it when the registry has a directory.
    /// Returns the new size.
    pub fn register(&mut self, entry: KnownPipelineEntry) -> Result<usize> {
        entry.validate()?;
        if self.get(&entry.pipeline.id).is_some() {
            return Err(Error::DuplicateId(entry.pipeline.id.0.clone()));
        }
        if let Some(dir) = &self.dir {
            let name = entry_dir_name(self.entries.len(), &entry.pipeline.id);
            save_entry(&dir.join(&name), &entry)?;
            let mut names: Vec<String> = if dir.join("index.json").exists() {
                read_json(dir.join("index.json"))?
            } else {
                Vec::new()
            };
            names.push(name);
            write_json(dir.join("index.json"), &names)?;
        }
        self.entries.push(entry);
        Ok(self.entries.len())
    }

    /// Approximate GED against every entry; the closest entry wins if it is
    /// within `threshold`. Ties go to the earlier entry.
    pub fn find_most_similar(&self, g: &CallGraph, threshold: f64) -> Result<MatchDecision> {
        if self.entries.is_empty() {
            return Err(Error::EmptyRegistry);
        }
        if !(threshold >= 0.0) {
            return Err(Error::invalid("threshold", "must be >= 0"));
        }
        let distances: Vec<GedResult> = self.entries.par_iter().map(|e| approx_ged(g, &e.callgraph)).collect();
        let mut order: Vec<usize> = (0..distances.len()).collect();
        // stable sort keeps insertion order among ties
        order.sort_by(|&a, &b| distances[a].distance.total_cmp(&distances[b].distance));
        let best = order[0];
        let matched = (distances[best].distance <= threshold).then(|| self.entries[best].pipeline.id.clone());
        Ok(MatchDecision {
            matched,
            distance: distances[best],
            threshold_used: threshold,
            ranking: order
                .iter()
                .map(|&i| (self.entries[i].pipeline.id.clone(), distances[i].distance))
                .collect(),
        })
    }

    /// Provisions a pipeline known only by its call graph, reusing the
    /// models of the most similar registered pipeline. The returned report
    /// is keyed by the matched pipeline's functions.
    pub fn provision_agnostic(
        &self,
        g: &CallGraph,
        target_rate: f64,
        deadline_s: f64,
        threshold: f64,
        ctx: AgnosticContext<'_>,
    ) -> Result<AgnosticOutcome> {
        let decision = self.find_most_similar(g, threshold)?;
        let Some(id) = &decision.matched else {
            return Ok(AgnosticOutcome::NoSimilarPipeline { decision });
        };
        let entry = self.get(id).expect("matched entry exists");
        let pipeline = PipelineSpec {
            deadline_s,
            target_rate,
            ..entry.pipeline.clone()
        };
        let report = select_configuration(
            ProvisionContext {
                pipeline: &pipeline,
                functions: &entry.functions,
                catalog: ctx.catalog,
                cluster: ctx.cluster,
                pricing: ctx.pricing,
            },
            &entry.models,
            target_rate,
        )?;
        Ok(AgnosticOutcome::Provisioned { decision, report })
    }
}

/// Catalog, cluster and pricing for agnostic provisioning.
#[derive(Debug, Clone, Copy)]
pub struct AgnosticContext<'a> {
    pub catalog: &'a crate::provision::ConfigurationCatalog,
    pub cluster: &'a crate::model::ClusterSpec,
    pub pricing: &'a crate::model::PricingScheme,
}

fn entry_dir_name(index: usize, id: &PipelineId) -> String {
    let safe: String = id
        .0
        .chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '-' || c == '_' { c } else { '_' })
        .collect();
    format!("{index:03}-{safe}")
}

fn save_entry(dir: &Path, entry: &KnownPipelineEntry) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_json(dir.join("callgraph.json"), &entry.callgraph)?;
    let mut models = BTreeMap::new();
    for (i, id) in entry.pipeline.functions.iter().enumerate() {
        let file = PathBuf::from(format!("model-{i}.json"));
        entry.models[id].save(dir.join(&file))?;
        models.insert(id.clone(), file);
    }
    let mut pipeline = PipelineDescriptor::from_parts(&entry.pipeline, &entry.functions)?;
    pipeline.callgraph = Some(PathBuf::from("callgraph.json"));
    write_json(
        dir.join("entry.json"),
        &EntryDescriptor {
            pipeline,
            models,
            observed_throughput: entry.observed_throughput,
        },
    )
}

fn load_entry(path: &Path) -> Result<KnownPipelineEntry> {
    let d: EntryDescriptor = read_json(path)?;
    let graph_path = d.pipeline.callgraph.as_ref().ok_or_else(|| Error::Missing {
        what: "call graph",
        id: d.pipeline.id.0.clone(),
    })?;
    let callgraph = CallGraph::load(resolve(path, graph_path))?;
    let mut models = BTreeMap::new();
    for (id, file) in &d.models {
        models.insert(id.clone(), PredictionModel::load(resolve(path, file))?);
    }
    let entry = KnownPipelineEntry {
        pipeline: d.pipeline.spec(),
        functions: d.pipeline.function_set()?,
        callgraph,
        models,
        observed_throughput: d.observed_throughput,
    };
    entry.validate()?;
    Ok(entry)
}
