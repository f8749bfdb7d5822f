//! JSON descriptors shared by the command-line tools and the registry.
//!
//! | file | shape |
//! |------|-------|
//! | pipeline | `{"id", "functions": [FunctionSpec], "deadline_s", "target_rate", "callgraph"?}` |
//! | cluster | `{"nodes": [{"cpus", "mem_mb"}]}` |
//! | catalog | `{"container_grid": [{"mem_mb", "cpus"}], "class_map": [5, 10, ...]}` |
//! | workload | `{"rate", "duration_s", "arrival_kind": "uniform"\|"poisson", "seed"}` |
//! | pricing | `{"rate_per_gb_second", "seconds_per_month"?}` |
//! | call graph | `{"vertices": [{"id", "label"}], "edges": [[from, to]]}` |
//!
//! Relative paths inside a descriptor resolve against the descriptor's
//! directory.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{FunctionSet, FunctionSpec, PipelineId, PipelineSpec};

pub fn read_json<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::json(path, e))
}

/// Pretty-printed with a trailing newline.
pub fn write_json<T: Serialize + ?Sized>(path: impl AsRef<Path>, value: &T) -> Result<()> {
    let path = path.as_ref();
    let text = serde_json::to_string_pretty(value).map_err(|e| Error::json(path, e))?;
    std::fs::write(path, text + "\n").map_err(|e| Error::io(path, e))
}

pub(crate) fn resolve(base: &Path, relative: &Path) -> PathBuf {
    if relative.is_absolute() {
        relative.to_path_buf()
    } else {
        base.parent().unwrap_or(Path::new(".")).join(relative)
    }
}

/// A pipeline together with the definitions of its functions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineDescriptor {
    pub id: PipelineId,
    pub functions: Vec<FunctionSpec>,
    pub deadline_s: f64,
    pub target_rate: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub callgraph: Option<PathBuf>,
}

impl PipelineDescriptor {
    pub fn from_parts(pipeline: &PipelineSpec, functions: &FunctionSet) -> Result<Self> {
        Ok(PipelineDescriptor {
            id: pipeline.id.clone(),
            functions: pipeline
                .functions
                .iter()
                .map(|id| functions.get(id).cloned())
                .collect::<Result<_>>()?,
            deadline_s: pipeline.deadline_s,
            target_rate: pipeline.target_rate,
            callgraph: None,
        })
    }

    pub fn spec(&self) -> PipelineSpec {
        PipelineSpec {
            id: self.id.clone(),
            functions: self.functions.iter().map(|f| f.id.clone()).collect(),
            deadline_s: self.deadline_s,
            target_rate: self.target_rate,
        }
    }

    pub fn function_set(&self) -> Result<FunctionSet> {
        let mut set = FunctionSet::new();
        for f in &self.functions {
            if set.get(&f.id).is_ok() {
                return Err(Error::invalid("pipeline", format!("{}: function {} listed twice", self.id, f.id)));
            }
            set.insert(f.clone())?;
        }
        Ok(set)
    }

    /// Loads and validates; a relative `callgraph` path is made absolute.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let mut d: PipelineDescriptor = read_json(path)?;
        d.spec().validate()?;
        d.function_set()?;
        d.callgraph = d.callgraph.map(|p| resolve(path, &p));
        Ok(d)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pipeline_descriptor_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        std::fs::write(
            &path,
            r#"{"id":"p","deadline_s":1.5,"target_rate":20,"callgraph":"g.json",
               "functions":[{"id":"a","name":"A","base_exec_time":0.1,"ref_cpu":1,"ref_mem":128,
                             "cpu_scaling_exponent":1,"init_time":0.2}]}"#,
        )
        .unwrap();
        let d = PipelineDescriptor::load(&path).unwrap();
        assert_eq!(d.spec().functions, vec!["a".into()]);
        assert_eq!(d.callgraph.as_deref(), Some(dir.path().join("g.json").as_path()));
        let back = PipelineDescriptor::from_parts(&d.spec(), &d.function_set().unwrap()).unwrap();
        assert_eq!(back.functions, d.functions);
    }

    #[test]
    fn duplicate_function_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.json");
        let f = r#"{"id":"a","name":"A","base_exec_time":0.1,"ref_cpu":1,"ref_mem":128,"cpu_scaling_exponent":1,"init_time":0.2}"#;
        std::fs::write(&path, format!(r#"{{"id":"p","deadline_s":1,"target_rate":1,"functions":[{f},{f}]}}"#)).unwrap();
        assert!(PipelineDescriptor::load(&path).is_err());
    }
}
