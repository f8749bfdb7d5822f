//! Training datasets as CSV: `mem_mb,cpus,request_rate,replica_label`, where
//! the label is a replica count from the class map.

use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{FeatureVector, ReplicaClassMap, TrainingSample};
use crate::error::{Error, Result};

#[derive(Debug, Serialize, Deserialize)]
struct Row {
    mem_mb: f64,
    cpus: f64,
    request_rate: f64,
    replica_label: u32,
}

pub fn write_dataset(path: impl AsRef<Path>, samples: &[TrainingSample], class_map: &ReplicaClassMap) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    for s in samples {
        w.serialize(Row {
            mem_mb: s.features.mem_mb,
            cpus: s.features.cpus,
            request_rate: s.features.request_rate,
            replica_label: class_map.replicas(s.label),
        })?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// An empty file (or header only) yields an empty vector.
pub fn read_dataset(path: impl AsRef<Path>, class_map: &ReplicaClassMap) -> Result<Vec<TrainingSample>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    if text.trim().is_empty() {
        return Ok(Vec::new());
    }
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let mut out = Vec::new();
    for (line, row) in reader.deserialize::<Row>().enumerate() {
        let row = row?;
        let features = FeatureVector {
            mem_mb: row.mem_mb,
            cpus: row.cpus,
            request_rate: row.request_rate,
        };
        if !features.is_finite() {
            return Err(Error::invalid("dataset", format!("row {}: non-finite feature", line + 1)));
        }
        let label = class_map.index_of(row.replica_label).ok_or_else(|| {
            Error::invalid(
                "dataset",
                format!("row {}: replica label {} not in class map {:?}", line + 1, row.replica_label, class_map.classes()),
            )
        })?;
        out.push(TrainingSample { features, label });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("d.csv");
        let map = ReplicaClassMap::default();
        let samples = vec![
            TrainingSample {
                features: FeatureVector { mem_mb: 512.0, cpus: 0.5, request_rate: 12.5 },
                label: 0,
            },
            TrainingSample {
                features: FeatureVector { mem_mb: 2048.0, cpus: 2.0, request_rate: 80.0 },
                label: 5,
            },
        ];
        write_dataset(&path, &samples, &map).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("mem_mb,cpus,request_rate,replica_label\n"));
        assert!(text.contains(",30\n"));
        assert_eq!(read_dataset(&path, &map).unwrap(), samples);

        std::fs::write(&path, "").unwrap();
        assert!(read_dataset(&path, &map).unwrap().is_empty());

        std::fs::write(&path, "mem_mb,cpus,request_rate,replica_label\n1,1,1,7\n").unwrap();
        assert!(read_dataset(&path, &map).is_err());
    }
}
