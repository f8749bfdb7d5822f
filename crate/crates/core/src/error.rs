use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },

    #[error("function {function} needs {required_mb} MB but container has {available_mb} MB")]
    InsufficientMemory {
        function: String,
        required_mb: f64,
        available_mb: f64,
    },

    #[error("container ({cpus} cpus, {mem_mb} MB) does not fit any cluster node")]
    DoesNotFitCluster { cpus: f64, mem_mb: f64 },

    #[error("could not pack {replicas} replicas onto the cluster")]
    PackingFailed { replicas: usize },

    #[error("graph has {vertices} vertices, exact search limited to {limit}")]
    TooLarge { vertices: usize, limit: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("degenerate dataset: {0}")]
    DegenerateDataset(String),

    #[error("duplicate pipeline id {0}")]
    DuplicateId(String),

    #[error("registry is empty")]
    EmptyRegistry,

    #[error("no feasible configuration for {0}")]
    NoFeasibleConfiguration(String),

    #[error("baseline throughput is zero")]
    ZeroBaseline,

    #[error("missing {what}: {id}")]
    Missing { what: &'static str, id: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("{path}: {source}")]
    Json {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("acceptance failures: {0}")]
    AcceptanceFailed(String),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn json(path: impl Into<PathBuf>, source: serde_json::Error) -> Self {
        Error::Json {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 2 data error, 3 infeasible, 4 size limit, 1 other.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Invalid { .. }
            | Error::InsufficientMemory { .. }
            | Error::DimensionMismatch(_)
            | Error::DegenerateDataset(_)
            | Error::DuplicateId(_)
            | Error::Missing { .. }
            | Error::Json { .. }
            | Error::Csv(_)
            | Error::ZeroBaseline => 2,
            Error::NoFeasibleConfiguration(_)
            | Error::DoesNotFitCluster { .. }
            | Error::PackingFailed { .. } => 3,
            Error::TooLarge { .. } => 4,
            Error::EmptyRegistry | Error::Io { .. } | Error::AcceptanceFailed(_) => 1,
        }
    }
}
