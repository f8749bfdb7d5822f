//! Functions, containers, configurations, pipelines and clusters, plus the
//! execution-time and cost primitives every other module builds on.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 30 days.
pub const SECONDS_PER_MONTH: f64 = 2_592_000.0;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FunctionId(pub String);

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PipelineId(pub String);

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl fmt::Display for PipelineId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl From<&str> for FunctionId {
    fn from(s: &str) -> Self {
        FunctionId(s.to_string())
    }
}

impl From<&str> for PipelineId {
    fn from(s: &str) -> Self {
        PipelineId(s.to_string())
    }
}

/// A serverless function and its service-time model.
///
/// Service time follows a power law in allocated CPUs around a reference
/// container; memory acts only as a floor below which the function cannot run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FunctionSpec {
    pub id: FunctionId,
    pub name: String,
    /// Seconds per request on the reference container.
    pub base_exec_time: f64,
    pub ref_cpu: f64,
    pub ref_mem: f64,
    pub cpu_scaling_exponent: f64,
    /// Cold-start latency paid once per container.
    pub init_time: f64,
}

impl FunctionSpec {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| v.is_finite() && v > 0.0;
        if !ok(self.base_exec_time) {
            return Err(Error::invalid("function", format!("{}: base_exec_time must be > 0", self.id)));
        }
        if !ok(self.ref_cpu) || !ok(self.ref_mem) {
            return Err(Error::invalid("function", format!("{}: reference container must be positive", self.id)));
        }
        if !(self.cpu_scaling_exponent.is_finite() && self.cpu_scaling_exponent >= 0.0) {
            return Err(Error::invalid("function", format!("{}: cpu_scaling_exponent must be >= 0", self.id)));
        }
        if !(self.init_time.is_finite() && self.init_time >= 0.0) {
            return Err(Error::invalid("function", format!("{}: init_time must be >= 0", self.id)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawContainer")]
pub struct ContainerConfig {
    pub mem_mb: f64,
    pub cpus: f64,
}

#[derive(Deserialize)]
struct RawContainer {
    mem_mb: f64,
    cpus: f64,
}

impl TryFrom<RawContainer> for ContainerConfig {
    type Error = Error;

    fn try_from(raw: RawContainer) -> Result<Self> {
        ContainerConfig::new(raw.mem_mb, raw.cpus)
    }
}

impl ContainerConfig {
    pub fn new(mem_mb: f64, cpus: f64) -> Result<Self> {
        if !(mem_mb.is_finite() && mem_mb > 0.0 && cpus.is_finite() && cpus > 0.0) {
            return Err(Error::invalid("container", format!("mem_mb={mem_mb} cpus={cpus}")));
        }
        Ok(ContainerConfig { mem_mb, cpus })
    }
}

impl fmt::Display for ContainerConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}MB/{}cpu", self.mem_mb, self.cpus)
    }
}

/// Replica count plus the container sizing shared by every replica.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawConfiguration")]
pub struct Configuration {
    pub replicas: u32,
    pub container: ContainerConfig,
}

#[derive(Deserialize)]
struct RawConfiguration {
    replicas: u32,
    container: ContainerConfig,
}

impl TryFrom<RawConfiguration> for Configuration {
    type Error = Error;

    fn try_from(raw: RawConfiguration) -> Result<Self> {
        Configuration::new(raw.replicas, raw.container)
    }
}

impl Configuration {
    pub fn new(replicas: u32, container: ContainerConfig) -> Result<Self> {
        if replicas == 0 {
            return Err(Error::invalid("configuration", "replicas must be >= 1"));
        }
        Ok(Configuration { replicas, container })
    }
}

impl fmt::Display for Configuration {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}", self.replicas, self.container)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineSpec {
    pub id: PipelineId,
    pub functions: Vec<FunctionId>,
    pub deadline_s: f64,
    /// Requests per second.
    pub target_rate: f64,
}

impl PipelineSpec {
    pub fn validate(&self) -> Result<()> {
        if self.functions.is_empty() {
            return Err(Error::invalid("pipeline", format!("{}: no functions", self.id)));
        }
        if !(self.deadline_s.is_finite() && self.deadline_s > 0.0) {
            return Err(Error::invalid("pipeline", format!("{}: deadline must be > 0", self.id)));
        }
        if !(self.target_rate.is_finite() && self.target_rate > 0.0) {
            return Err(Error::invalid("pipeline", format!("{}: target_rate must be > 0", self.id)));
        }
        Ok(())
    }
}

/// Lookup table of function definitions, keyed by id.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FunctionSet(BTreeMap<FunctionId, FunctionSpec>);

impl FunctionSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, f: FunctionSpec) -> Result<()> {
        f.validate()?;
        self.0.insert(f.id.clone(), f);
        Ok(())
    }

    pub fn get(&self, id: &FunctionId) -> Result<&FunctionSpec> {
        self.0.get(id).ok_or_else(|| Error::Missing {
            what: "function",
            id: id.0.clone(),
        })
    }

    pub fn iter(&self) -> impl Iterator<Item = &FunctionSpec> {
        self.0.values()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromIterator<FunctionSpec> for FunctionSet {
    fn from_iter<I: IntoIterator<Item = FunctionSpec>>(iter: I) -> Self {
        FunctionSet(iter.into_iter().map(|f| (f.id.clone(), f)).collect())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Node {
    pub cpus: f64,
    pub mem_mb: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub nodes: Vec<Node>,
}

impl ClusterSpec {
    pub fn uniform(count: usize, cpus: f64, mem_mb: f64) -> Self {
        ClusterSpec {
            nodes: vec![Node { cpus, mem_mb }; count],
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::invalid("cluster", "no nodes"));
        }
        if self
            .nodes
            .iter()
            .any(|n| !(n.cpus > 0.0 && n.mem_mb > 0.0 && n.cpus.is_finite() && n.mem_mb.is_finite()))
        {
            return Err(Error::invalid("cluster", "node capacities must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricingScheme {
    pub rate_per_gb_second: f64,
    #[serde(default = "default_seconds_per_month")]
    pub seconds_per_month: f64,
}

fn default_seconds_per_month() -> f64 {
    SECONDS_PER_MONTH
}

impl PricingScheme {
    pub fn new(rate_per_gb_second: f64) -> Result<Self> {
        if !(rate_per_gb_second.is_finite() && rate_per_gb_second > 0.0) {
            return Err(Error::invalid("pricing", "rate_per_gb_second must be > 0"));
        }
        Ok(PricingScheme {
            rate_per_gb_second,
            seconds_per_month: SECONDS_PER_MONTH,
        })
    }
}

/// Seconds to serve one request of `f` on container `w`.
pub fn exec_time(f: &FunctionSpec, w: &ContainerConfig) -> Result<f64> {
    if w.mem_mb < f.ref_mem {
        return Err(Error::InsufficientMemory {
            function: f.id.0.clone(),
            required_mb: f.ref_mem,
            available_mb: w.mem_mb,
        });
    }
    Ok(f.base_exec_time * (f.ref_cpu / w.cpus).powf(f.cpu_scaling_exponent))
}

/// A single container must fit on one node; replicas are packed separately.
pub fn fits_cluster(cfg: &Configuration, cluster: &ClusterSpec) -> bool {
    cluster
        .nodes
        .iter()
        .any(|n| n.cpus >= cfg.container.cpus && n.mem_mb >= cfg.container.mem_mb)
}

/// Cost of keeping every replica warm for a month.
pub fn monthly_cost(cfg: &Configuration, pricing: &PricingScheme) -> f64 {
    f64::from(cfg.replicas) * (cfg.container.mem_mb / 1024.0) * pricing.seconds_per_month * pricing.rate_per_gb_second
}

#[cfg(test)]
mod tests {
    use super::*;

    fn func(base: f64, exp: f64) -> FunctionSpec {
        FunctionSpec {
            id: "f".into(),
            name: "f".into(),
            base_exec_time: base,
            ref_cpu: 1.0,
            ref_mem: 256.0,
            cpu_scaling_exponent: exp,
            init_time: 0.0,
        }
    }

    fn c(mem: f64, cpus: f64) -> ContainerConfig {
        ContainerConfig::new(mem, cpus).unwrap()
    }

    #[test]
    fn exec_time_scaling() {
        assert_eq!(exec_time(&func(0.1, 1.0), &c(512.0, 1.0)).unwrap(), 0.1);
        assert!((exec_time(&func(0.1, 1.0), &c(512.0, 2.0)).unwrap() - 0.05).abs() < 1e-15);
        assert!((exec_time(&func(0.1, 0.5), &c(512.0, 4.0)).unwrap() - 0.05).abs() < 1e-15);
    }

    #[test]
    fn exec_time_memory_floor() {
        let f = func(0.1, 1.0);
        assert!(matches!(exec_time(&f, &c(128.0, 1.0)), Err(Error::InsufficientMemory { .. })));
        assert_eq!(exec_time(&f, &c(256.0, 1.0)).unwrap(), exec_time(&f, &c(8192.0, 1.0)).unwrap());
    }

    #[test]
    fn cluster_fit() {
        let cluster = ClusterSpec::uniform(2, 8.0, 16384.0);
        let cfg = |cpus, mem| Configuration::new(1, c(mem, cpus)).unwrap();
        assert!(fits_cluster(&cfg(4.0, 4096.0), &cluster));
        assert!(!fits_cluster(&cfg(9.0, 1024.0), &cluster));
        assert!(fits_cluster(&cfg(8.0, 16384.0), &cluster));
    }

    #[test]
    fn cost() {
        let p = PricingScheme::new(1.0).unwrap();
        assert_eq!(monthly_cost(&Configuration::new(1, c(1024.0, 1.0)).unwrap(), &p), 2_592_000.0);
        let p = PricingScheme::new(0.000017).unwrap();
        let v = monthly_cost(&Configuration::new(30, c(2048.0, 1.0)).unwrap(), &p);
        assert!((v - 2643.84).abs() < 1e-6, "{v}");
        assert!(Configuration::new(0, c(1024.0, 1.0)).is_err());
    }

    #[test]
    fn invalid_values_rejected() {
        assert!(ContainerConfig::new(0.0, 1.0).is_err());
        assert!(ContainerConfig::new(128.0, -1.0).is_err());
        assert!(PricingScheme::new(0.0).is_err());
        assert!(ClusterSpec { nodes: vec![] }.validate().is_err());
        let mut f = func(0.1, 1.0);
        f.init_time = -1.0;
        assert!(f.validate().is_err());
        let p = PipelineSpec {
            id: "p".into(),
            functions: vec![],
            deadline_s: 1.0,
            target_rate: 1.0,
        };
        assert!(p.validate().is_err());
        let bad: std::result::Result<Configuration, _> =
            serde_json::from_str(r#"{"replicas":0,"container":{"mem_mb":1,"cpus":1}}"#);
        assert!(bad.is_err());
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn exec_time_non_increasing_in_cpus(base in 0.001f64..5.0, exp in 0.0f64..2.0,
                                                a in 0.1f64..16.0, b in 0.1f64..16.0, mem in 256.0f64..8192.0) {
                let f = func(base, exp);
                let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                let t_lo = exec_time(&f, &c(mem, lo)).unwrap();
                let t_hi = exec_time(&f, &c(mem, hi)).unwrap();
                prop_assert!(t_hi <= t_lo);
                prop_assert_eq!(t_lo, exec_time(&f, &c(mem * 2.0, lo)).unwrap());
            }

            #[test]
            fn cost_strictly_increasing(r in 1u32..100, mem in 1.0f64..65536.0) {
                let p = PricingScheme::new(0.000017).unwrap();
                let base = monthly_cost(&Configuration::new(r, c(mem, 1.0)).unwrap(), &p);
                prop_assert!(monthly_cost(&Configuration::new(r + 1, c(mem, 1.0)).unwrap(), &p) > base);
                prop_assert!(monthly_cost(&Configuration::new(r, c(mem * 1.5, 1.0)).unwrap(), &p) > base);
            }

            #[test]
            fn fit_is_monotone(cpus in 0.1f64..16.0, mem in 1.0f64..32768.0, shrink in 0.0f64..1.0) {
                let cluster = ClusterSpec::uniform(3, 8.0, 16384.0);
                let big = Configuration::new(1, c(mem, cpus)).unwrap();
                let small = Configuration::new(1, c(mem * (1.0 - shrink).max(0.01), cpus * (1.0 - shrink).max(0.01))).unwrap();
                if fits_cluster(&big, &cluster) {
                    prop_assert!(fits_cluster(&small, &cluster));
                }
            }
        }
    }
}
