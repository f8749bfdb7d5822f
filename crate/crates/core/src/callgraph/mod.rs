//! Labeled call graphs and graph edit distance.
//!
//! [`approx_ged`] decomposes both graphs into star structures (a vertex plus
//! the multiset of its neighbours' labels) and solves a minimum-cost
//! assignment between the two star multisets. [`exact_ged`] is an A* search
//! over vertex mappings, only usable on very small graphs.

mod assignment;
mod exact;
mod star;

use std::collections::{BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use assignment::{min_cost_assignment, Assignment};
pub use exact::{exact_ged, DEFAULT_EXACT_LIMIT};
pub use star::{approx_ged, build_stars, star_distance, StarStructure, DUMMY_LABEL};

/// A graph edit distance together with whether it is the true minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GedResult {
    pub distance: f64,
    pub is_exact: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Vertex {
    pub id: String,
    pub label: String,
}

/// Directed graph of function invocations with labeled vertices.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "RawCallGraph", into = "RawCallGraph")]
pub struct CallGraph {
    vertices: Vec<Vertex>,
    /// (from, to) by vertex index.
    edges: BTreeSet<(usize, usize)>,
}

#[derive(Serialize, Deserialize)]
struct RawCallGraph {
    vertices: Vec<Vertex>,
    #[serde(default)]
    edges: Vec<(String, String)>,
}

impl TryFrom<RawCallGraph> for CallGraph {
    type Error = Error;

    fn try_from(raw: RawCallGraph) -> Result<Self> {
        CallGraph::new(raw.vertices, raw.edges)
    }
}

impl From<CallGraph> for RawCallGraph {
    fn from(g: CallGraph) -> Self {
        let edges = g
            .edges
            .iter()
            .map(|&(a, b)| (g.vertices[a].id.clone(), g.vertices[b].id.clone()))
            .collect();
        RawCallGraph {
            vertices: g.vertices,
            edges,
        }
    }
}

impl CallGraph {
    pub fn new<S: AsRef<str>>(vertices: Vec<Vertex>, edges: Vec<(S, S)>) -> Result<Self> {
        let mut index = HashMap::with_capacity(vertices.len());
        for (i, v) in vertices.iter().enumerate() {
            if v.label.is_empty() {
                return Err(Error::invalid("call graph", format!("vertex {} has an empty label", v.id)));
            }
            if index.insert(v.id.as_str(), i).is_some() {
                return Err(Error::invalid("call graph", format!("duplicate vertex id {}", v.id)));
            }
        }
        let mut set = BTreeSet::new();
        for (a, b) in &edges {
            let (a, b) = (a.as_ref(), b.as_ref());
            let lookup = |id: &str| {
                index
                    .get(id)
                    .copied()
                    .ok_or_else(|| Error::invalid("call graph", format!("edge references unknown vertex {id}")))
            };
            let (from, to) = (lookup(a)?, lookup(b)?);
            if from == to {
                return Err(Error::invalid("call graph", format!("self-loop on {a}")));
            }
            if !set.insert((from, to)) {
                return Err(Error::invalid("call graph", format!("duplicate edge {a}->{b}")));
            }
        }
        Ok(CallGraph { vertices, edges: set })
    }

    /// Builds a graph whose vertex ids are their positions.
    pub fn from_labels<S: AsRef<str>>(labels: &[S], edges: &[(usize, usize)]) -> Result<Self> {
        let vertices = labels
            .iter()
            .enumerate()
            .map(|(i, l)| Vertex {
                id: format!("v{i}"),
                label: l.as_ref().to_string(),
            })
            .collect();
        let edges = edges.iter().map(|&(a, b)| (format!("v{a}"), format!("v{b}"))).collect();
        CallGraph::new(vertices, edges)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::json(path, e))
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> &[Vertex] {
        &self.vertices
    }

    pub fn label(&self, v: usize) -> &str {
        &self.vertices[v].label
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.edges.iter().copied()
    }

    pub fn has_edge(&self, from: usize, to: usize) -> bool {
        self.edges.contains(&(from, to))
    }

    /// Neighbours of `v` with edge direction ignored, each listed once.
    pub fn undirected_neighbors(&self, v: usize) -> Vec<usize> {
        let mut out: BTreeSet<usize> = BTreeSet::new();
        for &(a, b) in &self.edges {
            if a == v {
                out.insert(b);
            } else if b == v {
                out.insert(a);
            }
        }
        out.into_iter().collect()
    }

    pub fn add_vertex(&mut self, label: impl Into<String>) -> usize {
        let mut n = self.vertices.len();
        let taken: BTreeSet<&str> = self.vertices.iter().map(|v| v.id.as_str()).collect();
        while taken.contains(format!("v{n}").as_str()) {
            n += 1;
        }
        self.vertices.push(Vertex {
            id: format!("v{n}"),
            label: label.into(),
        });
        self.vertices.len() - 1
    }

    /// Returns false when the edge already exists or would be a self-loop.
    pub fn add_edge(&mut self, from: usize, to: usize) -> bool {
        from != to && from < self.vertices.len() && to < self.vertices.len() && self.edges.insert((from, to))
    }

    pub fn remove_edge(&mut self, from: usize, to: usize) -> bool {
        self.edges.remove(&(from, to))
    }

    pub fn relabel(&mut self, v: usize, label: impl Into<String>) {
        let label = label.into();
        assert!(!label.is_empty(), "labels must be non-empty");
        self.vertices[v].label = label;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_edges() {
        let v = |id: &str| Vertex {
            id: id.into(),
            label: "L".into(),
        };
        assert!(CallGraph::new(vec![v("a")], vec![("a", "a")]).is_err());
        assert!(CallGraph::new(vec![v("a"), v("b")], vec![("a", "b"), ("a", "b")]).is_err());
        assert!(CallGraph::new(vec![v("a")], vec![("a", "z")]).is_err());
        assert!(CallGraph::new(vec![v("a"), v("a")], Vec::<(&str, &str)>::new()).is_err());
        // opposite directions are distinct edges
        assert!(CallGraph::new(vec![v("a"), v("b")], vec![("a", "b"), ("b", "a")]).is_ok());
    }

    #[test]
    fn json_round_trip() {
        let text = r#"{"vertices":[{"id":"main","label":"handler"},{"id":"k","label":"kmeans"}],"edges":[["main","k"]]}"#;
        let g: CallGraph = serde_json::from_str(text).unwrap();
        assert_eq!(g.vertex_count(), 2);
        assert!(g.has_edge(0, 1));
        let back: CallGraph = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn edits() {
        let mut g = CallGraph::from_labels(&["A", "B"], &[(0, 1)]).unwrap();
        let c = g.add_vertex("C");
        assert!(g.add_edge(1, c));
        assert!(!g.add_edge(1, c));
        assert!(!g.add_edge(c, c));
        assert_eq!(g.undirected_neighbors(1), vec![0, 2]);
        assert!(g.remove_edge(0, 1));
        assert_eq!(g.undirected_neighbors(1), vec![2]);
    }
}
