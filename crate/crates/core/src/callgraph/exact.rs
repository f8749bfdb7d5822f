use std::cmp::{Ordering, Reverse};
use std::collections::BinaryHeap;

use super::{CallGraph, GedResult};
use crate::error::{Error, Result};

pub const DEFAULT_EXACT_LIMIT: usize = 6;

/// Target of a g1 vertex in a partial mapping.
const DELETED: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq, Eq)]
struct State {
    /// Mapping for g1 vertices 0..mapping.len().
    mapping: Vec<usize>,
    used: u64,
    cost: u32,
    bound: u32,
}

impl Ord for State {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.cost + self.bound)
            .cmp(&(other.cost + other.bound))
            // deeper states first, then lexicographic mapping for determinism
            .then_with(|| other.mapping.len().cmp(&self.mapping.len()))
            .then_with(|| self.mapping.cmp(&other.mapping))
    }
}

impl PartialOrd for State {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// True edit distance under unit costs for vertex insertion, deletion and
/// relabeling and directed edge insertion and deletion.
///
/// Best-first search over partial mappings of g1's vertices (in index order)
/// onto g2's vertices or deletion. The bound on unmapped vertices is the
/// label-multiset gap between what remains of each graph, which never exceeds
/// the vertex edits still required.
pub fn exact_ged(g1: &CallGraph, g2: &CallGraph, max_vertices: usize) -> Result<GedResult> {
    for g in [g1, g2] {
        if g.vertex_count() > max_vertices {
            return Err(Error::TooLarge {
                vertices: g.vertex_count(),
                limit: max_vertices,
            });
        }
    }
    let (n1, n2) = (g1.vertex_count(), g2.vertex_count());
    assert!(n2 < 64, "mapping mask holds at most 63 vertices");

    let mut heap = BinaryHeap::new();
    heap.push(Reverse(State {
        mapping: Vec::new(),
        used: 0,
        cost: 0,
        bound: remaining_bound(g1, g2, 0, 0),
    }));

    while let Some(Reverse(state)) = heap.pop() {
        if is_complete(&state) {
            return Ok(GedResult {
                distance: f64::from(state.cost),
                is_exact: true,
            });
        }
        let depth = state.mapping.len();
        if depth == n1 {
            // insert every unused g2 vertex
            heap.push(Reverse(close(g2, &state)));
            continue;
        }

        let targets = (0..n2).filter(|t| state.used & (1 << t) == 0).chain(std::iter::once(DELETED));
        for t in targets {
            let mut mapping = state.mapping.clone();
            mapping.push(t);
            let used = if t == DELETED { state.used } else { state.used | (1 << t) };
            let cost = state.cost + extension_cost(g1, g2, &state.mapping, t);
            let bound = remaining_bound(g1, g2, depth + 1, used);
            heap.push(Reverse(State {
                mapping,
                used,
                cost,
                bound,
            }));
        }
    }
    unreachable!("search space always contains a complete mapping")
}

/// Sentinel ending the mapping of a state whose insertions are accounted for.
const CLOSED: usize = usize::MAX - 1;

fn is_complete(state: &State) -> bool {
    state.mapping.last() == Some(&CLOSED)
}

fn close(g2: &CallGraph, state: &State) -> State {
    let n2 = g2.vertex_count();
    let unused = |v: usize| state.used & (1 << v) == 0;
    let inserted_vertices = (0..n2).filter(|&v| unused(v)).count() as u32;
    let inserted_edges = g2.edges().filter(|&(a, b)| unused(a) || unused(b)).count() as u32;
    let mut mapping = state.mapping.clone();
    mapping.push(CLOSED);
    State {
        mapping,
        used: state.used,
        cost: state.cost + inserted_vertices + inserted_edges,
        bound: 0,
    }
}

/// Cost of mapping g1 vertex `mapping.len()` to `target`, counting the vertex
/// operation and every edge between it and already-mapped vertices.
fn extension_cost(g1: &CallGraph, g2: &CallGraph, mapping: &[usize], target: usize) -> u32 {
    let v = mapping.len();
    let mut cost = if target == DELETED {
        1
    } else {
        u32::from(g1.label(v) != g2.label(target))
    };
    for (u, &tu) in mapping.iter().enumerate() {
        let image = |a: usize, b: usize| a != DELETED && b != DELETED && g2.has_edge(a, b);
        cost += u32::from(g1.has_edge(u, v) != image(tu, target));
        cost += u32::from(g1.has_edge(v, u) != image(target, tu));
    }
    cost
}

fn remaining_bound(g1: &CallGraph, g2: &CallGraph, depth: usize, used: u64) -> u32 {
    let mut left: Vec<&str> = (depth..g1.vertex_count()).map(|v| g1.label(v)).collect();
    let mut right: Vec<&str> = (0..g2.vertex_count())
        .filter(|v| used & (1 << v) == 0)
        .map(|v| g2.label(v))
        .collect();
    left.sort_unstable();
    right.sort_unstable();
    let (mut i, mut j, mut common) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        match left[i].cmp(right[j]) {
            Ordering::Less => i += 1,
            Ordering::Greater => j += 1,
            Ordering::Equal => {
                common += 1;
                i += 1;
                j += 1;
            }
        }
    }
    (left.len().max(right.len()) - common) as u32
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_is_zero() {
        let g = CallGraph::from_labels(&["A", "B", "C", "B"], &[(0, 1), (1, 2), (0, 3)]).unwrap();
        let r = exact_ged(&g, &g, DEFAULT_EXACT_LIMIT).unwrap();
        assert_eq!(r.distance, 0.0);
        assert!(r.is_exact);
    }

    #[test]
    fn single_relabel() {
        let a = CallGraph::from_labels(&["A"], &[]).unwrap();
        let b = CallGraph::from_labels(&["B"], &[]).unwrap();
        assert_eq!(exact_ged(&a, &b, DEFAULT_EXACT_LIMIT).unwrap().distance, 1.0);
    }

    #[test]
    fn path_vs_triangle() {
        let path = CallGraph::from_labels(&["A", "B", "C"], &[(0, 1), (1, 2)]).unwrap();
        let tri = CallGraph::from_labels(&["A", "B", "C"], &[(0, 1), (1, 2), (2, 0)]).unwrap();
        assert_eq!(exact_ged(&path, &tri, DEFAULT_EXACT_LIMIT).unwrap().distance, 1.0);
    }

    #[test]
    fn empty_vs_graph_costs_everything() {
        let empty = CallGraph::from_labels::<&str>(&[], &[]).unwrap();
        let g = CallGraph::from_labels(&["A", "B"], &[(0, 1)]).unwrap();
        assert_eq!(exact_ged(&empty, &g, 6).unwrap().distance, 3.0);
        assert_eq!(exact_ged(&g, &empty, 6).unwrap().distance, 3.0);
    }

    #[test]
    fn too_large() {
        let labels: Vec<String> = (0..10).map(|i| format!("L{i}")).collect();
        let big = CallGraph::from_labels(&labels, &[]).unwrap();
        let small = CallGraph::from_labels(&["A"], &[]).unwrap();
        assert!(matches!(
            exact_ged(&big, &small, DEFAULT_EXACT_LIMIT),
            Err(Error::TooLarge { vertices: 10, limit: 6 })
        ));
    }
}
