use serde::{Deserialize, Serialize};

use super::{min_cost_assignment, CallGraph, GedResult};

/// Center label of padding stars. Real vertices never carry an empty label,
/// so a dummy mismatches every real star.
pub const DUMMY_LABEL: &str = "";

/// A vertex label with the sorted multiset of its neighbours' labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct StarStructure {
    pub center_label: String,
    pub neighbor_labels: Vec<String>,
}

impl StarStructure {
    pub fn new(center: impl Into<String>, neighbors: impl IntoIterator<Item = impl Into<String>>) -> Self {
        let mut neighbor_labels: Vec<String> = neighbors.into_iter().map(Into::into).collect();
        neighbor_labels.sort();
        StarStructure {
            center_label: center.into(),
            neighbor_labels,
        }
    }

    fn dummy() -> Self {
        StarStructure {
            center_label: DUMMY_LABEL.to_string(),
            neighbor_labels: Vec::new(),
        }
    }

    pub fn degree(&self) -> usize {
        self.neighbor_labels.len()
    }
}

/// One star per vertex over the undirected version of `g`, sorted.
pub fn build_stars(g: &CallGraph) -> Vec<StarStructure> {
    let mut stars: Vec<StarStructure> = (0..g.vertex_count())
        .map(|v| {
            StarStructure::new(
                g.label(v),
                g.undirected_neighbors(v).into_iter().map(|u| g.label(u).to_string()),
            )
        })
        .collect();
    stars.sort();
    stars
}

/// Size of the multiset intersection of two sorted label lists.
fn sorted_intersection(a: &[String], b: &[String]) -> usize {
    let (mut i, mut j, mut n) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                n += 1;
                i += 1;
                j += 1;
            }
        }
    }
    n
}

/// Center mismatch + degree gap + neighbour-multiset gap.
pub fn star_distance(s1: &StarStructure, s2: &StarStructure) -> f64 {
    let label = usize::from(s1.center_label != s2.center_label);
    let (d1, d2) = (s1.degree(), s2.degree());
    let degree = d1.abs_diff(d2);
    let multiset = d1.max(d2) - sorted_intersection(&s1.neighbor_labels, &s2.neighbor_labels);
    (label + degree + multiset) as f64
}

/// Star-assignment approximation of the graph edit distance.
pub fn approx_ged(g1: &CallGraph, g2: &CallGraph) -> GedResult {
    let mut s1 = build_stars(g1);
    let mut s2 = build_stars(g2);
    let n = s1.len().max(s2.len());
    s1.resize_with(n, StarStructure::dummy);
    s2.resize_with(n, StarStructure::dummy);
    let cost: Vec<Vec<f64>> = s1
        .iter()
        .map(|a| s2.iter().map(|b| star_distance(a, b)).collect())
        .collect();
    GedResult {
        distance: min_cost_assignment(&cost).cost,
        is_exact: false,
    }
}
