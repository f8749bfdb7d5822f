//! Compares call graphs with the star-structure edit distance, checks it
//! against the exact search on small graphs, and walks a perturbation
//! ladder away from one of the suite's graphs.
//!
//!     cargo run --example callgraph_similarity

use faasprov::callgraph::{approx_ged, build_stars, exact_ged, CallGraph, DEFAULT_EXACT_LIMIT};
use faasprov::suite::{edit_alphabet, perturb, Suite};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> faasprov::error::Result<()> {
    let path = CallGraph::from_labels(&["A", "B", "C"], &[(0, 1), (1, 2)])?;
    let triangle = CallGraph::from_labels(&["A", "B", "C"], &[(0, 1), (1, 2), (2, 0)])?;
    for s in build_stars(&path) {
        println!("star {} -> {:?}", s.center_label, s.neighbor_labels);
    }
    let approx = approx_ged(&path, &triangle);
    let exact = exact_ged(&path, &triangle, DEFAULT_EXACT_LIMIT)?;
    println!("path vs triangle: approx {} exact {}", approx.distance, exact.distance);

    let suite = Suite::desk();
    let base = &suite.workload("processing").expect("built-in workload").callgraph;
    let alphabet = edit_alphabet();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    println!("\nperturbing processing ({} vertices, {} edges)", base.vertex_count(), base.edge_count());
    for k in [0, 1, 2, 4, 8] {
        let (g, edits) = perturb(base, k, &alphabet, &mut rng);
        let ranking: Vec<String> = suite
            .workloads
            .iter()
            .map(|w| format!("{} {:.0}", w.name, approx_ged(&g, &w.callgraph).distance))
            .collect();
        println!("{k} edits {:?}\n  distances: {}", edits, ranking.join(", "));
    }
    Ok(())
}
