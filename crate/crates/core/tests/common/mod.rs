//! Reference implementations the integration tests compare against. None
//! of them call into the crate's own versions of the same computation.

#![allow(dead_code)]

use faasprov::callgraph::CallGraph;
use rand::Rng;

/// Random graph with `n` vertices labelled from `labels`, each ordered pair
/// becoming an edge with probability `p`.
pub fn random_graph<R: Rng>(rng: &mut R, n: usize, labels: &[&str], p: f64) -> CallGraph {
    let names: Vec<&str> = (0..n).map(|_| labels[rng.gen_range(0..labels.len())]).collect();
    let mut edges = Vec::new();
    for a in 0..n {
        for b in 0..n {
            if a != b && rng.gen_bool(p) {
                edges.push((a, b));
            }
        }
    }
    CallGraph::from_labels(&names, &edges).expect("generated graph is valid")
}

/// (center label, sorted neighbour labels) per vertex, direction ignored and
/// each neighbour counted once.
pub fn stars(g: &CallGraph) -> Vec<(String, Vec<String>)> {
    let n = g.vertex_count();
    let edges: Vec<(usize, usize)> = g.edges().collect();
    (0..n)
        .map(|v| {
            let mut nbrs: Vec<String> = (0..n)
                .filter(|&u| u != v && edges.iter().any(|&e| e == (u, v) || e == (v, u)))
                .map(|u| g.label(u).to_string())
                .collect();
            nbrs.sort();
            (g.label(v).to_string(), nbrs)
        })
        .collect()
}

/// Label mismatch + degree gap + (larger degree - multiset intersection).
pub fn star_cost(a: &(String, Vec<String>), b: &(String, Vec<String>)) -> f64 {
    let label = if a.0 == b.0 { 0 } else { 1 };
    let (da, db) = (a.1.len(), b.1.len());
    let mut rest = b.1.clone();
    let mut common = 0;
    for l in &a.1 {
        if let Some(i) = rest.iter().position(|x| x == l) {
            rest.swap_remove(i);
            common += 1;
        }
    }
    (label + da.abs_diff(db) + da.max(db) - common) as f64
}

/// Calls `f` with every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    f(&perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            f(&perm);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Minimum over all n! assignments between the two star multisets, the
/// smaller one padded with empty-label stars.
pub fn brute_force_star_ged(g1: &CallGraph, g2: &CallGraph) -> f64 {
    let mut s1 = stars(g1);
    let mut s2 = stars(g2);
    let n = s1.len().max(s2.len());
    s1.resize(n, (String::new(), Vec::new()));
    s2.resize(n, (String::new(), Vec::new()));
    let mut best = f64::INFINITY;
    for_each_permutation(n, |p| {
        let c: f64 = (0..n).map(|i| star_cost(&s1[i], &s2[p[i]])).sum();
        best = best.min(c);
    });
    if n == 0 {
        0.0
    } else {
        best
    }
}

/// True unit-cost edit distance between directed labelled graphs, by
/// trying every partial injective mapping of g1's vertices into g2's.
pub fn brute_force_exact_ged(g1: &CallGraph, g2: &CallGraph) -> u32 {
    let (n1, n2) = (g1.vertex_count(), g2.vertex_count());
    let e1: Vec<(usize, usize)> = g1.edges().collect();
    let e2: Vec<(usize, usize)> = g2.edges().collect();
    let mut best = u32::MAX;
    let mut mapping = vec![None; n1];
    fn rec(
        i: usize,
        mapping: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        g1: &CallGraph,
        g2: &CallGraph,
        e1: &[(usize, usize)],
        e2: &[(usize, usize)],
        best: &mut u32,
    ) {
        if i == mapping.len() {
            let mut cost = 0u32;
            for (v, m) in mapping.iter().enumerate() {
                match m {
                    Some(u) if g1.label(v) != g2.label(*u) => cost += 1,
                    Some(_) => {}
                    None => cost += 1,
                }
            }
            cost += used.iter().filter(|u| !**u).count() as u32;
            let mut covered = 0;
            for &(a, b) in e1 {
                match (mapping[a], mapping[b]) {
                    (Some(x), Some(y)) if e2.contains(&(x, y)) => covered += 1,
                    _ => cost += 1,
                }
            }
            cost += (e2.len() - covered) as u32;
            *best = (*best).min(cost);
            return;
        }
        mapping[i] = None;
        rec(i + 1, mapping, used, g1, g2, e1, e2, best);
        for u in 0..used.len() {
            if !used[u] {
                used[u] = true;
                mapping[i] = Some(u);
                rec(i + 1, mapping, used, g1, g2, e1, e2, best);
                used[u] = false;
            }
        }
        mapping[i] = None;
    }
    let mut used = vec![false; n2];
    rec(0, &mut mapping, &mut used, g1, g2, &e1, &e2, &mut best);
    best
}

/// Average ranks, 1-based.
fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].partial_cmp(&v[b]).unwrap());
    let mut out = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = r;
        }
        i = j + 1;
    }
    out
}

/// Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> f64 {
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let cov: f64 = rx.iter().zip(&ry).map(|(a, b)| (a - mx) * (b - my)).sum();
    let vx: f64 = rx.iter().map(|a| (a - mx).powi(2)).sum();
    let vy: f64 = ry.iter().map(|b| (b - my).powi(2)).sum();
    cov / (vx * vy).sqrt()
}

/// Accuracy and macro-F1 over (truth, predicted) pairs. Every class counts
/// in the macro divisor, contributing 0 when it has no true positives.
pub fn accuracy_and_macro_f1(pairs: &[(usize, usize)], classes: usize) -> (f64, f64) {
    let correct = pairs.iter().filter(|(t, p)| t == p).count();
    let mut f1s = Vec::new();
    for c in 0..classes {
        let tp = pairs.iter().filter(|&&(t, p)| t == c && p == c).count() as f64;
        let fp = pairs.iter().filter(|&&(t, p)| t != c && p == c).count() as f64;
        let fn_ = pairs.iter().filter(|&&(t, p)| t == c && p != c).count() as f64;
        f1s.push(if tp == 0.0 { 0.0 } else { 2.0 * tp / (2.0 * tp + fp + fn_) });
    }
    (correct as f64 / pairs.len() as f64, f1s.iter().sum::<f64>() / classes as f64)
}

/// Reserved replicas for a 30-day month at `rate_per_gb_s`.
pub fn month_cost(replicas: u32, mem_mb: f64, rate_per_gb_s: f64) -> f64 {
    replicas as f64 * mem_mb / 1024.0 * 30.0 * 24.0 * 3600.0 * rate_per_gb_s
}

/// Nearest-rank quantile.
pub fn nearest_rank(values: &[f64], q: f64) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let k = ((q * v.len() as f64).ceil() as usize).clamp(1, v.len());
    v[k - 1]
}
