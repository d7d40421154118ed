//! Test-only reference implementations, written independently of the
//! solver: sort-based choice rule and recursive displacement.

#![allow(dead_code)]

use bpm_core::graph::{generate, BipartiteGraph, GeneratorSpec};

/// One update computed from scratch: sort all `(L(v)+w, v)` pairs.
/// Returns `(v, new_label)`, or `None` when the best label exceeds `cap`.
/// A single neighbor locks at `cap + eps`.
pub fn step_oracle(g: &BipartiteGraph, labels: &[f64], u: usize, eps: f64, cap: f64) -> Option<(usize, f64)> {
    let mut vals: Vec<(f64, usize, f64)> = g
        .neighbors(u)
        .iter()
        .map(|e| (labels[e.right] + e.weight, e.right, e.weight))
        .collect();
    vals.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    let (_, v, w) = vals[0];
    if labels[v] > cap {
        return None;
    }
    let new = match vals.get(1) {
        Some(&(second, _, _)) => second - w + eps,
        None => cap + eps,
    };
    Some((v, new))
}

#[derive(Debug)]
pub struct ReferenceRun {
    pub labels: Vec<f64>,
    pub owner: Vec<Option<usize>>,
    pub moves: Vec<(usize, usize)>,
    pub discarded: Vec<usize>,
}

fn match_vertex(g: &BipartiteGraph, run: &mut ReferenceRun, u: usize, eps: f64, cap: f64) {
    if g.degree(u) == 0 {
        run.discarded.push(u);
        return;
    }
    let Some((v, new)) = step_oracle(g, &run.labels, u, eps, cap) else {
        run.discarded.push(u);
        return;
    };
    run.labels[v] = new;
    run.moves.push((u, v));
    let prev = run.owner[v].replace(u);
    if let Some(y) = prev {
        match_vertex(g, run, y, eps, cap);
    }
}

/// Algorithm 1 in input order with the global cap, recursion and all.
pub fn reference_auction(g: &BipartiteGraph, eps: f64) -> ReferenceRun {
    let cap = g
        .weight_range()
        .map_or(0.0, |(lo, hi)| g.n_right() as f64 / 2.0 * (hi - lo + eps));
    let mut run = ReferenceRun {
        labels: vec![0.0; g.n_right()],
        owner: vec![None; g.n_right()],
        moves: Vec::new(),
        discarded: Vec::new(),
    };
    for u in 0..g.n_left() {
        match_vertex(g, &mut run, u, eps, cap);
    }
    run.discarded.sort_unstable();
    run
}

/// The 2×2 instance w(u1,v1)=1, w(u1,v2)=2, w(u2,v1)=1, w(u2,v2)=3.
pub fn two_by_two() -> BipartiteGraph {
    BipartiteGraph::complete(&[vec![1.0, 2.0], vec![1.0, 3.0]], 2).unwrap()
}

/// Small mixed-family instance for randomized corpora.
pub fn random_instance(seed: u64, max_n: usize) -> BipartiteGraph {
    let n_right = 2 + (seed as usize * 7919) % (max_n - 1);
    let n_left = 1 + (seed as usize * 104_729) % n_right;
    let spec = if seed % 3 == 0 {
        GeneratorSpec::complete(n_left, n_right, seed)
    } else {
        let k = 1 + (seed as usize / 3) % n_right.min(4);
        GeneratorSpec::k_left_regular(n_left, n_right, k, seed)
    };
    generate(&spec).unwrap()
}
