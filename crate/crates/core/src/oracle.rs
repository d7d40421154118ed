//! Exact reference solvers. Used as ground truth, not for speed.

use thiserror::Error;

use crate::auction::Matching;
use crate::graph::BipartiteGraph;

/// Largest `n_left` accepted by [`brute_force`].
pub const BRUTE_FORCE_LIMIT: usize = 10;

#[derive(Debug, Error, PartialEq)]
pub enum OracleError {
    #[error("brute force supports n_left <= {limit}, got {n_left}")]
    TooLarge { n_left: usize, limit: usize },
    #[error("no left-perfect matching exists")]
    Infeasible,
    #[error("n_left = {n_left} exceeds n_right = {n_right}")]
    TooManyLeft { n_left: usize, n_right: usize },
}

/// Minimum-weight matching among those of maximum cardinality.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub optimum_weight: f64,
    pub matching: Matching,
    pub cardinality: usize,
}

impl ExactResult {
    fn from_matching(graph: &BipartiteGraph, matching: Matching) -> Self {
        Self {
            optimum_weight: matching.weight(graph).expect("oracle assigns graph edges only"),
            cardinality: matching.len(),
            matching,
        }
    }
}

struct Search<'g> {
    graph: &'g BipartiteGraph,
    used: Vec<bool>,
    current: Vec<Option<usize>>,
    // Suffix sums over non-isolated left vertices: count and cheapest-edge weight.
    matchable_after: Vec<usize>,
    cheapest_after: Vec<f64>,
    best_card: usize,
    best_weight: f64,
    best: Vec<Option<usize>>,
}

impl Search<'_> {
    fn run(&mut self, u: usize, card: usize, weight: f64) {
        let n = self.graph.n_left();
        if u == n {
            if card > self.best_card || (card == self.best_card && weight < self.best_weight) {
                self.best_card = card;
                self.best_weight = weight;
                self.best.clone_from(&self.current);
            }
            return;
        }
        let reachable = card + self.matchable_after[u];
        if reachable < self.best_card {
            return;
        }
        if reachable == self.best_card && weight + self.cheapest_after[u] > self.best_weight {
            return;
        }
        for e in self.graph.neighbors(u) {
            if !self.used[e.right] {
                self.used[e.right] = true;
                self.current[u] = Some(e.right);
                self.run(u + 1, card + 1, weight + e.weight);
                self.current[u] = None;
                self.used[e.right] = false;
            }
        }
        self.run(u + 1, card, weight);
    }
}

/// Exhaustive search over all injective edge-respecting assignments.
pub fn brute_force(graph: &BipartiteGraph) -> Result<ExactResult, OracleError> {
    let n = graph.n_left();
    if n > BRUTE_FORCE_LIMIT {
        return Err(OracleError::TooLarge {
            n_left: n,
            limit: BRUTE_FORCE_LIMIT,
        });
    }
    let mut matchable_after = vec![0; n + 1];
    let mut cheapest_after = vec![0.0; n + 1];
    for u in (0..n).rev() {
        let cheapest = graph.neighbors(u).iter().map(|e| e.weight).reduce(f64::min);
        matchable_after[u] = matchable_after[u + 1] + usize::from(cheapest.is_some());
        cheapest_after[u] = cheapest_after[u + 1] + cheapest.unwrap_or(0.0);
    }
    let mut search = Search {
        graph,
        used: vec![false; graph.n_right()],
        current: vec![None; n],
        matchable_after,
        cheapest_after,
        best_card: 0,
        best_weight: f64::INFINITY,
        best: vec![None; n],
    };
    search.run(0, 0, 0.0);
    let pairs = search
        .best
        .iter()
        .enumerate()
        .filter_map(|(u, v)| v.map(|v| (u, v)));
    let matching = Matching::from_pairs(n, graph.n_right(), pairs).expect("search keeps pairs disjoint");
    Ok(ExactResult::from_matching(graph, matching))
}

/// Weight given to non-edges in the dense cost matrix. Exceeds the cost
/// difference between any two assignments made of real edges.
pub fn sentinel_weight(graph: &BipartiteGraph) -> f64 {
    let (lo, hi) = graph.weight_range().unwrap_or((0.0, 0.0));
    1.0 + graph.n_right() as f64 * (hi.abs() + lo.abs() + 1.0)
}

/// O(n_left² · n_right) Hungarian method with row/column potentials.
/// Missing edges are filled with [`sentinel_weight`]; an optimum that needs
/// one means no left-perfect matching exists.
pub fn hungarian(graph: &BipartiteGraph) -> Result<ExactResult, OracleError> {
    let n = graph.n_left();
    let m = graph.n_right();
    if n > m {
        return Err(OracleError::TooManyLeft { n_left: n, n_right: m });
    }
    let sentinel = sentinel_weight(graph);
    // 1-based dense cost matrix; row 0 and column 0 are unused.
    let mut cost = vec![vec![sentinel; m + 1]; n + 1];
    for (u, v, w) in graph.edges() {
        cost[u + 1][v + 1] = w;
    }

    let inf = f64::INFINITY;
    let mut row_pot = vec![0.0; n + 1];
    let mut col_pot = vec![0.0; m + 1];
    let mut owner = vec![0usize; m + 1];
    let mut way = vec![0usize; m + 1];
    for i in 1..=n {
        owner[0] = i;
        let mut j0 = 0;
        let mut minv = vec![inf; m + 1];
        let mut used = vec![false; m + 1];
        loop {
            used[j0] = true;
            let i0 = owner[j0];
            let mut delta = inf;
            let mut j1 = 0;
            for j in 1..=m {
                if !used[j] {
                    let reduced = cost[i0][j] - row_pot[i0] - col_pot[j];
                    if reduced < minv[j] {
                        minv[j] = reduced;
                        way[j] = j0;
                    }
                    if minv[j] < delta {
                        delta = minv[j];
                        j1 = j;
                    }
                }
            }
            for j in 0..=m {
                if used[j] {
                    row_pot[owner[j]] += delta;
                    col_pot[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
            if owner[j0] == 0 {
                break;
            }
        }
        loop {
            let j1 = way[j0];
            owner[j0] = owner[j1];
            j0 = j1;
            if j0 == 0 {
                break;
            }
        }
    }

    let mut pairs = Vec::with_capacity(n);
    for j in 1..=m {
        if owner[j] != 0 {
            let (u, v) = (owner[j] - 1, j - 1);
            if graph.weight(u, v).is_none() {
                return Err(OracleError::Infeasible);
            }
            pairs.push((u, v));
        }
    }
    let matching = Matching::from_pairs(n, m, pairs).expect("assignment is a matching");
    Ok(ExactResult::from_matching(graph, matching))
}
