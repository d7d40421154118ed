//! Executable checks of the solver's label invariants.
//!
//! Every check returns an [`AuditReport`]; a failed check carries the first
//! violation found. Traces are replayed from the all-zero, all-free state.
//!
//! Checks that compare a single update against its defining formula are
//! exact. Checks that chain several updates (path sums, distance bounds,
//! total weight) allow a rounding slack of a few ulps per chained term,
//! see [`chain_slack`].

use std::collections::{HashMap, VecDeque};
use std::fmt;

use thiserror::Error;

use crate::auction::{LabelArray, Matching, MoveRecord, SolveResult};
use crate::graph::BipartiteGraph;
use crate::oracle::ExactResult;

/// Largest `n_right` accepted by [`check_path_inequality`].
pub const PATH_CHECK_LIMIT: usize = 12;

const ROUNDING: f64 = 8.0 * f64::EPSILON;

/// Rounding allowance for a quantity built from `terms` additions whose
/// operands are bounded in magnitude by `scale`.
pub fn chain_slack(terms: f64, scale: f64) -> f64 {
    ROUNDING * (terms + 1.0) * scale
}

#[derive(Debug, Error, PartialEq)]
pub enum AuditError {
    #[error("solve result carries no trace; rerun with tracing enabled")]
    MissingTrace,
    #[error("path enumeration supports n_right <= {limit}, got {n_right}")]
    TooLarge { n_right: usize, limit: usize },
    #[error("results are not comparable: {0}")]
    Incomparable(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Check {
    Monotone,
    MatchedInequality,
    PathInequality,
    DistanceBound,
    EpsilonOptimal,
}

impl Check {
    pub fn name(self) -> &'static str {
        match self {
            Check::Monotone => "monotone",
            Check::MatchedInequality => "matched-inequality",
            Check::PathInequality => "path-inequality",
            Check::DistanceBound => "distance-bound",
            Check::EpsilonOptimal => "epsilon-optimal",
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    /// Move number, path length or vertex, depending on the check.
    pub at: u64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AuditReport {
    pub check: Check,
    /// Number of individual inequalities evaluated.
    pub checked: u64,
    /// Inequalities skipped because they involve a locked edge.
    pub exempt: u64,
    pub violation: Option<Violation>,
}

impl AuditReport {
    fn new(check: Check) -> Self {
        Self {
            check,
            checked: 0,
            exempt: 0,
            violation: None,
        }
    }

    fn fail(mut self, at: u64, detail: impl Into<String>) -> Self {
        self.violation = Some(Violation {
            at,
            detail: detail.into(),
        });
        self
    }

    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }

    /// Single-line verdict: `ok <check>` or `violation <check> <detail>`.
    pub fn verdict(&self) -> String {
        match &self.violation {
            None => format!("ok {}", self.check),
            Some(v) => format!("violation {} at {}: {}", self.check, v.at, v.detail),
        }
    }
}

/// Labels, matching and lock flags reconstructed from a trace.
#[derive(Debug, Clone, PartialEq)]
pub struct ReplayState {
    pub labels: LabelArray,
    pub matching: Matching,
    pub locked: Vec<bool>,
}

impl ReplayState {
    pub fn initial(graph: &BipartiteGraph) -> Self {
        Self {
            labels: LabelArray::zeros(graph.n_right()),
            matching: Matching::new(graph.n_left(), graph.n_right()),
            locked: vec![false; graph.n_right()],
        }
    }

    /// Applies one record after checking it is consistent with the state.
    pub fn apply(&mut self, graph: &BipartiteGraph, rec: &MoveRecord) -> Result<(), String> {
        let (u, v) = (rec.left, rec.right);
        if u >= graph.n_left() || v >= graph.n_right() {
            return Err(format!("move references ({}, {}) outside the graph", u + 1, v + 1));
        }
        if graph.weight(u, v) != Some(rec.weight) {
            return Err(format!("({}, {}) is not an edge of weight {}", u + 1, v + 1, rec.weight));
        }
        if self.labels[v] != rec.label_before {
            return Err(format!(
                "label of v{} is {} but the move starts from {}",
                v + 1,
                self.labels[v],
                rec.label_before
            ));
        }
        if let Some(held) = self.matching.right_of(u) {
            return Err(format!("bidder u{} already holds v{}", u + 1, held + 1));
        }
        if self.matching.left_of(v) != rec.displaced {
            return Err(format!("v{} occupant does not match the recorded displacement", v + 1));
        }
        self.labels.set(v, rec.label_after);
        self.locked[v] = rec.locked;
        self.matching.assign(u, v);
        Ok(())
    }
}

/// Replays the first `moves` records of `trace`. On inconsistency returns
/// the 1-based move number and a description.
pub fn replay(
    graph: &BipartiteGraph,
    trace: &[MoveRecord],
    moves: usize,
) -> Result<ReplayState, (u64, String)> {
    let mut state = ReplayState::initial(graph);
    for (i, rec) in trace.iter().take(moves).enumerate() {
        state.apply(graph, rec).map_err(|e| (i as u64 + 1, e))?;
    }
    Ok(state)
}

/// State just before the final move of `result`, obtained by undoing it.
pub fn rewind_last_move(result: &SolveResult) -> (LabelArray, Matching) {
    let mut labels = result.labels.clone();
    let mut matching = result.matching.clone();
    if let Some(rec) = result.last_move {
        labels.set(rec.right, rec.label_before);
        matching.undo_assign(rec.left, rec.right, rec.displaced);
    }
    (labels, matching)
}

/// Alternating distance of every right vertex to the nearest free one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DistanceArray(Vec<Option<u32>>);

impl DistanceArray {
    pub fn get(&self, v: usize) -> Option<u32> {
        self.0[v]
    }

    pub fn as_slice(&self) -> &[Option<u32>] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Sum over the finite entries.
    pub fn sum_finite(&self) -> u64 {
        self.0.iter().flatten().map(|&d| u64::from(d)).sum()
    }

    pub fn unreachable(&self) -> usize {
        self.0.iter().filter(|d| d.is_none()).count()
    }
}

/// Multi-source BFS from the free right vertices. A matched `v` with
/// partner `u` sits at `2 + min d(v')` over the other neighbors `v'` of `u`.
pub fn alternating_distances(graph: &BipartiteGraph, matching: &Matching) -> DistanceArray {
    let n = graph.n_right();
    let rev = graph.reverse_adjacency();
    let mut dist = vec![None; n];
    let mut queue = VecDeque::new();
    for v in 0..n {
        if matching.is_free(v) {
            dist[v] = Some(0);
            queue.push_back(v);
        }
    }
    while let Some(x) = queue.pop_front() {
        let dx: u32 = dist[x].expect("queued vertices have a distance");
        for &u in &rev[x] {
            if let Some(v) = matching.right_of(u) {
                if v != x && dist[v].is_none() {
                    dist[v] = Some(dx + 2);
                    queue.push_back(v);
                }
            }
        }
    }
    DistanceArray(dist)
}

/// Every move raises exactly the recorded label, by at least `ε`
/// (strictly, for locked moves).
pub fn check_monotone(trace: &[MoveRecord], epsilon: f64) -> AuditReport {
    let mut report = AuditReport::new(Check::Monotone);
    let mut current: HashMap<usize, f64> = HashMap::new();
    for (i, rec) in trace.iter().enumerate() {
        let at = i as u64 + 1;
        report.checked += 1;
        if rec.index != at {
            return report.fail(at, format!("record numbered {} out of sequence", rec.index));
        }
        let expected = current.get(&rec.right).copied().unwrap_or(0.0);
        if rec.label_before != expected {
            return report.fail(
                at,
                format!(
                    "label of v{} changed outside a move ({} -> {})",
                    rec.right + 1,
                    expected,
                    rec.label_before
                ),
            );
        }
        let ok = if rec.locked {
            rec.label_after > rec.label_before
        } else {
            let scale = rec.label_before.abs() + rec.weight.abs() + rec.label_after.abs() + epsilon;
            rec.label_after >= rec.label_before + epsilon - chain_slack(2.0, scale)
        };
        if !ok {
            return report.fail(
                at,
                format!(
                    "label of v{} went from {} to {} (epsilon {})",
                    rec.right + 1,
                    rec.label_before,
                    rec.label_after,
                    epsilon
                ),
            );
        }
        current.insert(rec.right, rec.label_after);
    }
    report
}

/// `min_{v' ∈ N(u) \ {v}} (L(v') + w(u, v')) - w(u, v) + ε`, evaluated in the
/// same operation order as the solver's update, or `None` when `deg(u) < 2`.
fn matched_bound(graph: &BipartiteGraph, labels: &LabelArray, u: usize, v: usize, epsilon: f64) -> Option<f64> {
    let mut second = f64::INFINITY;
    let mut own = None;
    for e in graph.neighbors(u) {
        if e.right == v {
            own = Some(e.weight);
        } else {
            second = second.min(labels[e.right] + e.weight);
        }
    }
    let w = own?;
    (second != f64::INFINITY).then_some(second - w + epsilon)
}

/// After every move, each matched, non-locked `(u, v)` with `deg(u) ≥ 2`
/// satisfies `L(v) ≤ min_{v'≠v} (L(v') + w(u, v')) - w(u, v) + ε`.
///
/// Only the pairs a move can affect are re-evaluated: the new pair, and,
/// if the moved label went down, every pair whose bound reads that label.
/// Given that all pairs held before the move, this is equivalent to
/// re-checking every pair.
pub fn check_matched_inequality(graph: &BipartiteGraph, trace: &[MoveRecord], epsilon: f64) -> AuditReport {
    let mut report = AuditReport::new(Check::MatchedInequality);
    let rev = graph.reverse_adjacency();
    let mut state = ReplayState::initial(graph);

    let check_pair = |report: &mut AuditReport, state: &ReplayState, u: usize, v: usize| -> Option<String> {
        if state.locked[v] {
            report.exempt += 1;
            return None;
        }
        let bound = matched_bound(graph, &state.labels, u, v, epsilon)?;
        report.checked += 1;
        (state.labels[v] > bound).then(|| {
            format!(
                "matched (u{}, v{}): label {} exceeds bound {}",
                u + 1,
                v + 1,
                state.labels[v],
                bound
            )
        })
    };

    for (i, rec) in trace.iter().enumerate() {
        let at = i as u64 + 1;
        if let Err(e) = state.apply(graph, rec) {
            return report.fail(at, e);
        }
        if let Some(detail) = check_pair(&mut report, &state, rec.left, rec.right) {
            return report.fail(at, detail);
        }
        if rec.label_after < rec.label_before {
            for &u in &rev[rec.right] {
                if let Some(v) = state.matching.right_of(u) {
                    if v != rec.right {
                        if let Some(detail) = check_pair(&mut report, &state, u, v) {
                            return report.fail(at, detail);
                        }
                    }
                }
            }
        }
    }
    report
}

/// For every simple alternating path `v_1, u_2, v_2, …, u_s, v_s` whose
/// first edge is unmatched (each `u_i` matched to `v_i`), checks
/// `L(v_s) ≤ L(v_1) + Σ unmatched w - Σ matched w + (s-1)·ε`.
///
/// All simple paths are covered by a dynamic program over (visited set,
/// endpoint) that keeps the largest left-minus-right margin, so the check
/// is exhaustive without listing paths one by one.
pub fn check_path_inequality(
    graph: &BipartiteGraph,
    labels: &LabelArray,
    matching: &Matching,
    epsilon: f64,
) -> Result<AuditReport, AuditError> {
    let n = graph.n_right();
    if n > PATH_CHECK_LIMIT {
        return Err(AuditError::TooLarge {
            n_right: n,
            limit: PATH_CHECK_LIMIT,
        });
    }
    let mut report = AuditReport::new(Check::PathInequality);
    let rev = graph.reverse_adjacency();
    let (lo, hi) = graph.weight_range().unwrap_or((0.0, 0.0));
    let scale = 2.0 * labels.as_slice().iter().fold(0.0f64, |m, l| m.max(l.abs()))
        + 2.0 * lo.abs().max(hi.abs())
        + epsilon;

    let states = 1usize << n;
    let idx = |mask: usize, end: usize| mask * n + end;
    let mut margin = vec![f64::NEG_INFINITY; states * n];
    // (previous endpoint, left vertex used) for witness reconstruction.
    let mut parent = vec![(usize::MAX, usize::MAX); states * n];
    for v in 0..n {
        margin[idx(1 << v, v)] = 0.0;
    }

    for mask in 1..states {
        for end in 0..n {
            let here = margin[idx(mask, end)];
            if here == f64::NEG_INFINITY {
                continue;
            }
            let steps = mask.count_ones() - 1;
            if steps > 0 {
                report.checked += 1;
                if here > chain_slack(3.0 * steps as f64, scale) {
                    let path = witness(&parent, n, mask, end);
                    return Ok(report.fail(
                        2 * u64::from(steps),
                        format!("path {} exceeds its bound by {}", path, here),
                    ));
                }
            }
            for &u in &rev[end] {
                let Some(next) = matching.right_of(u) else { continue };
                if next == end || mask & (1 << next) != 0 {
                    continue;
                }
                let w_unmatched = graph.weight(u, end).expect("reverse adjacency");
                let w_matched = graph.weight(u, next).expect("matched pair is an edge");
                let gain = labels[next] - labels[end] - w_unmatched + w_matched - epsilon;
                let slot = idx(mask | (1 << next), next);
                if here + gain > margin[slot] {
                    margin[slot] = here + gain;
                    parent[slot] = (end, u);
                }
            }
        }
    }
    Ok(report)
}

fn witness(parent: &[(usize, usize)], n: usize, mut mask: usize, mut end: usize) -> String {
    let mut parts = vec![format!("v{}", end + 1)];
    while mask.count_ones() > 1 {
        let (prev, u) = parent[mask * n + end];
        parts.push(format!("u{}", u + 1));
        parts.push(format!("v{}", prev + 1));
        mask &= !(1 << end);
        end = prev;
    }
    parts.reverse();
    parts.join(" ")
}

/// `L(v) ≤ d(v)/2 · (w_max - w_min + ε)` for every right vertex with a
/// finite alternating distance in the given state.
pub fn check_distance_bound_state(
    graph: &BipartiteGraph,
    labels: &LabelArray,
    matching: &Matching,
    epsilon: f64,
) -> (AuditReport, DistanceArray) {
    let mut report = AuditReport::new(Check::DistanceBound);
    let dist = alternating_distances(graph, matching);
    let (lo, hi) = graph.weight_range().unwrap_or((0.0, 0.0));
    let per_step = hi - lo + epsilon;
    for v in 0..graph.n_right() {
        let Some(d) = dist.get(v) else { continue };
        report.checked += 1;
        let half = f64::from(d) / 2.0;
        let bound = half * per_step;
        let scale = labels[v].abs() + hi.abs() + lo.abs() + epsilon;
        if labels[v] > bound + chain_slack(3.0 * half, scale) {
            return (
                report.fail(
                    v as u64 + 1,
                    format!("label of v{} is {} but distance {} allows {}", v + 1, labels[v], d, bound),
                ),
                dist,
            );
        }
    }
    (report, dist)
}

/// Distance bound on the state after move `P - 1`, reconstructed by replay.
pub fn check_distance_bound(graph: &BipartiteGraph, trace: &[MoveRecord], epsilon: f64) -> AuditReport {
    match replay(graph, trace, trace.len().saturating_sub(1)) {
        Ok(state) => check_distance_bound_state(graph, &state.labels, &state.matching, epsilon).0,
        Err((at, e)) => AuditReport::new(Check::DistanceBound).fail(at, e),
    }
}

/// `total_weight ≤ OPT + n_left · ε` for a left-perfect result.
pub fn check_epsilon_optimal(
    graph: &BipartiteGraph,
    result: &SolveResult,
    oracle: &ExactResult,
    epsilon: f64,
) -> Result<AuditReport, AuditError> {
    let n = graph.n_left();
    if !result.discarded.is_empty() {
        return Err(AuditError::Incomparable(format!(
            "{} left vertices were discarded",
            result.discarded.len()
        )));
    }
    if oracle.cardinality != n {
        return Err(AuditError::Incomparable(format!(
            "oracle cardinality {} differs from n_left {}",
            oracle.cardinality, n
        )));
    }
    let mut report = AuditReport::new(Check::EpsilonOptimal);
    report.checked = 1;
    let bound = oracle.optimum_weight + n as f64 * epsilon;
    let (lo, hi) = graph.weight_range().unwrap_or((0.0, 0.0));
    let slack = chain_slack(2.0 * n as f64, lo.abs().max(hi.abs()) + epsilon);
    if result.total_weight > bound + slack {
        return Ok(report.fail(
            0,
            format!(
                "weight {} exceeds optimum {} + {}·{}",
                result.total_weight, oracle.optimum_weight, n, epsilon
            ),
        ));
    }
    Ok(report)
}

/// Runs every applicable check on a traced result. The path check runs
/// only when `n_right ≤ PATH_CHECK_LIMIT`; the optimality check only when an
/// oracle result is given and comparable.
pub fn run_all(
    graph: &BipartiteGraph,
    result: &SolveResult,
    oracle: Option<&ExactResult>,
) -> Result<Vec<AuditReport>, AuditError> {
    let trace = result.trace.as_ref().ok_or(AuditError::MissingTrace)?;
    let eps = result.epsilon;
    let mut reports = vec![
        check_monotone(trace, eps),
        check_matched_inequality(graph, trace, eps),
        check_distance_bound(graph, trace, eps),
    ];
    if graph.n_right() <= PATH_CHECK_LIMIT {
        reports.push(check_path_inequality(graph, &result.labels, &result.matching, eps)?);
    }
    if let Some(oracle) = oracle {
        match check_epsilon_optimal(graph, result, oracle, eps) {
            Ok(r) => reports.push(r),
            Err(AuditError::Incomparable(_)) => {}
            Err(e) => return Err(e),
        }
    }
    Ok(reports)
}
