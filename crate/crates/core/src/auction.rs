//! Sequential (Gauss-Seidel) auction for minimum-weight bipartite matching.
//!
//! Left vertices are processed one at a time. A bidder `u` picks the right
//! vertex `v` minimizing `L(v) + w(u, v)`, raises `L(v)` to
//! `second_best - w(u, v) + ε`, and takes `v`, displacing its previous
//! occupant, which then bids in turn. A bidder whose best choice already
//! carries a label above the cap `n/2 · (w_max - w_min + ε)` is discarded.
//!
//! Comparisons on labels are exact `f64` comparisons. Choose `ε` well above
//! the accumulated rounding of the label arithmetic; a safe guideline is
//! `ε ≥ 2^20 · f64::EPSILON · max(1, |w_max|) · n_right`.

use std::ops::Index;

use log::warn;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{BipartiteGraph, Edge};

#[derive(Debug, Error, PartialEq)]
pub enum SolveError {
    #[error("epsilon must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("n_left = {n_left} exceeds n_right = {n_right}")]
    TooManyLeft { n_left: usize, n_right: usize },
    #[error("graph has no edges, so the label cap is undefined")]
    NoEdges,
    #[error("left vertex {0} has no neighbors")]
    IsolatedVertex(usize),
    #[error("left vertex {0} is already matched")]
    AlreadyMatched(usize),
    #[error("left vertex {0} out of range")]
    LeftOutOfRange(usize),
    #[error("cap override must be finite, got {0}")]
    InvalidCap(f64),
    #[error("graph too large: {0} vertices or edges")]
    TooLarge(usize),
}

/// Per-right-vertex labels (prices). Start at zero and never decrease.
#[derive(Debug, Clone, PartialEq)]
pub struct LabelArray(Vec<f64>);

impl LabelArray {
    pub fn zeros(n_right: usize) -> Self {
        Self(vec![0.0; n_right])
    }

    pub fn from_vec(values: Vec<f64>) -> Self {
        Self(values)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn set(&mut self, v: usize, value: f64) {
        self.0[v] = value;
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }

    pub fn max(&self) -> f64 {
        self.0.iter().copied().fold(0.0, f64::max)
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl Index<usize> for LabelArray {
    type Output = f64;

    fn index(&self, v: usize) -> &f64 {
        &self.0[v]
    }
}

/// Sentinel for "no partner" in packed vertex arrays.
const FREE: u32 = u32::MAX;

/// Partial assignment kept consistent in both directions.
#[derive(Clone, PartialEq, Eq)]
pub struct Matching {
    right_to_left: Vec<u32>,
    left_to_right: Vec<u32>,
}

fn slot(x: u32) -> Option<usize> {
    (x != FREE).then_some(x as usize)
}

impl std::fmt::Debug for Matching {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_map().entries(self.pairs()).finish()
    }
}

impl Matching {
    /// Panics if either side has `u32::MAX` or more vertices.
    pub fn new(n_left: usize, n_right: usize) -> Self {
        assert!(n_left < FREE as usize && n_right < FREE as usize, "matching too large");
        Self {
            right_to_left: vec![FREE; n_right],
            left_to_right: vec![FREE; n_left],
        }
    }

    /// Builds a matching from 0-based pairs, rejecting any vertex used twice.
    pub fn from_pairs<I>(n_left: usize, n_right: usize, pairs: I) -> Result<Self, String>
    where
        I: IntoIterator<Item = (usize, usize)>,
    {
        let mut m = Self::new(n_left, n_right);
        for (u, v) in pairs {
            if u >= n_left || v >= n_right {
                return Err(format!("pair ({}, {}) out of range", u + 1, v + 1));
            }
            if let Some(v0) = m.right_of(u) {
                return Err(format!("left vertex {} matched twice ({} and {})", u + 1, v0 + 1, v + 1));
            }
            if let Some(u0) = m.left_of(v) {
                return Err(format!("right vertex {} matched twice ({} and {})", v + 1, u0 + 1, u + 1));
            }
            m.assign(u, v);
        }
        Ok(m)
    }

    pub fn n_left(&self) -> usize {
        self.left_to_right.len()
    }

    pub fn n_right(&self) -> usize {
        self.right_to_left.len()
    }

    pub fn right_of(&self, u: usize) -> Option<usize> {
        slot(self.left_to_right[u])
    }

    pub fn left_of(&self, v: usize) -> Option<usize> {
        slot(self.right_to_left[v])
    }

    pub fn is_free(&self, v: usize) -> bool {
        self.right_to_left[v] == FREE
    }

    /// Gives `v` to `u` and returns the left vertex previously holding `v`.
    /// `u` must not hold another right vertex.
    pub fn assign(&mut self, u: usize, v: usize) -> Option<usize> {
        debug_assert!(self.left_to_right[u] == FREE);
        let prev = slot(std::mem::replace(&mut self.right_to_left[v], u as u32));
        if let Some(y) = prev {
            self.left_to_right[y] = FREE;
        }
        self.left_to_right[u] = v as u32;
        prev
    }

    /// Inverse of [`Matching::assign`].
    pub fn undo_assign(&mut self, u: usize, v: usize, prev: Option<usize>) {
        self.left_to_right[u] = FREE;
        self.right_to_left[v] = prev.map_or(FREE, |y| y as u32);
        if let Some(y) = prev {
            self.left_to_right[y] = v as u32;
        }
    }

    pub fn len(&self) -> usize {
        self.left_to_right.iter().filter(|&&x| x != FREE).count()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Matched pairs `(u, v)` in ascending `u`.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.left_to_right
            .iter()
            .enumerate()
            .filter_map(|(u, &v)| slot(v).map(|v| (u, v)))
    }

    pub fn is_consistent(&self) -> bool {
        self.pairs().all(|(u, v)| self.left_of(v) == Some(u))
            && (0..self.n_right()).all(|v| {
                self.left_of(v)
                    .is_none_or(|u| u < self.n_left() && self.right_of(u) == Some(v))
            })
    }

    /// Sum of matched edge weights in ascending `u`, or the first pair that
    /// is not an edge of `graph`.
    pub fn weight(&self, graph: &BipartiteGraph) -> Result<f64, (usize, usize)> {
        let mut total = 0.0;
        for (u, v) in self.pairs() {
            total += graph.weight(u, v).ok_or((u, v))?;
        }
        Ok(total)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Input,
    Shuffled(u64),
}

/// How the discard threshold is derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CapScope {
    /// `n_right/2 · (w_max - w_min + ε)` over the whole graph.
    Global,
    /// Same formula per connected component, using the component's own
    /// right-vertex count and weight range.
    PerComponent,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub epsilon: f64,
    /// Replaces the computed cap. Experimental; departs from the standard threshold.
    pub cap_override: Option<f64>,
    pub order: Order,
    pub record_trace: bool,
    pub cap_scope: CapScope,
}

impl SolverConfig {
    pub fn new(epsilon: f64) -> Self {
        Self {
            epsilon,
            cap_override: None,
            order: Order::Input,
            record_trace: false,
            cap_scope: CapScope::Global,
        }
    }

    pub fn with_trace(mut self) -> Self {
        self.record_trace = true;
        self
    }

    pub fn with_order(mut self, order: Order) -> Self {
        self.order = order;
        self
    }

    pub fn with_cap_override(mut self, cap: f64) -> Self {
        self.cap_override = Some(cap);
        self
    }

    pub fn with_cap_scope(mut self, scope: CapScope) -> Self {
        self.cap_scope = scope;
        self
    }
}

/// One move: `left` takes `right`, whose label goes from `label_before` to
/// `label_after`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MoveRecord {
    /// 1-based move number.
    pub index: u64,
    pub left: usize,
    pub right: usize,
    /// `w(left, right)`.
    pub weight: f64,
    pub label_before: f64,
    pub label_after: f64,
    pub displaced: Option<usize>,
    /// Bidder had a single neighbor, so the label was set to `cap + ε`.
    pub locked: bool,
}

pub type TraceLog = Vec<MoveRecord>;

/// Result of the choice rule for one bidder.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bid {
    pub right: usize,
    pub weight: f64,
    /// `L(right) + w(u, right)`.
    pub best: f64,
    /// Minimum of `L(v') + w(u, v')` over the other neighbors; infinite when
    /// `right` is the only neighbor.
    pub second: f64,
}

/// Discard threshold `n_right/2 · (w_max - w_min + ε)`.
pub fn cap(graph: &BipartiteGraph, epsilon: f64) -> Result<f64, SolveError> {
    let (lo, hi) = graph.weight_range().ok_or(SolveError::NoEdges)?;
    Ok(graph.n_right() as f64 / 2.0 * (hi - lo + epsilon))
}

/// Choice rule. Ties on the best value go to the smallest right index.
pub fn choose_best_and_second(
    graph: &BipartiteGraph,
    u: usize,
    labels: &LabelArray,
) -> Result<Bid, SolveError> {
    choose(graph.neighbors(u), |v| labels[v]).ok_or(SolveError::IsolatedVertex(u))
}

#[inline]
fn choose(edges: &[Edge], label: impl Fn(usize) -> f64) -> Option<Bid> {
    let (first, rest) = edges.split_first()?;
    let mut bid = Bid {
        right: first.right,
        weight: first.weight,
        best: label(first.right) + first.weight,
        second: f64::INFINITY,
    };
    for e in rest {
        let value = label(e.right) + e.weight;
        if value < bid.best || (value == bid.best && e.right < bid.right) {
            bid.second = bid.best;
            bid.best = value;
            bid.right = e.right;
            bid.weight = e.weight;
        } else if value < bid.second {
            bid.second = value;
        }
    }
    Some(bid)
}

#[derive(Debug, Clone)]
enum Caps {
    Edgeless,
    Uniform(f64),
    PerComponent { component: Vec<usize>, caps: Vec<f64> },
}

impl Caps {
    fn build(graph: &BipartiteGraph, config: &SolverConfig) -> Result<Self, SolveError> {
        if let Some(c) = config.cap_override {
            if c.is_nan() {
                return Err(SolveError::InvalidCap(c));
            }
            return Ok(Caps::Uniform(c));
        }
        if graph.edge_count() == 0 {
            return Ok(Caps::Edgeless);
        }
        match config.cap_scope {
            CapScope::Global => Ok(Caps::Uniform(cap(graph, config.epsilon)?)),
            CapScope::PerComponent => {
                let component = graph.right_components();
                let n_comp = component.iter().max().map_or(0, |m| m + 1);
                let mut sizes = vec![0usize; n_comp];
                for &c in &component {
                    sizes[c] += 1;
                }
                let mut ranges = vec![(f64::INFINITY, f64::NEG_INFINITY); n_comp];
                for (_, v, w) in graph.edges() {
                    let r = &mut ranges[component[v]];
                    r.0 = r.0.min(w);
                    r.1 = r.1.max(w);
                }
                let caps = sizes
                    .iter()
                    .zip(&ranges)
                    .map(|(&n, &(lo, hi))| {
                        if lo <= hi {
                            n as f64 / 2.0 * (hi - lo + config.epsilon)
                        } else {
                            0.0
                        }
                    })
                    .collect();
                Ok(Caps::PerComponent { component, caps })
            }
        }
    }

    fn for_right(&self, v: usize) -> f64 {
        match self {
            Caps::Edgeless => 0.0,
            Caps::Uniform(c) => *c,
            Caps::PerComponent { component, caps } => caps[component[v]],
        }
    }

    fn headline(&self) -> Option<f64> {
        match self {
            Caps::Edgeless | Caps::PerComponent { .. } => None,
            Caps::Uniform(c) => Some(*c),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub matching: Matching,
    pub labels: LabelArray,
    /// Left vertices left unmatched, ascending.
    pub discarded: Vec<usize>,
    /// Right vertices whose label was set by a degree-1 lock, ascending.
    pub locked: Vec<usize>,
    pub total_weight: f64,
    pub moves: u64,
    /// Adjacency entries scanned by the choice rule.
    pub comparisons: u64,
    pub epsilon: f64,
    /// Global cap, when a single one applies.
    pub cap: Option<f64>,
    pub trace: Option<TraceLog>,
    pub last_move: Option<MoveRecord>,
}

impl SolveResult {
    pub fn matched(&self) -> usize {
        self.matching.len()
    }

    pub fn is_left_perfect(&self) -> bool {
        self.discarded.is_empty()
    }
}


/// Everything the inner loop needs about a right vertex in one aligned
/// slot: a bid touches one cache line per neighbor, and a displaced owner's
/// adjacency is found without a trip through the offset table.
#[derive(Debug, Clone, Copy)]
#[repr(align(32))]
struct RightSlot {
    label: f64,
    owner: u32,
    owner_start: u32,
    owner_end: u32,
    locked: bool,
}

/// Solver state for one instance. [`solve`] drives it over all left
/// vertices; tests and bindings can step it with [`Auction::match_vertex`].
#[derive(Debug, Clone)]
pub struct Auction<'g> {
    graph: &'g BipartiteGraph,
    epsilon: f64,
    caps: Caps,
    right: Vec<RightSlot>,
    discarded: Vec<bool>,
    moves: u64,
    comparisons: u64,
    trace: Option<TraceLog>,
    last_move: Option<MoveRecord>,
}

impl<'g> Auction<'g> {
    pub fn new(graph: &'g BipartiteGraph, config: &SolverConfig) -> Result<Self, SolveError> {
        if !(config.epsilon > 0.0 && config.epsilon.is_finite()) {
            return Err(SolveError::InvalidEpsilon(config.epsilon));
        }
        if graph.n_left() > graph.n_right() {
            return Err(SolveError::TooManyLeft {
                n_left: graph.n_left(),
                n_right: graph.n_right(),
            });
        }
        let largest = graph.n_left().max(graph.n_right()).max(graph.edge_count());
        if largest >= FREE as usize {
            return Err(SolveError::TooLarge(largest));
        }
        let free_right = RightSlot {
            label: 0.0,
            owner: FREE,
            owner_start: 0,
            owner_end: 0,
            locked: false,
        };
        Ok(Self {
            graph,
            epsilon: config.epsilon,
            caps: Caps::build(graph, config)?,
            right: vec![free_right; graph.n_right()],
            discarded: vec![false; graph.n_left()],
            moves: 0,
            comparisons: 0,
            trace: config.record_trace.then(Vec::new),
            last_move: None,
        })
    }

    pub fn label(&self, v: usize) -> f64 {
        self.right[v].label
    }

    /// Snapshot of the current labels.
    pub fn labels(&self) -> LabelArray {
        LabelArray(self.right.iter().map(|s| s.label).collect())
    }

    /// Snapshot of the current matching.
    pub fn matching(&self) -> Matching {
        let mut m = Matching::new(self.graph.n_left(), self.right.len());
        for (v, s) in self.right.iter().enumerate() {
            if s.owner != FREE {
                m.assign(s.owner as usize, v);
            }
        }
        m
    }

    pub fn moves(&self) -> u64 {
        self.moves
    }

    pub fn trace(&self) -> Option<&TraceLog> {
        self.trace.as_ref()
    }

    pub fn cap_for(&self, v: usize) -> f64 {
        self.caps.for_right(v)
    }

    /// Runs the displacement chain started by free left vertex `u` until a
    /// bidder lands on a free right vertex or is discarded. Returns the
    /// discarded vertex, if any.
    pub fn match_vertex(&mut self, u: usize) -> Result<Option<usize>, SolveError> {
        if u >= self.graph.n_left() {
            return Err(SolveError::LeftOutOfRange(u));
        }
        // A matched vertex owns one of its neighbors.
        if self.graph.neighbors(u).iter().any(|e| self.right[e.right].owner == u as u32) {
            return Err(SolveError::AlreadyMatched(u));
        }
        self.discarded[u] = false;
        let all_edges = self.graph.flat_edges();
        let mut bidder = u;
        let (mut start, mut end) = self.graph.edge_span(u);
        loop {
            let right = &self.right;
            let Some(bid) = choose(&all_edges[start..end], |v| right[v].label) else {
                warn!("left vertex {} has no neighbors; discarding", bidder + 1);
                self.discarded[bidder] = true;
                return Ok(Some(bidder));
            };
            self.comparisons += (end - start) as u64;

            let v = bid.right;
            let cap = self.caps.for_right(v);
            let slot = &mut self.right[v];
            let label_before = slot.label;
            if label_before > cap {
                self.discarded[bidder] = true;
                return Ok(Some(bidder));
            }

            let locked = bid.second == f64::INFINITY;
            let label_after = if locked {
                cap + self.epsilon
            } else {
                bid.second - bid.weight + self.epsilon
            };
            let displaced = (slot.owner != FREE).then_some(slot.owner as usize);
            let displaced_span = (slot.owner_start as usize, slot.owner_end as usize);
            *slot = RightSlot {
                label: label_after,
                owner: bidder as u32,
                owner_start: start as u32,
                owner_end: end as u32,
                locked,
            };
            self.moves += 1;

            let record = MoveRecord {
                index: self.moves,
                left: bidder,
                right: v,
                weight: bid.weight,
                label_before,
                label_after,
                displaced,
                locked,
            };
            if let Some(trace) = self.trace.as_mut() {
                trace.push(record);
            }
            self.last_move = Some(record);

            match displaced {
                Some(y) => (bidder, (start, end)) = (y, displaced_span),
                None => return Ok(None),
            }
        }
    }

    pub fn finish(self) -> SolveResult {
        let matching = self.matching();
        let labels = self.labels();
        let total_weight = matching
            .weight(self.graph)
            .expect("solver only assigns graph edges");
        SolveResult {
            discarded: (0..self.discarded.len()).filter(|&u| self.discarded[u]).collect(),
            locked: (0..self.right.len()).filter(|&v| self.right[v].locked).collect(),
            total_weight,
            moves: self.moves,
            comparisons: self.comparisons,
            epsilon: self.epsilon,
            cap: self.caps.headline(),
            trace: self.trace,
            last_move: self.last_move,
            labels,
            matching,
        }
    }
}

/// Processing order of the left vertices under `order`.
pub fn left_order(n_left: usize, order: Order) -> Vec<usize> {
    let mut seq: Vec<usize> = (0..n_left).collect();
    if let Order::Shuffled(seed) = order {
        seq.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    }
    seq
}

/// Runs the auction over every left vertex.
pub fn solve(graph: &BipartiteGraph, config: &SolverConfig) -> Result<SolveResult, SolveError> {
    let mut auction = Auction::new(graph, config)?;
    for u in left_order(graph.n_left(), config.order) {
        auction.match_vertex(u)?;
    }
    Ok(auction.finish())
}
