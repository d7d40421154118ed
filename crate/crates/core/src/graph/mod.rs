//! Weighted bipartite graphs.
//!
//! Left vertices `U` bid, right vertices `V` carry labels. Indices are
//! 0-based in memory and 1-based in the text format.

mod generate;
pub(crate) mod io;

pub use generate::{generate, GeneratorSpec, GraphKind};
pub use io::{parse, parse_str, serialize, serialize_to_string, ParseError};

use thiserror::Error;

/// One adjacency entry of a left vertex.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub right: usize,
    pub weight: f64,
}

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("graph needs at least one right vertex")]
    NoRightVertices,
    #[error("left vertex {left}: right index {right} out of range (n_right = {n_right})")]
    RightOutOfRange { left: usize, right: usize, n_right: usize },
    #[error("left vertex {left}: right index {right} out of range (n_left = {n_left})")]
    LeftOutOfRange { left: usize, right: usize, n_left: usize },
    #[error("duplicate edge ({left}, {right})")]
    DuplicateEdge { left: usize, right: usize },
    #[error("edge ({left}, {right}) has non-finite weight")]
    NonFiniteWeight { left: usize, right: usize },
    #[error("invalid generator spec: {0}")]
    InvalidSpec(String),
}

/// Weighted bipartite graph `G = (U ∪ V, E)`.
///
/// Adjacency lists are kept sorted by right index, so two graphs with the
/// same edge set compare equal regardless of construction order. They are
/// stored back to back (`edges[offsets[u]..offsets[u + 1]]`).
#[derive(Debug, Clone, PartialEq)]
pub struct BipartiteGraph {
    n_right: usize,
    offsets: Vec<usize>,
    edges: Vec<Edge>,
    weight_range: Option<(f64, f64)>,
}

impl BipartiteGraph {
    pub fn new(n_right: usize, mut adjacency: Vec<Vec<Edge>>) -> Result<Self, GraphError> {
        if n_right == 0 {
            return Err(GraphError::NoRightVertices);
        }
        let mut range: Option<(f64, f64)> = None;
        let mut offsets = Vec::with_capacity(adjacency.len() + 1);
        offsets.push(0);
        for (left, edges) in adjacency.iter_mut().enumerate() {
            edges.sort_by_key(|e| e.right);
            for (i, e) in edges.iter().enumerate() {
                if e.right >= n_right {
                    return Err(GraphError::RightOutOfRange { left, right: e.right, n_right });
                }
                if i > 0 && edges[i - 1].right == e.right {
                    return Err(GraphError::DuplicateEdge { left, right: e.right });
                }
                if !e.weight.is_finite() {
                    return Err(GraphError::NonFiniteWeight { left, right: e.right });
                }
                range = Some(match range {
                    None => (e.weight, e.weight),
                    Some((lo, hi)) => (lo.min(e.weight), hi.max(e.weight)),
                });
            }
            offsets.push(offsets[left] + edges.len());
        }
        Ok(Self {
            n_right,
            offsets,
            edges: adjacency.into_iter().flatten().collect(),
            weight_range: range,
        })
    }

    /// Builds a graph from 0-based `(left, right, weight)` triples.
    pub fn from_edges<I>(n_left: usize, n_right: usize, edges: I) -> Result<Self, GraphError>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut adjacency = vec![Vec::new(); n_left];
        for (left, right, weight) in edges {
            if left >= n_left {
                return Err(GraphError::LeftOutOfRange { left, right, n_left });
            }
            adjacency[left].push(Edge { right, weight });
        }
        Self::new(n_right, adjacency)
    }

    /// Complete bipartite graph from a row-major `n_left × n_right` cost matrix.
    pub fn complete(weights: &[Vec<f64>], n_right: usize) -> Result<Self, GraphError> {
        let adjacency = weights
            .iter()
            .map(|row| {
                row.iter()
                    .enumerate()
                    .map(|(right, &weight)| Edge { right, weight })
                    .collect()
            })
            .collect();
        Self::new(n_right, adjacency)
    }

    pub fn n_left(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn n_right(&self) -> usize {
        self.n_right
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, left: usize) -> &[Edge] {
        &self.edges[self.offsets[left]..self.offsets[left + 1]]
    }

    /// Position of `left`'s adjacency in [`BipartiteGraph::flat_edges`].
    pub(crate) fn edge_span(&self, left: usize) -> (usize, usize) {
        (self.offsets[left], self.offsets[left + 1])
    }

    /// Every adjacency list, back to back in left order.
    pub(crate) fn flat_edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn degree(&self, left: usize) -> usize {
        self.offsets[left + 1] - self.offsets[left]
    }

    /// `(w_min, w_max)`, or `None` for an edgeless graph.
    pub fn weight_range(&self) -> Option<(f64, f64)> {
        self.weight_range
    }

    pub fn w_min(&self) -> Option<f64> {
        self.weight_range.map(|(lo, _)| lo)
    }

    pub fn w_max(&self) -> Option<f64> {
        self.weight_range.map(|(_, hi)| hi)
    }

    pub fn weight(&self, left: usize, right: usize) -> Option<f64> {
        let edges = self.neighbors(left);
        edges
            .binary_search_by_key(&right, |e| e.right)
            .ok()
            .map(|i| edges[i].weight)
    }

    /// All edges as 0-based triples, ordered by `(left, right)`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n_left()).flat_map(move |u| self.neighbors(u).iter().map(move |e| (u, e.right, e.weight)))
    }

    /// For each right vertex, the left vertices adjacent to it (ascending).
    pub fn reverse_adjacency(&self) -> Vec<Vec<usize>> {
        let mut rev = vec![Vec::new(); self.n_right];
        for (u, v, _) in self.edges() {
            rev[v].push(u);
        }
        rev
    }

    /// Connected component id of every right vertex, numbered in order of
    /// first appearance. Isolated right vertices get their own component.
    pub fn right_components(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.n_right).collect();
        fn find(parent: &mut [usize], mut x: usize) -> usize {
            while parent[x] != x {
                parent[x] = parent[parent[x]];
                x = parent[x];
            }
            x
        }
        for u in 0..self.n_left() {
            let edges = self.neighbors(u);
            if let Some(first) = edges.first() {
                let a = find(&mut parent, first.right);
                for e in &edges[1..] {
                    let b = find(&mut parent, e.right);
                    if a != b {
                        parent[b] = a;
                    }
                }
            }
        }
        let mut ids = vec![usize::MAX; self.n_right];
        let mut root_id = vec![usize::MAX; self.n_right];
        let mut next = 0;
        for v in 0..self.n_right {
            let r = find(&mut parent, v);
            if root_id[r] == usize::MAX {
                root_id[r] = next;
                next += 1;
            }
            ids[v] = root_id[r];
        }
        ids
    }
}
