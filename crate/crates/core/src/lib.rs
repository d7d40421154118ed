//! Weighted bipartite matching by the sequential auction algorithm.
//!
//! * [`graph`]: graph type, random generators, text format.
//! * [`auction`]: the solver.
//! * [`oracle`]: exact brute-force and Hungarian solvers for ground truth.
//! * [`audit`]: label invariants checked on solver traces.
//! * [`bench`]: scaling experiments with CSV output.
//! * [`output`]: matching and trace file formats.

pub mod auction;
pub mod audit;
pub mod bench;
pub mod graph;
pub mod oracle;
pub mod output;

pub use auction::{solve, LabelArray, Matching, MoveRecord, SolveError, SolveResult, SolverConfig, TraceLog};
pub use graph::{BipartiteGraph, Edge, GeneratorSpec, GraphKind};
pub use oracle::ExactResult;
