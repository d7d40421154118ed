//! Scaling experiments over random graph families, written as CSV.

use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::auction::{solve, SolverConfig};
use crate::audit::{alternating_distances, rewind_last_move};
use crate::graph::{generate, GeneratorSpec, GraphKind};

pub const CSV_HEADER: [&str; 12] = [
    "n_right",
    "n_left",
    "k",
    "epsilon",
    "seed",
    "moves",
    "comparisons",
    "discarded",
    "total_weight",
    "sum_distances",
    "max_label",
    "wall_time_ns",
];

#[derive(Debug, Error)]
pub enum BenchError {
    #[error("invalid experiment: {0}")]
    InvalidSpec(String),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub family: GraphKind,
    pub n_right: Vec<usize>,
    /// `n_left / n_right`; `n_left` is rounded to the nearest integer.
    pub density: f64,
    #[serde(default)]
    pub k: usize,
    pub epsilons: Vec<f64>,
    #[serde(default)]
    pub weight_low: f64,
    #[serde(default = "one")]
    pub weight_high: f64,
    #[serde(default)]
    pub integer_weights: bool,
    #[serde(default = "one_usize")]
    pub trials: usize,
    #[serde(default)]
    pub base_seed: u64,
    /// Run trials on the rayon pool. Rows keep their order either way.
    #[serde(default = "default_true")]
    pub parallel: bool,
    /// Measure wall time; when off, `wall_time_ns` is written as 0 and the
    /// CSV is byte-for-byte reproducible.
    #[serde(default = "default_true")]
    pub timing: bool,
}

fn one() -> f64 {
    1.0
}

fn one_usize() -> usize {
    1
}

impl ExperimentSpec {
    pub fn validate(&self) -> Result<(), BenchError> {
        let bad = |m: String| Err(BenchError::InvalidSpec(m));
        if self.n_right.is_empty() || self.n_right.contains(&0) {
            return bad("n_right values must be positive and non-empty".into());
        }
        if self.epsilons.is_empty() || self.epsilons.iter().any(|e| !(*e > 0.0 && e.is_finite())) {
            return bad("epsilons must be positive and non-empty".into());
        }
        if self.trials == 0 {
            return bad("trials must be at least 1".into());
        }
        match self.family {
            GraphKind::KLeftRegular => {
                if !(self.density > 0.0 && self.density < 1.0) {
                    return bad(format!("density {} must lie in (0, 1)", self.density));
                }
                if self.k == 0 {
                    return bad("k must be at least 1".into());
                }
            }
            GraphKind::Complete => {
                if !(self.density > 0.0 && self.density <= 1.0) {
                    return bad(format!("density {} must lie in (0, 1]", self.density));
                }
            }
        }
        if self.weight_low > self.weight_high {
            return bad("weight_low exceeds weight_high".into());
        }
        Ok(())
    }

    pub fn n_left_for(&self, n_right: usize) -> usize {
        ((self.density * n_right as f64).round() as usize).min(n_right)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRow {
    pub n_right: usize,
    pub n_left: usize,
    pub k: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub moves: u64,
    pub comparisons: u64,
    pub discarded: usize,
    pub total_weight: f64,
    /// Sum of finite alternating distances after move `P - 1`.
    pub sum_distances: u64,
    /// Largest final label over right vertices that were not locked.
    pub max_label: f64,
    pub wall_time_ns: u128,
    // Not part of the CSV.
    pub label_sum: f64,
    pub locked: usize,
    pub weight_span: f64,
}

impl ExperimentRow {
    /// Label-mass bound on the move count; meaningful when no lock occurred.
    pub fn move_bound(&self) -> f64 {
        1.0 + self.label_sum / self.epsilon
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFailure {
    pub n_right: usize,
    pub epsilon: f64,
    pub seed: u64,
    pub error: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentOutput {
    pub rows: Vec<ExperimentRow>,
    pub failures: Vec<TrialFailure>,
}

#[derive(Debug, Clone, Copy)]
struct Job {
    n_right: usize,
    epsilon: f64,
    seed: u64,
}

fn run_trial(spec: &ExperimentSpec, job: Job) -> Result<ExperimentRow, String> {
    let n_left = spec.n_left_for(job.n_right);
    let k = match spec.family {
        GraphKind::KLeftRegular => spec.k,
        GraphKind::Complete => job.n_right,
    };
    let gen = GeneratorSpec {
        kind: spec.family,
        n_right: job.n_right,
        n_left,
        k,
        weight_low: spec.weight_low,
        weight_high: spec.weight_high,
        integer_weights: spec.integer_weights,
        seed: job.seed,
    };
    let graph = generate(&gen).map_err(|e| e.to_string())?;
    let config = SolverConfig::new(job.epsilon);

    let start = Instant::now();
    let result = solve(&graph, &config).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed().as_nanos();

    let (_, before_last) = rewind_last_move(&result);
    let sum_distances = alternating_distances(&graph, &before_last).sum_finite();
    let max_label = (0..graph.n_right())
        .filter(|v| result.locked.binary_search(v).is_err())
        .map(|v| result.labels[v])
        .fold(0.0, f64::max);
    let (lo, hi) = graph.weight_range().unwrap_or((0.0, 0.0));

    Ok(ExperimentRow {
        n_right: job.n_right,
        n_left,
        k,
        epsilon: job.epsilon,
        seed: job.seed,
        moves: result.moves,
        comparisons: result.comparisons,
        discarded: result.discarded.len(),
        total_weight: result.total_weight,
        sum_distances,
        max_label,
        wall_time_ns: if spec.timing { elapsed } else { 0 },
        label_sum: result.labels.sum(),
        locked: result.locked.len(),
        weight_span: hi - lo,
    })
}

/// Runs every `(n_right, ε, trial)` cell. Trial `t` of the `i`-th size uses
/// seed `base_seed + i·trials + t`, so all ε values see the same graphs.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput, BenchError> {
    spec.validate()?;
    let mut jobs = Vec::new();
    for (i, &n_right) in spec.n_right.iter().enumerate() {
        for &epsilon in &spec.epsilons {
            for t in 0..spec.trials {
                let offset = (i * spec.trials + t) as u64;
                jobs.push(Job {
                    n_right,
                    epsilon,
                    seed: spec.base_seed.wrapping_add(offset),
                });
            }
        }
    }
    let outcomes: Vec<_> = if spec.parallel {
        jobs.par_iter().map(|&j| (j, run_trial(spec, j))).collect()
    } else {
        jobs.iter().map(|&j| (j, run_trial(spec, j))).collect()
    };

    let mut out = ExperimentOutput::default();
    for (job, outcome) in outcomes {
        match outcome {
            Ok(row) => out.rows.push(row),
            Err(error) => {
                log::warn!("trial n_right={} seed={} failed: {}", job.n_right, job.seed, error);
                out.failures.push(TrialFailure {
                    n_right: job.n_right,
                    epsilon: job.epsilon,
                    seed: job.seed,
                    error,
                });
            }
        }
    }
    Ok(out)
}

pub fn write_csv<W: Write>(rows: &[ExperimentRow], out: W) -> Result<(), BenchError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER)?;
    for r in rows {
        w.write_record([
            r.n_right.to_string(),
            r.n_left.to_string(),
            r.k.to_string(),
            r.epsilon.to_string(),
            r.seed.to_string(),
            r.moves.to_string(),
            r.comparisons.to_string(),
            r.discarded.to_string(),
            r.total_weight.to_string(),
            r.sum_distances.to_string(),
            r.max_label.to_string(),
            r.wall_time_ns.to_string(),
        ])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Median of `values`; the mean of the two middle values for even counts.
pub fn median(values: &mut [f64]) -> f64 {
    assert!(!values.is_empty(), "median of empty slice");
    values.sort_by(f64::total_cmp);
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / 2.0
    }
}
