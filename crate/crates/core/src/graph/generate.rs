use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{BipartiteGraph, Edge, GraphError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GraphKind {
    /// Every left vertex picks `k` distinct right neighbors uniformly at random.
    #[serde(alias = "k-regular")]
    KLeftRegular,
    Complete,
}

/// Parameters for [`generate`].
///
/// The random stream is `ChaCha8Rng::seed_from_u64(seed)`. Draw order is
/// fixed: for each left vertex in index order, first its neighbors (for
/// k-left-regular graphs: rejection-sampled until `k` are distinct; for
/// complete graphs: every right vertex ascending), then one weight per
/// neighbor in the order the neighbors were drawn.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSpec {
    pub kind: GraphKind,
    pub n_right: usize,
    pub n_left: usize,
    pub k: usize,
    pub weight_low: f64,
    pub weight_high: f64,
    pub integer_weights: bool,
    pub seed: u64,
}

impl GeneratorSpec {
    pub fn k_left_regular(n_left: usize, n_right: usize, k: usize, seed: u64) -> Self {
        Self {
            kind: GraphKind::KLeftRegular,
            n_right,
            n_left,
            k,
            weight_low: 0.0,
            weight_high: 1.0,
            integer_weights: false,
            seed,
        }
    }

    pub fn complete(n_left: usize, n_right: usize, seed: u64) -> Self {
        Self {
            kind: GraphKind::Complete,
            k: n_right,
            ..Self::k_left_regular(n_left, n_right, n_right, seed)
        }
    }

    pub fn with_weights(mut self, low: f64, high: f64, integer: bool) -> Self {
        self.weight_low = low;
        self.weight_high = high;
        self.integer_weights = integer;
        self
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let bad = |msg: String| Err(GraphError::InvalidSpec(msg));
        if self.n_right == 0 {
            return bad("n_right must be at least 1".into());
        }
        if !self.weight_low.is_finite() || !self.weight_high.is_finite() {
            return bad("weight bounds must be finite".into());
        }
        if self.weight_low > self.weight_high {
            return bad(format!(
                "weight_low {} exceeds weight_high {}",
                self.weight_low, self.weight_high
            ));
        }
        if self.integer_weights && self.weight_low.ceil() > self.weight_high.floor() {
            return bad(format!(
                "no integer in [{}, {}]",
                self.weight_low, self.weight_high
            ));
        }
        if self.kind == GraphKind::KLeftRegular {
            if self.k == 0 {
                return bad("k must be at least 1".into());
            }
            if self.k > self.n_right {
                return bad(format!("k = {} exceeds n_right = {}", self.k, self.n_right));
            }
        }
        Ok(())
    }
}

struct WeightSampler {
    low: f64,
    high: f64,
    integer: Option<(i64, i64)>,
}

impl WeightSampler {
    fn new(spec: &GeneratorSpec) -> Self {
        let integer = spec
            .integer_weights
            .then(|| (spec.weight_low.ceil() as i64, spec.weight_high.floor() as i64));
        Self {
            low: spec.weight_low,
            high: spec.weight_high,
            integer,
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match self.integer {
            Some((lo, hi)) => rng.gen_range(lo..=hi) as f64,
            None if self.low == self.high => self.low,
            None => rng.gen_range(self.low..self.high),
        }
    }
}

/// Draws a random graph. Equal specs produce equal graphs.
pub fn generate(spec: &GeneratorSpec) -> Result<BipartiteGraph, GraphError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let weights = WeightSampler::new(spec);
    let mut adjacency = Vec::with_capacity(spec.n_left);
    let mut chosen = Vec::with_capacity(spec.k);
    for _ in 0..spec.n_left {
        chosen.clear();
        match spec.kind {
            GraphKind::KLeftRegular => {
                while chosen.len() < spec.k {
                    let v = rng.gen_range(0..spec.n_right);
                    if !chosen.contains(&v) {
                        chosen.push(v);
                    }
                }
            }
            GraphKind::Complete => chosen.extend(0..spec.n_right),
        }
        let edges: Vec<Edge> = chosen
            .iter()
            .map(|&right| Edge {
                right,
                weight: weights.sample(&mut rng),
            })
            .collect();
        adjacency.push(edges);
    }
    BipartiteGraph::new(spec.n_right, adjacency)
}
