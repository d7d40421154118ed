//! Python bindings for `bpm-core`. Vertex indices are 0-based on this side.

use pyo3::exceptions::{PyIndexError, PyValueError};
use pyo3::prelude::*;

use bpm_core::auction::{self, CapScope, MoveRecord, Order, SolverConfig};
use bpm_core::audit as checks;
use bpm_core::bench::{self, ExperimentSpec};
use bpm_core::graph::{self, BipartiteGraph, GeneratorSpec};
use bpm_core::oracle;

fn value_error(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

/// Weighted bipartite graph with `n_left <= n_right` expected by `solve`.
#[pyclass(name = "Graph", module = "bpm_auction", frozen)]
struct PyGraph {
    inner: BipartiteGraph,
}

impl PyGraph {
    fn check_left(&self, u: usize) -> PyResult<()> {
        if u >= self.inner.n_left() {
            return Err(PyIndexError::new_err(format!("left index {u} out of range")));
        }
        Ok(())
    }
}

#[pymethods]
impl PyGraph {
    #[new]
    fn new(n_left: usize, n_right: usize, edges: Vec<(usize, usize, f64)>) -> PyResult<Self> {
        let inner = BipartiteGraph::from_edges(n_left, n_right, edges).map_err(value_error)?;
        Ok(Self { inner })
    }

    /// Complete graph from a row-major cost matrix.
    #[staticmethod]
    fn complete(weights: Vec<Vec<f64>>) -> PyResult<Self> {
        let n_right = weights.first().map_or(0, Vec::len);
        if weights.iter().any(|row| row.len() != n_right) {
            return Err(PyValueError::new_err("rows must all have the same length"));
        }
        let inner = BipartiteGraph::complete(&weights, n_right).map_err(value_error)?;
        Ok(Self { inner })
    }

    /// Random graph. `kind` is `"k-regular"` or `"complete"`.
    #[staticmethod]
    #[pyo3(signature = (n_left, n_right, kind = "k-regular", k = 3, weight_low = 0.0, weight_high = 1.0, integer_weights = false, seed = 0))]
    #[allow(clippy::too_many_arguments)]
    fn generate(
        n_left: usize,
        n_right: usize,
        kind: &str,
        k: usize,
        weight_low: f64,
        weight_high: f64,
        integer_weights: bool,
        seed: u64,
    ) -> PyResult<Self> {
        let spec = match kind {
            "k-regular" | "k-left-regular" => GeneratorSpec::k_left_regular(n_left, n_right, k, seed),
            "complete" => GeneratorSpec::complete(n_left, n_right, seed),
            other => return Err(PyValueError::new_err(format!("unknown graph kind '{other}'"))),
        }
        .with_weights(weight_low, weight_high, integer_weights);
        let inner = graph::generate(&spec).map_err(value_error)?;
        Ok(Self { inner })
    }

    /// Parses the `p bpm` / `e u v w` text format (1-based in the text).
    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        let inner = graph::parse_str(text).map_err(value_error)?;
        Ok(Self { inner })
    }

    fn to_text(&self) -> String {
        graph::serialize_to_string(&self.inner)
    }

    #[getter]
    fn n_left(&self) -> usize {
        self.inner.n_left()
    }

    #[getter]
    fn n_right(&self) -> usize {
        self.inner.n_right()
    }

    #[getter]
    fn edge_count(&self) -> usize {
        self.inner.edge_count()
    }

    /// `(w_min, w_max)`, or `None` without edges.
    #[getter]
    fn weight_range(&self) -> Option<(f64, f64)> {
        self.inner.weight_range()
    }

    fn edges(&self) -> Vec<(usize, usize, f64)> {
        self.inner.edges().collect()
    }

    fn neighbors(&self, u: usize) -> PyResult<Vec<(usize, f64)>> {
        self.check_left(u)?;
        Ok(self.inner.neighbors(u).iter().map(|e| (e.right, e.weight)).collect())
    }

    fn weight(&self, u: usize, v: usize) -> PyResult<Option<f64>> {
        self.check_left(u)?;
        Ok(self.inner.weight(u, v))
    }

    fn __len__(&self) -> usize {
        self.inner.edge_count()
    }

    fn __repr__(&self) -> String {
        format!(
            "Graph(n_left={}, n_right={}, edges={})",
            self.inner.n_left(),
            self.inner.n_right(),
            self.inner.edge_count()
        )
    }
}

#[pyclass(name = "Move", module = "bpm_auction", frozen, get_all, skip_from_py_object)]
#[derive(Clone)]
struct PyMove {
    index: u64,
    left: usize,
    right: usize,
    weight: f64,
    label_before: f64,
    label_after: f64,
    displaced: Option<usize>,
    locked: bool,
}

impl From<&MoveRecord> for PyMove {
    fn from(r: &MoveRecord) -> Self {
        Self {
            index: r.index,
            left: r.left,
            right: r.right,
            weight: r.weight,
            label_before: r.label_before,
            label_after: r.label_after,
            displaced: r.displaced,
            locked: r.locked,
        }
    }
}

#[pymethods]
impl PyMove {
    fn __repr__(&self) -> String {
        format!(
            "Move(index={}, left={}, right={}, label {} -> {})",
            self.index, self.left, self.right, self.label_before, self.label_after
        )
    }
}

#[pyclass(name = "SolveResult", module = "bpm_auction", frozen)]
struct PySolveResult {
    inner: auction::SolveResult,
}

#[pymethods]
impl PySolveResult {
    /// Matched `(u, v)` pairs in ascending `u`.
    #[getter]
    fn pairs(&self) -> Vec<(usize, usize)> {
        self.inner.matching.pairs().collect()
    }

    /// Partner of every left vertex, `None` when unmatched.
    #[getter]
    fn matching(&self) -> Vec<Option<usize>> {
        (0..self.inner.matching.n_left())
            .map(|u| self.inner.matching.right_of(u))
            .collect()
    }

    #[getter]
    fn labels(&self) -> Vec<f64> {
        self.inner.labels.as_slice().to_vec()
    }

    #[getter]
    fn discarded(&self) -> Vec<usize> {
        self.inner.discarded.clone()
    }

    #[getter]
    fn locked(&self) -> Vec<usize> {
        self.inner.locked.clone()
    }

    #[getter]
    fn total_weight(&self) -> f64 {
        self.inner.total_weight
    }

    #[getter]
    fn moves(&self) -> u64 {
        self.inner.moves
    }

    #[getter]
    fn comparisons(&self) -> u64 {
        self.inner.comparisons
    }

    #[getter]
    fn epsilon(&self) -> f64 {
        self.inner.epsilon
    }

    #[getter]
    fn cap(&self) -> Option<f64> {
        self.inner.cap
    }

    /// Move log, or `None` when solved without `trace=True`.
    #[getter]
    fn trace(&self) -> Option<Vec<PyMove>> {
        self.inner.trace.as_ref().map(|t| t.iter().map(PyMove::from).collect())
    }

    fn is_left_perfect(&self) -> bool {
        self.inner.is_left_perfect()
    }

    fn __repr__(&self) -> String {
        format!(
            "SolveResult(total_weight={}, matched={}, discarded={}, moves={})",
            self.inner.total_weight,
            self.inner.matched(),
            self.inner.discarded.len(),
            self.inner.moves
        )
    }
}

#[pyclass(name = "ExactResult", module = "bpm_auction", frozen)]
struct PyExactResult {
    inner: oracle::ExactResult,
}

#[pymethods]
impl PyExactResult {
    #[getter]
    fn optimum_weight(&self) -> f64 {
        self.inner.optimum_weight
    }

    #[getter]
    fn cardinality(&self) -> usize {
        self.inner.cardinality
    }

    #[getter]
    fn pairs(&self) -> Vec<(usize, usize)> {
        self.inner.matching.pairs().collect()
    }

    fn __repr__(&self) -> String {
        format!(
            "ExactResult(optimum_weight={}, cardinality={})",
            self.inner.optimum_weight, self.inner.cardinality
        )
    }
}

/// Runs the auction. `order` is `"input"` or `"shuffle"` (seeded by `seed`).
#[pyfunction]
#[pyo3(signature = (graph, epsilon, order = "input", seed = 0, trace = false, max_label = None, component_cap = false))]
#[allow(clippy::too_many_arguments)]
fn solve(
    py: Python<'_>,
    graph: &PyGraph,
    epsilon: f64,
    order: &str,
    seed: u64,
    trace: bool,
    max_label: Option<f64>,
    component_cap: bool,
) -> PyResult<PySolveResult> {
    let mut config = SolverConfig::new(epsilon);
    config.record_trace = trace;
    config.cap_override = max_label;
    config.order = match order {
        "input" => Order::Input,
        "shuffle" => Order::Shuffled(seed),
        other => return Err(PyValueError::new_err(format!("unknown order '{other}'"))),
    };
    if component_cap {
        config.cap_scope = CapScope::PerComponent;
    }
    let g = &graph.inner;
    let inner = py.detach(|| auction::solve(g, &config)).map_err(value_error)?;
    Ok(PySolveResult { inner })
}

/// Exhaustive search; `n_left` must be at most 10.
#[pyfunction]
fn brute_force(graph: &PyGraph) -> PyResult<PyExactResult> {
    let inner = oracle::brute_force(&graph.inner).map_err(value_error)?;
    Ok(PyExactResult { inner })
}

/// Exact assignment; raises `ValueError` when no left-perfect matching exists.
#[pyfunction]
fn hungarian(py: Python<'_>, graph: &PyGraph) -> PyResult<PyExactResult> {
    let g = &graph.inner;
    let inner = py.detach(|| oracle::hungarian(g)).map_err(value_error)?;
    Ok(PyExactResult { inner })
}

/// Invariant checks on a traced result, as `(check, passed, verdict)`.
/// The optimality check runs when `exact` is given.
#[pyfunction]
#[pyo3(signature = (graph, result, exact = None))]
fn audit(
    graph: &PyGraph,
    result: &PySolveResult,
    exact: Option<&PyExactResult>,
) -> PyResult<Vec<(String, bool, String)>> {
    let reports = checks::run_all(&graph.inner, &result.inner, exact.map(|e| &e.inner)).map_err(value_error)?;
    Ok(reports
        .iter()
        .map(|r| (r.check.to_string(), r.passed(), r.verdict()))
        .collect())
}

/// Alternating distance of every right vertex to a free one under the
/// result's matching; `None` where no alternating path exists.
#[pyfunction]
fn alternating_distances(graph: &PyGraph, result: &PySolveResult) -> Vec<Option<u32>> {
    checks::alternating_distances(&graph.inner, &result.inner.matching)
        .as_slice()
        .to_vec()
}

/// Runs a bench experiment given as TOML and returns the CSV text.
#[pyfunction]
fn bench_csv(py: Python<'_>, config: &str) -> PyResult<String> {
    let spec: ExperimentSpec = toml::from_str(config).map_err(value_error)?;
    let out = py.detach(|| bench::run_experiment(&spec)).map_err(value_error)?;
    let mut buf = Vec::new();
    bench::write_csv(&out.rows, &mut buf).map_err(value_error)?;
    String::from_utf8(buf).map_err(value_error)
}

#[pymodule]
fn bpm_auction(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyGraph>()?;
    m.add_class::<PyMove>()?;
    m.add_class::<PySolveResult>()?;
    m.add_class::<PyExactResult>()?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(brute_force, m)?)?;
    m.add_function(wrap_pyfunction!(hungarian, m)?)?;
    m.add_function(wrap_pyfunction!(audit, m)?)?;
    m.add_function(wrap_pyfunction!(alternating_distances, m)?)?;
    m.add_function(wrap_pyfunction!(bench_csv, m)?)?;
    Ok(())
}
