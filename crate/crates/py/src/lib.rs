//! Python bindings. Answers come back as plain tuples, lists and dicts;
//! experiment specs and reports cross the boundary as JSON text.

use std::collections::HashMap;

use lca_core::balls_bins::{default_cap, scheme_for, BallsBinsLca, DecisionRule};
use lca_core::coloring::{verify_coloring, Color, LllLca, LllParams};
use lca_core::graph::{format, gen_bipartite_choices, gen_binomial, gen_bounded_degree, gen_hypergraph, LocalGraph};
use lca_core::harness::{self, ExperimentSpec, DEFAULT_BALLS_CAP_CONSTANT, DEFAULT_MATCHING_CAP_CONSTANT};
use lca_core::matching::{verify_maximal, EdgeId, MatchingLca};
use lca_core::relevant::explore;
use lca_core::{acceptance, graph, LcaError, OrderingKind, RankOracle};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn err(e: LcaError) -> PyErr {
    if e.is_algorithm_failure() {
        PyRuntimeError::new_err(e.to_string())
    } else {
        PyValueError::new_err(e.to_string())
    }
}

fn ordering(spec: &str) -> PyResult<OrderingKind> {
    match spec.split(':').collect::<Vec<_>>().as_slice() {
        ["full"] => Ok(OrderingKind::FullPseudorandom),
        ["kwise", k] => k
            .parse()
            .map(OrderingKind::k_wise)
            .map_err(|_| PyValueError::new_err(format!("bad k in '{spec}'"))),
        _ => Err(PyValueError::new_err(format!("ordering '{spec}' is not full or kwise:K"))),
    }
}

fn cap_for(n: usize, constant: f64) -> usize {
    ((constant * (n.max(2) as f64).log2()).ceil() as usize).max(1)
}

/// 256-bit master seed plus ensemble index.
#[pyclass(frozen, eq, skip_from_py_object)]
#[derive(Clone, PartialEq)]
struct Seed(lca_core::Seed);

#[pymethods]
impl Seed {
    #[new]
    fn new(hex: &str) -> PyResult<Self> {
        lca_core::Seed::from_hex(hex).map(Seed).map_err(err)
    }

    #[staticmethod]
    fn from_int(x: u64) -> Self {
        Seed(lca_core::Seed::from_u64(x))
    }

    #[getter]
    fn hex(&self) -> String {
        self.0.to_hex()
    }

    fn derive(&self, label: &str) -> Self {
        Seed(self.0.derive(label.as_bytes()))
    }

    fn ensemble(&self, index: u64) -> Self {
        Seed(self.0.ensemble(index))
    }

    fn __repr__(&self) -> String {
        format!("Seed('{}')", self.0.to_hex())
    }
}

/// Rank of `vertex` as `(value, owner)`; compare tuples to order vertices.
#[pyfunction]
#[pyo3(signature = (seed, vertex, universe, ordering = "full"))]
fn rank(seed: &Seed, vertex: u64, universe: u64, ordering: &str) -> PyResult<(u64, u64)> {
    let r = RankOracle::new(&seed.0, self::ordering(ordering)?, universe)
        .and_then(|o| o.rank_of(vertex))
        .map_err(err)?;
    Ok((r.value, r.owner))
}

#[pyclass(frozen)]
struct Graph(LocalGraph);

#[pymethods]
impl Graph {
    #[new]
    fn new(n: usize, edges: Vec<(usize, usize)>) -> PyResult<Self> {
        LocalGraph::from_edges(n, &edges).map(Graph).map_err(err)
    }

    #[staticmethod]
    fn bounded_degree(seed: &Seed, n: usize, d: usize) -> PyResult<Self> {
        gen_bounded_degree(&seed.0, n, d).map(Graph).map_err(err)
    }

    #[staticmethod]
    fn binomial(seed: &Seed, n: usize, d: f64) -> PyResult<Self> {
        gen_binomial(&seed.0, n, d).map(Graph).map_err(err)
    }

    #[staticmethod]
    fn parse(text: &str) -> PyResult<Self> {
        format::parse_graph(text).map(Graph).map_err(err)
    }

    fn to_text(&self) -> String {
        format::write_graph(&self.0)
    }

    #[getter]
    fn n(&self) -> usize {
        self.0.n()
    }

    fn edges(&self) -> Vec<(usize, usize)> {
        self.0.edges().collect()
    }

    fn neighbors(&self, v: usize) -> PyResult<Vec<usize>> {
        self.0.neighbors(v).map(<[usize]>::to_vec).map_err(err)
    }

    /// Vertices of the relevant set of `root`, lowest rank first.
    #[pyo3(signature = (root, seed, cap = usize::MAX, ordering = "full"))]
    fn relevant_set(&self, root: usize, seed: &Seed, cap: usize, ordering: &str) -> PyResult<(Vec<usize>, bool)> {
        let set = explore(&self.0, root, &seed.0, self::ordering(ordering)?, cap).map_err(err)?;
        Ok((set.ids().collect(), set.truncated))
    }

    /// `(matched, probes)` for the edge `(u, v)`.
    #[pyo3(signature = (u, v, seed, cap_constant = DEFAULT_MATCHING_CAP_CONSTANT))]
    fn is_matched(&self, u: usize, v: usize, seed: &Seed, cap_constant: f64) -> PyResult<(bool, u64)> {
        let lca = MatchingLca::new(&self.0, &seed.0, OrderingKind::FullPseudorandom, cap_for(self.0.n(), cap_constant))
            .map_err(err)?;
        let verdict = lca.is_matched(EdgeId::new(u, v).map_err(err)?).map_err(err)?;
        Ok((verdict.matched, verdict.probes))
    }

    /// Every edge queried independently.
    #[pyo3(signature = (seed, cap_constant = DEFAULT_MATCHING_CAP_CONSTANT))]
    fn matching(&self, seed: &Seed, cap_constant: f64) -> PyResult<Vec<(usize, usize)>> {
        let lca = MatchingLca::new(&self.0, &seed.0, OrderingKind::FullPseudorandom, cap_for(self.0.n(), cap_constant))
            .map_err(err)?;
        Ok(lca.full_matching().map_err(err)?.into_iter().map(|e| (e.u, e.v)).collect())
    }

    fn is_maximal_matching(&self, edges: Vec<(usize, usize)>) -> PyResult<bool> {
        let set = edges
            .into_iter()
            .map(|(u, v)| EdgeId::new(u, v))
            .collect::<Result<_, _>>()
            .map_err(err)?;
        Ok(verify_maximal(&self.0, &set))
    }
}

#[pyclass(frozen)]
struct Hypergraph(graph::Hypergraph);

#[pymethods]
impl Hypergraph {
    #[new]
    fn new(m: usize, edges: Vec<Vec<usize>>) -> PyResult<Self> {
        graph::Hypergraph::new(m, edges).map(Hypergraph).map_err(err)
    }

    /// `n` edges of size `k` over `m` vertices, each meeting at most `d` others.
    #[staticmethod]
    fn generate(seed: &Seed, m: usize, n: usize, k: usize, d: usize) -> PyResult<Self> {
        gen_hypergraph(&seed.0, m, n, k, d).map(Hypergraph).map_err(err)
    }

    #[getter]
    fn m(&self) -> usize {
        self.0.m()
    }

    fn edges(&self) -> Vec<Vec<usize>> {
        self.0.edges().to_vec()
    }

    /// `(color, phase, probes)` of vertex `x`, color being "red" or "blue".
    #[pyo3(signature = (x, seed, lenient = false))]
    fn color_query(&self, x: usize, seed: &Seed, lenient: bool) -> PyResult<(&'static str, u8, u64)> {
        let a = LllLca::new(&self.0, &seed.0, &params(lenient))
            .and_then(|lca| lca.query(x))
            .map_err(err)?;
        Ok((color_name(Color::from_bit(a.value)), a.phase_resolved, a.probes))
    }

    /// Colors of all vertices and the phase that fixed each one.
    #[pyo3(signature = (seed, lenient = false))]
    fn color_all(&self, seed: &Seed, lenient: bool) -> PyResult<(Vec<&'static str>, Vec<u8>)> {
        let sol = LllLca::new(&self.0, &seed.0, &params(lenient))
            .and_then(|lca| lca.solve_all())
            .map_err(err)?;
        Ok((sol.colors().into_iter().map(color_name).collect(), sol.phases))
    }

    fn is_proper(&self, colors: Vec<String>) -> PyResult<bool> {
        let colors = colors
            .iter()
            .map(|c| match c.as_str() {
                "red" => Ok(Color::Red),
                "blue" => Ok(Color::Blue),
                other => Err(PyValueError::new_err(format!("unknown color '{other}'"))),
            })
            .collect::<PyResult<Vec<_>>>()?;
        Ok(verify_coloring(&self.0, &colors))
    }
}

fn params(lenient: bool) -> LllParams {
    if lenient {
        LllParams::lenient()
    } else {
        LllParams::default()
    }
}

fn color_name(c: Color) -> &'static str {
    match c {
        Color::Red => "red",
        Color::Blue => "blue",
    }
}

/// Assigns `n` balls to `m` bins, each ball queried independently.
/// Returns `{"bins": [...], "loads": [...], "max_load": int, "failures": int}`.
#[pyfunction]
#[pyo3(signature = (seed, n, m, d = 2, rule = "least-loaded", cap_constant = DEFAULT_BALLS_CAP_CONSTANT))]
fn balls_bins(seed: &Seed, n: usize, m: usize, d: usize, rule: &str, cap_constant: f64) -> PyResult<HashMap<&'static str, PyObjectValue>> {
    let rule = DecisionRule::parse(rule).map_err(err)?;
    let bc = gen_bipartite_choices(&seed.0.derive(b"instance"), n, m, d, &scheme_for(rule, None, n, m)).map_err(err)?;
    let lca = BallsBinsLca::new(&bc, rule, &seed.0, OrderingKind::FullPseudorandom, default_cap(m, cap_constant))
        .map_err(err)?;
    let (assignments, profile) = lca.assign_all().map_err(err)?;
    Ok(HashMap::from([
        ("bins", PyObjectValue::List(assignments.iter().map(|a| a.bin as u64).collect())),
        ("loads", PyObjectValue::List(profile.loads)),
        ("max_load", PyObjectValue::Int(profile.max_load)),
        ("failures", PyObjectValue::Int(assignments.iter().filter(|a| a.failed).count() as u64)),
    ]))
}

#[derive(IntoPyObject)]
enum PyObjectValue {
    Int(u64),
    List(Vec<u64>),
}

/// Runs an experiment spec (JSON text) and returns the report as JSON text.
#[pyfunction]
fn run_experiment(py: Python<'_>, spec_json: &str) -> PyResult<String> {
    let spec: ExperimentSpec =
        serde_json::from_str(spec_json).map_err(|e| PyValueError::new_err(format!("bad spec: {e}")))?;
    let report = py.detach(|| harness::run(&spec)).map_err(err)?;
    Ok(serde_json::to_string(&report).expect("report serializes"))
}

/// `(passed, detail)` of one acceptance criterion.
#[pyfunction]
fn acceptance_criterion(py: Python<'_>, id: u8, seed: &Seed) -> PyResult<(bool, String)> {
    let r = py.detach(|| acceptance::run_criterion(id, &seed.0)).map_err(err)?;
    Ok((r.passed, r.detail))
}

#[pymodule]
fn lca(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add("__version__", harness::VERSION)?;
    m.add_class::<Seed>()?;
    m.add_class::<Graph>()?;
    m.add_class::<Hypergraph>()?;
    m.add_function(wrap_pyfunction!(rank, m)?)?;
    m.add_function(wrap_pyfunction!(balls_bins, m)?)?;
    m.add_function(wrap_pyfunction!(run_experiment, m)?)?;
    m.add_function(wrap_pyfunction!(acceptance_criterion, m)?)?;
    Ok(())
}
