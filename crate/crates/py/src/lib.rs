//! Python bindings: hypergraphs, generators, sampling, recovery, alignment,
//! bounds and the knowledge-graph scoring helpers.

use std::collections::BTreeMap;

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;

use hgrec_core::alignment::{self, AnchorSet};
use hgrec_core::bounds::{self, BoundsInput};
use hgrec_core::generators::{GeneratorSpec, Structure};
use hgrec_core::kg;
use hgrec_core::masking::{self, Dataset, UniformSingleMask};
use hgrec_core::oracle::{train_tabular, ExactOracle};
use hgrec_core::recovery::{self, CandidateSet};
use hgrec_core::{Hyperedge, NodeId, NodeRelabeling, SimpleGraph, WeightedHypergraph};

fn py_err(e: hgrec_core::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn edge(nodes: &[String]) -> PyResult<Hyperedge> {
    Hyperedge::from_tokens(nodes).map_err(py_err)
}

fn edge_tokens(e: &Hyperedge) -> Vec<String> {
    e.nodes().iter().map(|v| v.to_string()).collect()
}

fn relabeling(map: &BTreeMap<String, String>) -> PyResult<NodeRelabeling> {
    let pairs = map
        .iter()
        .map(|(a, b)| Ok((NodeId::new(a.as_str())?, NodeId::new(b.as_str())?)))
        .collect::<hgrec_core::Result<Vec<_>>>()
        .map_err(py_err)?;
    NodeRelabeling::new(pairs).map_err(py_err)
}

fn mapping_dict(phi: &NodeRelabeling) -> BTreeMap<String, String> {
    phi.pairs().map(|(a, b)| (a.to_string(), b.to_string())).collect()
}

/// Weighted hypergraph over string node tokens.
#[pyclass(name = "Hypergraph", module = "hgrec", skip_from_py_object)]
#[derive(Clone)]
struct PyHypergraph {
    inner: WeightedHypergraph,
}

#[pymethods]
impl PyHypergraph {
    /// `edges` is a list of `(nodes, weight)` pairs.
    #[new]
    fn new(edges: Vec<(Vec<String>, f64)>) -> PyResult<Self> {
        let edges = edges.iter().map(|(nodes, w)| Ok((edge(nodes)?, *w))).collect::<PyResult<Vec<_>>>()?;
        Ok(PyHypergraph { inner: WeightedHypergraph::from_edges(edges).map_err(py_err)? })
    }

    #[staticmethod]
    fn decode(text: &str) -> PyResult<Self> {
        Ok(PyHypergraph { inner: WeightedHypergraph::decode(text).map_err(py_err)? })
    }

    fn encode(&self) -> String {
        self.inner.encode()
    }

    fn edges(&self) -> Vec<(Vec<String>, f64)> {
        self.inner.edges().map(|(e, w)| (edge_tokens(e), w)).collect()
    }

    fn nodes(&self) -> Vec<String> {
        self.inner.nodes().iter().map(|v| v.to_string()).collect()
    }

    fn weight(&self, nodes: Vec<String>) -> PyResult<Option<f64>> {
        Ok(self.inner.weight(&edge(&nodes)?))
    }

    fn normalize(&self) -> PyResult<Self> {
        Ok(PyHypergraph { inner: self.inner.normalize().map_err(py_err)? })
    }

    fn relabel(&self, mapping: BTreeMap<String, String>) -> PyResult<Self> {
        Ok(PyHypergraph { inner: self.inner.relabel(&relabeling(&mapping)?).map_err(py_err)? })
    }

    fn range_ratio(&self) -> Option<f64> {
        self.inner.range_ratio()
    }

    fn __len__(&self) -> usize {
        self.inner.edge_count()
    }

    fn __repr__(&self) -> String {
        format!("Hypergraph({} nodes, {} edges)", self.inner.node_count(), self.inner.edge_count())
    }
}

/// Benchmark instance: structure is one of star, x, chain, wcgnm, frucht.
#[pyfunction]
#[pyo3(signature = (structure, n, w_min = 1.0, w_max = 1.0, seed = 0, p = None))]
fn generate(
    structure: &str,
    n: usize,
    w_min: f64,
    w_max: f64,
    seed: u64,
    p: Option<f64>,
) -> PyResult<PyHypergraph> {
    let structure: Structure = structure.parse().map_err(py_err)?;
    let spec = GeneratorSpec { structure, n, p, w_min, w_max, seed };
    Ok(PyHypergraph { inner: spec.generate().map_err(py_err)? })
}

#[pyfunction]
fn dissimilarity(h1: &PyHypergraph, h2: &PyHypergraph) -> f64 {
    hgrec_core::dissimilarity(&h1.inner, &h2.inner)
}

#[pyfunction]
#[pyo3(signature = (h, n, seed = 0))]
fn sample_dataset(h: &PyHypergraph, n: usize, seed: u64) -> PyResult<Vec<Vec<String>>> {
    let d = masking::sample_dataset(&h.inner, n, seed).map_err(py_err)?;
    Ok(d.samples.iter().map(edge_tokens).collect())
}

/// Plug-in estimate from a list of sampled hyperedges.
#[pyfunction]
fn recover_from_samples(samples: Vec<Vec<String>>) -> PyResult<PyHypergraph> {
    let samples = samples.iter().map(|s| edge(s)).collect::<PyResult<Vec<_>>>()?;
    Ok(PyHypergraph { inner: recovery::recover_from_dataset(&Dataset::new(samples)).map_err(py_err)? })
}

/// Samples N hyperedges with K single-node masks each, fits the count-ratio
/// oracle and recovers. Returns the recovered hypergraph, whether the
/// meta-graph was connected, and the plug-in estimate on the same samples.
#[pyfunction]
#[pyo3(signature = (h, n, k = 1, seed = 0))]
fn mm_recover(
    h: &PyHypergraph,
    n: usize,
    k: usize,
    seed: u64,
) -> PyResult<(PyHypergraph, bool, PyHypergraph)> {
    let mm = masking::sample_mm_dataset(&h.inner, n, k, &UniformSingleMask, seed).map_err(py_err)?;
    let oracle = train_tabular(&mm);
    let rec = recovery::recover_from_oracle(
        &oracle,
        &CandidateSet::all_pairs_from_oracle(&oracle),
        &UniformSingleMask,
    )
    .map_err(py_err)?;
    let plugin = recovery::recover_from_dataset(&mm.outer_samples()).map_err(py_err)?;
    Ok((PyHypergraph { inner: rec.hypergraph }, rec.meta_connected, PyHypergraph { inner: plugin }))
}

/// Recovery from the exact posterior oracle of a normalized hypergraph.
#[pyfunction]
fn exact_oracle_recover(h: &PyHypergraph) -> PyResult<PyHypergraph> {
    let oracle = ExactOracle::new(h.inner.clone(), UniformSingleMask).map_err(py_err)?;
    let cands = CandidateSet::all_pairs_from_oracle(&oracle);
    let rec = recovery::recover_from_oracle(&oracle, &cands, &UniformSingleMask).map_err(py_err)?;
    Ok(PyHypergraph { inner: rec.hypergraph })
}

#[pyfunction]
#[pyo3(signature = (h1, h2, max_nodes = alignment::DEFAULT_MAX_NODES))]
fn align_exact(
    h1: &PyHypergraph,
    h2: &PyHypergraph,
    max_nodes: usize,
) -> PyResult<(BTreeMap<String, String>, f64)> {
    let a = alignment::align_exact(&h1.inner, &h2.inner, max_nodes).map_err(py_err)?;
    Ok((mapping_dict(&a.mapping), a.cost))
}

/// Anchored individualization-refinement; returns the mapping and the
/// number of backtracks.
#[pyfunction]
#[pyo3(signature = (h1, h2, anchors = Vec::new()))]
fn align_wl(
    h1: &PyHypergraph,
    h2: &PyHypergraph,
    anchors: Vec<(String, String)>,
) -> PyResult<(BTreeMap<String, String>, usize)> {
    let pairs = anchors
        .iter()
        .map(|(a, b)| Ok((NodeId::new(a.as_str())?, NodeId::new(b.as_str())?)))
        .collect::<hgrec_core::Result<Vec<_>>>()
        .map_err(py_err)?;
    let anchors = AnchorSet::nodes(pairs).map_err(py_err)?;
    let out = alignment::align_wl_anchored(&h1.inner, &h2.inner, &anchors).map_err(py_err)?;
    Ok((mapping_dict(&out.alignment.mapping), out.backtracks))
}

#[pyfunction]
fn lower_bound_risk(m: u64, n: u64) -> PyResult<f64> {
    bounds::lower_bound_risk(m, n).map_err(py_err)
}

/// `(K_min, N_min)`.
#[allow(clippy::too_many_arguments)]
#[pyfunction]
#[pyo3(name = "mm_sample_bounds")]
fn sample_bounds(
    m: u64,
    kappa: f64,
    l: u64,
    c_pi: f64,
    big_c_pi: u64,
    epsilon: f64,
    delta: f64,
) -> PyResult<(f64, f64)> {
    let b = bounds::mm_sample_bounds(&BoundsInput { m, kappa, l, c_pi, big_c_pi, epsilon, delta, n: None })
        .map_err(py_err)?;
    Ok((b.k_min, b.n_min))
}

#[pyfunction]
fn lemma_rr_bounds(m0: u64, kappa0: f64) -> (f64, f64) {
    bounds::lemma_rr_bounds(m0, kappa0)
}

#[pyfunction]
fn render_prompt(entities: Vec<String>, k: usize) -> PyResult<String> {
    kg::render_prompt(&entities, k).map_err(py_err)
}

/// `(pairs, unparsed_lines)`.
#[pyfunction]
fn parse_edgelist(response: &str, vocabulary: Vec<String>) -> (Vec<(String, String)>, Vec<String>) {
    let p = kg::parse_edgelist(response, &vocabulary);
    (p.pairs.into_iter().collect(), p.unparsed_lines)
}

#[pyfunction]
fn normalized_l1(truth: Vec<(String, String)>, eval: Vec<(String, String)>) -> PyResult<f64> {
    let graph = |edges: &[(String, String)]| {
        SimpleGraph::from_named_edges([], edges.iter().map(|(a, b)| (a.as_str(), b.as_str())))
    };
    kg::normalized_l1(&graph(&truth), &graph(&eval)).map_err(py_err)
}

#[pymodule]
fn hgrec(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PyHypergraph>()?;
    m.add_function(wrap_pyfunction!(generate, m)?)?;
    m.add_function(wrap_pyfunction!(dissimilarity, m)?)?;
    m.add_function(wrap_pyfunction!(sample_dataset, m)?)?;
    m.add_function(wrap_pyfunction!(recover_from_samples, m)?)?;
    m.add_function(wrap_pyfunction!(mm_recover, m)?)?;
    m.add_function(wrap_pyfunction!(exact_oracle_recover, m)?)?;
    m.add_function(wrap_pyfunction!(align_exact, m)?)?;
    m.add_function(wrap_pyfunction!(align_wl, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound_risk, m)?)?;
    m.add_function(wrap_pyfunction!(sample_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(lemma_rr_bounds, m)?)?;
    m.add_function(wrap_pyfunction!(render_prompt, m)?)?;
    m.add_function(wrap_pyfunction!(parse_edgelist, m)?)?;
    m.add_function(wrap_pyfunction!(normalized_l1, m)?)?;
    Ok(())
}
