//! Hypergraph recovery: the plug-in estimator on raw samples, and the
//! two-phase estimator on a masked-modeling oracle (edge detection followed
//! by breadth-first relative-weight propagation).

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{dissimilarity, sketch_diff, Hyperedge, NodeId, NodeRelabeling, WeightedHypergraph};
use crate::masking::{build_meta_graph_over, Dataset, MaskingStrategy, MetaGraph};
use crate::oracle::MmOracle;

/// Candidate hyperedges for edge detection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CandidateSet {
    /// Every 2-subset of the given nodes.
    AllPairs(Vec<NodeId>),
    Explicit(Vec<Hyperedge>),
}

impl CandidateSet {
    /// All pairs over the nodes the oracle has seen.
    pub fn all_pairs_from_oracle(oracle: &dyn MmOracle) -> Self {
        CandidateSet::AllPairs(oracle.node_universe().into_iter().collect())
    }

    pub fn explicit(edges: impl IntoIterator<Item = Hyperedge>) -> Self {
        let set: BTreeSet<Hyperedge> = edges.into_iter().collect();
        CandidateSet::Explicit(set.into_iter().collect())
    }

    /// Candidates in canonical order, deduplicated.
    pub fn edges(&self) -> Vec<Hyperedge> {
        match self {
            CandidateSet::AllPairs(nodes) => {
                let nodes: BTreeSet<&NodeId> = nodes.iter().collect();
                let nodes: Vec<&NodeId> = nodes.into_iter().collect();
                let mut out = Vec::new();
                for (i, a) in nodes.iter().enumerate() {
                    for b in &nodes[i + 1..] {
                        out.push(Hyperedge::new([(*a).clone(), (*b).clone()]).unwrap());
                    }
                }
                out
            }
            CandidateSet::Explicit(edges) => {
                let set: BTreeSet<&Hyperedge> = edges.iter().collect();
                set.into_iter().cloned().collect()
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            CandidateSet::AllPairs(nodes) => nodes.len() < 2,
            CandidateSet::Explicit(edges) => edges.is_empty(),
        }
    }

    /// Reads one hyperedge per line (space-separated tokens).
    pub fn decode(text: &str) -> Result<Self> {
        let d = Dataset::decode(text)?;
        Ok(CandidateSet::explicit(d.samples))
    }
}

/// How a relative weight is formed when two edges share several masked forms.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RatioAggregation {
    /// The canonically smallest usable shared form.
    #[default]
    SmallestForm,
    /// Geometric mean of the ratios over all usable shared forms.
    GeometricMean,
}

#[derive(Clone, Debug)]
pub struct OracleRecovery {
    pub hypergraph: WeightedHypergraph,
    pub meta_connected: bool,
    /// Number of propagation roots (1 when every kept edge was reached).
    pub components: usize,
}

/// Plug-in estimate: each distinct sample weighted by its empirical frequency.
pub fn recover_from_dataset(d: &Dataset) -> Result<WeightedHypergraph> {
    if d.is_empty() {
        return Err(Error::EmptyDataset);
    }
    let n = d.len() as f64;
    WeightedHypergraph::from_edges(d.counts().into_iter().map(|(e, c)| (e, c as f64 / n)))?.mark_normalized()
}

/// Edges `e` for which some form in the support of `π(·|e)` has `M(e|e⁻) > 0`.
pub fn detect_edges(
    oracle: &dyn MmOracle,
    candidates: &CandidateSet,
    strategy: &dyn MaskingStrategy,
) -> Vec<Hyperedge> {
    candidates
        .edges()
        .into_iter()
        .filter(|e| strategy.support(e).iter().any(|(m, _)| oracle.prob(e, m) > 0.0))
        .collect()
}

pub fn recover_from_oracle(
    oracle: &dyn MmOracle,
    candidates: &CandidateSet,
    strategy: &dyn MaskingStrategy,
) -> Result<OracleRecovery> {
    recover_from_oracle_with(oracle, candidates, strategy, RatioAggregation::SmallestForm)
}

pub fn recover_from_oracle_with(
    oracle: &dyn MmOracle,
    candidates: &CandidateSet,
    strategy: &dyn MaskingStrategy,
    aggregation: RatioAggregation,
) -> Result<OracleRecovery> {
    let kept = detect_edges(oracle, candidates, strategy);
    if kept.is_empty() {
        return Err(Error::NothingRecovered);
    }
    let mg = build_meta_graph_over(kept, strategy);
    let mut w_tilde = vec![0.0; mg.edges().len()];
    let mut components = 0;
    for root in 0..w_tilde.len() {
        if w_tilde[root] > 0.0 {
            continue;
        }
        components += 1;
        w_tilde[root] = 1.0;
        propagate(&mg, root, oracle, strategy, aggregation, &mut w_tilde);
    }
    let hypergraph = WeightedHypergraph::from_edges(mg.edges().iter().cloned().zip(w_tilde.iter().copied()))?
        .normalize()?;
    Ok(OracleRecovery { hypergraph, meta_connected: components == 1, components })
}

/// Breadth-first relative-weight propagation from `e_init`.
///
/// `w_tilde` must hold `1` at `e_init`; edges already carrying a positive
/// weight are left untouched. A neighbour is assigned from the first shared
/// masked form where both beliefs are positive; neighbours with no such form
/// stay unassigned.
pub fn bf_weight_estimation(
    e_init: &Hyperedge,
    edges: &[Hyperedge],
    oracle: &dyn MmOracle,
    strategy: &dyn MaskingStrategy,
    w_tilde: &mut BTreeMap<Hyperedge, f64>,
) -> Result<()> {
    let mg = build_meta_graph_over(edges.to_vec(), strategy);
    let root = mg
        .index_of(e_init)
        .ok_or_else(|| Error::InvalidParameter(format!("{e_init} is not in the edge set")))?;
    if w_tilde.get(e_init).copied() != Some(1.0) {
        return Err(Error::InvalidParameter(format!("w_tilde({e_init}) must be 1")));
    }
    let mut w: Vec<f64> = mg.edges().iter().map(|e| w_tilde.get(e).copied().unwrap_or(0.0)).collect();
    propagate(&mg, root, oracle, strategy, RatioAggregation::SmallestForm, &mut w);
    for (e, x) in mg.edges().iter().zip(w) {
        w_tilde.insert(e.clone(), x);
    }
    Ok(())
}

fn propagate(
    mg: &MetaGraph,
    root: usize,
    oracle: &dyn MmOracle,
    strategy: &dyn MaskingStrategy,
    aggregation: RatioAggregation,
    w: &mut [f64],
) {
    let edges = mg.edges();
    let mut queue = VecDeque::from([root]);
    while let Some(i) = queue.pop_front() {
        let e = &edges[i];
        for &j in mg.neighbors(i) {
            if w[j] > 0.0 {
                continue;
            }
            let f = &edges[j];
            let mut log_sum = 0.0;
            let mut used = 0usize;
            for m in mg.shared_forms(i, j) {
                let m_e = oracle.prob(e, m);
                let m_f = oracle.prob(f, m);
                if m_e <= 0.0 || m_f <= 0.0 {
                    continue;
                }
                let ratio = strategy.prob(m, e) * m_f / (strategy.prob(m, f) * m_e);
                match aggregation {
                    RatioAggregation::SmallestForm => {
                        log_sum = ratio.ln();
                        used = 1;
                        break;
                    }
                    RatioAggregation::GeometricMean => {
                        log_sum += ratio.ln();
                        used += 1;
                    }
                }
            }
            if used == 0 {
                continue;
            }
            let ratio = if used == 1 && aggregation == RatioAggregation::SmallestForm {
                log_sum.exp()
            } else {
                (log_sum / used as f64).exp()
            };
            w[j] = ratio * w[i];
            queue.push_back(j);
        }
    }
}

/// Error of a recovered hypergraph against the truth.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecoveryReport {
    #[serde(rename = "d")]
    pub weighted_error: f64,
    pub sketch_missing: Vec<String>,
    pub sketch_spurious: Vec<String>,
    pub meta_connected: Option<bool>,
    pub per_edge_abs_error: BTreeMap<String, f64>,
}

impl RecoveryReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }
}

/// Compares `relabel(recovered, φ)` (identity when `φ` is absent) with `truth`.
pub fn recovery_report(
    recovered: &WeightedHypergraph,
    truth: &WeightedHypergraph,
    relabeling: Option<&NodeRelabeling>,
) -> Result<RecoveryReport> {
    let mapped = match relabeling {
        Some(phi) => {
            phi.covers(recovered.nodes().iter())?;
            recovered.relabel(phi)?
        }
        None => recovered.clone(),
    };
    let (missing, spurious) = sketch_diff(truth, &mapped);
    let mut per_edge = BTreeMap::new();
    for (e, w) in truth.edges() {
        per_edge.insert(e.key(), (w - mapped.weight(e).unwrap_or(0.0)).abs());
    }
    for (e, w) in mapped.edges() {
        per_edge.entry(e.key()).or_insert(w.abs());
    }
    Ok(RecoveryReport {
        weighted_error: dissimilarity(&mapped, truth),
        sketch_missing: missing.iter().map(Hyperedge::key).collect(),
        sketch_spurious: spurious.iter().map(Hyperedge::key).collect(),
        meta_connected: None,
        per_edge_abs_error: per_edge,
    })
}
