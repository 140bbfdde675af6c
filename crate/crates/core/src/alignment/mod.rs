//! Entity alignment between two hypergraphs: exhaustive minimization of the
//! dissimilarity over bijections, alignment from a full hyperedge
//! correspondence, colour refinement with anchored individualization, and
//! dataset fusion under a known alignment.

mod exact;
mod ids;
mod ir;
mod wl;

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::hypergraph::{format_weight, Hyperedge, NodeId, NodeRelabeling};
use crate::masking::Dataset;

pub use exact::{align_exact, DEFAULT_MAX_NODES};
pub use ids::align_by_hyperedge_ids;
pub use ir::{align_wl_anchored, incidence_graph, IrOutcome};
pub use wl::{wl_refine, Coloring};

/// A node bijection `V1 → V2` and its cost `d(φ(H1), H2)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Alignment {
    pub mapping: NodeRelabeling,
    pub cost: f64,
}

impl Alignment {
    /// Lines `<v1> <v2>` followed by `#cost <value>`.
    pub fn encode(&self) -> String {
        let mut out = String::new();
        for (a, b) in self.mapping.pairs() {
            out.push_str(&format!("{a} {b}\n"));
        }
        out.push_str(&format!("#cost {}\n", format_weight(self.cost)));
        out
    }

    pub fn decode(text: &str) -> Result<Self> {
        let mut pairs = Vec::new();
        let mut cost = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let err = |msg: &str| Error::ParseError { line: i + 1, msg: msg.into() };
            if let Some(rest) = line.strip_prefix("#cost") {
                cost = Some(rest.trim().parse().map_err(|_| err("bad cost"))?);
                continue;
            }
            if line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 2 {
                return Err(err("expected `<v1> <v2>`"));
            }
            pairs.push((NodeId::new(tokens[0])?, NodeId::new(tokens[1])?));
        }
        Ok(Alignment { mapping: NodeRelabeling::new(pairs)?, cost: cost.unwrap_or(f64::NAN) })
    }
}

/// Known correspondences between the two sides.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnchorSet {
    node_pairs: Vec<(NodeId, NodeId)>,
    edge_pairs: Vec<(Hyperedge, Hyperedge)>,
}

impl AnchorSet {
    pub fn new(node_pairs: Vec<(NodeId, NodeId)>, edge_pairs: Vec<(Hyperedge, Hyperedge)>) -> Result<Self> {
        fn distinct<T: Ord + std::fmt::Display>(items: impl Iterator<Item = T>) -> Result<()> {
            let mut seen = BTreeSet::new();
            for x in items {
                let label = x.to_string();
                if !seen.insert(x) {
                    return Err(Error::InconsistentAnchors(format!("{label} anchored twice")));
                }
            }
            Ok(())
        }
        distinct(node_pairs.iter().map(|p| &p.0))?;
        distinct(node_pairs.iter().map(|p| &p.1))?;
        distinct(edge_pairs.iter().map(|p| &p.0))?;
        distinct(edge_pairs.iter().map(|p| &p.1))?;
        Ok(AnchorSet { node_pairs, edge_pairs })
    }

    pub fn nodes(pairs: Vec<(NodeId, NodeId)>) -> Result<Self> {
        AnchorSet::new(pairs, Vec::new())
    }

    pub fn node_pairs(&self) -> &[(NodeId, NodeId)] {
        &self.node_pairs
    }

    pub fn edge_pairs(&self) -> &[(Hyperedge, Hyperedge)] {
        &self.edge_pairs
    }

    pub fn is_empty(&self) -> bool {
        self.node_pairs.is_empty() && self.edge_pairs.is_empty()
    }

    /// Anchor file: `node <v1> <v2>` and `edge <a+b> <c+d>` lines.
    pub fn decode(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: String| Error::ParseError { line: i + 1, msg };
            let tokens: Vec<&str> = line.split_whitespace().collect();
            if tokens.len() != 3 {
                return Err(err("expected `node|edge <left> <right>`".into()));
            }
            match tokens[0] {
                "node" => nodes.push((
                    NodeId::new(tokens[1]).map_err(|e| err(e.to_string()))?,
                    NodeId::new(tokens[2]).map_err(|e| err(e.to_string()))?,
                )),
                "edge" => edges.push((
                    Hyperedge::from_key(tokens[1]).map_err(|e| err(e.to_string()))?,
                    Hyperedge::from_key(tokens[2]).map_err(|e| err(e.to_string()))?,
                )),
                other => return Err(err(format!("unknown anchor kind {other:?}"))),
            }
        }
        AnchorSet::new(nodes, edges)
    }

    pub fn encode(&self) -> String {
        let mut out = String::new();
        for (a, b) in &self.node_pairs {
            out.push_str(&format!("node {a} {b}\n"));
        }
        for (a, b) in &self.edge_pairs {
            out.push_str(&format!("edge {} {}\n", a.key(), b.key()));
        }
        out
    }
}

/// `φ*(D1)` followed by `D2`.
pub fn fuse_datasets(d1: &Dataset, d2: &Dataset, phi_star: &NodeRelabeling) -> Result<Dataset> {
    let mut samples = Vec::with_capacity(d1.len() + d2.len());
    for e in &d1.samples {
        samples.push(e.map(phi_star)?);
    }
    samples.extend(d2.samples.iter().cloned());
    Ok(Dataset::new(samples))
}
