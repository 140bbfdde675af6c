use std::collections::{BTreeMap, BTreeSet};

use super::Alignment;
use crate::error::{Error, Result};
use crate::hypergraph::{dissimilarity, Hyperedge, NodeId, NodeRelabeling, WeightedHypergraph};

/// Aligns nodes from a complete hyperedge correspondence. Each pair gets an
/// integer id; a node's label is the descending tuple of ids of its incident
/// hyperedges, and nodes are matched by sorting labels on both sides.
pub fn align_by_hyperedge_ids(
    h1: &WeightedHypergraph,
    h2: &WeightedHypergraph,
    edge_pairs: &[(Hyperedge, Hyperedge)],
) -> Result<Alignment> {
    if h1.node_count() != h2.node_count() {
        return Err(Error::SizeMismatch(h1.node_count(), h2.node_count()));
    }
    let mut pairs: Vec<&(Hyperedge, Hyperedge)> = edge_pairs.iter().collect();
    pairs.sort();
    check_bijection(h1, pairs.iter().map(|p| &p.0), "left")?;
    check_bijection(h2, pairs.iter().map(|p| &p.1), "right")?;

    let order1 = sorted_by_label(h1, pairs.iter().map(|p| &p.0))?;
    let order2 = sorted_by_label(h2, pairs.iter().map(|p| &p.1))?;
    let mapping = NodeRelabeling::new(order1.into_iter().zip(order2))?;
    for (e1, e2) in &pairs {
        if &e1.map(&mapping)? != e2 {
            return Err(Error::NotAnIsomorphism(format!(
                "{e1} maps to {} instead of {e2}",
                e1.map(&mapping)?
            )));
        }
    }
    let cost = dissimilarity(&h1.relabel(&mapping)?, h2);
    Ok(Alignment { mapping, cost })
}

fn check_bijection<'a>(
    h: &WeightedHypergraph,
    edges: impl Iterator<Item = &'a Hyperedge>,
    side: &str,
) -> Result<()> {
    let mut seen = BTreeSet::new();
    for e in edges {
        if !h.contains_edge(e) {
            return Err(Error::NotABijection(format!("{e} is not a {side} hyperedge")));
        }
        if !seen.insert(e) {
            return Err(Error::NotABijection(format!("{e} paired twice")));
        }
    }
    if seen.len() != h.edge_count() {
        return Err(Error::NotABijection(format!(
            "{} of {} {side} hyperedges paired",
            seen.len(),
            h.edge_count()
        )));
    }
    Ok(())
}

fn sorted_by_label<'a>(
    h: &WeightedHypergraph,
    edges: impl Iterator<Item = &'a Hyperedge>,
) -> Result<Vec<NodeId>> {
    let mut labels: BTreeMap<NodeId, Vec<usize>> = h.nodes().into_iter().map(|v| (v, Vec::new())).collect();
    for (id, e) in edges.enumerate() {
        for v in e.nodes() {
            labels.get_mut(v).expect("node of h").push(id);
        }
    }
    let mut nodes: Vec<(Vec<usize>, NodeId)> = labels
        .into_iter()
        .map(|(v, mut l)| {
            l.sort_unstable_by(|a, b| b.cmp(a));
            (l, v)
        })
        .collect();
    nodes.sort();

    let mut ambiguous = Vec::new();
    let mut i = 0;
    while i < nodes.len() {
        let mut j = i + 1;
        while j < nodes.len() && nodes[j].0 == nodes[i].0 {
            j += 1;
        }
        if j - i > 1 {
            ambiguous.push(nodes[i..j].iter().map(|(_, v)| v.to_string()).collect());
        }
        i = j;
    }
    if !ambiguous.is_empty() {
        return Err(Error::AmbiguousLabels(ambiguous));
    }
    Ok(nodes.into_iter().map(|(_, v)| v).collect())
}
