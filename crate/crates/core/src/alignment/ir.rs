use std::collections::{BTreeMap, HashMap};

use super::{Alignment, AnchorSet, Coloring};
use crate::alignment::wl::wl_refine;
use crate::error::{Error, Result};
use crate::hypergraph::{Hyperedge, NodeId, NodeRelabeling, SimpleGraph, WeightedHypergraph};

const WEIGHT_BUCKET_TOL: f64 = 1e-9;

/// Result of anchored individualization-refinement.
#[derive(Clone, Debug, PartialEq)]
pub struct IrOutcome {
    pub alignment: Alignment,
    /// Branches abandoned during the search.
    pub backtracks: usize,
    /// Individualizations tried at the top level of the search.
    pub root_branches: usize,
}

/// Bipartite incidence graph: node vertices `v:<token>` in canonical order,
/// then hyperedge vertices `e:<key>` in canonical order.
pub fn incidence_graph(h: &WeightedHypergraph) -> SimpleGraph {
    let nodes: Vec<NodeId> = h.nodes().into_iter().collect();
    let mut names: Vec<String> = nodes.iter().map(|v| format!("v:{v}")).collect();
    names.extend(h.edges().map(|(e, _)| format!("e:{}", e.key())));
    let index: HashMap<&NodeId, usize> = nodes.iter().enumerate().map(|(i, v)| (v, i)).collect();
    let mut g = SimpleGraph::new(names);
    for (k, (e, _)) in h.edges().enumerate() {
        for v in e.nodes() {
            g.add_edge(nodes.len() + k, index[v]);
        }
    }
    g
}

/// Both incidence graphs side by side, so colour ids are comparable.
struct Union {
    graph: SimpleGraph,
    nodes1: Vec<NodeId>,
    nodes2: Vec<NodeId>,
    edges1: Vec<Hyperedge>,
    edges2: Vec<Hyperedge>,
    // first vertex of the second graph
    offset: usize,
}

impl Union {
    fn new(h1: &WeightedHypergraph, h2: &WeightedHypergraph) -> Self {
        let g1 = incidence_graph(h1);
        let g2 = incidence_graph(h2);
        let offset = g1.vertex_count();
        let mut names: Vec<String> = g1.names().iter().map(|n| format!("1{n}")).collect();
        names.extend(g2.names().iter().map(|n| format!("2{n}")));
        let mut graph = SimpleGraph::new(names);
        for (a, b) in g1.edges() {
            graph.add_edge(a, b);
        }
        for (a, b) in g2.edges() {
            graph.add_edge(offset + a, offset + b);
        }
        Union {
            graph,
            nodes1: h1.nodes().into_iter().collect(),
            nodes2: h2.nodes().into_iter().collect(),
            edges1: h1.edges().map(|(e, _)| e.clone()).collect(),
            edges2: h2.edges().map(|(e, _)| e.clone()).collect(),
            offset,
        }
    }

    fn node_vertex(&self, side: usize, v: &NodeId) -> Option<usize> {
        match side {
            1 => self.nodes1.binary_search(v).ok(),
            _ => self.nodes2.binary_search(v).ok().map(|i| self.offset + i),
        }
    }

    fn edge_vertex(&self, side: usize, e: &Hyperedge) -> Option<usize> {
        match side {
            1 => self.edges1.binary_search(e).ok().map(|i| self.nodes1.len() + i),
            _ => self.edges2.binary_search(e).ok().map(|i| self.offset + self.nodes2.len() + i),
        }
    }

    fn is_left(&self, v: usize) -> bool {
        v < self.offset
    }
}

/// Node vertices share colour 0; hyperedge vertices are coloured by weight
/// bucket so that only equal-weight hyperedges may correspond.
fn initial_coloring(h1: &WeightedHypergraph, h2: &WeightedHypergraph) -> Vec<u32> {
    let mut weights: Vec<f64> = h1.edges().chain(h2.edges()).map(|(_, w)| w).collect();
    weights.sort_by(f64::total_cmp);
    let mut starts = Vec::new();
    for w in weights {
        if starts.last().is_none_or(|&s: &f64| w - s > WEIGHT_BUCKET_TOL) {
            starts.push(w);
        }
    }
    let bucket = |w: f64| starts.partition_point(|&s| s <= w) as u32;
    let mut colors = vec![0; h1.node_count()];
    colors.extend(h1.edges().map(|(_, w)| bucket(w)));
    colors.extend(std::iter::repeat_n(0, h2.node_count()));
    colors.extend(h2.edges().map(|(_, w)| bucket(w)));
    colors
}

struct Search<'a> {
    union: &'a Union,
    h1: &'a WeightedHypergraph,
    h2: &'a WeightedHypergraph,
    backtracks: usize,
    root_branches: usize,
}

impl Search<'_> {
    fn run(&mut self, coloring: Coloring, depth: usize) -> Result<Option<NodeRelabeling>> {
        let c = wl_refine(&self.union.graph, &coloring);
        let classes = c.classes();
        let mut target = None;
        for cls in &classes {
            let left = cls.iter().filter(|&&v| self.union.is_left(v)).count();
            if 2 * left != cls.len() {
                return Ok(None);
            }
            if left > 1 && target.as_ref().is_none_or(|t: &Vec<usize>| cls.len() < t.len()) {
                target = Some(cls.clone());
            }
        }
        let Some(target) = target else {
            return self.verify(&c);
        };
        let v = target[0];
        let candidates: Vec<usize> = target.iter().copied().filter(|&w| !self.union.is_left(w)).collect();
        for w in candidates {
            if depth == 0 {
                self.root_branches += 1;
            }
            if let Some(found) = self.run(c.individualize(&[v, w]), depth + 1)? {
                return Ok(Some(found));
            }
            self.backtracks += 1;
        }
        Ok(None)
    }

    /// Reads the node bijection off a discrete colouring and checks it.
    fn verify(&self, c: &Coloring) -> Result<Option<NodeRelabeling>> {
        let mut by_color: BTreeMap<u32, (Option<usize>, Option<usize>)> = BTreeMap::new();
        for v in 0..self.union.nodes1.len() {
            by_color.entry(c.color(v)).or_default().0 = Some(v);
        }
        let base = self.union.offset;
        for i in 0..self.union.nodes2.len() {
            by_color.entry(c.color(base + i)).or_default().1 = Some(i);
        }
        let mut pairs = Vec::with_capacity(self.union.nodes1.len());
        for (a, b) in by_color.into_values() {
            match (a, b) {
                (Some(a), Some(b)) => {
                    pairs.push((self.union.nodes1[a].clone(), self.union.nodes2[b].clone()))
                }
                _ => return Ok(None),
            }
        }
        let mapping = NodeRelabeling::new(pairs)?;
        let mapped = self.h1.relabel(&mapping)?;
        if mapped.edge_set() != self.h2.edge_set() {
            return Ok(None);
        }
        let weights_match = mapped
            .edges()
            .all(|(e, w)| self.h2.weight(e).is_some_and(|w2| (w - w2).abs() <= WEIGHT_BUCKET_TOL));
        Ok(weights_match.then_some(mapping))
    }
}

/// Individualizes anchors, refines the joint colouring of both incidence
/// graphs, and branches on the smallest ambiguous class until a verified
/// isomorphism is found.
pub fn align_wl_anchored(
    h1: &WeightedHypergraph,
    h2: &WeightedHypergraph,
    anchors: &AnchorSet,
) -> Result<IrOutcome> {
    if h1.node_count() != h2.node_count() {
        return Err(Error::SizeMismatch(h1.node_count(), h2.node_count()));
    }
    let union = Union::new(h1, h2);
    let mut colors = initial_coloring(h1, h2);
    let mut fresh = colors.iter().copied().max().unwrap_or(0) + 1;

    for (a, b) in anchors.node_pairs() {
        let va = union
            .node_vertex(1, a)
            .ok_or_else(|| Error::InconsistentAnchors(format!("{a} is not a left node")))?;
        let vb = union
            .node_vertex(2, b)
            .ok_or_else(|| Error::InconsistentAnchors(format!("{b} is not a right node")))?;
        colors[va] = fresh;
        colors[vb] = fresh;
        fresh += 1;
    }
    for (a, b) in anchors.edge_pairs() {
        let va = union
            .edge_vertex(1, a)
            .ok_or_else(|| Error::InconsistentAnchors(format!("{a} is not a left hyperedge")))?;
        let vb = union
            .edge_vertex(2, b)
            .ok_or_else(|| Error::InconsistentAnchors(format!("{b} is not a right hyperedge")))?;
        if a.len() != b.len() || colors[va] != colors[vb] {
            return Err(Error::InconsistentAnchors(format!("{a} and {b} differ in size or weight")));
        }
        colors[va] = fresh;
        colors[vb] = fresh;
        fresh += 1;
    }

    let mut search = Search { union: &union, h1, h2, backtracks: 0, root_branches: 0 };
    let mapping = search.run(Coloring::from_labels(colors), 0)?.ok_or(Error::NoIsomorphism)?;
    Ok(IrOutcome {
        alignment: Alignment { mapping, cost: 0.0 },
        backtracks: search.backtracks,
        root_branches: search.root_branches,
    })
}
