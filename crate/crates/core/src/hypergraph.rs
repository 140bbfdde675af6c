//! Weighted hypergraphs, the edge-weight dissimilarity, relabeling and the
//! `.hg` text format.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::error::{Error, Result};

/// Tolerance used when checking that weights sum to one.
pub const NORMALIZATION_TOL: f64 = 1e-9;
/// Tolerance used by [`WeightedHypergraph`] equality.
pub const EQUALITY_TOL: f64 = 1e-12;

/// An entity token. Ordered by bytes.
///
/// Tokens are nonempty, contain no whitespace, and avoid the characters used
/// by canonical keys (`+`, `|`). The bare token `_` is reserved for masked
/// slots in `.mm` files.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct NodeId(String);

impl NodeId {
    pub fn new(token: impl Into<String>) -> Result<Self> {
        let token = token.into();
        if token.is_empty()
            || token == "_"
            || token.chars().any(|c| c.is_whitespace() || c == '+' || c == '|')
        {
            return Err(Error::InvalidNode(token));
        }
        Ok(NodeId(token))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl From<usize> for NodeId {
    fn from(i: usize) -> Self {
        NodeId(i.to_string())
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A set of at least two distinct nodes, stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Hyperedge(Vec<NodeId>);

impl Hyperedge {
    pub fn new(nodes: impl IntoIterator<Item = NodeId>) -> Result<Self> {
        let mut nodes: Vec<NodeId> = nodes.into_iter().collect();
        nodes.sort();
        nodes.dedup();
        if nodes.len() < 2 {
            return Err(Error::HyperedgeTooSmall(nodes.len()));
        }
        Ok(Hyperedge(nodes))
    }

    /// Builds an edge from textual tokens.
    pub fn from_tokens<S: AsRef<str>>(tokens: &[S]) -> Result<Self> {
        let nodes = tokens.iter().map(|t| NodeId::new(t.as_ref())).collect::<Result<Vec<_>>>()?;
        Hyperedge::new(nodes)
    }

    /// Convenience constructor for integer-labelled edges.
    pub fn of(ids: &[usize]) -> Self {
        Hyperedge::new(ids.iter().map(|&i| NodeId::from(i))).expect("edge needs 2 distinct ids")
    }

    pub fn nodes(&self) -> &[NodeId] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, v: &NodeId) -> bool {
        self.0.binary_search(v).is_ok()
    }

    pub fn intersects(&self, other: &Hyperedge) -> bool {
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].cmp(&other.0[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => return true,
            }
        }
        false
    }

    /// Canonical key: tokens joined by `+`.
    pub fn key(&self) -> String {
        join_tokens(&self.0, "+")
    }

    pub fn from_key(key: &str) -> Result<Self> {
        let tokens: Vec<&str> = key.split('+').collect();
        Hyperedge::from_tokens(&tokens)
    }

    pub fn map(&self, phi: &NodeRelabeling) -> Result<Hyperedge> {
        let nodes = self
            .0
            .iter()
            .map(|v| phi.get(v).cloned().ok_or_else(|| Error::IncompleteMapping(v.to_string())))
            .collect::<Result<Vec<_>>>()?;
        Hyperedge::new(nodes)
    }
}

impl fmt::Display for Hyperedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{{{}}}", join_tokens(&self.0, ","))
    }
}

pub(crate) fn join_tokens(nodes: &[NodeId], sep: &str) -> String {
    let mut out = String::new();
    for (i, v) in nodes.iter().enumerate() {
        if i > 0 {
            out.push_str(sep);
        }
        out.push_str(v.as_str());
    }
    out
}

/// A weighted hypergraph `H = (V, E, w)`. The node set is derived from the
/// edges, so there are no isolated nodes.
#[derive(Clone, Debug, Default)]
pub struct WeightedHypergraph {
    edges: BTreeMap<Hyperedge, f64>,
    normalized: bool,
}

impl PartialEq for WeightedHypergraph {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, EQUALITY_TOL)
    }
}

impl WeightedHypergraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges(edges: impl IntoIterator<Item = (Hyperedge, f64)>) -> Result<Self> {
        let mut h = Self::new();
        for (e, w) in edges {
            h.insert(e, w)?;
        }
        Ok(h)
    }

    /// Every edge with weight 1.
    pub fn unit(edges: impl IntoIterator<Item = Hyperedge>) -> Result<Self> {
        Self::from_edges(edges.into_iter().map(|e| (e, 1.0)))
    }

    pub fn insert(&mut self, e: Hyperedge, w: f64) -> Result<()> {
        if !(w.is_finite() && w > 0.0) {
            return Err(Error::InvalidWeight(w));
        }
        if self.edges.contains_key(&e) {
            return Err(Error::DuplicateEdge(e.key()));
        }
        self.edges.insert(e, w);
        self.normalized = false;
        Ok(())
    }

    pub fn edges(&self) -> impl Iterator<Item = (&Hyperedge, f64)> + '_ {
        self.edges.iter().map(|(e, &w)| (e, w))
    }

    pub fn edge_set(&self) -> BTreeSet<Hyperedge> {
        self.edges.keys().cloned().collect()
    }

    pub fn weight(&self, e: &Hyperedge) -> Option<f64> {
        self.edges.get(e).copied()
    }

    pub fn contains_edge(&self, e: &Hyperedge) -> bool {
        self.edges.contains_key(e)
    }

    pub fn nodes(&self) -> BTreeSet<NodeId> {
        self.edges.keys().flat_map(|e| e.nodes().iter().cloned()).collect()
    }

    pub fn node_count(&self) -> usize {
        self.nodes().len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.values().sum()
    }

    /// Whether the `normalized` flag is set.
    pub fn is_normalized(&self) -> bool {
        self.normalized
    }

    /// Flag set, or weights sum to one within [`NORMALIZATION_TOL`].
    pub fn has_unit_mass(&self) -> bool {
        self.normalized || (!self.is_empty() && (self.total_weight() - 1.0).abs() <= NORMALIZATION_TOL)
    }

    pub fn min_weight(&self) -> Option<f64> {
        self.edges.values().copied().reduce(f64::min)
    }

    pub fn max_weight(&self) -> Option<f64> {
        self.edges.values().copied().reduce(f64::max)
    }

    /// `max w / min w`; `None` on an empty hypergraph.
    pub fn range_ratio(&self) -> Option<f64> {
        Some(self.max_weight()? / self.min_weight()?)
    }

    pub fn max_edge_size(&self) -> usize {
        self.edges.keys().map(Hyperedge::len).max().unwrap_or(0)
    }

    pub fn is_two_uniform(&self) -> bool {
        self.edges.keys().all(|e| e.len() == 2)
    }

    pub fn normalize(&self) -> Result<Self> {
        if self.is_empty() {
            return Err(Error::EmptyHypergraph);
        }
        let total = self.total_weight();
        let edges = self.edges.iter().map(|(e, w)| (e.clone(), w / total)).collect();
        Ok(WeightedHypergraph { edges, normalized: true })
    }

    /// Sets the `normalized` flag after checking the weight sum.
    pub fn mark_normalized(mut self) -> Result<Self> {
        if self.is_empty() || (self.total_weight() - 1.0).abs() > NORMALIZATION_TOL {
            return Err(Error::NotNormalized);
        }
        self.normalized = true;
        Ok(self)
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.edges.len() == other.edges.len()
            && self
                .edges
                .iter()
                .zip(other.edges.iter())
                .all(|((e1, w1), (e2, w2))| e1 == e2 && (w1 - w2).abs() <= tol)
    }

    pub fn relabel(&self, phi: &NodeRelabeling) -> Result<Self> {
        let mut out = WeightedHypergraph::new();
        for (e, &w) in &self.edges {
            let mapped = e.map(phi)?;
            // a bijection cannot merge edges, but guard anyway
            out.insert(mapped, w)?;
        }
        out.normalized = self.normalized;
        Ok(out)
    }

    /// Line graph: one vertex per hyperedge (named by its key), adjacent when
    /// the hyperedges intersect.
    pub fn line_graph(&self) -> SimpleGraph {
        let edges: Vec<&Hyperedge> = self.edges.keys().collect();
        let mut g = SimpleGraph::new(edges.iter().map(|e| e.key()).collect());
        // node -> incident edge indices
        let mut incident: BTreeMap<&NodeId, Vec<usize>> = BTreeMap::new();
        for (i, e) in edges.iter().enumerate() {
            for v in e.nodes() {
                incident.entry(v).or_default().push(i);
            }
        }
        for list in incident.values() {
            for (a, &i) in list.iter().enumerate() {
                for &j in &list[a + 1..] {
                    g.add_edge(i, j);
                }
            }
        }
        g
    }

    /// The 2-uniform hypergraph viewed as a simple graph on its nodes.
    pub fn to_simple_graph(&self) -> Option<SimpleGraph> {
        if !self.is_two_uniform() {
            return None;
        }
        let nodes: Vec<NodeId> = self.nodes().into_iter().collect();
        let mut g = SimpleGraph::new(nodes.iter().map(|v| v.to_string()).collect());
        for e in self.edges.keys() {
            let a = nodes.binary_search(&e.nodes()[0]).unwrap();
            let b = nodes.binary_search(&e.nodes()[1]).unwrap();
            g.add_edge(a, b);
        }
        Some(g)
    }

    /// Serializes to the `.hg` format.
    pub fn encode(&self) -> String {
        let mut out = String::from("#hg v1\n");
        if self.normalized {
            out.push_str("#normalized\n");
        }
        for (e, w) in &self.edges {
            out.push_str("edge ");
            out.push_str(&join_tokens(e.nodes(), " "));
            out.push(' ');
            out.push_str(&format_weight(*w));
            out.push('\n');
        }
        out
    }

    pub fn decode(text: &str) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, l)) if l.trim_end() == "#hg v1" => {}
            _ => return Err(Error::ParseError { line: 1, msg: "expected header `#hg v1`".into() }),
        }
        let mut h = WeightedHypergraph::new();
        let mut normalized = false;
        for (idx, raw) in lines {
            let line_no = idx + 1;
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            if let Some(comment) = line.strip_prefix('#') {
                if comment.trim() == "normalized" {
                    if !h.is_empty() {
                        return Err(Error::ParseError {
                            line: line_no,
                            msg: "#normalized must precede edges".into(),
                        });
                    }
                    normalized = true;
                }
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let err = |msg: &str| Error::ParseError { line: line_no, msg: msg.to_string() };
            if tokens[0] != "edge" {
                return Err(err("expected `edge`"));
            }
            if tokens.len() < 4 {
                return Err(err("edge needs at least two nodes and a weight"));
            }
            let weight_tok = tokens[tokens.len() - 1];
            let w: f64 = weight_tok.parse().map_err(|_| err(&format!("bad weight {weight_tok:?}")))?;
            let edge =
                Hyperedge::from_tokens(&tokens[1..tokens.len() - 1]).map_err(|e| err(&e.to_string()))?;
            match h.insert(edge, w) {
                Ok(()) => {}
                Err(e @ Error::DuplicateEdge(_)) => return Err(e),
                Err(e) => return Err(err(&e.to_string())),
            }
        }
        if normalized {
            h = h.mark_normalized().map_err(|_| Error::ParseError {
                line: 0,
                msg: "#normalized set but weights do not sum to 1".into(),
            })?;
        }
        Ok(h)
    }
}

/// Weights are written with 17 significant digits so decoding is exact.
pub fn format_weight(w: f64) -> String {
    format!("{w:.16e}")
}

/// `Σ_{e ∈ E1 ∪ E2} |w1(e) − w2(e)|`, missing edges counting as weight 0.
pub fn dissimilarity(h1: &WeightedHypergraph, h2: &WeightedHypergraph) -> f64 {
    // merged key order keeps the sum bit-identical under swapping arguments
    let keys: BTreeSet<&Hyperedge> = h1.edges.keys().chain(h2.edges.keys()).collect();
    keys.into_iter()
        .map(|e| {
            let w1 = h1.edges.get(e).copied().unwrap_or(0.0);
            let w2 = h2.edges.get(e).copied().unwrap_or(0.0);
            (w1 - w2).abs()
        })
        .sum()
}

/// Edges only in `h1` (missing) and only in `h2` (spurious).
pub fn sketch_diff(
    h1: &WeightedHypergraph,
    h2: &WeightedHypergraph,
) -> (BTreeSet<Hyperedge>, BTreeSet<Hyperedge>) {
    let a = h1.edge_set();
    let b = h2.edge_set();
    let missing = a.difference(&b).cloned().collect();
    let spurious = b.difference(&a).cloned().collect();
    (missing, spurious)
}

/// A bijection between node sets.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct NodeRelabeling {
    map: BTreeMap<NodeId, NodeId>,
}

impl NodeRelabeling {
    pub fn new(pairs: impl IntoIterator<Item = (NodeId, NodeId)>) -> Result<Self> {
        let mut map = BTreeMap::new();
        let mut image = BTreeSet::new();
        for (a, b) in pairs {
            if map.contains_key(&a) {
                return Err(Error::NotABijection(format!("{a} mapped twice")));
            }
            if !image.insert(b.clone()) {
                return Err(Error::NotABijection(format!("{b} is the image of two nodes")));
            }
            map.insert(a, b);
        }
        Ok(NodeRelabeling { map })
    }

    pub fn identity<'a>(nodes: impl IntoIterator<Item = &'a NodeId>) -> Self {
        NodeRelabeling { map: nodes.into_iter().map(|v| (v.clone(), v.clone())).collect() }
    }

    pub fn get(&self, v: &NodeId) -> Option<&NodeId> {
        self.map.get(v)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    /// Pairs sorted by source node.
    pub fn pairs(&self) -> impl Iterator<Item = (&NodeId, &NodeId)> + '_ {
        self.map.iter()
    }

    pub fn inverse(&self) -> Self {
        NodeRelabeling { map: self.map.iter().map(|(a, b)| (b.clone(), a.clone())).collect() }
    }

    /// `other ∘ self`: apply `self` first.
    pub fn then(&self, other: &NodeRelabeling) -> Result<Self> {
        let pairs = self
            .map
            .iter()
            .map(|(a, b)| {
                other
                    .get(b)
                    .cloned()
                    .map(|c| (a.clone(), c))
                    .ok_or_else(|| Error::IncompleteMapping(b.to_string()))
            })
            .collect::<Result<Vec<_>>>()?;
        NodeRelabeling::new(pairs)
    }

    pub fn covers<'a>(&self, nodes: impl IntoIterator<Item = &'a NodeId>) -> Result<()> {
        for v in nodes {
            if !self.map.contains_key(v) {
                return Err(Error::IncompleteMapping(v.to_string()));
            }
        }
        Ok(())
    }
}

/// Undirected simple graph over named vertices.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimpleGraph {
    names: Vec<String>,
    adj: Vec<BTreeSet<usize>>,
}

impl SimpleGraph {
    pub fn new(names: Vec<String>) -> Self {
        let adj = vec![BTreeSet::new(); names.len()];
        SimpleGraph { names, adj }
    }

    /// Builds a graph from named edges; vertex order follows first appearance
    /// in `names`, then in `edges`.
    pub fn from_named_edges<'a>(
        names: impl IntoIterator<Item = &'a str>,
        edges: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Self {
        let mut g = SimpleGraph::new(Vec::new());
        for n in names {
            g.vertex_or_insert(n);
        }
        for (a, b) in edges {
            let i = g.vertex_or_insert(a);
            let j = g.vertex_or_insert(b);
            g.add_edge(i, j);
        }
        g
    }

    pub fn vertex_or_insert(&mut self, name: &str) -> usize {
        if let Some(i) = self.index_of(name) {
            return i;
        }
        self.names.push(name.to_string());
        self.adj.push(BTreeSet::new());
        self.names.len() - 1
    }

    /// Adds `{a, b}`; self-loops are ignored. Returns whether the edge is new.
    pub fn add_edge(&mut self, a: usize, b: usize) -> bool {
        if a == b {
            return false;
        }
        let fresh = self.adj[a].insert(b);
        self.adj[b].insert(a);
        fresh
    }

    pub fn vertex_count(&self) -> usize {
        self.names.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, i: usize) -> &str {
        &self.names[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[i].iter().copied()
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn has_edge(&self, a: usize, b: usize) -> bool {
        self.adj[a].contains(&b)
    }

    /// Edges as index pairs `(i, j)` with `i < j`, sorted.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for (i, nbrs) in self.adj.iter().enumerate() {
            for &j in nbrs.range(i + 1..) {
                out.push((i, j));
            }
        }
        out
    }

    /// Edges as unordered name pairs (smaller name first).
    pub fn named_edges(&self) -> BTreeSet<(String, String)> {
        self.edges().into_iter().map(|(i, j)| ordered_pair(&self.names[i], &self.names[j])).collect()
    }

    pub fn is_connected(&self) -> bool {
        if self.names.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.names.len()];
        let mut stack = vec![0];
        seen[0] = true;
        let mut count = 1;
        while let Some(v) = stack.pop() {
            for &w in &self.adj[v] {
                if !seen[w] {
                    seen[w] = true;
                    count += 1;
                    stack.push(w);
                }
            }
        }
        count == self.names.len()
    }
}

pub(crate) fn ordered_pair(a: &str, b: &str) -> (String, String) {
    if a <= b {
        (a.to_string(), b.to_string())
    } else {
        (b.to_string(), a.to_string())
    }
}
