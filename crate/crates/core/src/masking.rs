//! Data generation: i.i.d. hyperedge samples, masked-modeling records, the
//! masking strategy and the meta-graph of edges that share a masked form.

use std::collections::{BTreeMap, VecDeque};
use std::fmt;

use rand::Rng as _;
use rand_distr::weighted::WeightedAliasIndex;
use rand_distr::Distribution;

use crate::error::{Error, Result};
use crate::hypergraph::{join_tokens, Hyperedge, NodeId, WeightedHypergraph};
use crate::rng::{self, Rng};

/// A hyperedge with `masked_count` of its nodes hidden.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MaskedHyperedge {
    visible: Vec<NodeId>,
    masked_count: usize,
}

impl MaskedHyperedge {
    pub fn new(visible: impl IntoIterator<Item = NodeId>, masked_count: usize) -> Result<Self> {
        if masked_count == 0 {
            return Err(Error::InvalidParameter("masked_count must be >= 1".into()));
        }
        let mut visible: Vec<NodeId> = visible.into_iter().collect();
        visible.sort();
        let before = visible.len();
        visible.dedup();
        if visible.len() != before {
            return Err(Error::InvalidParameter("visible nodes must be distinct".into()));
        }
        Ok(MaskedHyperedge { visible, masked_count })
    }

    pub fn of(visible: &[usize], masked_count: usize) -> Self {
        MaskedHyperedge::new(visible.iter().map(|&i| NodeId::from(i)), masked_count)
            .expect("valid masked form")
    }

    pub fn visible(&self) -> &[NodeId] {
        &self.visible
    }

    pub fn masked_count(&self) -> usize {
        self.masked_count
    }

    /// `<visible tokens joined by '+'>|<masked_count>`.
    pub fn key(&self) -> String {
        format!("{}|{}", join_tokens(&self.visible, "+"), self.masked_count)
    }

    pub fn from_key(key: &str) -> Result<Self> {
        let bad = || Error::ParseError { line: 0, msg: format!("bad masked-form key {key:?}") };
        let (vis, count) = key.rsplit_once('|').ok_or_else(bad)?;
        let count: usize = count.parse().map_err(|_| bad())?;
        let visible = if vis.is_empty() {
            Vec::new()
        } else {
            vis.split('+').map(NodeId::new).collect::<Result<Vec<_>>>()?
        };
        MaskedHyperedge::new(visible, count)
    }

    /// Whether `e` is a completion of this masked form.
    pub fn is_completed_by(&self, e: &Hyperedge) -> bool {
        e.len() == self.visible.len() + self.masked_count && self.visible.iter().all(|v| e.contains(v))
    }
}

impl fmt::Display for MaskedHyperedge {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.key())
    }
}

/// A masking strategy `π(e⁻ | e)` with finite support.
pub trait MaskingStrategy: Send + Sync {
    fn name(&self) -> &str;

    /// Masked forms with positive probability, in canonical order.
    fn support(&self, e: &Hyperedge) -> Vec<(MaskedHyperedge, f64)>;

    fn prob(&self, m: &MaskedHyperedge, e: &Hyperedge) -> f64 {
        self.support(e).into_iter().find(|(f, _)| f == m).map_or(0.0, |(_, p)| p)
    }

    fn sample(&self, e: &Hyperedge, rng: &mut Rng) -> MaskedHyperedge {
        let support = self.support(e);
        let mut u: f64 = rng.random();
        for (m, p) in &support {
            if u < *p {
                return m.clone();
            }
            u -= p;
        }
        support.last().expect("nonempty support").0.clone()
    }
}

/// Hides one node chosen uniformly at random.
#[derive(Clone, Copy, Debug, Default)]
pub struct UniformSingleMask;

impl MaskingStrategy for UniformSingleMask {
    fn name(&self) -> &str {
        "uniform1"
    }

    fn support(&self, e: &Hyperedge) -> Vec<(MaskedHyperedge, f64)> {
        let k = e.len();
        let p = 1.0 / k as f64;
        let mut out: Vec<(MaskedHyperedge, f64)> = (0..k)
            .map(|skip| {
                let visible = e
                    .nodes()
                    .iter()
                    .enumerate()
                    .filter(|&(i, _)| i != skip)
                    .map(|(_, v)| v.clone())
                    .collect();
                (MaskedHyperedge { visible, masked_count: 1 }, p)
            })
            .collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        out
    }

    fn prob(&self, m: &MaskedHyperedge, e: &Hyperedge) -> f64 {
        if m.masked_count == 1 && m.is_completed_by(e) {
            1.0 / e.len() as f64
        } else {
            0.0
        }
    }

    fn sample(&self, e: &Hyperedge, rng: &mut Rng) -> MaskedHyperedge {
        let skip = rng.random_range(0..e.len());
        let visible =
            e.nodes().iter().enumerate().filter(|&(i, _)| i != skip).map(|(_, v)| v.clone()).collect();
        MaskedHyperedge { visible, masked_count: 1 }
    }
}

/// Looks up a strategy by its command-line name.
pub fn strategy_from_name(name: &str) -> Result<Box<dyn MaskingStrategy>> {
    match name {
        "uniform1" | "uniform_single" => Ok(Box::new(UniformSingleMask)),
        other => Err(Error::InvalidParameter(format!("unknown masking strategy {other:?}"))),
    }
}

/// `(c_π, C_π)`: the smallest support probability and the largest support size.
pub fn strategy_constants(h: &WeightedHypergraph, strategy: &dyn MaskingStrategy) -> Result<(f64, usize)> {
    if h.is_empty() {
        return Err(Error::EmptyHypergraph);
    }
    let mut c_pi = f64::INFINITY;
    let mut big_c = 0;
    for (e, _) in h.edges() {
        let support = strategy.support(e);
        big_c = big_c.max(support.len());
        for (_, p) in support {
            c_pi = c_pi.min(p);
        }
    }
    Ok((c_pi, big_c))
}

/// I.i.d. hyperedge samples.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Dataset {
    pub samples: Vec<Hyperedge>,
}

impl Dataset {
    pub fn new(samples: Vec<Hyperedge>) -> Self {
        Dataset { samples }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// `f_N(e)` for every observed edge.
    pub fn counts(&self) -> BTreeMap<Hyperedge, u64> {
        let mut out = BTreeMap::new();
        for e in &self.samples {
            *out.entry(e.clone()).or_insert(0) += 1;
        }
        out
    }

    /// `.ds` format: one sample per line, tokens separated by spaces.
    pub fn encode(&self) -> String {
        let mut out = String::new();
        for e in &self.samples {
            out.push_str(&join_tokens(e.nodes(), " "));
            out.push('\n');
        }
        out
    }

    pub fn decode(text: &str) -> Result<Self> {
        let mut samples = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let tokens: Vec<&str> = line.split_whitespace().collect();
            let e = Hyperedge::from_tokens(&tokens)
                .map_err(|e| Error::ParseError { line: i + 1, msg: e.to_string() })?;
            samples.push(e);
        }
        Ok(Dataset { samples })
    }
}

fn alias_table(h: &WeightedHypergraph) -> Result<(Vec<Hyperedge>, WeightedAliasIndex<f64>)> {
    if !h.has_unit_mass() {
        return Err(Error::NotNormalized);
    }
    let (edges, weights): (Vec<Hyperedge>, Vec<f64>) = h.edges().map(|(e, w)| (e.clone(), w)).unzip();
    let table =
        WeightedAliasIndex::new(weights).map_err(|e| Error::InvalidParameter(format!("alias table: {e}")))?;
    Ok((edges, table))
}

/// Draws `n_samples` edges i.i.d. with probability `w(e)`.
pub fn sample_dataset(h: &WeightedHypergraph, n_samples: usize, seed: u64) -> Result<Dataset> {
    if n_samples == 0 {
        return Err(Error::InvalidParameter("n_samples must be >= 1".into()));
    }
    let (edges, table) = alias_table(h)?;
    let mut rng = rng::stream(seed, "dataset", 0);
    let samples = (0..n_samples).map(|_| edges[table.sample(&mut rng)].clone()).collect();
    Ok(Dataset { samples })
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MmRecord {
    pub full: Hyperedge,
    pub masked: MaskedHyperedge,
}

/// `N` outer hyperedge draws, each with `K` independently masked copies.
/// Record `t·K + k` is the `k`-th mask of draw `t`.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MmDataset {
    pub records: Vec<MmRecord>,
    pub n_outer: usize,
    pub k_inner: usize,
}

impl MmDataset {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// The `N` outer draws as a plain dataset.
    pub fn outer_samples(&self) -> Dataset {
        let k = self.k_inner.max(1);
        Dataset::new(self.records.iter().step_by(k).map(|r| r.full.clone()).collect())
    }

    /// `.mm` format: `<full tokens>\t<full tokens with '_' per masked node>`,
    /// preceded by a `#mm N K` comment.
    pub fn encode(&self) -> String {
        let mut out = format!("#mm {} {}\n", self.n_outer, self.k_inner);
        for r in &self.records {
            out.push_str(&join_tokens(r.full.nodes(), " "));
            out.push('\t');
            let masked: Vec<&str> = r
                .full
                .nodes()
                .iter()
                .map(|v| if r.masked.visible.binary_search(v).is_ok() { v.as_str() } else { "_" })
                .collect();
            out.push_str(&masked.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn decode(text: &str) -> Result<Self> {
        let mut records = Vec::new();
        let mut shape: Option<(usize, usize)> = None;
        for (i, line) in text.lines().enumerate() {
            let err = |msg: String| Error::ParseError { line: i + 1, msg };
            let line = line.trim_end();
            if line.trim().is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('#') {
                let parts: Vec<&str> = rest.split_whitespace().collect();
                if parts.len() == 3 && parts[0] == "mm" {
                    let n = parts[1].parse().map_err(|_| err("bad N".into()))?;
                    let k = parts[2].parse().map_err(|_| err("bad K".into()))?;
                    shape = Some((n, k));
                }
                continue;
            }
            let (full, masked) =
                line.split_once('\t').ok_or_else(|| err("expected a tab between full and masked".into()))?;
            let full_tokens: Vec<&str> = full.split_whitespace().collect();
            let full = Hyperedge::from_tokens(&full_tokens).map_err(|e| err(e.to_string()))?;
            let mut visible = Vec::new();
            let mut count = 0;
            for t in masked.split_whitespace() {
                if t == "_" {
                    count += 1;
                } else {
                    visible.push(NodeId::new(t).map_err(|e| err(e.to_string()))?);
                }
            }
            let masked = MaskedHyperedge::new(visible, count).map_err(|e| err(e.to_string()))?;
            if !masked.is_completed_by(&full) {
                return Err(err(format!("{masked} is not a masked form of {full}")));
            }
            records.push(MmRecord { full, masked });
        }
        let (n_outer, k_inner) = match shape {
            Some((n, k)) if n * k == records.len() => (n, k),
            Some(_) => {
                return Err(Error::ParseError {
                    line: 1,
                    msg: "record count does not match `#mm N K`".into(),
                })
            }
            None => (records.len(), 1),
        };
        Ok(MmDataset { records, n_outer, k_inner })
    }
}

/// `N` outer draws (the same draws as [`sample_dataset`] with this seed), each
/// masked `K` times independently.
pub fn sample_mm_dataset(
    h: &WeightedHypergraph,
    n_outer: usize,
    k_inner: usize,
    strategy: &dyn MaskingStrategy,
    seed: u64,
) -> Result<MmDataset> {
    if k_inner == 0 {
        return Err(Error::InvalidParameter("k_inner must be >= 1".into()));
    }
    let outer = sample_dataset(h, n_outer, seed)?;
    let mut mask_rng = rng::stream(seed, "mask", 0);
    let mut records = Vec::with_capacity(n_outer * k_inner);
    for e in outer.samples {
        for _ in 0..k_inner {
            let masked = strategy.sample(&e, &mut mask_rng);
            records.push(MmRecord { full: e.clone(), masked });
        }
    }
    Ok(MmDataset { records, n_outer, k_inner })
}

/// Hyperedges as vertices, adjacent when they share a masked form.
#[derive(Clone, Debug)]
pub struct MetaGraph {
    edges: Vec<Hyperedge>,
    shared: BTreeMap<(usize, usize), Vec<MaskedHyperedge>>,
    neighbors: Vec<Vec<usize>>,
}

/// Result of [`mm_path_length_bound`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathBound {
    /// Largest shortest-path length, counting edges on the path including both ends.
    Bounded(usize),
    Disconnected,
}

impl MetaGraph {
    pub fn edges(&self) -> &[Hyperedge] {
        &self.edges
    }

    pub fn index_of(&self, e: &Hyperedge) -> Option<usize> {
        self.edges.binary_search(e).ok()
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.neighbors[i]
    }

    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        self.shared.contains_key(&(i.min(j), i.max(j)))
    }

    /// Masked forms shared by edges `i` and `j`, in canonical order.
    pub fn shared_forms(&self, i: usize, j: usize) -> &[MaskedHyperedge] {
        self.shared.get(&(i.min(j), i.max(j))).map_or(&[], Vec::as_slice)
    }

    pub fn adjacency_count(&self) -> usize {
        self.shared.len()
    }

    /// Connected components as sorted index lists, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.edges.len()];
        let mut out = Vec::new();
        for start in 0..self.edges.len() {
            if seen[start] {
                continue;
            }
            seen[start] = true;
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(v) = queue.pop_front() {
                for &w in &self.neighbors[v] {
                    if !seen[w] {
                        seen[w] = true;
                        comp.push(w);
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub fn is_connected(&self) -> bool {
        self.components().len() <= 1
    }

    fn eccentricity(&self, start: usize) -> Option<usize> {
        let mut dist = vec![usize::MAX; self.edges.len()];
        dist[start] = 0;
        let mut queue = VecDeque::from([start]);
        let mut reached = 1;
        let mut far = 0;
        while let Some(v) = queue.pop_front() {
            for &w in &self.neighbors[v] {
                if dist[w] == usize::MAX {
                    dist[w] = dist[v] + 1;
                    far = far.max(dist[w]);
                    reached += 1;
                    queue.push_back(w);
                }
            }
        }
        (reached == self.edges.len()).then_some(far)
    }
}

pub fn build_meta_graph(h: &WeightedHypergraph, strategy: &dyn MaskingStrategy) -> MetaGraph {
    let edges: Vec<Hyperedge> = h.edges().map(|(e, _)| e.clone()).collect();
    build_meta_graph_over(edges, strategy)
}

/// Meta-graph over an explicit edge list (sorted and deduplicated here).
pub fn build_meta_graph_over(mut edges: Vec<Hyperedge>, strategy: &dyn MaskingStrategy) -> MetaGraph {
    edges.sort();
    edges.dedup();
    let mut by_form: BTreeMap<MaskedHyperedge, Vec<usize>> = BTreeMap::new();
    for (i, e) in edges.iter().enumerate() {
        for (m, _) in strategy.support(e) {
            by_form.entry(m).or_default().push(i);
        }
    }
    let mut shared: BTreeMap<(usize, usize), Vec<MaskedHyperedge>> = BTreeMap::new();
    for (form, members) in by_form {
        for (a, &i) in members.iter().enumerate() {
            for &j in &members[a + 1..] {
                shared.entry((i, j)).or_default().push(form.clone());
            }
        }
    }
    let mut neighbors = vec![Vec::new(); edges.len()];
    for &(i, j) in shared.keys() {
        neighbors[i].push(j);
        neighbors[j].push(i);
    }
    for list in &mut neighbors {
        list.sort_unstable();
    }
    MetaGraph { edges, shared, neighbors }
}

/// `L = 1 + diameter` of the meta-graph.
pub fn mm_path_length_bound(mg: &MetaGraph) -> Result<PathBound> {
    if mg.edges.is_empty() {
        return Err(Error::EmptyHypergraph);
    }
    let mut diameter = 0;
    for start in 0..mg.edges.len() {
        match mg.eccentricity(start) {
            Some(ecc) => diameter = diameter.max(ecc),
            None => return Ok(PathBound::Disconnected),
        }
    }
    Ok(PathBound::Bounded(diameter + 1))
}
