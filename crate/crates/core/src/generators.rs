//! Benchmark structures (STAR, X, CHAIN, WCGNM, Frucht) and random weight
//! assignment. Generated node tokens are decimal integers.

use std::fmt;
use std::str::FromStr;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{Hyperedge, WeightedHypergraph};
use crate::rng;

const WCGNM_MAX_ATTEMPTS: usize = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Structure {
    Star,
    X,
    Chain,
    Wcgnm,
    Frucht,
}

impl Structure {
    pub fn name(self) -> &'static str {
        match self {
            Structure::Star => "star",
            Structure::X => "x",
            Structure::Chain => "chain",
            Structure::Wcgnm => "wcgnm",
            Structure::Frucht => "frucht",
        }
    }
}

impl fmt::Display for Structure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Structure {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "star" => Ok(Structure::Star),
            "x" => Ok(Structure::X),
            "chain" => Ok(Structure::Chain),
            "wcgnm" => Ok(Structure::Wcgnm),
            "frucht" => Ok(Structure::Frucht),
            other => Err(Error::InvalidParameter(format!("unknown structure {other:?}"))),
        }
    }
}

/// Everything needed to build one weighted benchmark instance.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorSpec {
    pub structure: Structure,
    pub n: usize,
    #[serde(default)]
    pub p: Option<f64>,
    pub w_min: f64,
    pub w_max: f64,
    #[serde(default)]
    pub seed: u64,
}

impl GeneratorSpec {
    /// Unweighted structure followed by [`assign_weights`].
    pub fn generate(&self) -> Result<WeightedHypergraph> {
        let structure = self.structure_only()?;
        assign_weights(&structure, self.w_min, self.w_max, self.seed)
    }

    pub fn structure_only(&self) -> Result<WeightedHypergraph> {
        match self.structure {
            Structure::Star => star(self.n),
            Structure::X => x_graph(self.n),
            Structure::Chain => chain(self.n),
            Structure::Wcgnm => {
                let p = self.p.ok_or_else(|| Error::InvalidParameter("wcgnm needs p".into()))?;
                wcgnm(self.n, p, self.seed)
            }
            Structure::Frucht => Ok(frucht()),
        }
    }
}

fn check_size(structure: &'static str, n: usize, min: usize) -> Result<()> {
    if n < min {
        return Err(Error::InvalidSize { structure, n, min });
    }
    Ok(())
}

/// `{{0, i} | i = 1..n-1}`, unit weights.
pub fn star(n: usize) -> Result<WeightedHypergraph> {
    check_size("star", n, 2)?;
    WeightedHypergraph::unit((1..n).map(|i| Hyperedge::of(&[0, i])))
}

/// Four spokes from node 0, then each arm extended in steps of four:
/// `{{0,k} | k=1..4} ∪ {{4i+k, 4i+k+4} | 4i+k+4 ≤ n-1}`.
pub fn x_graph(n: usize) -> Result<WeightedHypergraph> {
    check_size("x", n, 5)?;
    let mut edges: Vec<Hyperedge> = (1..=4).map(|k| Hyperedge::of(&[0, k])).collect();
    for a in 1..n {
        if a + 4 < n {
            edges.push(Hyperedge::of(&[a, a + 4]));
        }
    }
    WeightedHypergraph::unit(edges)
}

/// `{{i, i+1} | i = 0..n-2}`.
pub fn chain(n: usize) -> Result<WeightedHypergraph> {
    check_size("chain", n, 2)?;
    WeightedHypergraph::unit((0..n - 1).map(|i| Hyperedge::of(&[i, i + 1])))
}

/// Edge count `round(p·n(n−1)/2)`, rounding halves up.
pub fn wcgnm_edge_count(n: usize, p: f64) -> usize {
    let pairs = (n * n.saturating_sub(1) / 2) as f64;
    // tolerate representation error such as 0.2 * 45 = 9.000000000000002
    let raw = p * pairs;
    (raw + 0.5 + 1e-9).floor().min(pairs) as usize
}

/// Uniformly random connected simple graph with `m(n)` edges: edge sets are
/// drawn uniformly and rejected until connected.
pub fn wcgnm(n: usize, p: f64, seed: u64) -> Result<WeightedHypergraph> {
    check_size("wcgnm", n, 2)?;
    if !(p > 0.0 && p <= 1.0) {
        return Err(Error::InvalidParameter(format!("edge density {p} not in (0, 1]")));
    }
    let m = wcgnm_edge_count(n, p);
    if m < n - 1 {
        return Err(Error::CannotBeConnected { n, m });
    }
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))).collect();
    let mut rng = rng::stream(seed, "wcgnm", 0);
    for _ in 0..WCGNM_MAX_ATTEMPTS {
        let chosen = rand::seq::index::sample(&mut rng, pairs.len(), m);
        let mut dsu = DisjointSets::new(n);
        for idx in chosen.iter() {
            let (a, b) = pairs[idx];
            dsu.union(a, b);
        }
        if dsu.components == 1 {
            let mut idx: Vec<usize> = chosen.into_vec();
            idx.sort_unstable();
            return WeightedHypergraph::unit(idx.into_iter().map(|k| {
                let (a, b) = pairs[k];
                Hyperedge::of(&[a, b])
            }));
        }
    }
    Err(Error::CannotBeConnected { n, m })
}

struct DisjointSets {
    parent: Vec<usize>,
    components: usize,
}

impl DisjointSets {
    fn new(n: usize) -> Self {
        DisjointSets { parent: (0..n).collect(), components: n }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra] = rb;
            self.components -= 1;
        }
    }
}

/// LCF notation of the Frucht graph: a 12-cycle plus one chord per vertex.
const FRUCHT_LCF: [i32; 12] = [-5, -2, -4, 2, 5, -2, 2, 5, -2, -5, 4, 2];

/// The Frucht graph: 12 vertices, 18 edges, cubic, asymmetric.
pub fn frucht() -> WeightedHypergraph {
    let mut edges = std::collections::BTreeSet::new();
    for i in 0..12i32 {
        edges.insert(Hyperedge::of(&[i as usize, ((i + 1) % 12) as usize]));
        let j = (i + FRUCHT_LCF[i as usize]).rem_euclid(12);
        edges.insert(Hyperedge::of(&[i as usize, j as usize]));
    }
    WeightedHypergraph::unit(edges).expect("static edge list")
}

/// Draws each weight uniformly from `{w_min, w_max}` (edges in canonical
/// order) and normalizes.
pub fn assign_weights(
    h: &WeightedHypergraph,
    w_min: f64,
    w_max: f64,
    seed: u64,
) -> Result<WeightedHypergraph> {
    if !(w_min.is_finite() && w_max.is_finite() && w_min > 0.0 && w_max >= w_min) {
        return Err(Error::InvalidWeights(w_min, w_max));
    }
    let mut rng = rng::stream(seed, "weights", 0);
    let weighted = WeightedHypergraph::from_edges(h.edges().map(|(e, _)| {
        let w = if rng.random_bool(0.5) { w_max } else { w_min };
        (e.clone(), w)
    }))?;
    weighted.normalize()
}
