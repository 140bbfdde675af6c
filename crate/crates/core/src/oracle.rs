//! Masked-modeling oracles `M(e | e⁻)`.
//!
//! [`TabularOracle`] is the cross-entropy minimizer over an unrestricted model
//! class: the conditional count ratio of the training records.
//! [`ExactOracle`] is the population posterior `w(e)π(e⁻|e) / Σ w(e')π(e⁻|e')`.

use std::collections::{BTreeMap, BTreeSet};

use crate::error::{Error, Result};
use crate::hypergraph::{Hyperedge, NodeId, WeightedHypergraph};
use crate::masking::{MaskedHyperedge, MaskingStrategy, MmDataset};

pub trait MmOracle {
    /// `M(e | m)`; zero when `m` is unseen or `e` was never predicted for it.
    fn prob(&self, e: &Hyperedge, m: &MaskedHyperedge) -> f64;

    /// Full belief over completions of `m`, sorted by edge.
    fn query(&self, m: &MaskedHyperedge) -> Result<Vec<(Hyperedge, f64)>>;

    /// Every node token the oracle knows about.
    fn node_universe(&self) -> BTreeSet<NodeId>;
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TabularOracle {
    counts: BTreeMap<MaskedHyperedge, BTreeMap<Hyperedge, u64>>,
    totals: BTreeMap<MaskedHyperedge, u64>,
}

pub fn train_tabular(d: &MmDataset) -> TabularOracle {
    let mut oracle = TabularOracle::default();
    for r in &d.records {
        oracle.add(r.full.clone(), r.masked.clone(), 1);
    }
    oracle
}

impl TabularOracle {
    fn add(&mut self, e: Hyperedge, m: MaskedHyperedge, count: u64) {
        *self.totals.entry(m.clone()).or_insert(0) += count;
        *self.counts.entry(m).or_default().entry(e).or_insert(0) += count;
    }

    pub fn count(&self, e: &Hyperedge, m: &MaskedHyperedge) -> u64 {
        self.counts.get(m).and_then(|row| row.get(e)).copied().unwrap_or(0)
    }

    pub fn masked_forms(&self) -> impl Iterator<Item = &MaskedHyperedge> + '_ {
        self.counts.keys()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    /// Structured document: masked-form key → edge key → count.
    pub fn to_json(&self) -> String {
        let doc: BTreeMap<String, BTreeMap<String, u64>> = self
            .counts
            .iter()
            .map(|(m, row)| (m.key(), row.iter().map(|(e, &c)| (e.key(), c)).collect()))
            .collect();
        serde_json::to_string_pretty(&doc).expect("string keys") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: BTreeMap<String, BTreeMap<String, u64>> = serde_json::from_str(text)?;
        let mut oracle = TabularOracle::default();
        for (mk, row) in doc {
            let m = MaskedHyperedge::from_key(&mk)?;
            for (ek, c) in row {
                let e = Hyperedge::from_key(&ek)?;
                if !m.is_completed_by(&e) {
                    return Err(Error::ParseError {
                        line: 0,
                        msg: format!("{ek} is not a completion of {mk}"),
                    });
                }
                if c > 0 {
                    oracle.add(e, m.clone(), c);
                }
            }
        }
        Ok(oracle)
    }
}

impl MmOracle for TabularOracle {
    fn prob(&self, e: &Hyperedge, m: &MaskedHyperedge) -> f64 {
        match self.totals.get(m) {
            Some(&total) if total > 0 => self.count(e, m) as f64 / total as f64,
            _ => 0.0,
        }
    }

    fn query(&self, m: &MaskedHyperedge) -> Result<Vec<(Hyperedge, f64)>> {
        let row = self.counts.get(m).ok_or_else(|| Error::Unseen(m.key()))?;
        let total = self.totals[m] as f64;
        Ok(row.iter().map(|(e, &c)| (e.clone(), c as f64 / total)).collect())
    }

    fn node_universe(&self) -> BTreeSet<NodeId> {
        let mut out = BTreeSet::new();
        for (m, row) in &self.counts {
            out.extend(m.visible().iter().cloned());
            for e in row.keys() {
                out.extend(e.nodes().iter().cloned());
            }
        }
        out
    }
}

/// Posterior of a known hypergraph under a masking strategy.
pub struct ExactOracle<S: MaskingStrategy> {
    hypergraph: WeightedHypergraph,
    strategy: S,
    // masked form -> (edge, w(e)·π(m|e)) and the row sum
    rows: BTreeMap<MaskedHyperedge, (Vec<(Hyperedge, f64)>, f64)>,
}

impl<S: MaskingStrategy> ExactOracle<S> {
    pub fn new(hypergraph: WeightedHypergraph, strategy: S) -> Result<Self> {
        if !hypergraph.has_unit_mass() {
            return Err(Error::NotNormalized);
        }
        let mut rows: BTreeMap<MaskedHyperedge, (Vec<(Hyperedge, f64)>, f64)> = BTreeMap::new();
        for (e, w) in hypergraph.edges() {
            for (m, p) in strategy.support(e) {
                let row = rows.entry(m).or_default();
                row.0.push((e.clone(), w * p));
                row.1 += w * p;
            }
        }
        Ok(ExactOracle { hypergraph, strategy, rows })
    }

    pub fn hypergraph(&self) -> &WeightedHypergraph {
        &self.hypergraph
    }

    pub fn strategy(&self) -> &S {
        &self.strategy
    }
}

impl<S: MaskingStrategy> MmOracle for ExactOracle<S> {
    fn prob(&self, e: &Hyperedge, m: &MaskedHyperedge) -> f64 {
        let Some((row, total)) = self.rows.get(m) else {
            return 0.0;
        };
        row.iter().find(|(x, _)| x == e).map_or(0.0, |(_, mass)| mass / total)
    }

    fn query(&self, m: &MaskedHyperedge) -> Result<Vec<(Hyperedge, f64)>> {
        let (row, total) = self.rows.get(m).ok_or_else(|| Error::Unseen(m.key()))?;
        let mut out: Vec<(Hyperedge, f64)> = row.iter().map(|(e, mass)| (e.clone(), mass / total)).collect();
        out.sort_by(|a, b| a.0.cmp(&b.0));
        Ok(out)
    }

    fn node_universe(&self) -> BTreeSet<NodeId> {
        self.hypergraph.nodes()
    }
}

/// `ŵ(e1)/ŵ(e2) = M(e1|m)π(m|e2) / (M(e2|m)π(m|e1))`.
pub fn relative_weight(
    oracle: &dyn MmOracle,
    e1: &Hyperedge,
    e2: &Hyperedge,
    m: &MaskedHyperedge,
    strategy: &dyn MaskingStrategy,
) -> Result<f64> {
    let p1 = strategy.prob(m, e1);
    let p2 = strategy.prob(m, e2);
    if p1 <= 0.0 || p2 <= 0.0 {
        return Err(Error::NotShared(m.key()));
    }
    let m2 = oracle.prob(e2, m);
    if m2 <= 0.0 {
        return Err(Error::UndefinedRatio(format!("M({}|{m})", e2.key())));
    }
    Ok(oracle.prob(e1, m) * p2 / (m2 * p1))
}
