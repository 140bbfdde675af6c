//! Knowledge-graph relation evaluation: TSV ingestion, top-k breadth-first
//! subgraph extraction, prompt rendering, tolerant edgelist parsing and the
//! normalized L1 score.

mod chat;

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hypergraph::{ordered_pair, SimpleGraph};

#[cfg(feature = "http")]
pub use chat::{chat_completion, chat_many};
pub use chat::{prompt_hash, replay_response, store_response, EndpointConfig};

/// Undirected graph over entity strings with positive relatedness weights.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct KnowledgeGraph {
    adj: BTreeMap<String, BTreeMap<String, f64>>,
}

fn normalize_entity(s: &str) -> String {
    s.trim().to_lowercase()
}

impl KnowledgeGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds or strengthens an undirected edge; repeated pairs keep the larger
    /// weight. Self-loops are ignored.
    pub fn add_edge(&mut self, a: &str, b: &str, w: f64) -> Result<()> {
        if !(w > 0.0 && w.is_finite()) {
            return Err(Error::InvalidWeight(w));
        }
        let (a, b) = (normalize_entity(a), normalize_entity(b));
        if a.is_empty() || b.is_empty() {
            return Err(Error::UnknownEntity(String::new()));
        }
        if a == b {
            return Ok(());
        }
        for (x, y) in [(&a, &b), (&b, &a)] {
            let slot = self.adj.entry(x.clone()).or_default().entry(y.clone()).or_insert(w);
            *slot = slot.max(w);
        }
        Ok(())
    }

    /// Parses `start<TAB>end<TAB>weight` lines. Blank lines and lines starting
    /// with `#` are skipped.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let mut kg = KnowledgeGraph::new();
        for (i, line) in text.lines().enumerate() {
            if line.trim().is_empty() || line.starts_with('#') {
                continue;
            }
            let err = |msg: &str| Error::ParseError { line: i + 1, msg: msg.into() };
            let fields: Vec<&str> = line.split('\t').collect();
            if fields.len() != 3 {
                return Err(err("expected start<TAB>end<TAB>weight"));
            }
            let w: f64 = fields[2].trim().parse().map_err(|_| err("bad weight"))?;
            if fields[0].trim().is_empty() || fields[1].trim().is_empty() {
                return Err(err("empty entity"));
            }
            kg.add_edge(fields[0], fields[1], w)?;
        }
        Ok(kg)
    }

    /// Canonical TSV: each undirected edge once, `a < b`, sorted.
    pub fn to_tsv(&self) -> String {
        let mut out = String::new();
        for (a, row) in &self.adj {
            for (b, w) in
                row.range::<String, _>((std::ops::Bound::Excluded(a.clone()), std::ops::Bound::Unbounded))
            {
                out.push_str(&format!("{a}\t{b}\t{w}\n"));
            }
        }
        out
    }

    pub fn contains(&self, entity: &str) -> bool {
        self.adj.contains_key(&normalize_entity(entity))
    }

    pub fn entity_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(BTreeMap::len).sum::<usize>() / 2
    }

    pub fn weight(&self, a: &str, b: &str) -> Option<f64> {
        self.adj.get(&normalize_entity(a))?.get(&normalize_entity(b)).copied()
    }

    /// The `k` most related neighbours of `entity` passing `keep`: weight
    /// descending, ties lexicographic.
    fn top_k(&self, entity: &str, k: usize, keep: impl Fn(&str) -> bool) -> Vec<&str> {
        let Some(row) = self.adj.get(entity) else {
            return Vec::new();
        };
        let mut nbrs: Vec<(&str, f64)> =
            row.iter().filter(|(v, _)| keep(v)).map(|(v, &w)| (v.as_str(), w)).collect();
        nbrs.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        nbrs.into_iter().take(k).map(|(v, _)| v).collect()
    }
}

pub fn ingest_edge_list(path: &Path) -> Result<KnowledgeGraph> {
    KnowledgeGraph::from_tsv(&std::fs::read_to_string(path)?)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphSpec {
    pub source: String,
    pub k: usize,
    pub d: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Subgraph {
    /// Entities in discovery order; also the vertex order of `graph`.
    pub entities: Vec<String>,
    pub graph: SimpleGraph,
}

/// Breadth-first expansion from the source: each entity at depth `< d` adds
/// its `k` most related not-yet-discovered neighbours. Edges are the top-`k`
/// votes of every chosen entity among the chosen set, symmetrized.
pub fn extract_subgraph(kg: &KnowledgeGraph, spec: &SubgraphSpec) -> Result<Subgraph> {
    if spec.k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let source = normalize_entity(&spec.source);
    if !kg.adj.contains_key(&source) {
        return Err(Error::UnknownEntity(source));
    }
    let mut discovered: BTreeSet<String> = BTreeSet::from([source.clone()]);
    let mut entities = vec![source.clone()];
    let mut frontier = vec![source];
    for _ in 0..spec.d {
        let mut next = Vec::new();
        for u in &frontier {
            let picked: Vec<String> =
                kg.top_k(u, spec.k, |v| !discovered.contains(v)).into_iter().map(str::to_owned).collect();
            for v in picked {
                discovered.insert(v.clone());
                entities.push(v.clone());
                next.push(v);
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }

    let mut graph = SimpleGraph::new(entities.clone());
    let index: HashMap<&str, usize> = entities.iter().enumerate().map(|(i, e)| (e.as_str(), i)).collect();
    for (i, u) in entities.iter().enumerate() {
        for v in kg.top_k(u, spec.k, |v| discovered.contains(v)) {
            graph.add_edge(i, index[v]);
        }
    }
    Ok(Subgraph { entities, graph })
}

/// File form of an extracted subgraph.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubgraphDoc {
    pub source: String,
    pub k: usize,
    pub d: usize,
    pub entities: Vec<String>,
    pub edges: Vec<(String, String)>,
}

impl SubgraphDoc {
    pub fn new(spec: &SubgraphSpec, sub: &Subgraph) -> Self {
        SubgraphDoc {
            source: normalize_entity(&spec.source),
            k: spec.k,
            d: spec.d,
            entities: sub.entities.clone(),
            edges: sub.graph.named_edges().into_iter().collect(),
        }
    }

    pub fn spec(&self) -> SubgraphSpec {
        SubgraphSpec { source: self.source.clone(), k: self.k, d: self.d }
    }

    pub fn subgraph(&self) -> Result<Subgraph> {
        for (a, b) in &self.edges {
            for v in [a, b] {
                if !self.entities.contains(v) {
                    return Err(Error::UnknownEntity(v.clone()));
                }
            }
        }
        Ok(Subgraph {
            entities: self.entities.clone(),
            graph: SimpleGraph::from_named_edges(
                self.entities.iter().map(String::as_str),
                self.edges.iter().map(|(a, b)| (a.as_str(), b.as_str())),
            ),
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

pub fn render_prompt(entities: &[String], k: usize) -> Result<String> {
    if entities.is_empty() {
        return Err(Error::EmptyEntities);
    }
    Ok(format!(
        "Consider the following concepts: {}. Suppose that these concepts are nodes of an \
         undirected graph. For each concept, consider {k} most related concepts. According to \
         the relations between these concepts, which edges should be included? Please answer \
         with an edgelist.",
        entities.join(", ")
    ))
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParsedEdgelist {
    pub pairs: BTreeSet<(String, String)>,
    pub unparsed_lines: Vec<String>,
}

const SEPARATORS: [&str; 7] = ["<->", "->", "→", "—", "–", "-", ","];

fn strip_list_marker(line: &str) -> &str {
    let t = line.trim_start();
    for bullet in ["- ", "* ", "• "] {
        if let Some(rest) = t.strip_prefix(bullet) {
            return rest;
        }
    }
    let digits = t.chars().take_while(char::is_ascii_digit).count();
    if digits > 0 {
        let rest = &t[digits..];
        if let Some(rest) = rest.strip_prefix(". ").or_else(|| rest.strip_prefix(") ")) {
            return rest;
        }
    }
    t
}

fn clean_token(s: &str) -> String {
    s.trim()
        .trim_matches(|c: char| "()[]{}\"'`*".contains(c) || c.is_whitespace())
        .trim_end_matches(['.', ';', ':'])
        .trim_matches(|c: char| "()[]{}\"'`*".contains(c) || c.is_whitespace())
        .to_lowercase()
}

/// Best-effort extraction of entity pairs from free-form model output. A
/// line counts when it splits at one separator into exactly two vocabulary
/// entities; everything else non-blank is kept in `unparsed_lines`.
pub fn parse_edgelist(response: &str, vocabulary: &[String]) -> ParsedEdgelist {
    let vocab: HashMap<String, &str> =
        vocabulary.iter().map(|v| (v.trim().to_lowercase(), v.as_str())).collect();
    let mut out = ParsedEdgelist::default();
    for raw in response.lines() {
        if raw.trim().is_empty() {
            continue;
        }
        let body = strip_list_marker(raw);
        match split_pair(body, &vocab) {
            Some((a, b)) if a == b => {}
            Some((a, b)) => {
                out.pairs.insert(ordered_pair(a, b));
            }
            None => out.unparsed_lines.push(raw.to_string()),
        }
    }
    out
}

fn split_pair<'v>(body: &str, vocab: &HashMap<String, &'v str>) -> Option<(&'v str, &'v str)> {
    for sep in SEPARATORS {
        for (pos, _) in body.match_indices(sep) {
            let left = clean_token(&body[..pos]);
            let right = clean_token(&body[pos + sep.len()..]);
            if let (Some(a), Some(b)) = (vocab.get(&left), vocab.get(&right)) {
                return Some((a, b));
            }
        }
    }
    None
}

/// One `a - b` line per pair; [`parse_edgelist`] reads it back exactly.
pub fn render_edgelist(pairs: &BTreeSet<(String, String)>) -> String {
    pairs.iter().map(|(a, b)| format!("{a} - {b}\n")).collect()
}

/// `|E_truth Δ E_eval| / |E_truth|`.
pub fn normalized_l1(truth: &SimpleGraph, eval: &SimpleGraph) -> Result<f64> {
    let t = truth.named_edges();
    if t.is_empty() {
        return Err(Error::UndefinedScore);
    }
    let e = eval.named_edges();
    Ok(t.symmetric_difference(&e).count() as f64 / t.len() as f64)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub source: String,
    pub k: usize,
    pub d: usize,
    pub model: String,
    pub score: f64,
    pub truth_edges: Vec<(String, String)>,
    pub eval_edges: Vec<(String, String)>,
    pub missing: Vec<(String, String)>,
    pub spurious: Vec<(String, String)>,
    pub unparsed_lines: Vec<String>,
}

pub const EVAL_CSV_HEADER: &str = "source,k,d,model,score,missing,spurious";

impl EvalResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    /// `source,k,d,model,score,missing,spurious` with edge counts.
    pub fn csv_row(&self) -> String {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        w.write_record([
            self.source.clone(),
            self.k.to_string(),
            self.d.to_string(),
            self.model.clone(),
            self.score.to_string(),
            self.missing.len().to_string(),
            self.spurious.len().to_string(),
        ])
        .expect("in-memory write");
        String::from_utf8(w.into_inner().expect("flush")).expect("utf-8")
    }
}

/// Scores a model response against an extracted subgraph.
pub fn evaluate(subgraph: &Subgraph, spec: &SubgraphSpec, model: &str, response: &str) -> Result<EvalResult> {
    let parsed = parse_edgelist(response, &subgraph.entities);
    let eval = SimpleGraph::from_named_edges(
        subgraph.entities.iter().map(String::as_str),
        parsed.pairs.iter().map(|(a, b)| (a.as_str(), b.as_str())),
    );
    let score = normalized_l1(&subgraph.graph, &eval)?;
    let truth = subgraph.graph.named_edges();
    let found = eval.named_edges();
    Ok(EvalResult {
        source: normalize_entity(&spec.source),
        k: spec.k,
        d: spec.d,
        model: model.to_string(),
        score,
        truth_edges: truth.iter().cloned().collect(),
        eval_edges: found.iter().cloned().collect(),
        missing: truth.difference(&found).cloned().collect(),
        spurious: found.difference(&truth).cloned().collect(),
        unparsed_lines: parsed.unparsed_lines,
    })
}
