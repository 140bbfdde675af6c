//! Synthetic recovery sweeps: every (instance, N, K, seed) cell runs the
//! plug-in and masked-modeling pipelines and yields one CSV row.
//!
//! Config schema (TOML):
//!
//! ```toml
//! seed = 0                  # base seed, overridden by --seed
//! seeds = 5                 # repetitions per cell
//! mask = "uniform1"
//! n_grid = [1000, 10000]    # outer samples N
//! k_grid = [1]              # masks per sample K
//! timing = false            # record runtime_ms (breaks byte-identical output)
//! output = "sweep.csv"      # optional
//!
//! [[instance]]
//! structure = "star"        # star | x | chain | wcgnm | frucht
//! n = 6
//! w_min = 1.0
//! w_max = 10.0
//! # p = 0.2                 # wcgnm only
//! ```

use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::generators::{GeneratorSpec, Structure};
use crate::hypergraph::dissimilarity;
use crate::masking::{
    build_meta_graph, mm_path_length_bound, sample_mm_dataset, strategy_constants, strategy_from_name,
    PathBound,
};
use crate::oracle::train_tabular;
use crate::recovery::{recover_from_dataset, recover_from_oracle, recovery_report, CandidateSet};
use crate::rng::hash_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub structure: Structure,
    pub n: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    pub w_min: f64,
    pub w_max: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default)]
    pub seed: u64,
    pub seeds: usize,
    #[serde(default = "default_mask")]
    pub mask: String,
    pub n_grid: Vec<usize>,
    pub k_grid: Vec<usize>,
    #[serde(default)]
    pub timing: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
    #[serde(rename = "instance")]
    pub instances: Vec<InstanceSpec>,
}

fn default_mask() -> String {
    "uniform1".into()
}

impl SweepConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SweepConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::Config(msg.into()));
        if self.instances.is_empty() {
            return bad("no instances");
        }
        if self.n_grid.is_empty() || self.k_grid.is_empty() {
            return bad("empty N or K grid");
        }
        if self.n_grid.contains(&0) || self.k_grid.contains(&0) {
            return bad("grid values must be positive");
        }
        if self.seeds == 0 {
            return bad("seeds must be at least 1");
        }
        strategy_from_name(&self.mask)?;
        Ok(())
    }

    /// Seed for everything derived from the config as a whole.
    pub fn hash(&self) -> u64 {
        let mut canonical = self.clone();
        canonical.output = None;
        hash_seed(serde_json::to_string(&canonical).expect("serializable").as_bytes())
    }

    pub fn cell_count(&self) -> usize {
        self.instances.len() * self.n_grid.len() * self.k_grid.len() * self.seeds
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub structure: String,
    pub n: usize,
    pub m: Option<usize>,
    pub kappa_target: f64,
    pub kappa_realized: Option<f64>,
    /// Empty when the meta-graph is disconnected.
    #[serde(rename = "L")]
    pub l: Option<usize>,
    pub c_pi: Option<f64>,
    #[serde(rename = "C_pi")]
    pub big_c_pi: Option<usize>,
    #[serde(rename = "N")]
    pub n_outer: usize,
    #[serde(rename = "K")]
    pub k_inner: usize,
    pub seed: usize,
    pub d_plugin: Option<f64>,
    pub d_oracle: Option<f64>,
    pub sketch_missing: Option<usize>,
    pub sketch_spurious: Option<usize>,
    pub meta_connected: Option<bool>,
    pub status: String,
    pub runtime_ms: u64,
}

#[derive(Clone, Copy, Debug)]
struct Cell {
    index: usize,
    instance: usize,
    n_outer: usize,
    k_inner: usize,
    seed: usize,
}

fn cells(cfg: &SweepConfig) -> Vec<Cell> {
    let mut out = Vec::with_capacity(cfg.cell_count());
    for instance in 0..cfg.instances.len() {
        for &n_outer in &cfg.n_grid {
            for &k_inner in &cfg.k_grid {
                for seed in 0..cfg.seeds {
                    out.push(Cell { index: out.len(), instance, n_outer, k_inner, seed });
                }
            }
        }
    }
    out
}

fn mix(parts: &[u64]) -> u64 {
    let bytes: Vec<u8> = parts.iter().flat_map(|p| p.to_le_bytes()).collect();
    hash_seed(&bytes)
}

/// Runs every cell, in parallel on `jobs` threads (0 = rayon default). Rows
/// come back in cell order. Failures inside a cell land in its status column.
pub fn run_sweep(cfg: &SweepConfig, jobs: usize) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    let config_hash = cfg.hash();
    let all = cells(cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(pool.install(|| all.par_iter().map(|cell| run_cell(cfg, config_hash, cell)).collect()))
}

fn run_cell(cfg: &SweepConfig, config_hash: u64, cell: &Cell) -> SweepRow {
    let start = Instant::now();
    let inst = &cfg.instances[cell.instance];
    let mut row = SweepRow {
        structure: inst.structure.to_string(),
        n: inst.n,
        m: None,
        kappa_target: inst.w_max / inst.w_min,
        kappa_realized: None,
        l: None,
        c_pi: None,
        big_c_pi: None,
        n_outer: cell.n_outer,
        k_inner: cell.k_inner,
        seed: cell.seed,
        d_plugin: None,
        d_oracle: None,
        sketch_missing: None,
        sketch_spurious: None,
        meta_connected: None,
        status: "ok".into(),
        runtime_ms: 0,
    };
    if let Err(e) = fill_row(cfg, config_hash, cell, &mut row) {
        row.status = e.to_string();
    }
    if cfg.timing {
        row.runtime_ms = start.elapsed().as_millis() as u64;
    }
    row
}

fn fill_row(cfg: &SweepConfig, config_hash: u64, cell: &Cell, row: &mut SweepRow) -> Result<()> {
    let inst = &cfg.instances[cell.instance];
    // the instance is shared by every N and K at a given seed index
    let spec = GeneratorSpec {
        structure: inst.structure,
        n: inst.n,
        p: inst.p,
        w_min: inst.w_min,
        w_max: inst.w_max,
        seed: mix(&[cfg.seed, cell.instance as u64, cell.seed as u64]),
    };
    let truth = spec.generate()?;
    let strategy = strategy_from_name(&cfg.mask)?;
    row.m = Some(truth.edge_count());
    row.kappa_realized = truth.range_ratio();
    let (c_pi, big_c) = strategy_constants(&truth, strategy.as_ref())?;
    row.c_pi = Some(c_pi);
    row.big_c_pi = Some(big_c);
    let mg = build_meta_graph(&truth, strategy.as_ref());
    row.l = match mm_path_length_bound(&mg)? {
        PathBound::Bounded(l) => Some(l),
        PathBound::Disconnected => None,
    };

    let data_seed = mix(&[config_hash, cell.index as u64, cell.seed as u64]);
    let mm = sample_mm_dataset(&truth, cell.n_outer, cell.k_inner, strategy.as_ref(), data_seed)?;
    let plugin = recover_from_dataset(&mm.outer_samples())?;
    row.d_plugin = Some(dissimilarity(&plugin, &truth));

    let oracle = train_tabular(&mm);
    let candidates = CandidateSet::all_pairs_from_oracle(&oracle);
    let rec = recover_from_oracle(&oracle, &candidates, strategy.as_ref())?;
    let report = recovery_report(&rec.hypergraph, &truth, None)?;
    row.d_oracle = Some(report.weighted_error);
    row.sketch_missing = Some(report.sketch_missing.len());
    row.sketch_spurious = Some(report.sketch_spurious.len());
    row.meta_connected = Some(rec.meta_connected);
    Ok(())
}

pub fn write_csv<W: std::io::Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(out);
    for r in rows {
        w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

pub fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).expect("in-memory write");
    String::from_utf8(buf).expect("utf-8")
}

/// Pulls numeric `(x, y)` pairs out of any CSV with a header row, keeping
/// only rows whose `status` (if present) is `ok` and that match every
/// `column=value` filter. Rows with an empty x or y are skipped.
pub fn csv_points(text: &str, x: &str, y: &str, filters: &[(String, String)]) -> Result<Vec<(f64, f64)>> {
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().map_err(|e| Error::Io(e.to_string()))?.clone();
    let col = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| Error::InvalidParameter(format!("no column {name:?}")))
    };
    let (xi, yi) = (col(x)?, col(y)?);
    let status = headers.iter().position(|h| h == "status");
    let filters: Vec<(usize, &str)> =
        filters.iter().map(|(c, v)| Ok((col(c)?, v.as_str()))).collect::<Result<_>>()?;
    let mut out = Vec::new();
    for (i, rec) in reader.records().enumerate() {
        let rec = rec.map_err(|e| Error::ParseError { line: i + 2, msg: e.to_string() })?;
        if status.is_some_and(|s| &rec[s] != "ok") || filters.iter().any(|&(c, v)| &rec[c] != v) {
            continue;
        }
        if rec[xi].is_empty() || rec[yi].is_empty() {
            continue;
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .map_err(|_| Error::ParseError { line: i + 2, msg: format!("not a number: {s:?}") })
        };
        out.push((parse(&rec[xi])?, parse(&rec[yi])?));
    }
    Ok(out)
}
