use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use hgrec_core::alignment::{
    align_by_hyperedge_ids, align_exact, align_wl_anchored, fuse_datasets, Alignment, AnchorSet,
};
use hgrec_core::bounds::{fit_scaling, lemma_rr_bounds, lower_bound_risk, mm_sample_bounds, BoundsInput};
use hgrec_core::generators::{GeneratorSpec, Structure};
use hgrec_core::kg::{
    evaluate, extract_subgraph, parse_edgelist, render_prompt, replay_response, store_response,
    EndpointConfig, KnowledgeGraph, SubgraphDoc, SubgraphSpec, EVAL_CSV_HEADER,
};
use hgrec_core::masking::{sample_dataset, sample_mm_dataset, strategy_from_name, Dataset, MmDataset};
use hgrec_core::oracle::{train_tabular, TabularOracle};
use hgrec_core::recovery::{
    recover_from_dataset, recover_from_oracle_with, recovery_report, CandidateSet, RatioAggregation,
};
use hgrec_core::sweep::{csv_points, rows_to_csv, run_sweep, SweepConfig};
use hgrec_core::{Error, Result, WeightedHypergraph};

const FORMATS: &str = "\
File formats (UTF-8, LF line endings):
  .hg   `#hg v1` header, optional `#normalized`, then `edge <node>... <weight>` lines
  .ds   one hyperedge per line, nodes separated by spaces
  .mm   `#mm <N> <K>` header, then `<full>\\t<masked>` lines where masked nodes are `_`
  oracle   JSON object: masked-form key (`a+b|1`) -> hyperedge key (`a+c`) -> count
  alignment   `<v1> <v2>` lines and a final `#cost <value>`
  anchors   `node <v1> <v2>` and `edge <a+b> <c+d>` lines
  kg TSV   `start<TAB>end<TAB>weight`
  subgraph   JSON with source, k, d, entities, edges
Randomness derives only from --seed.";

#[derive(Parser)]
#[command(name = "hgrec", version, about = "Weighted hypergraph recovery toolkit", after_help = FORMATS)]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Base seed for every random stream
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output path (standard output when omitted)
    #[arg(short, long, global = true)]
    output: Option<PathBuf>,
    /// error | warn | info | debug | trace
    #[arg(long, global = true, default_value = "warn")]
    log_level: String,
    /// Config file (sweep TOML or chat endpoint TOML)
    #[arg(long, global = true)]
    config: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a normalized weighted benchmark hypergraph (.hg)
    Gen {
        #[arg(long)]
        structure: Structure,
        #[arg(long)]
        n: usize,
        /// Edge probability, wcgnm only
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 1.0)]
        w_min: f64,
        #[arg(long, default_value_t = 1.0)]
        w_max: f64,
    },
    /// Draw i.i.d. hyperedges (.hg -> .ds)
    Sample {
        #[arg(long)]
        hg: PathBuf,
        #[arg(long)]
        n: usize,
    },
    /// Draw a masked-modeling dataset of N samples with K masks each (.hg -> .mm)
    MmSample {
        #[arg(long)]
        hg: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        k: usize,
        #[arg(long, default_value = "uniform1")]
        mask: String,
    },
    /// Fit the count-ratio oracle (.mm -> oracle JSON)
    Train {
        #[arg(long)]
        mm: PathBuf,
    },
    /// Recover a hypergraph from a dataset (plug-in) or an oracle (-> .hg)
    Recover {
        /// Plug-in estimate from a .ds or .mm file
        #[arg(long, conflicts_with = "oracle")]
        dataset: Option<PathBuf>,
        #[arg(long, required_unless_present = "dataset")]
        oracle: Option<PathBuf>,
        /// `pairs` for all node pairs, or a .ds file of candidate hyperedges
        #[arg(long, default_value = "pairs")]
        candidates: String,
        #[arg(long, default_value = "uniform1")]
        mask: String,
        #[arg(long, value_enum, default_value_t = Aggregation::Smallest)]
        aggregation: Aggregation,
    },
    /// Compare a recovered hypergraph with the truth (JSON report)
    Report {
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        rec: PathBuf,
        /// Alignment file mapping recovered nodes onto truth nodes
        #[arg(long)]
        alignment: Option<PathBuf>,
    },
    /// Align the nodes of two hypergraphs (alignment file)
    Align {
        #[arg(long)]
        h1: PathBuf,
        #[arg(long)]
        h2: PathBuf,
        #[arg(long, value_enum)]
        method: Method,
        /// Anchor file; for `ids` its edge lines give the hyperedge correspondence
        #[arg(long)]
        anchors: Option<PathBuf>,
        #[arg(long, default_value_t = hgrec_core::alignment::DEFAULT_MAX_NODES)]
        max_nodes: usize,
    },
    /// Map D1 through an alignment and append D2 (.ds)
    Fuse {
        #[arg(long)]
        d1: PathBuf,
        #[arg(long)]
        d2: PathBuf,
        #[arg(long)]
        alignment: PathBuf,
    },
    /// Evaluate the closed-form bounds (JSON)
    Bounds {
        #[arg(long)]
        m: Option<u64>,
        /// Dataset size for the minimax lower bound
        #[arg(long)]
        n: Option<u64>,
        #[arg(long)]
        kappa: Option<f64>,
        #[arg(long = "L")]
        l: Option<u64>,
        #[arg(long)]
        c_pi: Option<f64>,
        #[arg(long = "C-pi")]
        big_c_pi: Option<u64>,
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long)]
        delta: Option<f64>,
        /// Outcome count for the range-ratio lemma
        #[arg(long)]
        m0: Option<u64>,
        #[arg(long)]
        kappa0: Option<f64>,
    },
    /// Run a recovery sweep from a TOML config (--config) and write CSV
    Sweep {
        /// Worker threads (0 = all cores)
        #[arg(long, default_value_t = 0)]
        jobs: usize,
    },
    /// Least-squares fit of ln(mean y) on ln x over CSV rows (JSON)
    Fit {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
        /// Keep only rows with column=value (repeatable)
        #[arg(long = "filter", value_parser = parse_filter)]
        filters: Vec<(String, String)>,
    },
    /// Normalize a knowledge-graph TSV (lowercase, deduplicate with max weight)
    KgIngest {
        #[arg(long)]
        tsv: PathBuf,
    },
    /// Extract the top-k depth-d subgraph around a source entity (JSON)
    KgExtract {
        #[arg(long)]
        kg: PathBuf,
        #[arg(long)]
        source: String,
        #[arg(long)]
        k: usize,
        #[arg(long)]
        d: usize,
    },
    /// Render the evaluation prompt for a subgraph
    KgPrompt {
        #[arg(long)]
        subgraph: PathBuf,
    },
    /// Parse a model response into entity pairs (JSON)
    KgParse {
        #[arg(long)]
        subgraph: PathBuf,
        #[arg(long)]
        response: PathBuf,
    },
    /// Score a model response against a subgraph (JSON report or CSV row)
    KgEval {
        #[arg(long)]
        subgraph: PathBuf,
        #[arg(long, required_unless_present = "responses_dir")]
        response: Option<PathBuf>,
        /// Replay directory of `<sha256(prompt)>.txt` files
        #[arg(long, conflicts_with = "response")]
        responses_dir: Option<PathBuf>,
        #[arg(long, default_value = "unknown")]
        model: String,
        /// Emit a CSV header and row instead of JSON
        #[arg(long)]
        csv: bool,
    },
    /// Query a chat-completion endpoint (--config) and store the response
    KgChat {
        #[arg(long)]
        subgraph: PathBuf,
        #[arg(long)]
        responses_dir: PathBuf,
        /// Only read stored responses, never touch the network
        #[arg(long)]
        offline: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Exact,
    Ids,
    WlIr,
}

#[derive(Clone, Copy, ValueEnum)]
enum Aggregation {
    Smallest,
    Geometric,
}

fn parse_filter(s: &str) -> std::result::Result<(String, String), String> {
    s.split_once('=')
        .map(|(a, b)| (a.to_string(), b.to_string()))
        .ok_or_else(|| format!("expected column=value, got {s:?}"))
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn read_hg(path: &Path) -> Result<WeightedHypergraph> {
    WeightedHypergraph::decode(&read(path)?)
}

/// `.mm` files also work wherever a `.ds` is expected (their outer samples).
fn read_samples(path: &Path) -> Result<Dataset> {
    let text = read(path)?;
    if text.starts_with("#mm") {
        Ok(MmDataset::decode(&text)?.outer_samples())
    } else {
        Dataset::decode(&text)
    }
}

fn json<T: serde::Serialize>(value: &T) -> String {
    serde_json::to_string_pretty(value).expect("serializable") + "\n"
}

const META_TAG: &str = "#meta_connected ";

fn run(cli: Cli) -> Result<String> {
    let g = &cli.global;
    let seed = g.seed.unwrap_or(0);
    Ok(match &cli.command {
        Command::Gen { structure, n, p, w_min, w_max } => {
            GeneratorSpec { structure: *structure, n: *n, p: *p, w_min: *w_min, w_max: *w_max, seed }
                .generate()?
                .encode()
        }
        Command::Sample { hg, n } => sample_dataset(&read_hg(hg)?, *n, seed)?.encode(),
        Command::MmSample { hg, n, k, mask } => {
            let s = strategy_from_name(mask)?;
            sample_mm_dataset(&read_hg(hg)?, *n, *k, s.as_ref(), seed)?.encode()
        }
        Command::Train { mm } => train_tabular(&MmDataset::decode(&read(mm)?)?).to_json(),
        Command::Recover { dataset, oracle, candidates, mask, aggregation } => {
            if let Some(path) = dataset {
                recover_from_dataset(&read_samples(path)?)?.encode()
            } else {
                let oracle = TabularOracle::from_json(&read(oracle.as_ref().expect("clap"))?)?;
                let cands = match candidates.as_str() {
                    "pairs" => CandidateSet::all_pairs_from_oracle(&oracle),
                    path => CandidateSet::decode(&read(Path::new(path))?)?,
                };
                let agg = match aggregation {
                    Aggregation::Smallest => RatioAggregation::SmallestForm,
                    Aggregation::Geometric => RatioAggregation::GeometricMean,
                };
                let s = strategy_from_name(mask)?;
                let rec = recover_from_oracle_with(&oracle, &cands, s.as_ref(), agg)?;
                if !rec.meta_connected {
                    log::warn!("meta-graph has {} components; weights are per component", rec.components);
                }
                let text = rec.hypergraph.encode();
                let (header, rest) = text.split_once('\n').expect("header line");
                format!("{header}\n{META_TAG}{}\n{rest}", rec.meta_connected)
            }
        }
        Command::Report { truth, rec, alignment } => {
            let rec_text = read(rec)?;
            let recovered = WeightedHypergraph::decode(&rec_text)?;
            let phi = match alignment {
                Some(p) => Some(Alignment::decode(&read(p)?)?.mapping),
                None => None,
            };
            let mut report = recovery_report(&recovered, &read_hg(truth)?, phi.as_ref())?;
            report.meta_connected =
                rec_text.lines().find_map(|l| l.strip_prefix(META_TAG)).and_then(|v| v.trim().parse().ok());
            report.to_json()
        }
        Command::Align { h1, h2, method, anchors, max_nodes } => {
            let (h1, h2) = (read_hg(h1)?, read_hg(h2)?);
            let anchors = match anchors {
                Some(p) => AnchorSet::decode(&read(p)?)?,
                None => AnchorSet::default(),
            };
            let a = match method {
                Method::Exact => align_exact(&h1, &h2, *max_nodes)?,
                Method::Ids => align_by_hyperedge_ids(&h1, &h2, anchors.edge_pairs())?,
                Method::WlIr => {
                    let out = align_wl_anchored(&h1, &h2, &anchors)?;
                    log::info!(
                        "individualization search: {} root branches, {} backtracks",
                        out.root_branches,
                        out.backtracks
                    );
                    out.alignment
                }
            };
            a.encode()
        }
        Command::Fuse { d1, d2, alignment } => {
            let phi = Alignment::decode(&read(alignment)?)?.mapping;
            fuse_datasets(&read_samples(d1)?, &read_samples(d2)?, &phi)?.encode()
        }
        Command::Bounds { m, n, kappa, l, c_pi, big_c_pi, epsilon, delta, m0, kappa0 } => {
            let mut doc = serde_json::Map::new();
            if let (Some(m), Some(n)) = (m, n) {
                doc.insert("lower_bound_risk".into(), lower_bound_risk(*m, *n)?.into());
            }
            if let (Some(m), Some(kappa), Some(l), Some(c_pi), Some(big_c), Some(eps), Some(delta)) =
                (m, kappa, l, c_pi, big_c_pi, epsilon, delta)
            {
                let b = mm_sample_bounds(&BoundsInput {
                    m: *m,
                    kappa: *kappa,
                    l: *l,
                    c_pi: *c_pi,
                    big_c_pi: *big_c,
                    epsilon: *eps,
                    delta: *delta,
                    n: *n,
                })?;
                doc.insert("K_min".into(), b.k_min.into());
                doc.insert("N_min".into(), b.n_min.into());
            }
            if let (Some(m0), Some(k0)) = (m0, kappa0) {
                let (lo, hi) = lemma_rr_bounds(*m0, *k0);
                doc.insert("min_prob_lower".into(), lo.into());
                doc.insert("max_prob_upper".into(), hi.into());
            }
            if doc.is_empty() {
                return Err(Error::InvalidParameter(
                    "give --m and --n, the full sample-bound set, or --m0 and --kappa0".into(),
                ));
            }
            json(&doc)
        }
        Command::Sweep { jobs } => {
            let path = g.config.as_ref().ok_or_else(|| Error::Config("sweep needs --config".into()))?;
            let mut cfg = SweepConfig::from_toml(&read(path)?)?;
            if let Some(s) = g.seed {
                cfg.seed = s;
            }
            let csv = rows_to_csv(&run_sweep(&cfg, *jobs)?);
            if g.output.is_none() {
                if let Some(out) = &cfg.output {
                    write_output(Some(Path::new(out)), &csv)?;
                    return Ok(String::new());
                }
            }
            csv
        }
        Command::Fit { csv, x, y, filters } => json(&fit_scaling(&csv_points(&read(csv)?, x, y, filters)?)?),
        Command::KgIngest { tsv } => KnowledgeGraph::from_tsv(&read(tsv)?)?.to_tsv(),
        Command::KgExtract { kg, source, k, d } => {
            let spec = SubgraphSpec { source: source.clone(), k: *k, d: *d };
            let sub = extract_subgraph(&KnowledgeGraph::from_tsv(&read(kg)?)?, &spec)?;
            SubgraphDoc::new(&spec, &sub).to_json()
        }
        Command::KgPrompt { subgraph } => {
            let doc = SubgraphDoc::from_json(&read(subgraph)?)?;
            render_prompt(&doc.entities, doc.k)?
        }
        Command::KgParse { subgraph, response } => {
            let doc = SubgraphDoc::from_json(&read(subgraph)?)?;
            json(&parse_edgelist(&read(response)?, &doc.entities))
        }
        Command::KgEval { subgraph, response, responses_dir, model, csv } => {
            let doc = SubgraphDoc::from_json(&read(subgraph)?)?;
            let text = match (response, responses_dir) {
                (Some(p), _) => read(p)?,
                (None, Some(dir)) => replay_response(dir, &render_prompt(&doc.entities, doc.k)?)?,
                (None, None) => unreachable!("clap requires one"),
            };
            let result = evaluate(&doc.subgraph()?, &doc.spec(), model, &text)?;
            if *csv {
                format!("{EVAL_CSV_HEADER}\n{}", result.csv_row())
            } else {
                result.to_json()
            }
        }
        Command::KgChat { subgraph, responses_dir, offline } => {
            let doc = SubgraphDoc::from_json(&read(subgraph)?)?;
            let prompt = render_prompt(&doc.entities, doc.k)?;
            match replay_response(responses_dir, &prompt) {
                Ok(text) => text,
                Err(e) if *offline => return Err(e),
                Err(_) => {
                    let path =
                        g.config.as_ref().ok_or_else(|| Error::Config("kg-chat needs --config".into()))?;
                    let cfg = EndpointConfig::from_toml(&read(path)?)?;
                    let text = hgrec_core::kg::chat_completion(&cfg, &prompt)?;
                    store_response(responses_dir, &prompt, &text)?;
                    text
                }
            }
        }
    })
}

fn write_output(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new().parse_filters(&cli.global.log_level).init();
    let output = cli.global.output.clone();
    match run(cli).and_then(|text| write_output(output.as_deref(), &text)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
