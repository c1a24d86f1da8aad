//! Batch evaluation: a JSON experiment config drives exact or walk-based
//! searches over a query set, scoring each result against the exact
//! ground truth and aggregating the per-query rows into a summary.

use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use anyhow::anyhow;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use cks_core::graph::{induced_subgraph, load_edge_list};
use cks_core::metrics::{density, diameter, precision_recall_f1};
use cks_core::refine::refine;
use cks_core::tcp::{build_tcp_index, tcp_query, TcpIndex};
use cks_core::truss::{key_members, key_members_exact};
use cks_core::walk::cks_random_walk;
use cks_core::{Direction, Graph, NodeId, NodeIdMap, Variant, WalkParams};

use crate::output::sig12;
use crate::{CliError, CliResult};

/// Exact-search strategy selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Bottomup,
    Topdown,
    Tcp,
}

impl Method {
    pub fn token(self) -> &'static str {
        match self {
            Method::Bottomup => "bottomup",
            Method::Topdown => "topdown",
            Method::Tcp => "tcp",
        }
    }

    /// Decomposition direction for the index-free searches; `None` means
    /// the TCP index answers the query instead.
    pub fn direction(self) -> Option<Direction> {
        match self {
            Method::Bottomup => Some(Direction::BottomUp),
            Method::Topdown => Some(Direction::TopDown),
            Method::Tcp => None,
        }
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "bottomup" => Ok(Method::Bottomup),
            "topdown" => Ok(Method::Topdown),
            "tcp" => Ok(Method::Tcp),
            other => Err(format!(
                "unknown method {other:?}, expected bottomup|topdown|tcp"
            )),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Which nodes to query: a fixed list of labels, or a seeded sample of
/// distinct nodes.
#[derive(Debug, Clone, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuerySpec {
    Explicit { ids: Vec<String> },
    Random { count: usize, seed: u64 },
}

/// Which algorithm produces the candidate set for each query.
#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlgorithmSpec {
    Exact { method: Method },
    Walk { variant: Variant },
}

fn default_m() -> u32 {
    2
}
fn default_r() -> u32 {
    150
}
fn default_alpha() -> f64 {
    1.0
}
fn default_f_percent() -> f64 {
    100.0
}

/// One experiment: a graph, a query set, an algorithm, and the walk
/// parameters shared by every query.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: PathBuf,
    pub queries: QuerySpec,
    pub algorithm: AlgorithmSpec,
    #[serde(default = "default_m")]
    pub m: u32,
    #[serde(default = "default_r")]
    pub r: u32,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default)]
    pub refine: u32,
    #[serde(default)]
    pub seed: u64,
    /// Candidate size as a percentage of the ground-truth size.
    #[serde(default = "default_f_percent")]
    pub f_percent: f64,
    #[serde(default)]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

/// One query's outcome. Metric cells are empty when the query failed;
/// `flags` then carries the error message.
#[derive(Debug, Clone, Serialize)]
pub struct Row {
    pub query_id: String,
    pub algo: String,
    pub variant: String,
    pub m: u32,
    pub r: u32,
    pub alpha: f64,
    pub n: usize,
    pub precision: Option<f64>,
    pub recall: Option<f64>,
    pub f1: Option<f64>,
    pub diameter: Option<u32>,
    pub density: Option<f64>,
    pub runtime_ms: Option<f64>,
    pub flags: String,
}

/// Aggregates over the successful rows. `density_formula` names the
/// convention behind the density column.
#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub queries: usize,
    pub failed: usize,
    pub mean_precision: Option<f64>,
    pub mean_recall: Option<f64>,
    pub mean_f1: Option<f64>,
    pub mean_diameter: Option<f64>,
    pub mean_density: Option<f64>,
    pub mean_runtime_ms: Option<f64>,
    pub density_formula: &'static str,
}

#[derive(Debug, Clone)]
pub struct MetricsReport {
    pub rows: Vec<Row>,
    pub summary: Summary,
}

impl MetricsReport {
    /// Renders the rows as CSV with one header line. Empty cells stand
    /// for metrics a failed query never produced.
    pub fn to_csv(&self) -> String {
        let mut writer = csv::Writer::from_writer(Vec::new());
        for row in &self.rows {
            writer.serialize(row).expect("rows are plain data");
        }
        let bytes = writer.into_inner().expect("vec sink cannot fail");
        String::from_utf8(bytes).expect("csv output is utf-8")
    }
}

fn mean_of(values: impl Iterator<Item = f64>) -> Option<f64> {
    let collected: Vec<f64> = values.collect();
    if collected.is_empty() {
        None
    } else {
        Some(sig12(collected.iter().sum::<f64>() / collected.len() as f64))
    }
}

fn summarize(rows: &[Row]) -> Summary {
    let ok: Vec<&Row> = rows.iter().filter(|r| r.precision.is_some()).collect();
    Summary {
        queries: rows.len(),
        failed: rows.len() - ok.len(),
        mean_precision: mean_of(ok.iter().filter_map(|r| r.precision)),
        mean_recall: mean_of(ok.iter().filter_map(|r| r.recall)),
        mean_f1: mean_of(ok.iter().filter_map(|r| r.f1)),
        mean_diameter: mean_of(ok.iter().filter_map(|r| r.diameter.map(f64::from))),
        mean_density: mean_of(ok.iter().filter_map(|r| r.density)),
        mean_runtime_ms: mean_of(ok.iter().filter_map(|r| r.runtime_ms)),
        density_formula: "edges/nodes",
    }
}

/// (algo, variant) column values for the configured algorithm.
fn algo_columns(algorithm: AlgorithmSpec) -> (String, String) {
    match algorithm {
        AlgorithmSpec::Exact { method } => ("exact".into(), method.token().into()),
        AlgorithmSpec::Walk { variant } => ("walk".into(), variant.token().into()),
    }
}

/// Seeded sample of `count` distinct node labels, in ascending id order.
pub(crate) fn sample_node_labels(
    g: &Graph,
    map: &NodeIdMap,
    count: usize,
    seed: u64,
) -> CliResult<Vec<String>> {
    if count == 0 {
        return Err(CliError::config(anyhow!("random query count must be ≥ 1")));
    }
    if count > g.node_count() {
        return Err(CliError::config(anyhow!(
            "random query count {count} exceeds the node count {}",
            g.node_count()
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut picks: Vec<usize> =
        rand::seq::index::sample(&mut rng, g.node_count(), count).into_vec();
    picks.sort_unstable();
    Ok(picks
        .into_iter()
        .map(|i| map.label(i as NodeId).expect("sampled in range").to_string())
        .collect())
}

/// The query labels an experiment will run, resolved up front for random
/// specs and passed through verbatim for explicit ones (so an unknown
/// explicit label fails that one query, not the whole run).
fn query_labels(config: &ExperimentConfig, g: &Graph, map: &NodeIdMap) -> CliResult<Vec<String>> {
    match &config.queries {
        QuerySpec::Explicit { ids } => {
            if ids.is_empty() {
                return Err(CliError::config(anyhow!("queries.explicit.ids is empty")));
            }
            Ok(ids.clone())
        }
        QuerySpec::Random { count, seed } => sample_node_labels(g, map, *count, *seed),
    }
}

/// Candidate member set for one query, with the walk's truncation flag.
fn run_algorithm(
    g: &Graph,
    q: NodeId,
    n: usize,
    config: &ExperimentConfig,
    index: Option<&TcpIndex>,
) -> cks_core::Result<(Vec<NodeId>, bool)> {
    match config.algorithm {
        AlgorithmSpec::Exact { method } => {
            let result = match (index, method.direction()) {
                (Some(idx), _) => tcp_query(idx, g, q)?,
                (None, Some(direction)) => key_members(g, q, direction)?,
                (None, None) => unreachable!("tcp runs against the prebuilt index"),
            };
            Ok((result.members, false))
        }
        AlgorithmSpec::Walk { variant } => {
            let mut params = WalkParams::new(variant, n);
            params.m = config.m;
            params.r = config.r;
            params.alpha = config.alpha;
            params.refine_iters = config.refine;
            params.seed = config.seed;
            let walked = cks_random_walk(g, &[q], &params)?;
            let members = if config.refine > 0 {
                refine(g, &walked.nodes(), config.refine)?
            } else {
                walked.nodes()
            };
            Ok((members, walked.truncated))
        }
    }
}

/// Runs every query in the config and scores it against the exact ground
/// truth. Per-query failures become rows with an `error:` flag; the run
/// keeps going.
pub fn run_experiment(config: &ExperimentConfig) -> CliResult<MetricsReport> {
    if !(config.f_percent.is_finite() && config.f_percent > 0.0) {
        return Err(CliError::config(anyhow!(
            "f_percent must be a positive finite number, got {}",
            config.f_percent
        )));
    }
    // surface bad walk parameters before touching any query
    let mut probe = WalkParams::new(Variant::Basic, 1);
    probe.m = config.m;
    probe.r = config.r;
    probe.alpha = config.alpha;
    probe.validate().map_err(CliError::config)?;

    let (g, map) = load_edge_list(&config.graph).map_err(|e| {
        CliError::data(anyhow!(e).context(format!("loading {}", config.graph.display())))
    })?;
    let labels = query_labels(config, &g, &map)?;
    let index = match config.algorithm {
        AlgorithmSpec::Exact { method: Method::Tcp } => Some(build_tcp_index(&g)),
        _ => None,
    };
    let (algo, variant) = algo_columns(config.algorithm);

    let mut rows = Vec::with_capacity(labels.len());
    for label in labels {
        let template = Row {
            query_id: label.clone(),
            algo: algo.clone(),
            variant: variant.clone(),
            m: config.m,
            r: config.r,
            alpha: config.alpha,
            n: 0,
            precision: None,
            recall: None,
            f1: None,
            diameter: None,
            density: None,
            runtime_ms: None,
            flags: String::new(),
        };
        rows.push(match score_query(&g, &map, &label, config, index.as_ref(), template) {
            Ok(row) => row,
            Err((mut row, msg)) => {
                row.flags = format!("error:{msg}");
                row
            }
        });
    }
    let summary = summarize(&rows);
    Ok(MetricsReport { rows, summary })
}

/// One query end to end; errors return the template row plus a message so
/// the caller can record the failure without aborting the run.
fn score_query(
    g: &Graph,
    map: &NodeIdMap,
    label: &str,
    config: &ExperimentConfig,
    index: Option<&TcpIndex>,
    mut row: Row,
) -> Result<Row, (Row, String)> {
    let fail = |row: Row, err: &dyn std::fmt::Display| (row, format!("{err}"));

    let Some(q) = map.id(label) else {
        return Err(fail(row, &format!("unknown node label {label:?}")));
    };
    let truth = match key_members_exact(g, q) {
        Ok(t) => t,
        Err(e) => return Err(fail(row, &e)),
    };
    let n = ((config.f_percent / 100.0) * truth.members.len() as f64).ceil() as usize;
    row.n = n;

    let started = Instant::now();
    let outcome = run_algorithm(g, q, n, config, index);
    let runtime = started.elapsed();
    let (members, truncated) = match outcome {
        Ok(v) => v,
        Err(e) => return Err(fail(row, &e)),
    };

    let (p, r, f1) = match precision_recall_f1(&members, &truth.members) {
        Ok(v) => v,
        Err(e) => return Err(fail(row, &e)),
    };
    let (sub, _) = match induced_subgraph(g, &members) {
        Ok(v) => v,
        Err(e) => return Err(fail(row, &e)),
    };
    let (diam, disconnected) = match diameter(&sub) {
        Ok(v) => v,
        Err(e) => return Err(fail(row, &e)),
    };
    let dens = match density(&sub) {
        Ok(v) => v,
        Err(e) => return Err(fail(row, &e)),
    };

    let mut flags = Vec::new();
    if truncated {
        flags.push("truncated");
    }
    if disconnected {
        flags.push("disconnected");
    }
    row.n = if matches!(config.algorithm, AlgorithmSpec::Exact { .. }) {
        members.len()
    } else {
        n
    };
    row.precision = Some(sig12(p));
    row.recall = Some(sig12(r));
    row.f1 = Some(sig12(f1));
    row.diameter = Some(diam);
    row.density = Some(sig12(dens));
    row.runtime_ms = Some(crate::output::elapsed_ms(runtime));
    row.flags = flags.join(";");
    Ok(row)
}
