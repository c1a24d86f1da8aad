//! `cks` — command-line front-end for community key-member search.
//!
//! Subcommands cover single queries (`query`, `exact`), index management
//! (`index build`, `index query`), batch evaluation (`eval`), synthetic
//! instance generation (`gen`), and the statistics front-ends
//! (`analyze bayes|chain|pcc`). Everything prints JSON except `eval`'s
//! row output, which can also be CSV.

use std::collections::{BTreeSet, HashMap};
use std::path::PathBuf;
use std::time::Instant;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use serde_json::json;

use cks_core::graph::load_edge_list;
use cks_core::refine::refine;
use cks_core::tcp::{build_tcp_index, tcp_query, TcpIndex};
use cks_core::truss::{key_members, key_members_exact};
use cks_core::walk::cks_random_walk;
use cks_core::{Graph, NodeId, NodeIdMap, Variant, WalkParams};

pub mod analyze;
pub mod experiment;
mod output;

use experiment::{run_experiment, ExperimentConfig, Method, OutputFormat};
use output::{elapsed_ms, emit, labels_of, resolve_labels, sig12};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DATA: i32 = 3;
pub const EXIT_PARTIAL: i32 = 4;

/// An error tagged with the process exit code it maps to: 2 for
/// configuration problems, 3 for anything wrong with the data being
/// read or written.
#[derive(Debug)]
pub struct CliError {
    code: i32,
    source: anyhow::Error,
}

impl CliError {
    pub fn config(err: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_CONFIG, source: err.into() }
    }

    pub fn data(err: impl Into<anyhow::Error>) -> Self {
        Self { code: EXIT_DATA, source: err.into() }
    }

    pub fn code(&self) -> i32 {
        self.code
    }

    pub fn message(&self) -> String {
        format!("{:#}", self.source)
    }
}

/// Default classification of core errors: parameter-domain problems are
/// usage mistakes, everything else reflects the data. Call sites with
/// better context override this.
pub fn classify(err: cks_core::Error) -> CliError {
    match err {
        cks_core::Error::InvalidParameter(_) => CliError::config(err),
        other => CliError::data(other),
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "cks",
    version,
    about = "Community key-member search over k-truss communities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Run a random-walk query and print the ranked key members
    Query(QueryArgs),
    /// Compute exact ground-truth key members
    Exact(ExactArgs),
    /// Build or query a persistent trussness index
    Index {
        #[command(subcommand)]
        action: IndexAction,
    },
    /// Run a batch experiment described by a JSON config file
    Eval(EvalArgs),
    /// Generate a synthetic graph with a planted community
    Gen(GenArgs),
    /// Statistical analyses of communities and the walk model
    Analyze {
        #[command(subcommand)]
        action: analyze::AnalyzeAction,
    },
}

fn variant_value(s: &str) -> Result<Variant, String> {
    s.parse().map_err(|e: cks_core::Error| e.to_string())
}

fn method_value(s: &str) -> Result<Method, String> {
    s.parse()
}

#[derive(Args)]
pub struct QueryArgs {
    /// Edge-list file (one "u v" pair per line, '#' comments)
    #[arg(long)]
    pub graph: PathBuf,
    /// Comma-separated query node labels
    #[arg(long, value_delimiter = ',', required = true)]
    pub q: Vec<String>,
    /// Walk variant: basic|avg|skew|tb
    #[arg(long, default_value = "basic", value_parser = variant_value)]
    pub variant: Variant,
    /// Hop bound of the query-centered subgraph
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    /// Power-iteration count
    #[arg(long, default_value_t = 150)]
    pub r: u32,
    /// Skew-adjustment amplitude in [0, 2]
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Result size; defaults to the exact ground-truth size
    #[arg(long)]
    pub n: Option<usize>,
    /// Post-walk refinement sweeps: rescore by neighbor count inside the
    /// result set; ties keep incumbents ahead, then prefer lower ids
    #[arg(long, default_value_t = 0)]
    pub refine: u32,
    /// Seed for the multi-query start choice
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Write the JSON result here instead of stdout
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ExactArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Comma-separated query node labels, answered one by one
    #[arg(long, value_delimiter = ',', required = true)]
    pub q: Vec<String>,
    /// Search strategy: bottomup|topdown|tcp
    #[arg(long, default_value = "bottomup", value_parser = method_value)]
    pub method: Method,
    /// Pre-built index file (tcp method only; built in memory otherwise)
    #[arg(long)]
    pub index: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Subcommand)]
pub enum IndexAction {
    /// Decompose the graph and persist the trussness index
    Build {
        #[arg(long)]
        graph: PathBuf,
        /// Index file to write
        #[arg(long)]
        out: PathBuf,
    },
    /// Answer exact queries from a persisted index
    Query {
        #[arg(long)]
        graph: PathBuf,
        /// Index file produced by `index build`
        #[arg(long)]
        index: PathBuf,
        #[arg(long, value_delimiter = ',', required = true)]
        q: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
pub struct EvalArgs {
    /// JSON experiment description
    pub config: PathBuf,
    /// Override the config's output path
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the config's output format: json|csv
    #[arg(long)]
    pub format: Option<OutputFormat>,
}

#[derive(Args)]
pub struct GenArgs {
    /// Edge-list file to write
    #[arg(long)]
    pub out: PathBuf,
    /// Background node count
    #[arg(long, default_value_t = 200)]
    pub n: usize,
    /// Background edge probability
    #[arg(long, default_value_t = 0.02)]
    pub p: f64,
    /// Planted clique size
    #[arg(long, default_value_t = 10)]
    pub clique: usize,
    /// Random edges attaching the clique to the background
    #[arg(long, default_value_t = 6)]
    pub attach: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

/// Runs one parsed invocation and returns the process exit code.
pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Query(args) => query(args),
        Command::Exact(args) => exact(args),
        Command::Index { action } => index(action),
        Command::Eval(args) => eval(args),
        Command::Gen(args) => gen(args),
        Command::Analyze { action } => analyze::dispatch(action),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {}", err.message());
            err.code()
        }
    }
}

fn load_graph(path: &PathBuf) -> CliResult<(Graph, NodeIdMap)> {
    load_edge_list(path)
        .map_err(|e| CliError::data(anyhow!(e).context(format!("loading {}", path.display()))))
}

/// Union of the exact member sets of all query nodes — the default
/// result size when `--n` is not given.
fn truth_union(g: &Graph, qs: &[NodeId]) -> CliResult<Vec<NodeId>> {
    let mut union = BTreeSet::new();
    for &q in qs {
        union.extend(key_members_exact(g, q).map_err(classify)?.members);
    }
    Ok(union.into_iter().collect())
}

fn query(args: QueryArgs) -> CliResult<i32> {
    let (g, map) = load_graph(&args.graph)?;
    let qs = resolve_labels(&map, &args.q)?;
    let n = match args.n {
        Some(n) => n,
        None => truth_union(&g, &qs)?.len(),
    };
    let mut params = WalkParams::new(args.variant, n);
    params.m = args.m;
    params.r = args.r;
    params.alpha = args.alpha;
    params.refine_iters = args.refine;
    params.seed = args.seed;
    params.validate().map_err(classify)?;

    let started = Instant::now();
    let walked = cks_random_walk(&g, &qs, &params).map_err(classify)?;
    let members = if args.refine > 0 {
        refine(&g, &walked.nodes(), args.refine).map_err(classify)?
    } else {
        walked.nodes()
    };
    let runtime_ms = elapsed_ms(started.elapsed());

    let probability: HashMap<NodeId, f64> = walked.ranked.iter().copied().collect();
    let ranked: Vec<serde_json::Value> = members
        .iter()
        .map(|&u| {
            json!({
                "node": map.label(u).unwrap(),
                // refinement newcomers carry no walk probability
                "probability": probability.get(&u).map(|&p| sig12(p)),
            })
        })
        .collect();
    let doc = json!({
        "query": args.q,
        "start": map.label(walked.start).unwrap(),
        "variant": args.variant.token(),
        "m": args.m,
        "r": args.r,
        "alpha": args.alpha,
        "n": n,
        "refine": args.refine,
        "seed": args.seed,
        "truncated": walked.truncated,
        "subgraph_nodes": walked.subgraph_nodes,
        "members": ranked,
        "runtime_ms": runtime_ms,
    });
    emit(args.out.as_deref(), &doc)?;
    Ok(EXIT_OK)
}

/// JSON view of one exact search outcome.
fn exact_result_json(
    map: &NodeIdMap,
    q: NodeId,
    method: Method,
    result: &cks_core::KeyMemberResult,
    runtime_ms: f64,
) -> serde_json::Value {
    json!({
        "query": map.label(q).unwrap(),
        "method": method.token(),
        "k": result.k,
        "k_hat": result.k_hat,
        "community_size": result.t_k_nodes.len(),
        "members": labels_of(map, &result.members),
        "runtime_ms": runtime_ms,
    })
}

fn exact(args: ExactArgs) -> CliResult<i32> {
    let (g, map) = load_graph(&args.graph)?;
    let qs = resolve_labels(&map, &args.q)?;
    let index = match (args.method, &args.index) {
        (Method::Tcp, Some(path)) => Some(TcpIndex::load(path, &g).map_err(CliError::data)?),
        (Method::Tcp, None) => Some(build_tcp_index(&g)),
        _ => None,
    };
    let mut results = Vec::new();
    for &q in &qs {
        let started = Instant::now();
        let result = match (&index, args.method.direction()) {
            (Some(idx), _) => tcp_query(idx, &g, q),
            (None, Some(direction)) => key_members(&g, q, direction),
            (None, None) => unreachable!("tcp method always builds an index"),
        }
        .map_err(classify)?;
        let runtime_ms = elapsed_ms(started.elapsed());
        results.push(exact_result_json(&map, q, args.method, &result, runtime_ms));
    }
    emit(args.out.as_deref(), &json!({ "results": results }))?;
    Ok(EXIT_OK)
}

fn index(action: IndexAction) -> CliResult<i32> {
    match action {
        IndexAction::Build { graph, out } => {
            let (g, _) = load_graph(&graph)?;
            let started = Instant::now();
            let idx = build_tcp_index(&g);
            idx.save(&g, &out).map_err(CliError::data)?;
            let doc = json!({
                "graph": graph,
                "index": out,
                "nodes": g.node_count(),
                "edges": g.edge_count(),
                "max_trussness": idx.trussness().max(),
                "runtime_ms": elapsed_ms(started.elapsed()),
            });
            emit(None, &doc)?;
            Ok(EXIT_OK)
        }
        IndexAction::Query { graph, index, q, out } => {
            let (g, map) = load_graph(&graph)?;
            let idx = TcpIndex::load(&index, &g).map_err(CliError::data)?;
            let qs = resolve_labels(&map, &q)?;
            let mut results = Vec::new();
            for &q in &qs {
                let started = Instant::now();
                let result = tcp_query(&idx, &g, q).map_err(classify)?;
                let runtime_ms = elapsed_ms(started.elapsed());
                results.push(exact_result_json(&map, q, Method::Tcp, &result, runtime_ms));
            }
            emit(out.as_deref(), &json!({ "results": results }))?;
            Ok(EXIT_OK)
        }
    }
}

fn eval(args: EvalArgs) -> CliResult<i32> {
    let text = std::fs::read_to_string(&args.config).map_err(|e| {
        CliError::config(anyhow!(e).context(format!("reading {}", args.config.display())))
    })?;
    let mut config: ExperimentConfig = serde_json::from_str(&text).map_err(|e| {
        CliError::config(anyhow!(e).context(format!("parsing {}", args.config.display())))
    })?;
    if args.out.is_some() {
        config.out = args.out;
    }
    if let Some(format) = args.format {
        config.format = format;
    }

    let report = run_experiment(&config)?;
    match config.format {
        OutputFormat::Csv => {
            let csv = report.to_csv();
            let summary = serde_json::to_string_pretty(&report.summary).expect("summary is plain data");
            match &config.out {
                Some(path) => {
                    std::fs::write(path, &csv)
                        .with_context(|| format!("writing {}", path.display()))
                        .map_err(CliError::data)?;
                    println!("{summary}");
                }
                None => {
                    // keep stdout pipe-clean: rows there, summary on stderr
                    print!("{csv}");
                    eprintln!("{summary}");
                }
            }
        }
        OutputFormat::Json => {
            let doc = json!({ "rows": report.rows, "summary": report.summary });
            emit(config.out.as_deref(), &doc)?;
        }
    }
    if report.summary.failed > 0 {
        Ok(EXIT_PARTIAL)
    } else {
        Ok(EXIT_OK)
    }
}

fn gen(args: GenArgs) -> CliResult<i32> {
    let (g, planted) =
        cks_core::gen::generate_planted_truss(args.n, args.p, args.clique, args.attach, args.seed)
            .map_err(classify)?;
    let map = NodeIdMap::dense(g.node_count());
    std::fs::write(&args.out, g.to_edge_list(&map))
        .with_context(|| format!("writing {}", args.out.display()))
        .map_err(CliError::data)?;
    let doc = json!({
        "graph": args.out,
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "planted": labels_of(&map, &planted),
        "seed": args.seed,
    });
    emit(None, &doc)?;
    Ok(EXIT_OK)
}
