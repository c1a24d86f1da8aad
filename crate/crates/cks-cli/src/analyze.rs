//! `analyze` subcommands: fit the Bayesian key-membership model over one
//! community, verify the three-state chain abstraction of the walk, and
//! correlate walk precision with structural distance measures.

use std::collections::{BTreeSet, VecDeque};
use std::path::PathBuf;

use anyhow::anyhow;
use clap::{Args, Subcommand};

use serde_json::json;

use cks_core::analysis::{fit_joint_density, key_member_posterior, node_feature_triple};
use cks_core::chain::{
    build_hypergraph_params, chain_eigen_check, chain_transition_matrix, pearson_correlation,
};
use cks_core::graph::{compute_supports, induced_subgraph};
use cks_core::metrics::precision_recall_f1;
use cks_core::truss::{key_members_exact, truss_decompose};
use cks_core::walk::cks_random_walk;
use cks_core::{Graph, MixtureModel, NodeId, Variant, WalkParams};

use crate::experiment::sample_node_labels;
use crate::output::{emit, labels_of, resolve_labels, sig12};
use crate::{classify, CliError, CliResult, EXIT_OK};

#[derive(Subcommand)]
pub enum AnalyzeAction {
    /// Fit the two-class feature model and report per-node posteriors
    Bayes(BayesArgs),
    /// Check the chain abstraction's spectrum around a query's community
    Chain(ChainArgs),
    /// Correlate walk precision with crossing trussness and path length
    Pcc(PccArgs),
}

#[derive(Args)]
pub struct BayesArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Query node whose community is analyzed (exactly one)
    #[arg(long, value_delimiter = ',', required = true)]
    pub q: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct ChainArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Comma-separated query nodes forming the Q state
    #[arg(long, value_delimiter = ',', required = true)]
    pub q: Vec<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct PccArgs {
    #[arg(long)]
    pub graph: PathBuf,
    /// Explicit query nodes (alternative to --random)
    #[arg(long, value_delimiter = ',')]
    pub q: Option<Vec<String>>,
    /// Sample this many distinct query nodes instead of listing them
    #[arg(long)]
    pub random: Option<usize>,
    /// Walk variant scoring each query: basic|avg|skew|tb
    #[arg(long, default_value = "tb", value_parser = crate::variant_value)]
    pub variant: Variant,
    #[arg(long, default_value_t = 2)]
    pub m: u32,
    #[arg(long, default_value_t = 150)]
    pub r: u32,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    /// Seed for --random sampling
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub fn dispatch(action: AnalyzeAction) -> CliResult<i32> {
    match action {
        AnalyzeAction::Bayes(args) => bayes(args),
        AnalyzeAction::Chain(args) => chain(args),
        AnalyzeAction::Pcc(args) => pcc(args),
    }
}

/// Fits the key/non-key joint densities over the community of one query
/// and reports every node's posterior key-membership probability.
///
/// The feature population is the community subgraph itself, so supports
/// and the derived features describe cohesion inside the community
/// rather than in the full graph.
fn bayes(args: BayesArgs) -> CliResult<i32> {
    let (g, map) = crate::load_graph(&args.graph)?;
    let qs = resolve_labels(&map, &args.q)?;
    let [q] = qs[..] else {
        return Err(CliError::config(anyhow!(
            "bayes analyzes a single community; pass exactly one query node"
        )));
    };
    let truth = key_members_exact(&g, q).map_err(classify)?;
    let (sub, parents) = induced_subgraph(&g, &truth.t_k_nodes).map_err(classify)?;
    let supports = compute_supports(&sub);
    let member_set: BTreeSet<NodeId> = truth.members.iter().copied().collect();

    let mut key_triples = Vec::new();
    let mut rest_triples = Vec::new();
    let mut per_node = Vec::new();
    for local in 0..sub.node_count() as NodeId {
        let triple = node_feature_triple(&sub, &supports, local).map_err(classify)?;
        let global = parents[local as usize];
        let is_key = member_set.contains(&global);
        if is_key {
            key_triples.push(triple);
        } else {
            rest_triples.push(triple);
        }
        per_node.push((global, is_key, triple));
    }
    let prior = key_triples.len() as f64 / per_node.len() as f64;
    let key_model = fit_joint_density(&key_triples)
        .map_err(|e| CliError::data(anyhow!(e).context("fitting the key-member class")))?;
    let rest_model = fit_joint_density(&rest_triples)
        .map_err(|e| CliError::data(anyhow!(e).context("fitting the non-key class")))?;
    let mix = MixtureModel::new(key_model, rest_model, prior).map_err(classify)?;

    let mut nodes = Vec::new();
    let (mut key_sum, mut rest_sum) = (0.0, 0.0);
    for &(global, is_key, ref triple) in &per_node {
        let post = key_member_posterior(triple, &mix);
        if is_key {
            key_sum += post.probability;
        } else {
            rest_sum += post.probability;
        }
        nodes.push(json!({
            "node": map.label(global).unwrap(),
            "key_member": is_key,
            "features": {
                "average_support": sig12(triple[0]),
                "skewness": sig12(triple[1]),
                "truss_upper_bound": triple[2],
            },
            "posterior": sig12(post.probability),
            "out_of_support": post.out_of_support,
        }));
    }
    let doc = json!({
        "query": map.label(q).unwrap(),
        "k": truth.k,
        "k_hat": truth.k_hat,
        "community_size": per_node.len(),
        "key_members": key_triples.len(),
        "prior": sig12(prior),
        "mean_posterior": {
            "key_members": sig12(key_sum / key_triples.len() as f64),
            "others": sig12(rest_sum / rest_triples.len() as f64),
        },
        "model": mix,
        "nodes": nodes,
    });
    emit(args.out.as_deref(), &doc)?;
    Ok(EXIT_OK)
}

/// Collapses the graph into the Q/X/K chain around the queries' exact
/// key members and reports the spectrum check.
fn chain(args: ChainArgs) -> CliResult<i32> {
    let (g, map) = crate::load_graph(&args.graph)?;
    let q_set: BTreeSet<NodeId> = resolve_labels(&map, &args.q)?.into_iter().collect();
    let mut member_set = BTreeSet::new();
    for &q in &q_set {
        member_set.extend(key_members_exact(&g, q).map_err(classify)?.members);
    }
    let k_nodes: Vec<NodeId> = member_set.difference(&q_set).copied().collect();
    if k_nodes.is_empty() {
        return Err(CliError::data(anyhow!(
            "no key members outside the query set; the chain needs a nonempty K state"
        )));
    }
    let q_nodes: Vec<NodeId> = q_set.into_iter().collect();
    let tm = truss_decompose(&g);
    let params = build_hypergraph_params(&g, &tm, &q_nodes, &k_nodes).map_err(classify)?;
    let check = chain_eigen_check(&params);
    let matrix = chain_transition_matrix(&params);
    let rows: Vec<Vec<f64>> = (0..3)
        .map(|i| (0..3).map(|j| sig12(matrix[(i, j)])).collect())
        .collect();
    let doc = json!({
        "query": labels_of(&map, &q_nodes),
        "key_members": labels_of(&map, &k_nodes),
        "gamma": params.gamma,
        "mu": params.mu,
        "beta": params.beta,
        "states": ["Q", "X", "K"],
        "transition_matrix": rows,
        "eigenvalues": check.eigenvalues.map(sig12),
        "residuals": check.residuals.map(sig12),
        "stationary": check.stationary.map(sig12),
    });
    emit(args.out.as_deref(), &doc)?;
    Ok(EXIT_OK)
}

/// Hops from `q` to the nearest member of `targets`, if any is reachable.
fn distance_to_nearest(g: &Graph, q: NodeId, targets: &BTreeSet<NodeId>) -> Option<u32> {
    let mut dist = vec![u32::MAX; g.node_count()];
    let mut queue = VecDeque::new();
    dist[q as usize] = 0;
    queue.push_back(q);
    while let Some(u) = queue.pop_front() {
        if targets.contains(&u) {
            return Some(dist[u as usize]);
        }
        for &v in g.neighbors(u) {
            if dist[v as usize] == u32::MAX {
                dist[v as usize] = dist[u as usize] + 1;
                queue.push_back(v);
            }
        }
    }
    None
}

/// Correlates per-query walk precision with (a) the largest trussness on
/// a direct query–member edge and (b) the hop distance to the nearest
/// member. The two series are collected independently: a query
/// contributes to (a) only when a direct crossing edge exists and to (b)
/// only when some member is reachable.
fn pcc(args: PccArgs) -> CliResult<i32> {
    let (g, map) = crate::load_graph(&args.graph)?;
    let labels = match (&args.q, args.random) {
        (Some(ids), None) => ids.clone(),
        (None, Some(count)) => sample_node_labels(&g, &map, count, args.seed)?,
        _ => {
            return Err(CliError::config(anyhow!(
                "pass exactly one of --q or --random"
            )))
        }
    };
    let qs = resolve_labels(&map, &labels)?;
    let tm = truss_decompose(&g);

    let mut params = WalkParams::new(args.variant, 1);
    params.m = args.m;
    params.r = args.r;
    params.alpha = args.alpha;
    params.validate().map_err(classify)?;

    let mut gamma_pairs: Vec<(f64, f64)> = Vec::new();
    let mut path_pairs: Vec<(f64, f64)> = Vec::new();
    let mut no_other_members = 0usize;
    let mut no_crossing_edge = 0usize;
    let mut unreachable = 0usize;
    for &q in &qs {
        let truth = key_members_exact(&g, q).map_err(classify)?;
        let others: BTreeSet<NodeId> =
            truth.members.iter().copied().filter(|&u| u != q).collect();
        if others.is_empty() {
            no_other_members += 1;
            continue;
        }
        params.n = truth.members.len();
        let walked = cks_random_walk(&g, &[q], &params).map_err(classify)?;
        let (precision, _, _) =
            precision_recall_f1(&walked.nodes(), &truth.members).map_err(classify)?;

        let gamma = others
            .iter()
            .filter_map(|&v| tm.get(&g, q, v))
            .max();
        match gamma {
            Some(phi) => gamma_pairs.push((phi as f64, precision)),
            None => no_crossing_edge += 1,
        }
        match distance_to_nearest(&g, q, &others) {
            // path length counts intermediate hops, so a direct edge is 0
            Some(d) => path_pairs.push(((d - 1) as f64, precision)),
            None => unreachable += 1,
        }
    }

    let correlate = |pairs: &[(f64, f64)], what: &str| -> CliResult<serde_json::Value> {
        if pairs.len() < 3 {
            return Err(CliError::data(anyhow!(
                "{what} needs at least 3 usable queries, got {}",
                pairs.len()
            )));
        }
        let (xs, ys): (Vec<f64>, Vec<f64>) = pairs.iter().copied().unzip();
        let c = pearson_correlation(&xs, &ys).map_err(classify)?;
        Ok(json!({
            "pairs": pairs.len(),
            "r": sig12(c.r),
            "t": sig12(c.t),
            "p_value": sig12(c.p_value),
        }))
    };
    let gamma_corr = correlate(&gamma_pairs, "the crossing-trussness series")?;
    let path_corr = correlate(&path_pairs, "the path-length series")?;

    let doc = json!({
        "variant": args.variant.token(),
        "m": args.m,
        "r": args.r,
        "alpha": args.alpha,
        "seed": args.seed,
        "queries": qs.len(),
        "gamma_vs_precision": gamma_corr,
        "path_length_vs_precision": path_corr,
        "skipped": {
            "no_other_members": no_other_members,
            "no_crossing_edge": no_crossing_edge,
            "unreachable": unreachable,
        },
    });
    emit(args.out.as_deref(), &doc)?;
    Ok(EXIT_OK)
}
