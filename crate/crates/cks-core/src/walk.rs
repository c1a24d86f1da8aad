//! Random-walk ranking of community members: cohesiveness-weighted
//! transition matrices over a hop-bounded subgraph, power iteration from
//! the query node, and top-n extraction.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::features::{all_features, edge_truss_upper_bound, node_truss_upper_bound};
use crate::graph::{compute_supports, m_bounded_subgraph, Graph, NodeId, SupportMap};

/// Edge-weighting scheme for the transition matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Variant {
    /// Raw edge support.
    #[serde(rename = "basic")]
    Basic,
    /// Support scaled by the target's average support.
    #[serde(rename = "avg")]
    AvgSupport,
    /// Support scaled by the target's skew-adjusted average support.
    #[serde(rename = "skew")]
    Skew,
    /// Edge trussness upper bound scaled by the target's skew-adjusted
    /// average support.
    #[serde(rename = "tb")]
    TrussBound,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Basic,
        Variant::AvgSupport,
        Variant::Skew,
        Variant::TrussBound,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Variant::Basic => "basic",
            Variant::AvgSupport => "avg",
            Variant::Skew => "skew",
            Variant::TrussBound => "tb",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.token())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "basic" => Ok(Variant::Basic),
            "avg" => Ok(Variant::AvgSupport),
            "skew" => Ok(Variant::Skew),
            "tb" => Ok(Variant::TrussBound),
            other => Err(Error::InvalidParameter(format!(
                "unknown variant {other:?}, expected basic|avg|skew|tb"
            ))),
        }
    }
}

/// Walk configuration; defaults mirror the evaluation setup
/// (2-hop subgraph, 150 iterations, unit skew scale).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WalkParams {
    /// Hop bound for the query-centered subgraph.
    pub m: u32,
    /// Power-iteration count.
    pub r: u32,
    /// Skew-adjustment amplitude in [0, 2]; 0 disables the adjustment.
    pub alpha: f64,
    /// Result size.
    pub n: usize,
    pub variant: Variant,
    /// Post-walk refinement sweeps (applied by callers, not the walk).
    pub refine_iters: u32,
    /// Seed for choosing the start node of multi-node queries.
    pub seed: u64,
}

impl WalkParams {
    pub fn new(variant: Variant, n: usize) -> Self {
        Self {
            m: 2,
            r: 150,
            alpha: 1.0,
            n,
            variant,
            refine_iters: 0,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.r == 0 {
            return Err(Error::InvalidParameter("r must be at least 1".into()));
        }
        if self.n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        if !(0.0..=2.0).contains(&self.alpha) {
            return Err(Error::InvalidParameter(format!(
                "alpha must lie in [0, 2], got {}",
                self.alpha
            )));
        }
        Ok(())
    }
}

/// Row-stochastic sparse matrix over the bounded subgraph's dense ids.
#[derive(Debug, Clone, PartialEq)]
pub struct TransitionMatrix {
    row_offsets: Vec<usize>,
    cols: Vec<NodeId>,
    probs: Vec<f64>,
    variant: Variant,
    q_row: NodeId,
}

impl TransitionMatrix {
    pub fn size(&self) -> usize {
        self.row_offsets.len() - 1
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn query_row(&self) -> NodeId {
        self.q_row
    }

    /// Entries of row `i` as (column, probability) pairs, columns ascending.
    pub fn row(&self, i: NodeId) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        let span = self.row_offsets[i as usize]..self.row_offsets[i as usize + 1];
        self.cols[span.clone()]
            .iter()
            .copied()
            .zip(self.probs[span].iter().copied())
    }

    pub fn prob(&self, i: NodeId, j: NodeId) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, p)| p)
    }

    #[cfg(test)]
    pub(crate) fn from_dense(rows: &[Vec<f64>], q_row: NodeId) -> Self {
        let mut m = TransitionMatrix {
            row_offsets: vec![0],
            cols: Vec::new(),
            probs: Vec::new(),
            variant: Variant::Basic,
            q_row,
        };
        for row in rows {
            for (j, &p) in row.iter().enumerate() {
                if p != 0.0 {
                    m.cols.push(j as NodeId);
                    m.probs.push(p);
                }
            }
            m.row_offsets.push(m.cols.len());
        }
        m
    }
}

/// Builds the variant-weighted matrix over `gq`. Weight of the step
/// i → j is an edge factor (support, or its trussness bound) times a
/// target factor (1, A(j), or A*(j)); rows are then normalized, so any
/// common per-row factor cancels. Rows with no positive weight fall back
/// to uniform-over-neighbors, isolated rows to an absorbing self-loop,
/// and row `q` is rescaled to make room for a 0.001 diagonal so the walk
/// cannot be periodic.
pub fn build_transition_matrix(
    gq: &Graph,
    supports: &SupportMap,
    q: NodeId,
    variant: Variant,
    alpha: f64,
) -> Result<TransitionMatrix> {
    gq.check_node(q)?;
    let n = gq.node_count();
    let target_factor: Vec<f64> = match variant {
        Variant::Basic => vec![1.0; n],
        Variant::AvgSupport => all_features(gq, supports, alpha)
            .iter()
            .map(|f| f.map_or(0.0, |f| f.average_support))
            .collect(),
        Variant::Skew | Variant::TrussBound => all_features(gq, supports, alpha)
            .iter()
            .map(|f| f.map_or(0.0, |f| f.adjusted_average))
            .collect(),
    };
    let edge_factor: Vec<f64> = match variant {
        Variant::TrussBound => {
            let bounds: Vec<u32> = (0..n as NodeId)
                .map(|u| node_truss_upper_bound(gq, supports, u))
                .collect();
            gq.edges()
                .iter()
                .enumerate()
                .map(|(idx, &(u, v))| {
                    edge_truss_upper_bound(
                        bounds[u as usize],
                        bounds[v as usize],
                        supports.value(idx),
                    ) as f64
                })
                .collect()
        }
        _ => supports.values().iter().map(|&s| s as f64).collect(),
    };

    let mut row_offsets = vec![0];
    let mut cols = Vec::new();
    let mut probs = Vec::new();
    for i in 0..n as NodeId {
        let nbrs = gq.neighbors(i);
        let row_start = cols.len();
        if nbrs.is_empty() {
            cols.push(i);
            probs.push(1.0);
        } else {
            let weights: Vec<f64> = nbrs
                .iter()
                .map(|&j| {
                    edge_factor[gq.edge_index(i, j).unwrap()] * target_factor[j as usize]
                })
                .collect();
            let total: f64 = weights.iter().sum();
            if total > 0.0 {
                for (&j, &w) in nbrs.iter().zip(&weights) {
                    if w > 0.0 {
                        cols.push(j);
                        probs.push(w / total);
                    }
                }
            } else {
                let uniform = 1.0 / nbrs.len() as f64;
                for &j in nbrs {
                    cols.push(j);
                    probs.push(uniform);
                }
            }
        }
        if i == q {
            for p in &mut probs[row_start..] {
                *p *= 1.0 - 0.001;
            }
            let row_cols = &cols[row_start..];
            match row_cols.binary_search(&q) {
                Ok(pos) => probs[row_start + pos] += 0.001,
                Err(pos) => {
                    cols.insert(row_start + pos, q);
                    probs.insert(row_start + pos, 0.001);
                }
            }
        }
        row_offsets.push(cols.len());
    }
    Ok(TransitionMatrix {
        row_offsets,
        cols,
        probs,
        variant,
        q_row: q,
    })
}

/// Distribution after a fixed number of iterations, with per-step
/// distance traces for convergence diagnostics.
#[derive(Debug, Clone)]
pub struct StationaryDistribution {
    pub probabilities: Vec<f64>,
    pub iterations: u32,
    /// ‖π^(t) − π^(t−1)‖₁ per step.
    pub l1_trace: Vec<f64>,
    /// ‖π^(t) − π^(t−1)‖₂ per step.
    pub l2_trace: Vec<f64>,
}

/// Left-multiplies the indicator at `start` through `p` exactly `r`
/// times.
pub fn power_iterate(p: &TransitionMatrix, start: NodeId, r: u32) -> StationaryDistribution {
    let n = p.size();
    let mut pi = vec![0.0; n];
    pi[start as usize] = 1.0;
    let mut l1_trace = Vec::with_capacity(r as usize);
    let mut l2_trace = Vec::with_capacity(r as usize);
    for _ in 0..r {
        let mut next = vec![0.0; n];
        for i in 0..n {
            let mass = pi[i];
            if mass == 0.0 {
                continue;
            }
            for (j, pij) in p.row(i as NodeId) {
                next[j as usize] += mass * pij;
            }
        }
        let l1: f64 = next.iter().zip(&pi).map(|(a, b)| (a - b).abs()).sum();
        let l2: f64 = next
            .iter()
            .zip(&pi)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        l1_trace.push(l1);
        l2_trace.push(l2);
        pi = next;
    }
    StationaryDistribution {
        probabilities: pi,
        iterations: r,
        l1_trace,
        l2_trace,
    }
}

/// Top `n` nodes by probability descending, ties by id ascending.
pub fn top_n(probabilities: &[f64], n: usize) -> Vec<(NodeId, f64)> {
    let mut order: Vec<NodeId> = (0..probabilities.len() as NodeId).collect();
    order.sort_by(|&a, &b| {
        probabilities[b as usize]
            .total_cmp(&probabilities[a as usize])
            .then(a.cmp(&b))
    });
    order
        .into_iter()
        .take(n)
        .map(|u| (u, probabilities[u as usize]))
        .collect()
}

/// Ranked walk output, in the parent graph's node ids.
#[derive(Debug, Clone)]
pub struct QueryResult {
    /// Query node the walk actually started from.
    pub start: NodeId,
    /// (node, probability), best first.
    pub ranked: Vec<(NodeId, f64)>,
    /// Set when the bounded subgraph had fewer than `n` nodes.
    pub truncated: bool,
    pub subgraph_nodes: usize,
}

impl QueryResult {
    pub fn nodes(&self) -> Vec<NodeId> {
        self.ranked.iter().map(|&(u, _)| u).collect()
    }
}

/// End-to-end approximate key-member search: bound the graph around the
/// query set, recompute supports there, build the variant matrix, walk,
/// and rank. Multi-node queries start from a seed-chosen member.
pub fn cks_random_walk(g: &Graph, queries: &[NodeId], params: &WalkParams) -> Result<QueryResult> {
    params.validate()?;
    if queries.is_empty() {
        return Err(Error::InvalidParameter("query set is empty".into()));
    }
    for &q in queries {
        g.check_node(q)?;
    }
    let mut qs: Vec<NodeId> = queries.to_vec();
    qs.sort_unstable();
    qs.dedup();
    let start = if qs.len() == 1 {
        qs[0]
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        qs[rng.gen_range(0..qs.len())]
    };

    let supports = compute_supports(g);
    let (gq, parents) = m_bounded_subgraph(g, &supports, &qs, params.m as usize)?;
    let sub_supports = compute_supports(&gq);
    let local_start = parents.binary_search(&start).unwrap() as NodeId;
    let matrix = build_transition_matrix(&gq, &sub_supports, local_start, params.variant, params.alpha)?;
    let dist = power_iterate(&matrix, local_start, params.r);

    let truncated = params.n > gq.node_count();
    let take = params.n.min(gq.node_count());
    let ranked = top_n(&dist.probabilities, take)
        .into_iter()
        .map(|(local, p)| (parents[local as usize], p))
        .collect();
    Ok(QueryResult {
        start,
        ranked,
        truncated,
        subgraph_nodes: gq.node_count(),
    })
}
