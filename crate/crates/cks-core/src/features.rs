//! Per-node cohesiveness features driving the walk variants: average
//! incident support, its skewness, the sigmoid-adjusted average, and
//! cheap upper bounds on node and edge trussness.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId, SupportMap};

/// Cohesiveness features of one node with degree ≥ 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeCohesionFeatures {
    /// Mean support over incident edges.
    pub average_support: f64,
    /// Fisher skewness (population moments) of incident supports.
    pub skewness: f64,
    /// Average support damped or boosted by the skewness sigmoid.
    pub adjusted_average: f64,
    /// Upper bound on the node's trussness.
    pub truss_bound: u32,
}

fn incident_supports(g: &Graph, supports: &SupportMap, u: NodeId) -> Vec<u32> {
    g.neighbors(u)
        .iter()
        .map(|&v| supports.get(g, u, v).unwrap())
        .collect()
}

/// Mean incident-edge support; errors on isolated nodes, whose features
/// are undefined.
pub fn average_support(g: &Graph, supports: &SupportMap, u: NodeId) -> Result<f64> {
    g.check_node(u)?;
    let deg = g.degree(u);
    if deg == 0 {
        return Err(Error::IsolatedNode(u));
    }
    let sum: u64 = incident_supports(g, supports, u).iter().map(|&s| s as u64).sum();
    Ok(sum as f64 / deg as f64)
}

/// Fisher's moment coefficient of skewness of the incident supports,
/// with population variance; 0 by convention when all supports coincide.
pub fn support_skewness(g: &Graph, supports: &SupportMap, u: NodeId) -> Result<f64> {
    g.check_node(u)?;
    let vals = incident_supports(g, supports, u);
    if vals.is_empty() {
        return Err(Error::IsolatedNode(u));
    }
    Ok(skewness_of(&vals))
}

fn skewness_of(vals: &[u32]) -> f64 {
    let n = vals.len() as f64;
    let mean = vals.iter().map(|&s| s as f64).sum::<f64>() / n;
    let var = vals
        .iter()
        .map(|&s| (s as f64 - mean).powi(2))
        .sum::<f64>()
        / n;
    if var == 0.0 {
        return 0.0;
    }
    let sigma = var.sqrt();
    vals.iter()
        .map(|&s| ((s as f64 - mean) / sigma).powi(3))
        .sum::<f64>()
        / n
}

/// A scaled by the skewness sigmoid: right-skewed support profiles
/// (a few strong edges among weak ones) shrink the average, left-skewed
/// ones boost it. `alpha` controls the amplitude; 0 disables the
/// adjustment entirely.
pub fn adjusted_average_support(average: f64, skewness: f64, alpha: f64) -> f64 {
    average * (1.0 + alpha * (1.0 / (1.0 + skewness.exp()) - 0.5))
}

/// Upper bound on trussness of `u`: the largest k such that at least
/// k−1 incident edges have support ≥ k−2 (an h-index scan over the
/// incident supports). Isolated nodes get 1, everything else ≥ 2.
pub fn node_truss_upper_bound(g: &Graph, supports: &SupportMap, u: NodeId) -> u32 {
    let mut vals = incident_supports(g, supports, u);
    if vals.is_empty() {
        return 1;
    }
    vals.sort_unstable_by(|a, b| b.cmp(a));
    let mut best = 2;
    for (i, &s) in vals.iter().enumerate() {
        // k = i + 2 needs i + 1 edges (indices 0..=i) with support ≥ i
        if s as usize >= i {
            best = (i + 2) as u32;
        }
    }
    best
}

/// Upper bound on trussness of an edge: capped by its own support and by
/// both endpoint bounds.
pub fn edge_truss_upper_bound(bound_u: u32, bound_v: u32, sup_uv: u32) -> u32 {
    (sup_uv + 2).min(bound_u).min(bound_v)
}

/// Bundles the features of one node; errors on isolated nodes.
pub fn node_features(
    g: &Graph,
    supports: &SupportMap,
    u: NodeId,
    alpha: f64,
) -> Result<NodeCohesionFeatures> {
    let average = average_support(g, supports, u)?;
    let skewness = support_skewness(g, supports, u)?;
    Ok(NodeCohesionFeatures {
        average_support: average,
        skewness,
        adjusted_average: adjusted_average_support(average, skewness, alpha),
        truss_bound: node_truss_upper_bound(g, supports, u),
    })
}

/// Features for every node; `None` where the degree is 0.
pub fn all_features(
    g: &Graph,
    supports: &SupportMap,
    alpha: f64,
) -> Vec<Option<NodeCohesionFeatures>> {
    (0..g.node_count() as NodeId)
        .map(|u| node_features(g, supports, u, alpha).ok())
        .collect()
}
