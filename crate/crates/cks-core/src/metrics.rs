//! Result-quality metrics: set overlap scores and the structural
//! diameter/density measures reported for member sets.

use std::collections::BTreeSet;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// Precision, recall, and F1 of `result` against a nonempty `truth`.
/// An empty result scores 0 across the board.
pub fn precision_recall_f1(result: &[NodeId], truth: &[NodeId]) -> Result<(f64, f64, f64)> {
    let truth: BTreeSet<NodeId> = truth.iter().copied().collect();
    if truth.is_empty() {
        return Err(Error::InvalidParameter("ground truth set is empty".into()));
    }
    let result: BTreeSet<NodeId> = result.iter().copied().collect();
    let hits = result.intersection(&truth).count() as f64;
    let precision = if result.is_empty() {
        0.0
    } else {
        hits / result.len() as f64
    };
    let recall = hits / truth.len() as f64;
    let f1 = if precision + recall == 0.0 {
        0.0
    } else if precision == recall {
        // harmonic mean of equal values, kept exact
        precision
    } else {
        2.0 * precision * recall / (precision + recall)
    };
    Ok((precision, recall, f1))
}

/// Hop diameter of the largest connected component, found by all-pairs
/// BFS; the flag reports whether the graph was disconnected. Intended
/// for small member-set subgraphs.
pub fn diameter(sub: &Graph) -> Result<(u32, bool)> {
    let n = sub.node_count();
    if n == 0 {
        return Err(Error::InvalidParameter(
            "diameter of an empty node set".into(),
        ));
    }
    let mut comp = vec![usize::MAX; n];
    let mut comp_sizes = Vec::new();
    for s in 0..n {
        if comp[s] != usize::MAX {
            continue;
        }
        let id = comp_sizes.len();
        let mut size = 0;
        let mut stack = vec![s as NodeId];
        comp[s] = id;
        while let Some(u) = stack.pop() {
            size += 1;
            for &v in sub.neighbors(u) {
                if comp[v as usize] == usize::MAX {
                    comp[v as usize] = id;
                    stack.push(v);
                }
            }
        }
        comp_sizes.push(size);
    }
    let largest = comp_sizes
        .iter()
        .enumerate()
        .max_by_key(|&(id, &size)| (size, std::cmp::Reverse(id)))
        .map(|(id, _)| id)
        .unwrap();
    let mut diam = 0;
    for s in 0..n {
        if comp[s] != largest {
            continue;
        }
        // BFS eccentricity of s
        let mut dist = vec![u32::MAX; n];
        dist[s] = 0;
        let mut frontier = std::collections::VecDeque::from([s as NodeId]);
        while let Some(u) = frontier.pop_front() {
            for &v in sub.neighbors(u) {
                if dist[v as usize] == u32::MAX {
                    dist[v as usize] = dist[u as usize] + 1;
                    diam = diam.max(dist[v as usize]);
                    frontier.push_back(v);
                }
            }
        }
    }
    Ok((diam, comp_sizes.len() > 1))
}

/// Edges-per-node density |E|/|V|.
pub fn density(sub: &Graph) -> Result<f64> {
    if sub.node_count() == 0 {
        return Err(Error::InvalidParameter(
            "density of an empty node set".into(),
        ));
    }
    Ok(sub.edge_count() as f64 / sub.node_count() as f64)
}
