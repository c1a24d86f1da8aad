//! Synthetic benchmark instances: a sparse random background with a
//! planted clique whose members are the known ground-truth key members.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::truss::truss_decompose;

/// How many reseeded attempts to make before giving up on a background
/// that accidentally out-trusses the planted clique.
const MAX_ATTEMPTS: u64 = 20;

/// Generates G(n, p) background noise plus a planted K_{clique_size} on
/// fresh nodes, attached to the background by `attach_edges` random
/// edges. Returns the graph and the planted node set, which is verified
/// to be exactly the maximal-trussness node set (regenerating with a
/// shifted seed if the background breaks that invariant).
pub fn generate_planted_truss(
    n_background: usize,
    p_background: f64,
    clique_size: usize,
    attach_edges: usize,
    seed: u64,
) -> Result<(Graph, Vec<NodeId>)> {
    if clique_size < 4 {
        return Err(Error::InvalidParameter(format!(
            "clique_size must be at least 4, got {clique_size}"
        )));
    }
    if !(0.0..=1.0).contains(&p_background) {
        return Err(Error::InvalidParameter(format!(
            "edge probability must lie in [0, 1], got {p_background}"
        )));
    }
    let planted: Vec<NodeId> =
        (n_background as NodeId..(n_background + clique_size) as NodeId).collect();
    for attempt in 0..MAX_ATTEMPTS {
        let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(attempt));
        let n = n_background + clique_size;
        let mut edges = Vec::new();
        for u in 0..n_background as NodeId {
            for v in (u + 1)..n_background as NodeId {
                if rng.gen_bool(p_background) {
                    edges.push((u, v));
                }
            }
        }
        for (i, &a) in planted.iter().enumerate() {
            for &b in &planted[i + 1..] {
                edges.push((a, b));
            }
        }
        if n_background > 0 {
            for _ in 0..attach_edges {
                let b = rng.gen_range(0..n_background) as NodeId;
                let c = planted[rng.gen_range(0..clique_size)];
                edges.push((b, c));
            }
        }
        let g = Graph::from_edges(n, edges)?;
        if planted_set_is_top_truss(&g, &planted, clique_size as u32) {
            return Ok((g, planted));
        }
    }
    Err(Error::DegenerateSample(format!(
        "background (n={n_background}, p={p_background}) keeps out-trussing the \
         planted {clique_size}-clique"
    )))
}

/// True when the maximal trussness equals the clique's and its node set
/// is exactly the planted one.
fn planted_set_is_top_truss(g: &Graph, planted: &[NodeId], clique_size: u32) -> bool {
    let tm = truss_decompose(g);
    if tm.max() != clique_size {
        return false;
    }
    let mut top: Vec<NodeId> = g
        .edges()
        .iter()
        .enumerate()
        .filter(|&(idx, _)| tm.value(idx) == clique_size)
        .flat_map(|(_, &(u, v))| [u, v])
        .collect();
    top.sort_unstable();
    top.dedup();
    top == planted
}
