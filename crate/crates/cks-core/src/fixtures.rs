//! Deterministic graph builders shared by unit tests, integration tests,
//! and benches. Not part of the stable API.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::graph::{Graph, NodeId};

/// Complete graph K_n on dense ids 0..n.
pub fn complete(n: usize) -> Graph {
    let mut edges = Vec::new();
    for u in 0..n as NodeId {
        for v in (u + 1)..n as NodeId {
            edges.push((u, v));
        }
    }
    Graph::from_edges(n, edges).unwrap()
}

/// 15-node desk fixture: K6 on {0,2,3,4,5,6}, bridge node 1 tied to 0 and
/// to the eight satellites 7..14, which also attach to 0. Node 0 sits in
/// both the clique and the satellite fringe; node 1 only in the fringe.
pub fn bridged_clique() -> Graph {
    let mut edges = Vec::new();
    let k6 = [0u32, 2, 3, 4, 5, 6];
    for (i, &a) in k6.iter().enumerate() {
        for &b in &k6[i + 1..] {
            edges.push((a, b));
        }
    }
    edges.push((0, 1));
    for w in 7..15 {
        edges.push((0, w));
        edges.push((1, w));
    }
    Graph::from_edges(15, edges).unwrap()
}

/// Star around node 0 whose incident supports are [2,2,2,1,1]: a K3 on
/// {1,2,3} plus the pendant triangle edge (4,5), all tied to 0.
pub fn support_star() -> Graph {
    Graph::from_edges(
        6,
        vec![
            (0, 1),
            (0, 2),
            (0, 3),
            (0, 4),
            (0, 5),
            (1, 2),
            (1, 3),
            (2, 3),
            (4, 5),
        ],
    )
    .unwrap()
}

/// Erdős–Rényi G(n, p) with a seeded generator; node count fixed at n
/// even if some nodes end up isolated.
pub fn gnp(n: usize, p: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut edges = Vec::new();
    for u in 0..n as NodeId {
        for v in (u + 1)..n as NodeId {
            if rng.gen_bool(p) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, edges).unwrap()
}
