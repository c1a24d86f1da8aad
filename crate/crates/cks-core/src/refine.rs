//! Expand-replace refinement of a ranked candidate set: score the set and
//! its one-hop fringe by neighbor count inside the old set, keep the best.

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};

/// One expand-replace sweep. Candidates are `s_old` plus its one-hop
/// neighbors; each is scored by how many of its neighbors lie in `s_old`,
/// and the top `|s_old|` survive. At equal score incumbents beat
/// newcomers (a newcomer must be strictly better to displace anyone),
/// then lower node ids win; the output is in ranking order.
pub fn refine_once(g: &Graph, s_old: &[NodeId]) -> Result<Vec<NodeId>> {
    if s_old.is_empty() {
        return Err(Error::InvalidParameter("candidate set is empty".into()));
    }
    let mut in_old = vec![false; g.node_count()];
    for &u in s_old {
        g.check_node(u)?;
        if in_old[u as usize] {
            return Err(Error::InvalidParameter(format!(
                "duplicate node {u} in candidate set"
            )));
        }
        in_old[u as usize] = true;
    }
    let mut candidates: Vec<NodeId> = s_old.to_vec();
    let mut seen = in_old.clone();
    for &u in s_old {
        for &v in g.neighbors(u) {
            if !seen[v as usize] {
                seen[v as usize] = true;
                candidates.push(v);
            }
        }
    }
    let mut scored: Vec<(usize, bool, NodeId)> = candidates
        .into_iter()
        .map(|u| {
            let score = g
                .neighbors(u)
                .iter()
                .filter(|&&v| in_old[v as usize])
                .count();
            (score, in_old[u as usize], u)
        })
        .collect();
    scored.sort_by(|a, b| b.0.cmp(&a.0).then(b.1.cmp(&a.1)).then(a.2.cmp(&b.2)));
    Ok(scored.into_iter().take(s_old.len()).map(|t| t.2).collect())
}

/// Applies [`refine_once`] up to `iters` times; 0 is the identity.
/// Stops as soon as a sweep leaves the membership unchanged, keeping the
/// already-established order instead of reshuffling a stable set.
pub fn refine(g: &Graph, s: &[NodeId], iters: u32) -> Result<Vec<NodeId>> {
    let mut current = s.to_vec();
    for _ in 0..iters {
        let next = refine_once(g, &current)?;
        let mut a = next.clone();
        let mut b = current.clone();
        a.sort_unstable();
        b.sort_unstable();
        if a == b {
            return Ok(current);
        }
        current = next;
    }
    Ok(current)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::complete;
    use crate::graph::Graph;

    /// K6 on 0..=5 plus pendant node 6 hanging off node 0.
    fn clique_with_pendant() -> Graph {
        let mut edges = Vec::new();
        for u in 0..6u32 {
            for v in (u + 1)..6 {
                edges.push((u, v));
            }
        }
        edges.push((0, 6));
        Graph::from_edges(7, edges).unwrap()
    }

    #[test]
    fn pendant_is_replaced_by_the_missing_clique_member() {
        let g = clique_with_pendant();
        let refined = refine_once(&g, &[0, 1, 2, 3, 4, 6]).unwrap();
        // scores: 0 → 5, newcomer 5 → 5, 1..4 → 4, pendant 6 → 1;
        // the tie at 5 keeps incumbent 0 ahead of newcomer 5
        assert_eq!(refined, vec![0, 5, 1, 2, 3, 4]);
        assert_eq!(refine(&g, &[0, 1, 2, 3, 4, 6], 2).unwrap(), refined);
    }

    #[test]
    fn cliques_are_fixed_points() {
        let k4 = complete(4);
        let s = vec![0, 1, 2, 3];
        assert_eq!(refine_once(&k4, &s).unwrap(), s);
        assert_eq!(refine(&k4, &s, 5).unwrap(), s);
    }

    #[test]
    fn zero_iterations_is_the_identity() {
        let g = clique_with_pendant();
        let s = vec![6, 3, 0];
        assert_eq!(refine(&g, &s, 0).unwrap(), s);
    }

    #[test]
    fn isolated_singleton_is_unchanged() {
        let g = Graph::from_edges(3, vec![(1, 2)]).unwrap();
        assert_eq!(refine_once(&g, &[0]).unwrap(), vec![0]);
    }

    #[test]
    fn neighbors_displace_a_lone_attached_candidate() {
        // a newcomer with a strictly better score replaces the seed
        let g = Graph::from_edges(3, vec![(0, 1), (1, 2)]).unwrap();
        assert_eq!(refine_once(&g, &[0]).unwrap(), vec![1]);
    }

    #[test]
    fn wrong_members_of_a_planted_clique_are_swapped_out() {
        // K8 on 0..=7, pendant chain 8-9 hanging off node 0
        let mut edges = Vec::new();
        for u in 0..8u32 {
            for v in (u + 1)..8 {
                edges.push((u, v));
            }
        }
        edges.push((0, 8));
        edges.push((8, 9));
        let g = Graph::from_edges(10, edges).unwrap();

        let start = vec![0, 1, 2, 3, 4, 5, 8, 9];
        let refined = refine(&g, &start, 2).unwrap();
        let mut sorted = refined.clone();
        sorted.sort_unstable();
        assert_eq!(sorted, vec![0, 1, 2, 3, 4, 5, 6, 7]);

        let min_internal = |s: &[NodeId]| {
            s.iter()
                .map(|&u| {
                    g.neighbors(u)
                        .iter()
                        .filter(|&&v| s.contains(&v))
                        .count()
                })
                .min()
                .unwrap()
        };
        assert!(min_internal(&refined) >= min_internal(&start));
    }

    #[test]
    fn invalid_candidate_sets_are_rejected() {
        let g = complete(4);
        assert!(refine_once(&g, &[]).is_err());
        assert!(refine_once(&g, &[0, 9]).is_err());
        assert!(refine_once(&g, &[0, 1, 0]).is_err());
    }
}
