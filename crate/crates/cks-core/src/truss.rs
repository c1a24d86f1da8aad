//! Truss decomposition and the exact two-step key-member search:
//! find the most cohesive truss community containing the query, then the
//! most cohesive sub-truss inside it.

use crate::error::Result;
use crate::graph::{compute_supports, induced_subgraph, Graph, NodeId};

/// Per-edge trussness φ(e), aligned with the graph's canonical edge list.
///
/// φ(e) is the maximum k such that e belongs to the maximal k-truss; edges
/// contained in no triangle get φ = 2.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrussnessMap {
    values: Vec<u32>,
}

impl TrussnessMap {
    pub fn value(&self, idx: usize) -> u32 {
        self.values[idx]
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    pub fn get(&self, g: &Graph, u: NodeId, v: NodeId) -> Option<u32> {
        g.edge_index(u, v).map(|i| self.values[i])
    }

    /// Maximum trussness over all edges; 2 for edgeless graphs.
    pub fn max(&self) -> u32 {
        self.values.iter().copied().max().unwrap_or(2)
    }

    pub(crate) fn from_raw(values: Vec<u32>) -> Self {
        Self { values }
    }
}

/// Adjacency annotated with canonical edge indices, sorted by neighbor id.
fn adjacency_with_edge_ids(g: &Graph) -> Vec<Vec<(NodeId, usize)>> {
    let mut adj = vec![Vec::new(); g.node_count()];
    for (idx, &(u, v)) in g.edges().iter().enumerate() {
        adj[u as usize].push((v, idx));
        adj[v as usize].push((u, idx));
    }
    for list in &mut adj {
        list.sort_unstable();
    }
    adj
}

/// Calls `f(e_uw, e_vw)` for every triangle {u,v,w} whose companion edges
/// are both still alive.
fn for_each_live_triangle(
    adj: &[Vec<(NodeId, usize)>],
    alive: &[bool],
    u: NodeId,
    v: NodeId,
    mut f: impl FnMut(usize, usize),
) {
    let (a, b) = (&adj[u as usize], &adj[v as usize]);
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        match a[i].0.cmp(&b[j].0) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                let (e_uw, e_vw) = (a[i].1, b[j].1);
                if alive[e_uw] && alive[e_vw] {
                    f(e_uw, e_vw);
                }
                i += 1;
                j += 1;
            }
        }
    }
}

/// Bottom-up peeling decomposition. For k = 3, 4, … every edge whose
/// remaining support drops below k−2 is removed (destroying its triangles
/// and decrementing the companion edges); an edge removed in round k has
/// trussness k−1.
pub fn truss_decompose(g: &Graph) -> TrussnessMap {
    let m = g.edge_count();
    let mut sup: Vec<u32> = compute_supports(g).values().to_vec();
    let mut phi = vec![2u32; m];
    let mut alive = vec![true; m];
    let adj = adjacency_with_edge_ids(g);

    let mut queued = vec![false; m];
    let mut remaining = m;
    let mut k = 3u32;
    while remaining > 0 {
        let threshold = k - 2;
        let mut queue: Vec<usize> = (0..m)
            .filter(|&e| alive[e] && sup[e] < threshold)
            .collect();
        for &e in &queue {
            queued[e] = true;
        }
        while let Some(e) = queue.pop() {
            alive[e] = false;
            phi[e] = k - 1;
            remaining -= 1;
            let (u, v) = g.edges()[e];
            for_each_live_triangle(&adj, &alive, u, v, |e_uw, e_vw| {
                for c in [e_uw, e_vw] {
                    sup[c] -= 1;
                    if sup[c] < threshold && !queued[c] {
                        queued[c] = true;
                        queue.push(c);
                    }
                }
            });
        }
        k += 1;
    }
    TrussnessMap { values: phi }
}

/// Edge set of the maximal k-truss: iteratively deletes edges whose
/// support inside the survivor set is below k−2. Returns the alive mask.
fn maximal_k_truss(g: &Graph, base_sup: &[u32], adj: &[Vec<(NodeId, usize)>], k: u32) -> Vec<bool> {
    let m = g.edge_count();
    let threshold = k.saturating_sub(2);
    let mut sup = base_sup.to_vec();
    let mut alive = vec![true; m];
    let mut queued = vec![false; m];
    let mut queue: Vec<usize> = (0..m).filter(|&e| sup[e] < threshold).collect();
    for &e in &queue {
        queued[e] = true;
    }
    while let Some(e) = queue.pop() {
        alive[e] = false;
        let (u, v) = g.edges()[e];
        for_each_live_triangle(adj, &alive, u, v, |e_uw, e_vw| {
            for c in [e_uw, e_vw] {
                sup[c] -= 1;
                if sup[c] < threshold && !queued[c] {
                    queued[c] = true;
                    queue.push(c);
                }
            }
        });
    }
    alive
}

/// Search strategy for [`max_truss_containing`]. Both strategies return
/// identical results; top-down can stop early on high-trussness queries.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    BottomUp,
    TopDown,
}

/// Connected component of `q` in the subgraph of edges selected by `keep`.
fn component_of(g: &Graph, q: NodeId, keep: impl Fn(usize) -> bool) -> Vec<NodeId> {
    let mut seen = vec![false; g.node_count()];
    seen[q as usize] = true;
    let mut stack = vec![q];
    let mut nodes = vec![q];
    while let Some(u) = stack.pop() {
        for &v in g.neighbors(u) {
            if seen[v as usize] {
                continue;
            }
            let idx = g.edge_index(u, v).expect("adjacent nodes share an edge");
            if keep(idx) {
                seen[v as usize] = true;
                nodes.push(v);
                stack.push(v);
            }
        }
    }
    nodes.sort_unstable();
    nodes
}

/// Finds the maximum k such that `q` has an incident edge of trussness
/// ≥ k, together with the connected component of `q` in the ≥k-trussness
/// edge subgraph (the community T_k).
///
/// Queries with no incident edge, or none in any triangle, degenerate to
/// k = 2; the community is then `q`'s plain connected component (every
/// edge forms a 2-truss).
pub fn max_truss_containing(g: &Graph, q: NodeId, direction: Direction) -> Result<(u32, Vec<NodeId>)> {
    g.check_node(q)?;
    if g.degree(q) == 0 {
        return Ok((2, vec![q]));
    }
    match direction {
        Direction::BottomUp => {
            let tm = truss_decompose(g);
            let k = g
                .neighbors(q)
                .iter()
                .map(|&v| tm.get(g, q, v).unwrap())
                .max()
                .unwrap();
            let nodes = component_of(g, q, |idx| tm.value(idx) >= k);
            Ok((k, nodes))
        }
        Direction::TopDown => {
            let sup = compute_supports(g);
            let adj = adjacency_with_edge_ids(g);
            let bound = g
                .neighbors(q)
                .iter()
                .map(|&v| sup.get(g, q, v).unwrap())
                .max()
                .unwrap()
                + 2;
            for k in (3..=bound).rev() {
                let alive = maximal_k_truss(g, sup.values(), &adj, k);
                let attached = g
                    .neighbors(q)
                    .iter()
                    .any(|&v| alive[g.edge_index(q, v).unwrap()]);
                if attached {
                    return Ok((k, component_of(g, q, |idx| alive[idx])));
                }
            }
            Ok((2, component_of(g, q, |_| true)))
        }
    }
}

/// Result of the exact two-step search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct KeyMemberResult {
    /// Trussness level of the community containing the query.
    pub k: u32,
    /// Node set of the community T_k (sorted).
    pub t_k_nodes: Vec<NodeId>,
    /// Maximum trussness found inside T_k.
    pub k_hat: u32,
    /// Nodes incident to a trussness-k̂ edge inside T_k (sorted).
    pub members: Vec<NodeId>,
}

/// Exact key-member search: step 1 extracts T_k via
/// [`max_truss_containing`]; step 2 re-decomposes the induced graph of
/// T_k and keeps every node incident to a maximum-trussness edge. When
/// the k̂-truss splits into several components, the union of their node
/// sets is returned.
pub fn key_members_exact(g: &Graph, q: NodeId) -> Result<KeyMemberResult> {
    key_members(g, q, Direction::BottomUp)
}

/// [`key_members_exact`] with an explicit step-1 strategy; both
/// directions return identical results, differing only in work profile.
pub fn key_members(g: &Graph, q: NodeId, direction: Direction) -> Result<KeyMemberResult> {
    let (k, t_k_nodes) = max_truss_containing(g, q, direction)?;
    let (sub, parents) = induced_subgraph(g, &t_k_nodes)?;
    if sub.edge_count() == 0 {
        return Ok(KeyMemberResult {
            k,
            t_k_nodes: t_k_nodes.clone(),
            k_hat: 2,
            members: t_k_nodes,
        });
    }
    let tm = truss_decompose(&sub);
    let k_hat = tm.max();
    let mut members: Vec<NodeId> = Vec::new();
    let mut mark = vec![false; sub.node_count()];
    for (idx, &(u, v)) in sub.edges().iter().enumerate() {
        if tm.value(idx) == k_hat {
            for w in [u, v] {
                if !mark[w as usize] {
                    mark[w as usize] = true;
                    members.push(parents[w as usize]);
                }
            }
        }
    }
    members.sort_unstable();
    Ok(KeyMemberResult {
        k,
        t_k_nodes,
        k_hat,
        members,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{bridged_clique, complete};
    use crate::graph::parse_edge_list;

    #[test]
    fn triangle_and_k6_trussness() {
        let (tri, _) = parse_edge_list("0 1\n1 2\n2 0").unwrap();
        assert!(truss_decompose(&tri).values().iter().all(|&p| p == 3));

        let k6 = complete(6);
        let tm = truss_decompose(&k6);
        assert_eq!(tm.values().len(), 15);
        assert!(tm.values().iter().all(|&p| p == 6));
    }

    #[test]
    fn triangle_free_edges_get_trussness_two() {
        let (path, _) = parse_edge_list("0 1\n1 2\n2 3").unwrap();
        assert!(truss_decompose(&path).values().iter().all(|&p| p == 2));
    }

    #[test]
    fn bridged_clique_trussness_split() {
        let g = bridged_clique();
        let tm = truss_decompose(&g);
        let k6 = [0u32, 2, 3, 4, 5, 6];
        for (idx, &(u, v)) in g.edges().iter().enumerate() {
            let in_k6 = k6.contains(&u) && k6.contains(&v);
            assert_eq!(tm.value(idx), if in_k6 { 6 } else { 3 }, "edge ({u},{v})");
        }
    }

    #[test]
    fn k_truss_levels_are_nested_and_match_decomposition() {
        let g = bridged_clique();
        let sup = compute_supports(&g);
        let adj = adjacency_with_edge_ids(&g);
        let tm = truss_decompose(&g);
        for k in 3..=8 {
            let alive = maximal_k_truss(&g, sup.values(), &adj, k);
            for e in 0..g.edge_count() {
                assert_eq!(alive[e], tm.value(e) >= k, "k={k} edge {e}");
            }
        }
    }

    #[test]
    fn max_truss_on_k4() {
        let k4 = complete(4);
        for dir in [Direction::BottomUp, Direction::TopDown] {
            let (k, nodes) = max_truss_containing(&k4, 1, dir).unwrap();
            assert_eq!(k, 4);
            assert_eq!(nodes, vec![0, 1, 2, 3]);
        }
    }

    #[test]
    fn max_truss_on_the_bridged_clique() {
        let g = bridged_clique();
        for dir in [Direction::BottomUp, Direction::TopDown] {
            let (k, nodes) = max_truss_containing(&g, 1, dir).unwrap();
            assert_eq!((k, nodes.len()), (3, 15), "{dir:?}");
            let (k, nodes) = max_truss_containing(&g, 2, dir).unwrap();
            assert_eq!(k, 6, "{dir:?}");
            assert_eq!(nodes, vec![0, 2, 3, 4, 5, 6], "{dir:?}");
        }
    }

    #[test]
    fn degenerate_queries() {
        let (g, _) = parse_edge_list("0 1\n1 2\n2 3").unwrap();
        let with_isolated = Graph::from_edges(5, g.edges().iter().copied()).unwrap();
        for dir in [Direction::BottomUp, Direction::TopDown] {
            let (k, nodes) = max_truss_containing(&with_isolated, 4, dir).unwrap();
            assert_eq!((k, nodes), (2, vec![4]), "isolated node");
            let (k, nodes) = max_truss_containing(&g, 1, dir).unwrap();
            assert_eq!((k, nodes), (2, vec![0, 1, 2, 3]), "triangle-free path");
        }
    }

    #[test]
    fn key_members_on_the_bridged_clique_and_k4() {
        let g = bridged_clique();
        let res = key_members_exact(&g, 1).unwrap();
        assert_eq!(res.k, 3);
        assert_eq!(res.t_k_nodes.len(), 15);
        assert_eq!(res.k_hat, 6);
        assert_eq!(res.members, vec![0, 2, 3, 4, 5, 6]);

        let k4 = complete(4);
        let res = key_members_exact(&k4, 3).unwrap();
        assert_eq!((res.k, res.k_hat), (4, 4));
        assert_eq!(res.members, vec![0, 1, 2, 3]);
    }

    #[test]
    fn split_top_truss_returns_union_of_components() {
        // bridged clique plus a second K6 {15..20} hooked to node 1 through the
        // triangle {15,16,1}: connector edges land at trussness 3, so
        // T_3 spans everything and the 6-trussness edges form two
        // disconnected cliques.
        let base = bridged_clique();
        let mut edges: Vec<(NodeId, NodeId)> = base.edges().to_vec();
        for a in 15u32..21 {
            for b in (a + 1)..21 {
                edges.push((a, b));
            }
        }
        edges.push((1, 15));
        edges.push((1, 16));
        let g = Graph::from_edges(21, edges).unwrap();

        let res = key_members_exact(&g, 1).unwrap();
        assert_eq!(res.k, 3);
        assert_eq!(res.k_hat, 6);
        let expected: Vec<NodeId> = [0u32, 2, 3, 4, 5, 6]
            .into_iter()
            .chain(15..21)
            .collect();
        assert_eq!(res.members, expected);
    }

    #[test]
    fn members_have_high_internal_support() {
        // inside the k̂-truss edge subgraph every edge keeps support ≥ k̂−2
        let g = bridged_clique();
        let res = key_members_exact(&g, 1).unwrap();
        let (sub, _) = induced_subgraph(&g, &res.members).unwrap();
        let tm = truss_decompose(&sub);
        let keep: Vec<usize> = (0..sub.edge_count())
            .filter(|&e| tm.value(e) >= res.k_hat)
            .collect();
        for &e in &keep {
            let (u, v) = sub.edges()[e];
            let mut common = 0;
            for &w in sub.neighbors(u) {
                if sub.has_edge(v, w)
                    && keep.contains(&sub.edge_index(u, w).unwrap())
                    && keep.contains(&sub.edge_index(v, w).unwrap())
                {
                    common += 1;
                }
            }
            assert!(common >= res.k_hat - 2);
        }
    }
}
