//! Truss-community index: per-node maximum spanning forests over ego
//! networks weighted by edge trussness. Queries walk the forests instead
//! of re-peeling the graph.

use std::collections::HashMap;
use std::path::Path;

use crate::error::{Error, Result};
use crate::graph::{Graph, NodeId};
use crate::truss::{truss_decompose, KeyMemberResult, TrussnessMap};

/// Index header magic + format version; bump on layout changes.
const FORMAT_TAG: &str = "tcp-index v1";

/// Per-node maximum spanning forests plus the global trussness map.
///
/// The forest of node `u` spans the ego network induced on N(u), with
/// every ego edge weighted by its trussness in the full graph. Ties are
/// broken by canonical edge order, so index bytes are reproducible.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TcpIndex {
    trussness: TrussnessMap,
    forests: Vec<Vec<(NodeId, NodeId, u32)>>,
    node_count: usize,
    edge_count: usize,
}

struct Dsu {
    parent: Vec<usize>,
}

impl Dsu {
    fn new(n: usize) -> Self {
        Self {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, x: usize) -> usize {
        let mut root = x;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = x;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        self.parent[ra] = rb;
        true
    }
}

/// Builds the index: one truss decomposition, then a maximum-weight
/// spanning forest per ego network (Kruskal, weight descending, ties by
/// canonical edge ascending).
pub fn build_tcp_index(g: &Graph) -> TcpIndex {
    let trussness = truss_decompose(g);
    let mut forests = Vec::with_capacity(g.node_count());
    for u in 0..g.node_count() as NodeId {
        let nbrs = g.neighbors(u);
        let mut ego: Vec<(u32, NodeId, NodeId)> = Vec::new();
        for (i, &v) in nbrs.iter().enumerate() {
            let rest = &nbrs[i + 1..];
            let nv = g.neighbors(v);
            let (mut x, mut y) = (0, 0);
            while x < rest.len() && y < nv.len() {
                match rest[x].cmp(&nv[y]) {
                    std::cmp::Ordering::Less => x += 1,
                    std::cmp::Ordering::Greater => y += 1,
                    std::cmp::Ordering::Equal => {
                        let w = rest[x];
                        ego.push((trussness.get(g, v, w).unwrap(), v, w));
                        x += 1;
                        y += 1;
                    }
                }
            }
        }
        ego.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
        let mut dsu = Dsu::new(nbrs.len());
        let mut forest = Vec::new();
        for (w, a, b) in ego {
            let ia = nbrs.binary_search(&a).unwrap();
            let ib = nbrs.binary_search(&b).unwrap();
            if dsu.union(ia, ib) {
                forest.push((a, b, w));
            }
        }
        forest.sort_unstable();
        forests.push(forest);
    }
    TcpIndex {
        trussness,
        forests,
        node_count: g.node_count(),
        edge_count: g.edge_count(),
    }
}

impl TcpIndex {
    pub fn trussness(&self) -> &TrussnessMap {
        &self.trussness
    }

    /// Spanning forest of `u`'s ego network as `(a, b, weight)` triples.
    pub fn forest(&self, u: NodeId) -> &[(NodeId, NodeId, u32)] {
        &self.forests[u as usize]
    }

    /// Checks that the index was built for a graph of this shape.
    pub fn validate_for(&self, g: &Graph) -> Result<()> {
        if self.node_count != g.node_count() || self.edge_count != g.edge_count() {
            return Err(Error::IndexFormat(format!(
                "index covers {} nodes / {} edges, graph has {} / {}",
                self.node_count,
                self.edge_count,
                g.node_count(),
                g.edge_count()
            )));
        }
        Ok(())
    }

    /// Serializes to the versioned structured-text format.
    pub fn to_text(&self, g: &Graph) -> String {
        use std::fmt::Write;
        let mut out = String::new();
        let _ = writeln!(out, "{FORMAT_TAG}");
        let _ = writeln!(out, "nodes {}", self.node_count);
        let _ = writeln!(out, "edges {}", self.edge_count);
        let _ = writeln!(out, "trussness");
        for (idx, &(u, v)) in g.edges().iter().enumerate() {
            let _ = writeln!(out, "{u} {v} {}", self.trussness.value(idx));
        }
        let _ = writeln!(out, "forests");
        for (u, forest) in self.forests.iter().enumerate() {
            let _ = writeln!(out, "forest {u} {}", forest.len());
            for &(a, b, w) in forest {
                let _ = writeln!(out, "{a} {b} {w}");
            }
        }
        out
    }

    pub fn save(&self, g: &Graph, path: impl AsRef<Path>) -> Result<()> {
        std::fs::write(path, self.to_text(g))?;
        Ok(())
    }

    /// Parses the text format, validating the header and every edge key
    /// against `g`.
    pub fn from_text(text: &str, g: &Graph) -> Result<Self> {
        let mut lines = text.lines().enumerate();
        let mut next = |expect: &str| -> Result<(usize, String)> {
            lines
                .next()
                .map(|(i, l)| (i + 1, l.to_string()))
                .ok_or_else(|| Error::IndexFormat(format!("truncated file, expected {expect}")))
        };
        let (_, tag) = next("header")?;
        if tag != FORMAT_TAG {
            return Err(Error::IndexFormat(format!(
                "unsupported header {tag:?}, expected {FORMAT_TAG:?}"
            )));
        }
        let parse_count = |line: &str, lineno: usize, key: &str| -> Result<usize> {
            let rest = line.strip_prefix(key).and_then(|r| r.strip_prefix(' '));
            rest.and_then(|r| r.trim().parse().ok()).ok_or(Error::Parse {
                line: lineno,
                msg: format!("expected {key:?} <count>"),
            })
        };
        let (ln, line) = next("node count")?;
        let node_count = parse_count(&line, ln, "nodes")?;
        let (ln, line) = next("edge count")?;
        let edge_count = parse_count(&line, ln, "edges")?;
        if node_count != g.node_count() || edge_count != g.edge_count() {
            return Err(Error::IndexFormat(format!(
                "header says {node_count} nodes / {edge_count} edges, graph has {} / {}",
                g.node_count(),
                g.edge_count()
            )));
        }
        let (ln, line) = next("trussness section")?;
        if line != "trussness" {
            return Err(Error::Parse {
                line: ln,
                msg: "expected \"trussness\"".into(),
            });
        }
        let mut phi = Vec::with_capacity(edge_count);
        for idx in 0..edge_count {
            let (ln, line) = next("trussness entry")?;
            let mut tok = line.split_whitespace();
            let parsed: Option<(NodeId, NodeId, u32)> = (|| {
                let u = tok.next()?.parse().ok()?;
                let v = tok.next()?.parse().ok()?;
                let w = tok.next()?.parse().ok()?;
                tok.next().is_none().then_some((u, v, w))
            })();
            let (u, v, w) = parsed.ok_or(Error::Parse {
                line: ln,
                msg: "expected \"u v trussness\"".into(),
            })?;
            if g.edges()[idx] != (u, v) {
                return Err(Error::IndexFormat(format!(
                    "edge {idx} is ({u},{v}) in the file but {:?} in the graph",
                    g.edges()[idx]
                )));
            }
            phi.push(w);
        }
        let trussness = TrussnessMap::from_values(g, phi)?;
        let (ln, line) = next("forests section")?;
        if line != "forests" {
            return Err(Error::Parse {
                line: ln,
                msg: "expected \"forests\"".into(),
            });
        }
        let mut forests = Vec::with_capacity(node_count);
        for u in 0..node_count {
            let (ln, line) = next("forest header")?;
            let rest = line
                .strip_prefix("forest ")
                .map(|r| r.split_whitespace().collect::<Vec<_>>());
            let count = match rest.as_deref() {
                Some([node, count]) if node.parse() == Ok(u) => {
                    count.parse::<usize>().map_err(|_| Error::Parse {
                        line: ln,
                        msg: "bad forest edge count".into(),
                    })?
                }
                _ => {
                    return Err(Error::Parse {
                        line: ln,
                        msg: format!("expected \"forest {u} <count>\""),
                    })
                }
            };
            let mut forest = Vec::with_capacity(count);
            for _ in 0..count {
                let (ln, line) = next("forest edge")?;
                let mut tok = line.split_whitespace();
                let parsed: Option<(NodeId, NodeId, u32)> = (|| {
                    let a = tok.next()?.parse().ok()?;
                    let b = tok.next()?.parse().ok()?;
                    let w = tok.next()?.parse().ok()?;
                    tok.next().is_none().then_some((a, b, w))
                })();
                forest.push(parsed.ok_or(Error::Parse {
                    line: ln,
                    msg: "expected \"a b weight\"".into(),
                })?);
            }
            forests.push(forest);
        }
        Ok(Self {
            trussness,
            forests,
            node_count,
            edge_count,
        })
    }

    pub fn load(path: impl AsRef<Path>, g: &Graph) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_text(&text, g)
    }
}

impl TrussnessMap {
    /// Rebuilds a map from raw values; length must match the edge count.
    pub fn from_values(g: &Graph, values: Vec<u32>) -> Result<Self> {
        if values.len() != g.edge_count() {
            return Err(Error::InvalidParameter(format!(
                "trussness vector length {} != edge count {}",
                values.len(),
                g.edge_count()
            )));
        }
        Ok(Self::from_raw(values))
    }
}

/// Grows the node set reachable from `seeds` by repeatedly absorbing,
/// for every forest adjacent to the set, the weight-≥`level` forest
/// components that touch the set. Forest edges are real graph edges, so
/// everything absorbed stays inside the ≥level trussness subgraph.
fn forest_closure(idx: &TcpIndex, g: &Graph, seeds: &[NodeId], level: u32) -> Vec<NodeId> {
    let n = g.node_count();
    let mut in_set = vec![false; n];
    for &s in seeds {
        in_set[s as usize] = true;
    }
    loop {
        let mut scan = vec![false; n];
        for u in 0..n {
            if in_set[u] {
                scan[u] = true;
                for &v in g.neighbors(u as NodeId) {
                    scan[v as usize] = true;
                }
            }
        }
        let mut changed = false;
        for w in 0..n {
            if !scan[w] {
                continue;
            }
            let strong: Vec<(NodeId, NodeId)> = idx.forests[w]
                .iter()
                .filter(|&&(_, _, wt)| wt >= level)
                .map(|&(a, b, _)| (a, b))
                .collect();
            if strong.is_empty() {
                continue;
            }
            let mut adj: HashMap<NodeId, Vec<NodeId>> = HashMap::new();
            for &(a, b) in &strong {
                adj.entry(a).or_default().push(b);
                adj.entry(b).or_default().push(a);
            }
            let mut visited: HashMap<NodeId, bool> = adj.keys().map(|&k| (k, false)).collect();
            for &start in adj.keys() {
                if visited[&start] {
                    continue;
                }
                let mut comp = vec![start];
                visited.insert(start, true);
                let mut stack = vec![start];
                while let Some(x) = stack.pop() {
                    for &y in &adj[&x] {
                        if !visited[&y] {
                            visited.insert(y, true);
                            comp.push(y);
                            stack.push(y);
                        }
                    }
                }
                if comp.iter().any(|&x| in_set[x as usize])
                    && comp.iter().any(|&x| !in_set[x as usize])
                {
                    for &x in &comp {
                        if !in_set[x as usize] {
                            in_set[x as usize] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    let mut nodes: Vec<NodeId> = (0..n as NodeId).filter(|&u| in_set[u as usize]).collect();
    nodes.sort_unstable();
    nodes
}

/// Plain connected component of `q` (used below trussness 3, where the
/// forests carry no information: every edge alone is a 2-truss).
fn plain_component(g: &Graph, q: NodeId) -> Vec<NodeId> {
    let mut seen = vec![false; g.node_count()];
    seen[q as usize] = true;
    let mut stack = vec![q];
    let mut nodes = vec![q];
    while let Some(u) = stack.pop() {
        for &v in g.neighbors(u) {
            if !seen[v as usize] {
                seen[v as usize] = true;
                nodes.push(v);
                stack.push(v);
            }
        }
    }
    nodes.sort_unstable();
    nodes
}

/// Index-based key-member search; returns the same result as
/// [`crate::truss::key_members_exact`].
pub fn tcp_query(idx: &TcpIndex, g: &Graph, q: NodeId) -> Result<KeyMemberResult> {
    g.check_node(q)?;
    idx.validate_for(g)?;
    if g.degree(q) == 0 {
        return Ok(KeyMemberResult {
            k: 2,
            t_k_nodes: vec![q],
            k_hat: 2,
            members: vec![q],
        });
    }
    let tm = &idx.trussness;
    let k = g
        .neighbors(q)
        .iter()
        .map(|&v| tm.get(g, q, v).unwrap())
        .max()
        .unwrap();
    let t_k_nodes = if k <= 2 {
        plain_component(g, q)
    } else {
        let mut seeds = vec![q];
        for &v in g.neighbors(q) {
            if tm.get(g, q, v).unwrap() >= k {
                seeds.push(v);
            }
        }
        forest_closure(idx, g, &seeds, k)
    };

    let mut in_tk = vec![false; g.node_count()];
    for &u in &t_k_nodes {
        in_tk[u as usize] = true;
    }
    let mut k_hat = 2;
    for (idx_e, &(u, v)) in g.edges().iter().enumerate() {
        if in_tk[u as usize] && in_tk[v as usize] {
            k_hat = k_hat.max(tm.value(idx_e));
        }
    }
    let members = if k_hat <= 2 {
        t_k_nodes.clone()
    } else {
        let mut covered = vec![false; g.node_count()];
        let mut members = Vec::new();
        for (idx_e, &(u, v)) in g.edges().iter().enumerate() {
            if tm.value(idx_e) == k_hat
                && in_tk[u as usize]
                && in_tk[v as usize]
                && !covered[u as usize]
            {
                let comp = forest_closure(idx, g, &[u, v], k_hat);
                for &x in &comp {
                    if !covered[x as usize] {
                        covered[x as usize] = true;
                        members.push(x);
                    }
                }
            }
        }
        members.sort_unstable();
        members
    };
    Ok(KeyMemberResult {
        k,
        t_k_nodes,
        k_hat,
        members,
    })
}
