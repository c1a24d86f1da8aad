//! Immutable undirected simple graphs with compact sorted adjacency,
//! edge-list ingestion, triangle support computation, and the bounded
//! subgraph extraction used by the random-walk engine.

use std::collections::HashMap;
use std::collections::VecDeque;
use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Dense internal node identifier.
pub type NodeId = u32;

/// Bidirectional mapping between external node labels and dense ids.
#[derive(Debug, Clone, Default)]
pub struct NodeIdMap {
    labels: Vec<String>,
    index: HashMap<String, NodeId>,
}

impl NodeIdMap {
    pub fn new() -> Self {
        Self::default()
    }

    /// Identity map with labels "0".."n-1", for graphs built programmatically.
    pub fn dense(n: usize) -> Self {
        let mut map = Self::new();
        for i in 0..n {
            map.insert_or_get(&i.to_string());
        }
        map
    }

    /// Returns the id already assigned to `label`, or assigns the next one.
    pub fn insert_or_get(&mut self, label: &str) -> NodeId {
        if let Some(&id) = self.index.get(label) {
            return id;
        }
        let id = self.labels.len() as NodeId;
        self.labels.push(label.to_string());
        self.index.insert(label.to_string(), id);
        id
    }

    pub fn id(&self, label: &str) -> Option<NodeId> {
        self.index.get(label).copied()
    }

    pub fn label(&self, id: NodeId) -> Option<&str> {
        self.labels.get(id as usize).map(String::as_str)
    }

    pub fn len(&self) -> usize {
        self.labels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }
}

/// Undirected simple graph over dense ids `0..node_count`.
///
/// Neighbor lists are sorted ascending, so edge membership is a binary
/// search and common-neighbor counting is a linear merge. The canonical
/// edge list (`u < v`, ascending) doubles as the key space for
/// [`SupportMap`] and the trussness map.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    neighbors: Vec<NodeId>,
    edges: Vec<(NodeId, NodeId)>,
}

impl Graph {
    /// Builds a graph from an edge collection. Self-loops are dropped,
    /// duplicates (in either orientation) are collapsed.
    pub fn from_edges(
        node_count: usize,
        edges: impl IntoIterator<Item = (NodeId, NodeId)>,
    ) -> Result<Self> {
        let mut canon: Vec<(NodeId, NodeId)> = Vec::new();
        for (a, b) in edges {
            for id in [a, b] {
                if (id as usize) >= node_count {
                    return Err(Error::NodeOutOfRange {
                        id,
                        nodes: node_count,
                    });
                }
            }
            if a == b {
                continue;
            }
            canon.push((a.min(b), a.max(b)));
        }
        canon.sort_unstable();
        canon.dedup();

        let mut degrees = vec![0usize; node_count];
        for &(u, v) in &canon {
            degrees[u as usize] += 1;
            degrees[v as usize] += 1;
        }
        let mut offsets = Vec::with_capacity(node_count + 1);
        offsets.push(0);
        for d in &degrees {
            offsets.push(offsets.last().unwrap() + d);
        }
        let mut cursor = offsets.clone();
        let mut neighbors = vec![0 as NodeId; 2 * canon.len()];
        for &(u, v) in &canon {
            neighbors[cursor[u as usize]] = v;
            cursor[u as usize] += 1;
            neighbors[cursor[v as usize]] = u;
            cursor[v as usize] += 1;
        }
        for u in 0..node_count {
            neighbors[offsets[u]..offsets[u + 1]].sort_unstable();
        }
        Ok(Self {
            offsets,
            neighbors,
            edges: canon,
        })
    }

    pub fn empty() -> Self {
        Self {
            offsets: vec![0],
            neighbors: Vec::new(),
            edges: Vec::new(),
        }
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn neighbors(&self, u: NodeId) -> &[NodeId] {
        &self.neighbors[self.offsets[u as usize]..self.offsets[u as usize + 1]]
    }

    pub fn degree(&self, u: NodeId) -> usize {
        self.neighbors(u).len()
    }

    /// Canonical `(min, max)` edge list, ascending.
    pub fn edges(&self) -> &[(NodeId, NodeId)] {
        &self.edges
    }

    /// Position of edge `{u,v}` in the canonical edge list.
    pub fn edge_index(&self, u: NodeId, v: NodeId) -> Option<usize> {
        let key = (u.min(v), u.max(v));
        self.edges.binary_search(&key).ok()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.neighbors(u).binary_search(&v).is_ok()
    }

    pub fn contains_node(&self, u: NodeId) -> bool {
        (u as usize) < self.node_count()
    }

    pub(crate) fn check_node(&self, u: NodeId) -> Result<()> {
        if self.contains_node(u) {
            Ok(())
        } else {
            Err(Error::NodeOutOfRange {
                id: u,
                nodes: self.node_count(),
            })
        }
    }

    /// Number of common neighbors of `u` and `v` (linear merge of the two
    /// sorted adjacency slices).
    pub fn common_neighbors(&self, u: NodeId, v: NodeId) -> u32 {
        let (a, b) = (self.neighbors(u), self.neighbors(v));
        let (mut i, mut j, mut count) = (0, 0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    count += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        count
    }

    /// Serializes to the same whitespace edge-list format accepted by
    /// [`parse_edge_list`], one canonical edge per line.
    pub fn to_edge_list(&self, map: &NodeIdMap) -> String {
        let mut out = String::new();
        for &(u, v) in &self.edges {
            let lu = map.label(u).unwrap_or("?");
            let lv = map.label(v).unwrap_or("?");
            let _ = writeln!(out, "{lu} {lv}");
        }
        out
    }
}

/// Per-edge triangle counts, aligned with the graph's canonical edge list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SupportMap {
    values: Vec<u32>,
}

impl SupportMap {
    /// Wraps raw per-edge values; length must match the graph's edge count.
    pub fn from_values(g: &Graph, values: Vec<u32>) -> Result<Self> {
        if values.len() != g.edge_count() {
            return Err(Error::InvalidParameter(format!(
                "support vector length {} != edge count {}",
                values.len(),
                g.edge_count()
            )));
        }
        Ok(Self { values })
    }

    /// Support of the edge at canonical position `idx`.
    pub fn value(&self, idx: usize) -> u32 {
        self.values[idx]
    }

    pub fn values(&self) -> &[u32] {
        &self.values
    }

    /// Support of edge `{u,v}`, if present in the graph.
    pub fn get(&self, g: &Graph, u: NodeId, v: NodeId) -> Option<u32> {
        g.edge_index(u, v).map(|i| self.values[i])
    }

    /// Total triangles: each triangle is counted once per contained edge.
    pub fn triangle_count(&self) -> u64 {
        self.values.iter().map(|&s| s as u64).sum::<u64>() / 3
    }
}

/// Computes `sup(e_uv) = |N(u) ∩ N(v)|` for every edge.
pub fn compute_supports(g: &Graph) -> SupportMap {
    let values = g
        .edges()
        .iter()
        .map(|&(u, v)| g.common_neighbors(u, v))
        .collect();
    SupportMap { values }
}

/// Parses whitespace-separated edge-list text. Lines starting with `#`
/// and blank lines are skipped; every other line must hold exactly two
/// node labels. Labels get dense ids in first-seen order.
pub fn parse_edge_list(text: &str) -> Result<(Graph, NodeIdMap)> {
    let mut map = NodeIdMap::new();
    let mut edges = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut tokens = line.split_whitespace();
        let (a, b) = match (tokens.next(), tokens.next(), tokens.next()) {
            (Some(a), Some(b), None) => (a, b),
            _ => {
                return Err(Error::Parse {
                    line: lineno + 1,
                    msg: format!("expected two node labels, got {line:?}"),
                })
            }
        };
        let ia = map.insert_or_get(a);
        let ib = map.insert_or_get(b);
        edges.push((ia, ib));
    }
    let graph = Graph::from_edges(map.len(), edges)?;
    Ok((graph, map))
}

/// Reads and parses an edge-list file.
pub fn load_edge_list(path: impl AsRef<Path>) -> Result<(Graph, NodeIdMap)> {
    let text = std::fs::read_to_string(path)?;
    parse_edge_list(&text)
}

/// Induced subgraph on `nodes`: keeps exactly the edges with both
/// endpoints in the set. Returns the subgraph and the sorted parent ids,
/// where output node `i` corresponds to parent node `parent_ids[i]`.
pub fn induced_subgraph(g: &Graph, nodes: &[NodeId]) -> Result<(Graph, Vec<NodeId>)> {
    let mut parent_ids: Vec<NodeId> = nodes.to_vec();
    parent_ids.sort_unstable();
    parent_ids.dedup();
    for &u in &parent_ids {
        g.check_node(u)?;
    }
    let mut remap = vec![NodeId::MAX; g.node_count()];
    for (i, &u) in parent_ids.iter().enumerate() {
        remap[u as usize] = i as NodeId;
    }
    let mut edges = Vec::new();
    for &u in &parent_ids {
        for &v in g.neighbors(u) {
            if u < v && remap[v as usize] != NodeId::MAX {
                edges.push((remap[u as usize], remap[v as usize]));
            }
        }
    }
    let sub = Graph::from_edges(parent_ids.len(), edges)?;
    Ok((sub, parent_ids))
}

/// Extracts the m-bounded subgraph of the seed set: the induced subgraph
/// of every node within `m` hops of a seed, where a hop from `u` to `v`
/// is allowed only when `sup(e_uv) ≥ 1` in the parent graph. Multi-seed
/// results are the union of the per-seed regions.
pub fn m_bounded_subgraph(
    g: &Graph,
    supports: &SupportMap,
    seeds: &[NodeId],
    m: usize,
) -> Result<(Graph, Vec<NodeId>)> {
    for &s in seeds {
        g.check_node(s)?;
    }
    let mut depth = vec![usize::MAX; g.node_count()];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if depth[s as usize] == usize::MAX {
            depth[s as usize] = 0;
            queue.push_back(s);
        }
    }
    let mut visited: Vec<NodeId> = queue.iter().copied().collect();
    while let Some(u) = queue.pop_front() {
        let d = depth[u as usize];
        if d == m {
            continue;
        }
        for &v in g.neighbors(u) {
            if depth[v as usize] != usize::MAX {
                continue;
            }
            let idx = g.edge_index(u, v).expect("adjacent nodes share an edge");
            if supports.value(idx) == 0 {
                continue;
            }
            depth[v as usize] = d + 1;
            visited.push(v);
            queue.push_back(v);
        }
    }
    induced_subgraph(g, &visited)
}
