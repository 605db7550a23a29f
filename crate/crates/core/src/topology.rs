//! Router graph, bundled topologies, the edge-list file format and
//! all-pairs hop-distance tables.
//!
//! Adjacency lists are always sorted ascending. That order is the
//! action-index to neighbor mapping used by every policy and by the output
//! layer of every agent network, so it must never change after construction.

use std::collections::{BTreeSet, VecDeque};
use std::fmt;

use sha2::{Digest, Sha256};

use crate::error::TopologyError;

/// Dense router index in `[0, n_nodes)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
pub struct NodeId(pub usize);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

const GRID3X3_EDGES: &str = include_str!("../data/grid3x3.edges");
const ATT25_EDGES: &str = include_str!("../data/att25.edges");

/// Directed router graph. Every bundled topology is symmetric.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Topology {
    name: String,
    adjacency: Vec<Vec<NodeId>>,
    labels: Vec<Option<String>>,
}

impl Topology {
    /// Builds a topology from bidirectional pairs. Fails on self-loops,
    /// out-of-range endpoints and duplicate pairs.
    pub fn from_pairs(
        name: impl Into<String>,
        n_nodes: usize,
        pairs: &[(usize, usize)],
    ) -> Result<Self, TopologyError> {
        let mut builder = Builder::new(n_nodes);
        for (i, &(u, v)) in pairs.iter().enumerate() {
            builder.add_pair(u, v).map_err(|kind| TopologyError::Parse {
                line: i + 1,
                message: kind,
            })?;
        }
        Ok(builder.finish(name.into()))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn n_nodes(&self) -> usize {
        self.adjacency.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.n_nodes()).map(NodeId)
    }

    /// Sorted neighbor list of `node`.
    pub fn neighbors(&self, node: NodeId) -> &[NodeId] {
        &self.adjacency[node.0]
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.adjacency[node.0].len()
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.adjacency[u.0].binary_search(&v).is_ok()
    }

    /// Position of `v` in `u`'s adjacency list, i.e. the action index.
    pub fn action_index(&self, u: NodeId, v: NodeId) -> Option<usize> {
        self.adjacency[u.0].binary_search(&v).ok()
    }

    /// All directed edges `(u, v)` in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, adj)| adj.iter().map(move |&v| (NodeId(u), v)))
    }

    pub fn directed_edge_count(&self) -> usize {
        self.adjacency.iter().map(Vec::len).sum()
    }

    /// Number of unordered `{u, v}` pairs with at least one direction present.
    pub fn bidirectional_pair_count(&self) -> usize {
        self.edges()
            .map(|(u, v)| (u.min(v), u.max(v)))
            .collect::<BTreeSet<_>>()
            .len()
    }

    pub fn is_symmetric(&self) -> bool {
        self.edges().all(|(u, v)| self.has_edge(v, u))
    }

    pub fn label(&self, node: NodeId) -> Option<&str> {
        self.labels[node.0].as_deref()
    }

    /// True when every node reaches every other node.
    pub fn is_connected(&self) -> bool {
        if self.n_nodes() == 0 {
            return true;
        }
        let mut seen = vec![false; self.n_nodes()];
        let mut queue = VecDeque::from([NodeId(0)]);
        seen[0] = true;
        while let Some(u) = queue.pop_front() {
            for &v in self.neighbors(u) {
                if !seen[v.0] {
                    seen[v.0] = true;
                    queue.push_back(v);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    /// Serializes to the edge-list format. Each symmetric pair is written
    /// once; this is only lossless for symmetric topologies.
    pub fn to_edge_list(&self) -> String {
        let mut out = format!("nodes {}\n", self.n_nodes());
        for (i, label) in self.labels.iter().enumerate() {
            if let Some(label) = label {
                out.push_str(&format!("label {i} {label}\n"));
            }
        }
        for (u, v) in self.edges() {
            if u < v {
                out.push_str(&format!("{u} {v}\n"));
            }
        }
        out
    }

    /// Stable content hash used to match checkpoints to topologies.
    pub fn content_hash(&self) -> String {
        let mut hasher = Sha256::new();
        hasher.update(self.n_nodes().to_le_bytes());
        for (u, v) in self.edges() {
            hasher.update(u.0.to_le_bytes());
            hasher.update(v.0.to_le_bytes());
        }
        let digest = hasher.finalize();
        digest.iter().take(8).map(|b| format!("{b:02x}")).collect()
    }
}

struct Builder {
    adjacency: Vec<BTreeSet<NodeId>>,
    labels: Vec<Option<String>>,
}

impl Builder {
    fn new(n_nodes: usize) -> Self {
        Self {
            adjacency: vec![BTreeSet::new(); n_nodes],
            labels: vec![None; n_nodes],
        }
    }

    fn check_node(&self, u: usize) -> Result<(), String> {
        if u >= self.adjacency.len() {
            return Err(format!("node {u} out of range (nodes {})", self.adjacency.len()));
        }
        Ok(())
    }

    fn add_pair(&mut self, u: usize, v: usize) -> Result<(), String> {
        self.check_node(u)?;
        self.check_node(v)?;
        if u == v {
            return Err(format!("self-loop on node {u}"));
        }
        if self.adjacency[u].contains(&NodeId(v)) || self.adjacency[v].contains(&NodeId(u)) {
            return Err(format!("duplicate edge {u} {v}"));
        }
        self.adjacency[u].insert(NodeId(v));
        self.adjacency[v].insert(NodeId(u));
        Ok(())
    }

    fn finish(self, name: String) -> Topology {
        Topology {
            name,
            adjacency: self
                .adjacency
                .into_iter()
                .map(|s| s.into_iter().collect())
                .collect(),
            labels: self.labels,
        }
    }
}

/// Parses the edge-list format:
///
/// ```text
/// nodes <N>
/// label <id> <free text>     (optional)
/// <u> <v>                    (one bidirectional pair per line)
/// ```
///
/// Blank lines and lines starting with `#` are ignored.
pub fn load_topology(name: &str, text: &str) -> Result<Topology, TopologyError> {
    let mut builder: Option<Builder> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let err = |message: String| TopologyError::Parse { line: line_no, message };
        let mut tokens = line.split_whitespace();
        let first = tokens.next().unwrap_or_default();
        match (&mut builder, first) {
            (None, "nodes") => {
                let n = tokens
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| err("expected `nodes <N>`".into()))?;
                if tokens.next().is_some() {
                    return Err(err("trailing tokens after node count".into()));
                }
                builder = Some(Builder::new(n));
            }
            (None, _) => return Err(err("first directive must be `nodes <N>`".into())),
            (Some(_), "nodes") => return Err(err("repeated `nodes` directive".into())),
            (Some(b), "label") => {
                let id = tokens
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| err("expected `label <id> <text>`".into()))?;
                b.check_node(id).map_err(err)?;
                let text: Vec<&str> = tokens.collect();
                if text.is_empty() {
                    return Err(err("empty label".into()));
                }
                b.labels[id] = Some(text.join(" "));
            }
            (Some(b), _) => {
                let u = first
                    .parse::<usize>()
                    .map_err(|_| err(format!("malformed edge line `{line}`")))?;
                let v = tokens
                    .next()
                    .and_then(|t| t.parse::<usize>().ok())
                    .ok_or_else(|| err(format!("malformed edge line `{line}`")))?;
                if tokens.next().is_some() {
                    return Err(err(format!("malformed edge line `{line}`")));
                }
                b.add_pair(u, v).map_err(err)?;
            }
        }
    }
    builder
        .map(|b| b.finish(name.to_string()))
        .ok_or(TopologyError::Parse {
            line: 0,
            message: "missing `nodes <N>` directive".into(),
        })
}

/// The 3x3 grid: node `i` at row `i / 3`, column `i % 3`.
pub fn builtin_grid3x3() -> Topology {
    load_topology("grid3x3", GRID3X3_EDGES).expect("bundled grid3x3.edges is valid")
}

/// The 25-router AT&T North America backbone.
pub fn builtin_att25() -> Result<Topology, TopologyError> {
    load_topology("att25", ATT25_EDGES)
}

/// Resolves a bundled topology by name, or reads an edge-list file.
pub fn resolve_topology(name_or_path: &str) -> Result<Topology, TopologyError> {
    match name_or_path {
        "grid3x3" => Ok(builtin_grid3x3()),
        "att25" => builtin_att25(),
        path => {
            let text = std::fs::read_to_string(path).map_err(|source| TopologyError::Io {
                path: path.to_string(),
                source,
            })?;
            let stem = std::path::Path::new(path)
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or(path);
            load_topology(stem, &text)
        }
    }
}

/// A hop count, or the explicit "unreachable" marker.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum HopDistance {
    Finite(u32),
    Infinite,
}

impl HopDistance {
    pub fn finite(self) -> Option<u32> {
        match self {
            HopDistance::Finite(d) => Some(d),
            HopDistance::Infinite => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, HopDistance::Finite(_))
    }

    fn plus_one(self) -> Self {
        match self {
            HopDistance::Finite(d) => HopDistance::Finite(d + 1),
            HopDistance::Infinite => HopDistance::Infinite,
        }
    }
}

/// All-pairs minimum hop counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HopDistanceTable {
    n: usize,
    dist: Vec<HopDistance>,
}

impl HopDistanceTable {
    pub fn n_nodes(&self) -> usize {
        self.n
    }

    pub fn get(&self, from: NodeId, to: NodeId) -> HopDistance {
        self.dist[from.0 * self.n + to.0]
    }

    fn set(&mut self, from: usize, to: usize, d: HopDistance) {
        self.dist[from * self.n + to] = d;
    }
}

/// Breadth-first search from every source.
pub fn hop_distances(topo: &Topology) -> HopDistanceTable {
    let n = topo.n_nodes();
    let mut table = HopDistanceTable {
        n,
        dist: vec![HopDistance::Infinite; n * n],
    };
    let mut queue = VecDeque::new();
    for src in 0..n {
        table.set(src, src, HopDistance::Finite(0));
        queue.clear();
        queue.push_back(NodeId(src));
        while let Some(u) = queue.pop_front() {
            let du = table.get(NodeId(src), u);
            for &v in topo.neighbors(u) {
                if table.get(NodeId(src), v) == HopDistance::Infinite {
                    table.set(src, v.0, du.plus_one());
                    queue.push_back(v);
                }
            }
        }
    }
    table
}

/// All-pairs hop counts by Bellman-Ford edge relaxation. Kept as an
/// independent cross-check of [`hop_distances`].
pub fn hop_distances_bellman_ford(topo: &Topology) -> HopDistanceTable {
    let n = topo.n_nodes();
    let mut table = HopDistanceTable {
        n,
        dist: vec![HopDistance::Infinite; n * n],
    };
    let edges: Vec<_> = topo.edges().collect();
    for src in 0..n {
        table.set(src, src, HopDistance::Finite(0));
        for _ in 1..n.max(1) {
            let mut changed = false;
            for &(u, v) in &edges {
                let via = table.get(NodeId(src), u).plus_one();
                if via < table.get(NodeId(src), v) {
                    table.set(src, v.0, via);
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
    }
    table
}

/// Neighbors of `n` that lie on some shortest path to `d`, ascending.
pub fn next_hops_on_shortest_path(
    topo: &Topology,
    table: &HopDistanceTable,
    n: NodeId,
    d: NodeId,
) -> Result<Vec<NodeId>, TopologyError> {
    let here = table
        .get(n, d)
        .finite()
        .ok_or(TopologyError::Unreachable { from: n, to: d })?;
    if here == 0 {
        return Err(TopologyError::AlreadyAtDestination(n));
    }
    Ok(topo
        .neighbors(n)
        .iter()
        .copied()
        .filter(|&v| table.get(v, d).finite() == Some(here - 1))
        .collect())
}
