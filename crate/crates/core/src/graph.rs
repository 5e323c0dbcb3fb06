//! Immutable undirected multigraphs, BFS trees and the fixture generators.

use std::collections::{BTreeMap, VecDeque};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::Distribution;

/// Dense 0-based node identifier.
pub type NodeId = u32;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("graph is disconnected ({reached} of {n} nodes reachable from node 0)")]
    DisconnectedGraph { reached: usize, n: usize },
    #[error("self-loop at node {0}")]
    SelfLoop(NodeId),
    #[error("node id {node} out of range for a graph with {n} nodes")]
    InvalidNodeId { node: u64, n: usize },
    #[error("edge ({0}, {1}) has multiplicity zero")]
    ZeroMultiplicity(NodeId, NodeId),
    #[error("multiplicity of edge ({0}, {1}) overflows 32 bits")]
    MultiplicityOverflow(NodeId, NodeId),
    #[error("a graph needs at least one node")]
    Empty,
    #[error("unsatisfiable generator parameters: {0}")]
    UnsatisfiableParams(String),
    #[error("gadget parameter k must be at least 1 (got {0})")]
    InvalidK(u64),
    #[error("graph file: {0}")]
    Io(#[from] std::io::Error),
    #[error("graph file: {0}")]
    Json(#[from] serde_json::Error),
}

/// One entry of a node's incident edge list.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Port {
    pub neighbor: NodeId,
    pub multiplicity: u32,
}

/// Undirected connected multigraph in compressed adjacency form.
///
/// Every node's ports are sorted by ascending neighbor id, so a port index is
/// a stable local name for an incident edge. Directed edge `(u, p)` has the
/// global index `offsets[u] + p`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    offsets: Vec<usize>,
    ports: Vec<Port>,
    /// Running multiplicity sums per port, for weighted neighbor sampling.
    cumulative: Vec<u64>,
    /// For directed edge `e = (u, p)`, the port index of `u` at the neighbor.
    reverse_port: Vec<u32>,
    /// Sending node of each directed edge.
    source: Vec<NodeId>,
    degree: Vec<u64>,
    edge_count: u64,
    unit: bool,
}

/// Serialized graph file: `{"n": int, "edges": [[u, v, mult], ...]}`.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
#[serde(deny_unknown_fields)]
pub struct GraphFile {
    pub n: usize,
    pub edges: Vec<(u64, u64, u64)>,
}

impl Graph {
    /// Validates and builds a graph. Repeated pairs add their multiplicities.
    pub fn new(n: usize, edges: &[(NodeId, NodeId, u32)]) -> Result<Self, GraphError> {
        let wide: Vec<(u64, u64, u64)> = edges
            .iter()
            .map(|&(u, v, m)| (u64::from(u), u64::from(v), u64::from(m)))
            .collect();
        Self::from_wide(n, &wide)
    }

    fn from_wide(n: usize, edges: &[(u64, u64, u64)]) -> Result<Self, GraphError> {
        if n == 0 {
            return Err(GraphError::Empty);
        }
        let mut adjacency: Vec<BTreeMap<NodeId, u64>> = vec![BTreeMap::new(); n];
        for &(u, v, m) in edges {
            for x in [u, v] {
                if x >= n as u64 {
                    return Err(GraphError::InvalidNodeId { node: x, n });
                }
            }
            let (u, v) = (u as NodeId, v as NodeId);
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if m == 0 {
                return Err(GraphError::ZeroMultiplicity(u, v));
            }
            *adjacency[u as usize].entry(v).or_default() += m;
            *adjacency[v as usize].entry(u).or_default() += m;
        }

        let mut offsets = Vec::with_capacity(n + 1);
        let mut ports = Vec::new();
        let mut cumulative = Vec::new();
        let mut degree = Vec::with_capacity(n);
        offsets.push(0);
        for (u, adj) in adjacency.iter().enumerate() {
            let mut running = 0u64;
            for (&v, &m) in adj {
                let multiplicity =
                    u32::try_from(m).map_err(|_| GraphError::MultiplicityOverflow(u as NodeId, v))?;
                running += m;
                ports.push(Port { neighbor: v, multiplicity });
                cumulative.push(running);
            }
            degree.push(running);
            offsets.push(ports.len());
        }

        let mut reverse_port = vec![0u32; ports.len()];
        let mut source = vec![0; ports.len()];
        for u in 0..n {
            for p in offsets[u]..offsets[u + 1] {
                source[p] = u as NodeId;
                let v = ports[p].neighbor as usize;
                let back = ports[offsets[v]..offsets[v + 1]]
                    .binary_search_by_key(&(u as NodeId), |q| q.neighbor)
                    .expect("adjacency is symmetric");
                reverse_port[p] = back as u32;
            }
        }

        let total: u64 = degree.iter().sum();
        let unit = ports.iter().all(|p| p.multiplicity == 1);
        let graph = Graph {
            offsets,
            ports,
            cumulative,
            reverse_port,
            source,
            degree,
            edge_count: total / 2,
            unit,
        };
        let reached = graph.bfs_levels(0).iter().filter(|l| l.is_some()).count();
        if reached != n {
            return Err(GraphError::DisconnectedGraph { reached, n });
        }
        Ok(graph)
    }

    pub fn node_count(&self) -> usize {
        self.degree.len()
    }

    /// Sum of multiplicities over undirected edges.
    pub fn edge_count(&self) -> u64 {
        self.edge_count
    }

    pub fn degree(&self, u: NodeId) -> u64 {
        self.degree[u as usize]
    }

    pub fn degrees(&self) -> &[u64] {
        &self.degree
    }

    pub fn ports(&self, u: NodeId) -> &[Port] {
        &self.ports[self.offsets[u as usize]..self.offsets[u as usize + 1]]
    }

    pub(crate) fn cumulative(&self, u: NodeId) -> &[u64] {
        &self.cumulative[self.offsets[u as usize]..self.offsets[u as usize + 1]]
    }

    /// True when every edge has multiplicity one.
    pub fn is_simple(&self) -> bool {
        self.unit
    }

    pub fn neighbors(&self, u: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.ports(u).iter().map(|p| p.neighbor)
    }

    pub fn port_of(&self, u: NodeId, v: NodeId) -> Option<usize> {
        self.ports(u).binary_search_by_key(&v, |p| p.neighbor).ok()
    }

    pub fn multiplicity(&self, u: NodeId, v: NodeId) -> u32 {
        self.port_of(u, v).map_or(0, |p| self.ports(u)[p].multiplicity)
    }

    pub fn has_edge(&self, u: NodeId, v: NodeId) -> bool {
        self.port_of(u, v).is_some()
    }

    /// Number of directed edges (ordered adjacent pairs).
    pub fn directed_edge_count(&self) -> usize {
        self.ports.len()
    }

    pub fn directed_edge(&self, u: NodeId, port: usize) -> usize {
        self.offsets[u as usize] + port
    }

    /// Port index at `ports(u)[port].neighbor` that leads back to `u`.
    pub fn reverse_port(&self, u: NodeId, port: usize) -> usize {
        self.reverse_port[self.offsets[u as usize] + port] as usize
    }

    /// Sender, port and receiver of a directed edge.
    pub fn directed_endpoints(&self, e: usize) -> (NodeId, usize, NodeId) {
        let from = self.source[e];
        (from, e - self.offsets[from as usize], self.ports[e].neighbor)
    }

    /// Undirected edges as `(u, v, multiplicity)` with `u < v`, sorted.
    pub fn edges(&self) -> impl Iterator<Item = (NodeId, NodeId, u32)> + '_ {
        (0..self.node_count() as NodeId).flat_map(move |u| {
            self.ports(u)
                .iter()
                .filter(move |p| p.neighbor > u)
                .map(move |p| (u, p.neighbor, p.multiplicity))
        })
    }

    /// Picks an incident port with probability multiplicity / degree.
    pub fn sample_port<R: Rng + ?Sized>(&self, u: NodeId, rng: &mut R) -> usize {
        sample_port(self.ports(u), self.cumulative(u), self.unit, rng)
    }

    /// Hop distance from `root` to every node (all `Some` on a connected graph).
    pub fn bfs_levels(&self, root: NodeId) -> Vec<Option<u32>> {
        let mut level = vec![None; self.node_count()];
        let mut queue = VecDeque::new();
        level[root as usize] = Some(0);
        queue.push_back(root);
        while let Some(u) = queue.pop_front() {
            let next = level[u as usize].unwrap() + 1;
            for v in self.neighbors(u) {
                if level[v as usize].is_none() {
                    level[v as usize] = Some(next);
                    queue.push_back(v);
                }
            }
        }
        level
    }

    pub fn eccentricity(&self, root: NodeId) -> u32 {
        self.bfs_levels(root).into_iter().flatten().max().unwrap_or(0)
    }

    /// Exact hop diameter by all-pairs BFS.
    pub fn diameter(&self) -> u32 {
        (0..self.node_count() as NodeId)
            .map(|u| self.eccentricity(u))
            .max()
            .unwrap_or(0)
    }

    /// Shortest-hop tree; each node's parent is its smallest-id neighbor one
    /// level closer to the root.
    pub fn bfs_tree(&self, root: NodeId) -> BfsTree {
        let levels: Vec<u32> = self
            .bfs_levels(root)
            .into_iter()
            .map(|l| l.expect("graph is connected"))
            .collect();
        let parent = (0..self.node_count() as NodeId)
            .map(|u| {
                if u == root {
                    None
                } else {
                    let want = levels[u as usize] - 1;
                    self.neighbors(u).find(|&v| levels[v as usize] == want)
                }
            })
            .collect();
        let depth = levels.iter().copied().max().unwrap_or(0);
        BfsTree { root, parent, level: levels, depth }
    }

    /// Two-coloring check.
    pub fn is_bipartite(&self) -> bool {
        let mut color = vec![u8::MAX; self.node_count()];
        color[0] = 0;
        let mut queue = VecDeque::from([0 as NodeId]);
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if color[v as usize] == u8::MAX {
                    color[v as usize] = 1 - color[u as usize];
                    queue.push_back(v);
                } else if color[v as usize] == color[u as usize] {
                    return false;
                }
            }
        }
        true
    }

    /// pi(i) = d(i) / 2m.
    pub fn stationary_distribution(&self) -> Distribution {
        let total = 2.0 * self.edge_count as f64;
        Distribution::from_vec_unchecked(self.degree.iter().map(|&d| d as f64 / total).collect())
    }

    pub fn to_file(&self) -> GraphFile {
        GraphFile {
            n: self.node_count(),
            edges: self
                .edges()
                .map(|(u, v, m)| (u64::from(u), u64::from(v), u64::from(m)))
                .collect(),
        }
    }

    pub fn from_file(file: &GraphFile) -> Result<Self, GraphError> {
        Self::from_wide(file.n, &file.edges)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_file()).expect("graph file serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GraphError> {
        let file: GraphFile = serde_json::from_str(text)?;
        Self::from_file(&file)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GraphError> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), GraphError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }
}

pub(crate) fn sample_port<R: Rng + ?Sized>(
    ports: &[Port],
    cumulative: &[u64],
    unit: bool,
    rng: &mut R,
) -> usize {
    debug_assert!(!ports.is_empty(), "cannot step from an isolated node");
    if unit {
        return rng.random_range(0..ports.len());
    }
    let total = *cumulative.last().unwrap();
    let x = rng.random_range(0..total);
    cumulative.partition_point(|&c| c <= x)
}

/// Breadth-first search tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BfsTree {
    pub root: NodeId,
    pub parent: Vec<Option<NodeId>>,
    pub level: Vec<u32>,
    pub depth: u32,
}

/// Fixture families understood by [`generate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum GraphSpec {
    Path { n: usize },
    Cycle { n: usize },
    Clique { n: usize },
    Star { leaves: usize },
    Hypercube { dim: u32 },
    Torus { rows: usize, cols: usize },
    ErdosRenyi { n: usize, p: f64 },
    RandomRegular { n: usize, d: usize },
    Gadget { n: usize, k: usize },
}

const MAX_REJECTION_ATTEMPTS: usize = 10_000;

/// Builds a fixture graph. Random families are bit-deterministic in `seed`.
pub fn generate(spec: &GraphSpec, seed: u64) -> Result<Graph, GraphError> {
    let unsat = |msg: String| Err(GraphError::UnsatisfiableParams(msg));
    match *spec {
        GraphSpec::Path { n } => {
            if n < 2 {
                return unsat(format!("path needs n >= 2, got {n}"));
            }
            let edges: Vec<_> = (1..n as NodeId).map(|v| (v - 1, v, 1)).collect();
            Graph::new(n, &edges)
        }
        GraphSpec::Cycle { n } => {
            if n < 3 {
                return unsat(format!("cycle needs n >= 3, got {n}"));
            }
            let edges: Vec<_> = (0..n as NodeId)
                .map(|v| (v, (v + 1) % n as NodeId, 1))
                .collect();
            Graph::new(n, &edges)
        }
        GraphSpec::Clique { n } => {
            if n < 2 {
                return unsat(format!("clique needs n >= 2, got {n}"));
            }
            let mut edges = Vec::new();
            for u in 0..n as NodeId {
                for v in u + 1..n as NodeId {
                    edges.push((u, v, 1));
                }
            }
            Graph::new(n, &edges)
        }
        GraphSpec::Star { leaves } => {
            if leaves < 1 {
                return unsat("star needs at least one leaf".into());
            }
            let edges: Vec<_> = (1..=leaves as NodeId).map(|v| (0, v, 1)).collect();
            Graph::new(leaves + 1, &edges)
        }
        GraphSpec::Hypercube { dim } => {
            if dim == 0 || dim > 24 {
                return unsat(format!("hypercube dimension must be in 1..=24, got {dim}"));
            }
            let n = 1usize << dim;
            let mut edges = Vec::with_capacity(n * dim as usize / 2);
            for u in 0..n as NodeId {
                for b in 0..dim {
                    let v = u ^ (1 << b);
                    if u < v {
                        edges.push((u, v, 1));
                    }
                }
            }
            Graph::new(n, &edges)
        }
        GraphSpec::Torus { rows, cols } => {
            if rows < 3 || cols < 3 {
                return unsat(format!("torus sides must be >= 3, got {rows}x{cols}"));
            }
            let id = |r: usize, c: usize| (r * cols + c) as NodeId;
            let mut edges = Vec::with_capacity(2 * rows * cols);
            for r in 0..rows {
                for c in 0..cols {
                    edges.push((id(r, c), id((r + 1) % rows, c), 1));
                    edges.push((id(r, c), id(r, (c + 1) % cols), 1));
                }
            }
            Graph::new(rows * cols, &edges)
        }
        GraphSpec::ErdosRenyi { n, p } => {
            if n < 2 || !(p > 0.0 && p <= 1.0) {
                return unsat(format!("G(n, p) needs n >= 2 and 0 < p <= 1, got n={n}, p={p}"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for _ in 0..MAX_REJECTION_ATTEMPTS {
                let mut edges = Vec::new();
                for u in 0..n as NodeId {
                    for v in u + 1..n as NodeId {
                        if rng.random_bool(p) {
                            edges.push((u, v, 1));
                        }
                    }
                }
                match Graph::new(n, &edges) {
                    Ok(g) => return Ok(g),
                    Err(GraphError::DisconnectedGraph { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            unsat(format!("no connected G({n}, {p}) sample in {MAX_REJECTION_ATTEMPTS} attempts"))
        }
        GraphSpec::RandomRegular { n, d } => {
            if d == 0 || d >= n || (n * d) % 2 == 1 {
                return unsat(format!("no simple {d}-regular graph on {n} nodes"));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            'attempt: for _ in 0..MAX_REJECTION_ATTEMPTS {
                let mut stubs: Vec<NodeId> =
                    (0..n as NodeId).flat_map(|u| std::iter::repeat_n(u, d)).collect();
                stubs.shuffle(&mut rng);
                let mut seen = std::collections::HashSet::new();
                let mut edges = Vec::with_capacity(n * d / 2);
                for pair in stubs.chunks(2) {
                    let (u, v) = (pair[0].min(pair[1]), pair[0].max(pair[1]));
                    if u == v || !seen.insert((u, v)) {
                        continue 'attempt;
                    }
                    edges.push((u, v, 1));
                }
                match Graph::new(n, &edges) {
                    Ok(g) => return Ok(g),
                    Err(GraphError::DisconnectedGraph { .. }) => continue,
                    Err(e) => return Err(e),
                }
            }
            unsat(format!("no simple connected {d}-regular sample on {n} nodes"))
        }
        GraphSpec::Gadget { n, k } => generate_gadget_gn(n, k).map(|g| g.graph),
    }
}

/// The low-diameter path-verification gadget: a path `v_1..v_{n'}` whose
/// nodes hang periodically off the leaves of a complete binary tree.
#[derive(Debug, Clone)]
pub struct Gadget {
    pub graph: Graph,
    /// Number of path nodes n' (a multiple of `leaves`).
    pub path_len: usize,
    /// Number of tree leaves k' (smallest power of two above 4k).
    pub leaves: usize,
    pub k: usize,
}

impl Gadget {
    /// Path node `v_i` for 1-based `i`.
    pub fn path_node(&self, i: usize) -> NodeId {
        debug_assert!((1..=self.path_len).contains(&i));
        (i - 1) as NodeId
    }

    /// Tree root `x`.
    pub fn tree_root(&self) -> NodeId {
        self.path_len as NodeId
    }

    /// Leaf `u_i` for 1-based `i`, numbered left to right.
    pub fn leaf(&self, i: usize) -> NodeId {
        debug_assert!((1..=self.leaves).contains(&i));
        (self.path_len + self.leaves - 2 + i) as NodeId
    }

    /// The canonical path `v_1, ..., v_len`.
    pub fn canonical_path(&self, len: usize) -> Vec<NodeId> {
        (1..=len.min(self.path_len)).map(|i| self.path_node(i)).collect()
    }

    /// Structural invariants that fail; empty when the gadget is well formed.
    pub fn violations(&self) -> Vec<String> {
        let mut out = Vec::new();
        let kp = self.leaves;
        if !(kp / 2 <= 4 * self.k && 4 * self.k < kp) {
            out.push(format!("k'={kp} does not satisfy k'/2 <= 4k < k' for k={}", self.k));
        }
        if !kp.is_power_of_two() {
            out.push(format!("k'={kp} is not a power of two"));
        }
        if !self.path_len.is_multiple_of(kp) {
            out.push(format!("k'={kp} does not divide n'={}", self.path_len));
        }
        if self.graph.node_count() != self.path_len + 2 * kp - 1 {
            out.push(format!("node count {} != n' + 2k' - 1", self.graph.node_count()));
        }
        let bound = 2 * kp.trailing_zeros() + 2;
        let diameter = self.graph.diameter();
        if diameter > bound {
            out.push(format!("diameter {diameter} exceeds 2 log2 k' + 2 = {bound}"));
        }
        if !(1..self.path_len).all(|i| self.graph.has_edge(self.path_node(i), self.path_node(i + 1))) {
            out.push("path edges missing".into());
        }
        let first_leaf = self.leaf(1);
        let lonely = (1..=self.path_len)
            .filter(|&i| self.graph.neighbors(self.path_node(i)).filter(|&u| u >= first_leaf).count() != 1)
            .count();
        if lonely > 0 {
            out.push(format!("{lonely} path nodes without exactly one leaf neighbor"));
        }
        out
    }
}

pub fn generate_gadget_gn(n: usize, k: usize) -> Result<Gadget, GraphError> {
    if k == 0 {
        return Err(GraphError::InvalidK(k as u64));
    }
    let leaves = (4 * k + 1).next_power_of_two();
    let path_len = n.max(1).div_ceil(leaves) * leaves;
    let tree_base = path_len;
    let total = path_len + 2 * leaves - 1;

    let mut edges = Vec::with_capacity(path_len * 2 + 2 * leaves);
    for i in 1..path_len {
        edges.push(((i - 1) as NodeId, i as NodeId, 1));
    }
    // Heap layout: tree node h has children 2h+1 and 2h+2.
    for h in 0..leaves - 1 {
        let parent = (tree_base + h) as NodeId;
        edges.push((parent, (tree_base + 2 * h + 1) as NodeId, 1));
        edges.push((parent, (tree_base + 2 * h + 2) as NodeId, 1));
    }
    for i in 1..=leaves {
        let leaf = (tree_base + leaves - 2 + i) as NodeId;
        let mut j = 0;
        while j * leaves + i <= path_len {
            edges.push((leaf, (j * leaves + i - 1) as NodeId, 1));
            j += 1;
        }
    }
    let graph = Graph::new(total, &edges)?;
    Ok(Gadget { graph, path_len, leaves, k })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn path3() -> Graph {
        Graph::new(3, &[(0, 1, 1), (1, 2, 1)]).unwrap()
    }

    #[test]
    fn build_examples() {
        let k2 = Graph::new(2, &[(0, 1, 1)]).unwrap();
        assert_eq!((k2.degree(0), k2.degree(1), k2.edge_count()), (1, 1, 1));

        let tri = generate(&GraphSpec::Clique { n: 3 }, 0).unwrap();
        assert!(tri.degrees().iter().all(|&d| d == 2));
        assert_eq!(tri.edge_count(), 3);

        assert!(matches!(
            Graph::new(4, &[(0, 1, 1), (2, 3, 1)]),
            Err(GraphError::DisconnectedGraph { .. })
        ));
        assert!(matches!(Graph::new(2, &[(1, 1, 1)]), Err(GraphError::SelfLoop(1))));
        assert!(matches!(
            Graph::new(2, &[(0, 2, 1)]),
            Err(GraphError::InvalidNodeId { node: 2, .. })
        ));
    }

    #[test]
    fn repeated_pairs_merge_into_multiplicity() {
        let g = Graph::new(2, &[(0, 1, 1), (1, 0, 2)]).unwrap();
        assert_eq!(g.multiplicity(0, 1), 3);
        assert_eq!(g.degree(1), 3);
        assert_eq!(g.edge_count(), 3);
        assert!(!g.is_simple());
    }

    #[test]
    fn bfs_examples() {
        let t = path3().bfs_tree(0);
        assert_eq!(t.level, vec![0, 1, 2]);
        assert_eq!(t.depth, 2);

        let tri = generate(&GraphSpec::Clique { n: 3 }, 0).unwrap().bfs_tree(0);
        assert_eq!(tri.depth, 1);
        assert_eq!(tri.parent, vec![None, Some(0), Some(0)]);

        let star = generate(&GraphSpec::Star { leaves: 4 }, 0).unwrap();
        assert_eq!(star.bfs_tree(1).depth, 2);
    }

    #[test]
    fn diameter_examples() {
        assert_eq!(generate(&GraphSpec::Path { n: 5 }, 0).unwrap().diameter(), 4);
        assert_eq!(generate(&GraphSpec::Clique { n: 5 }, 0).unwrap().diameter(), 1);
        assert_eq!(generate(&GraphSpec::Cycle { n: 6 }, 0).unwrap().diameter(), 3);
    }

    #[test]
    fn generator_examples() {
        let cube = generate(&GraphSpec::Hypercube { dim: 3 }, 0).unwrap();
        assert_eq!(cube.node_count(), 8);
        assert!(cube.degrees().iter().all(|&d| d == 3));
        assert_eq!(cube.diameter(), 3);

        let torus = generate(&GraphSpec::Torus { rows: 4, cols: 4 }, 0).unwrap();
        assert_eq!(torus.node_count(), 16);
        assert!(torus.degrees().iter().all(|&d| d == 4));
        assert_eq!(torus.diameter(), 4);

        let spec = GraphSpec::ErdosRenyi { n: 10, p: 0.5 };
        assert_eq!(generate(&spec, 1).unwrap(), generate(&spec, 1).unwrap());

        let reg = generate(&GraphSpec::RandomRegular { n: 10, d: 3 }, 4).unwrap();
        assert!(reg.degrees().iter().all(|&d| d == 3));
        assert!(matches!(
            generate(&GraphSpec::RandomRegular { n: 5, d: 3 }, 0),
            Err(GraphError::UnsatisfiableParams(_))
        ));
    }

    #[test]
    fn stationary_examples() {
        assert_eq!(path3().stationary_distribution().probs(), &[0.25, 0.5, 0.25]);
        let star = generate(&GraphSpec::Star { leaves: 3 }, 0).unwrap();
        let pi = star.stationary_distribution();
        assert!((pi.probs()[0] - 0.5).abs() < 1e-15);
        assert!(pi.probs()[1..].iter().all(|&p| (p - 1.0 / 6.0).abs() < 1e-15));
    }

    #[test]
    fn gadget_k2_n32() {
        let gadget = generate_gadget_gn(32, 2).unwrap();
        assert_eq!(gadget.leaves, 16);
        assert_eq!(gadget.path_len, 32);
        assert_eq!(gadget.graph.node_count(), 63);
        assert!(gadget.violations().is_empty(), "{:?}", gadget.violations());
        for k in [1, 3, 4] {
            for n in [32, 50, 128] {
                let g = generate_gadget_gn(n, k).unwrap();
                assert!(g.violations().is_empty(), "k={k} n={n}: {:?}", g.violations());
            }
        }
        assert!(matches!(generate_gadget_gn(32, 0), Err(GraphError::InvalidK(0))));
    }

    #[test]
    fn gadget_leaf_attachment() {
        let gadget = generate_gadget_gn(40, 1).unwrap();
        // k' = 8, so v_3 and v_11 both hang off u_3.
        assert_eq!(gadget.leaves, 8);
        assert_eq!(gadget.path_len, 40);
        let u3 = gadget.leaf(3);
        assert!(gadget.graph.has_edge(u3, gadget.path_node(3)));
        assert!(gadget.graph.has_edge(u3, gadget.path_node(11)));
        assert_eq!(gadget.graph.degree(gadget.tree_root()), 2);
    }

    #[test]
    fn json_round_trip() {
        let g = Graph::new(3, &[(0, 1, 2), (1, 2, 1)]).unwrap();
        let text = g.to_json();
        assert_eq!(text, r#"{"n":3,"edges":[[0,1,2],[1,2,1]]}"#);
        assert_eq!(Graph::from_json(&text).unwrap(), g);
        assert!(Graph::from_json(r#"{"n":2,"edges":[[0,1,1]],"extra":1}"#).is_err());
    }
}
