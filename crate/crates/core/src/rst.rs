//! Uniform random spanning trees: the first-entry edges of a covering random
//! walk, with the walk length doubled until a cover is observed.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{Message, NodeProgram, RoundContext, RoundLog};
use crate::graph::{Graph, NodeId};
use crate::oracle::TreeEdges;
use crate::rng::sub_seed;
use crate::walks::{kind, WalkError, WalkParams, Walker};

#[derive(Debug, Error)]
pub enum RstError {
    #[error(transparent)]
    Walk(#[from] WalkError),
    #[error("walk misses {missing} of {n} nodes")]
    NotCovering { missing: usize, n: usize },
    #[error("a spanning tree needs at least two nodes")]
    TooSmall,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SpanningTree {
    pub root: NodeId,
    /// `(child, parent)` sorted by child.
    pub tree_edges: Vec<(NodeId, NodeId)>,
    pub phase_count: u32,
    pub final_ell: u64,
}

impl SpanningTree {
    /// Edge set as sorted `(min, max)` pairs, comparable with the oracle's
    /// enumeration.
    pub fn canonical(&self) -> TreeEdges {
        let mut edges: TreeEdges = self.tree_edges.iter().map(|&(c, p)| (c.min(p), c.max(p))).collect();
        edges.sort_unstable();
        edges
    }

    /// `n - 1` edges of `g` that connect every node.
    pub fn is_spanning_tree_of(&self, g: &Graph) -> bool {
        let n = g.node_count();
        if self.tree_edges.len() + 1 != n {
            return false;
        }
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], mut x: usize) -> usize {
            while p[x] != x {
                p[x] = p[p[x]];
                x = p[x];
            }
            x
        }
        for &(c, p) in &self.tree_edges {
            if c as usize >= n || p as usize >= n || !g.has_edge(c, p) {
                return false;
            }
            let (a, b) = (find(&mut parent, c as usize), find(&mut parent, p as usize));
            if a == b {
                return false;
            }
            parent[a] = b;
        }
        true
    }
}

/// Aldous-Broder extraction: every node except the walk's start takes the
/// edge by which the walk first entered it.
pub fn first_visit_edges(n: usize, positions: &BTreeMap<NodeId, Vec<u64>>) -> Result<SpanningTree, RstError> {
    let len = positions.values().flatten().max().map_or(0, |&t| t + 1);
    let mut sequence = vec![NodeId::MAX; len as usize];
    for (&v, offsets) in positions {
        for &t in offsets {
            sequence[t as usize] = v;
        }
    }
    let missing = (0..n as NodeId).filter(|v| positions.get(v).is_none_or(Vec::is_empty)).count();
    if missing > 0 {
        return Err(RstError::NotCovering { missing, n });
    }
    let root = sequence[0];
    let tree_edges = positions
        .iter()
        .filter(|&(&v, _)| v != root)
        .map(|(&v, offsets)| {
            let first = *offsets.iter().min().expect("covered");
            (v, sequence[first as usize - 1])
        })
        .collect();
    Ok(SpanningTree { root, tree_edges, phase_count: 0, final_ell: len.saturating_sub(1) })
}

/// Newly entered nodes ask their neighbors who held the preceding offset;
/// exactly one neighbor answers.
struct ParentQuery<'a> {
    asks: Option<u64>,
    offsets: &'a [u64],
    parent: Option<NodeId>,
}

impl NodeProgram for ParentQuery<'_> {
    fn on_round(&mut self, ctx: &mut RoundContext<'_>) {
        if ctx.round() == 1 {
            if let Some(t) = self.asks {
                for port in 0..ctx.ports().len() {
                    ctx.send(port, Message::new(kind::QUERY, [t, 0, 0, 0]));
                }
            }
        }
        for i in 0..ctx.inbox().len() {
            let d = ctx.inbox()[i];
            match d.message.kind {
                kind::QUERY if self.offsets.binary_search(&d.message.words[0]).is_ok() => {
                    ctx.send(d.port, Message::new(kind::MATCH, [0; 4]));
                }
                kind::MATCH => self.parent = Some(ctx.ports()[d.port].neighbor),
                _ => {}
            }
        }
    }

    fn is_halted(&self) -> bool {
        true
    }
}

impl Walker<'_> {
    /// Walks of length `ell` (starting at `n`) are chained end to start,
    /// `ceil(log2 n)` per phase, and `ell` doubles after each phase. After
    /// every walk the nodes learn their offsets, newly entered nodes find
    /// their entry edge, and a convergecast decides whether all nodes have
    /// been entered.
    pub fn random_spanning_tree(&mut self, root: NodeId, seed: u64) -> Result<(SpanningTree, RoundLog), RstError> {
        let g = self.g;
        let n = g.node_count();
        if n < 2 {
            return Err(RstError::TooSmall);
        }
        crate::walks::check_node(g, root)?;
        let per_phase = (n as f64).log2().ceil().max(1.0) as u32;
        let mut log = RoundLog::default();
        let mut parent: Vec<Option<NodeId>> = vec![None; n];
        let mut entered = vec![false; n];
        entered[root as usize] = true;
        let mut at = root;
        let mut ell = n as u64;
        let mut index = 0u64;
        for phase in 1u32.. {
            for _ in 0..per_phase {
                let walk = self.single_random_walk(at, &WalkParams::new(ell), sub_seed(seed, "rst", index))?;
                index += 1;
                let full = self.regenerate_walk(&walk)?;
                log.merge(&full.round_log);
                at = walk.endpoint;

                let positions = full.positions.expect("regenerated walks carry positions");
                let empty = Vec::new();
                let mut programs: Vec<ParentQuery<'_>> = (0..n as NodeId)
                    .map(|v| {
                        let offsets = positions.get(&v).unwrap_or(&empty);
                        let asks = (!entered[v as usize]).then(|| offsets.first().map(|&t| t - 1)).flatten();
                        ParentQuery { asks, offsets, parent: None }
                    })
                    .collect();
                let sub = self.sim.execute(g, &mut programs, &self.options, None).map_err(WalkError::from)?;
                log.absorb("first_entry", &sub);
                let mut covered = 0u64;
                let mut entries = Vec::with_capacity(n);
                for (v, p) in programs.into_iter().enumerate() {
                    if p.asks.is_some() {
                        entered[v] = true;
                        parent[v] = p.parent;
                    }
                    covered += u64::from(entered[v]);
                    entries.push(vec![(0, u64::from(entered[v]))]);
                }

                let cast = self.convergecast(root, entries)?;
                log.merge(&cast.round_log);
                let total = cast.totals.get(&0).copied().unwrap_or(0);
                debug_assert_eq!(total, covered);
                let (_, down) = self.broadcast(&cast.tree, root, [u64::from(total == n as u64), 0, 0, 0])?;
                log.merge(&down);
                if total == n as u64 {
                    let tree_edges = (0..n as NodeId)
                        .filter(|&v| v != root)
                        .map(|v| (v, parent[v as usize].expect("entered nodes know their entry edge")))
                        .collect();
                    let tree = SpanningTree { root, tree_edges, phase_count: phase, final_ell: ell };
                    return Ok((tree, log));
                }
            }
            ell *= 2;
        }
        unreachable!("phases continue until the walk covers")
    }
}

pub fn random_spanning_tree(g: &Graph, root: NodeId, seed: u64) -> Result<(SpanningTree, RoundLog), RstError> {
    Walker::new(g).random_spanning_tree(root, seed)
}
