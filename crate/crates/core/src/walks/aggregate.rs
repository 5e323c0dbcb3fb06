//! Tree aggregation: keyed sums converge to a root along a fresh BFS tree,
//! and the root can push a short answer back down the same tree.

use std::collections::BTreeMap;

use crate::engine::{Message, NodeProgram, RoundContext, RoundLog};
use crate::graph::{Graph, NodeId};

use super::session::Walker;
use super::{check_node, kind, BfsState, LocalTree, WalkError};

/// Payload of a broadcast message.
pub type Words = [u64; 4];

#[derive(Debug, Clone)]
pub struct Convergecast {
    pub totals: BTreeMap<u64, u64>,
    /// Every node's place in the BFS tree, kept for a later broadcast.
    pub tree: Vec<LocalTree>,
    pub round_log: RoundLog,
}

struct SumNode {
    is_root: bool,
    bfs: BfsState,
    sums: BTreeMap<u64, u64>,
    ends: usize,
    done: bool,
}

impl NodeProgram for SumNode {
    fn on_round(&mut self, ctx: &mut RoundContext<'_>) {
        self.bfs.step(ctx, self.is_root);
        for d in ctx.inbox() {
            match d.message.kind {
                kind::ENTRY => *self.sums.entry(d.message.words[0]).or_default() += d.message.words[1],
                kind::END => self.ends += 1,
                _ => {}
            }
        }
        if self.done || !self.bfs.complete(ctx.ports().len()) || self.ends < self.bfs.tree.children.len() {
            return;
        }
        self.done = true;
        if let Some(parent) = self.bfs.tree.parent {
            for (&key, &value) in &self.sums {
                ctx.send_queued(parent, Message::new(kind::ENTRY, [key, value, 0, 0]));
            }
            ctx.send_queued(parent, Message::new(kind::END, [0; 4]));
        }
    }

    fn is_halted(&self) -> bool {
        true
    }
}

struct DownNode<'a> {
    is_root: bool,
    tree: &'a LocalTree,
    payload: Option<[u64; 4]>,
}

impl NodeProgram for DownNode<'_> {
    fn on_round(&mut self, ctx: &mut RoundContext<'_>) {
        let received = if self.is_root && ctx.round() == 1 {
            self.payload
        } else {
            ctx.inbox().iter().find(|d| d.message.kind == kind::DOWN).map(|d| d.message.words)
        };
        if let Some(words) = received {
            self.payload = Some(words);
            for &c in &self.tree.children {
                ctx.send(c, Message::new(kind::DOWN, words));
            }
        }
    }

    fn is_halted(&self) -> bool {
        true
    }
}

impl Walker<'_> {
    /// Sums `entries[u]` (node-local `(key, value)` pairs) over all nodes at
    /// `root`.
    pub fn convergecast(&mut self, root: NodeId, entries: Vec<Vec<(u64, u64)>>) -> Result<Convergecast, WalkError> {
        check_node(self.g, root)?;
        let mut programs: Vec<SumNode> = entries
            .into_iter()
            .enumerate()
            .map(|(u, local)| {
                let mut sums = BTreeMap::new();
                for (k, v) in local {
                    *sums.entry(k).or_default() += v;
                }
                SumNode { is_root: u as NodeId == root, bfs: BfsState::default(), sums, ends: 0, done: false }
            })
            .collect();
        assert_eq!(programs.len(), self.g.node_count(), "one entry list per node");
        let sub = self.sim.execute(self.g, &mut programs, &self.options, None)?;
        let mut round_log = RoundLog::default();
        round_log.absorb("convergecast", &sub);
        let totals = std::mem::take(&mut programs[root as usize].sums);
        let tree = programs.into_iter().map(|p| p.bfs.tree).collect();
        Ok(Convergecast { totals, tree, round_log })
    }

    /// Sends `words` from `root` to every node down `tree`; returns what each
    /// node received.
    pub fn broadcast(
        &mut self,
        tree: &[LocalTree],
        root: NodeId,
        words: [u64; 4],
    ) -> Result<(Vec<Option<Words>>, RoundLog), WalkError> {
        check_node(self.g, root)?;
        let mut programs: Vec<DownNode<'_>> = tree
            .iter()
            .enumerate()
            .map(|(u, t)| DownNode {
                is_root: u as NodeId == root,
                tree: t,
                payload: (u as NodeId == root).then_some(words),
            })
            .collect();
        let sub = self.sim.execute(self.g, &mut programs, &self.options, None)?;
        let mut round_log = RoundLog::default();
        round_log.absorb("broadcast", &sub);
        Ok((programs.into_iter().map(|p| p.payload).collect(), round_log))
    }
}

pub fn convergecast(g: &Graph, root: NodeId, entries: Vec<Vec<(u64, u64)>>) -> Result<Convergecast, WalkError> {
    Walker::new(g).convergecast(root, entries)
}
