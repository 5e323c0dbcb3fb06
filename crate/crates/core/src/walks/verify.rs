use serde::{Deserialize, Serialize};

use crate::engine::{Message, NodeProgram, RoundContext, RoundLog};
use crate::graph::{Graph, NodeId};

use super::session::Walker;
use super::{check_node, kind, WalkError};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathVerdict {
    pub verified: bool,
    /// Nodes that ended up holding the full interval.
    pub witnesses: Vec<NodeId>,
    pub round_log: RoundLog,
}

/// Disjoint verified index intervals, sorted by start.
#[derive(Debug, Default, Clone)]
struct Intervals(Vec<(u64, u64)>);

impl Intervals {
    /// Adds `[a, b]`, merging with every interval sharing an index. Returns
    /// the merged interval if the set changed.
    fn insert(&mut self, a: u64, b: u64) -> Option<(u64, u64)> {
        if self.0.iter().any(|&(x, y)| x <= a && b <= y) {
            return None;
        }
        let (mut lo, mut hi) = (a, b);
        self.0.retain(|&(x, y)| {
            let overlaps = x <= hi && lo <= y;
            if overlaps {
                lo = lo.min(x);
                hi = hi.max(y);
            }
            !overlaps
        });
        let at = self.0.partition_point(|&(x, _)| x < lo);
        self.0.insert(at, (lo, hi));
        Some((lo, hi))
    }

    fn contains(&self, a: u64, b: u64) -> bool {
        self.0.iter().any(|&(x, y)| x <= a && b <= y)
    }
}

/// Nodes first exchange their order numbers with all neighbors; a node with
/// number `i` that hears `i + 1` from a neighbor has verified `[i, i + 1]`.
/// Verified intervals are then flooded and merged whenever they overlap.
struct VerifyNode {
    orders: Vec<u64>,
    known: Intervals,
    started: bool,
}

impl VerifyNode {
    fn learn(&mut self, ctx: &mut RoundContext<'_>, a: u64, b: u64) {
        if let Some((lo, hi)) = self.known.insert(a, b) {
            for port in 0..ctx.ports().len() {
                ctx.send_queued(port, Message::new(kind::INTERVAL, [lo, hi, 0, 0]));
            }
        }
    }
}

impl NodeProgram for VerifyNode {
    fn on_round(&mut self, ctx: &mut RoundContext<'_>) {
        if !self.started {
            self.started = true;
            for i in 0..self.orders.len() {
                let order = self.orders[i];
                for port in 0..ctx.ports().len() {
                    ctx.send_queued(port, Message::new(kind::ORDER, [order, 0, 0, 0]));
                }
                self.known.insert(order, order);
            }
        }
        for i in 0..ctx.inbox().len() {
            let m = ctx.inbox()[i].message;
            match m.kind {
                kind::ORDER => {
                    let j = m.words[0];
                    for k in 0..self.orders.len() {
                        let mine = self.orders[k];
                        if j == mine + 1 {
                            self.learn(ctx, mine, j);
                        } else if j + 1 == mine {
                            self.learn(ctx, j, mine);
                        }
                    }
                }
                kind::INTERVAL => self.learn(ctx, m.words[0], m.words[1]),
                _ => {}
            }
        }
    }

    fn is_halted(&self) -> bool {
        self.started
    }
}

impl Walker<'_> {
    pub fn verify_path(&mut self, sequence: &[NodeId]) -> Result<PathVerdict, WalkError> {
        if sequence.is_empty() {
            return Err(WalkError::InvalidParams("empty sequence".into()));
        }
        let mut orders = vec![Vec::new(); self.g.node_count()];
        for (i, &v) in sequence.iter().enumerate() {
            check_node(self.g, v)?;
            orders[v as usize].push(i as u64);
        }
        let mut programs: Vec<VerifyNode> = orders
            .into_iter()
            .map(|orders| VerifyNode { orders, known: Intervals::default(), started: false })
            .collect();
        let sub = self.sim.execute(self.g, &mut programs, &self.options, None)?;
        let last = sequence.len() as u64 - 1;
        let witnesses: Vec<NodeId> = programs
            .iter()
            .enumerate()
            .filter(|(_, p)| p.known.contains(0, last))
            .map(|(u, _)| u as NodeId)
            .collect();
        let mut round_log = RoundLog::default();
        round_log.absorb("verify_path", &sub);
        Ok(PathVerdict { verified: !witnesses.is_empty(), witnesses, round_log })
    }
}

/// Decides distributively whether consecutive entries of `sequence` are
/// adjacent in `g`. Each node knows only the indices at which it appears.
pub fn verify_path(g: &Graph, sequence: &[NodeId]) -> Result<PathVerdict, WalkError> {
    Walker::new(g).verify_path(sequence)
}

#[cfg(test)]
mod tests {
    use super::Intervals;

    #[test]
    fn intervals_merge_only_on_shared_index() {
        let mut s = Intervals::default();
        assert_eq!(s.insert(0, 1), Some((0, 1)));
        assert_eq!(s.insert(2, 3), Some((2, 3)));
        assert!(!s.contains(0, 3));
        assert_eq!(s.insert(1, 2), Some((0, 3)));
        assert!(s.contains(0, 3));
        assert_eq!(s.insert(1, 3), None);
    }
}
