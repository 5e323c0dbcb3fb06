use std::collections::BTreeMap;

use crate::engine::{Message, NodeProgram, RoundContext};
use crate::graph::{Graph, NodeId};

use super::session::Walker;
use super::{kind, WalkError, WalkResult};

/// Each connector sends a REPLAY message along its stored short walk; every
/// node on the way learns its offset `base + index`. `routes` stands in for
/// the per-walk next-hop memory nodes kept while forwarding.
struct ReplayNode<'a> {
    me: NodeId,
    launches: Vec<usize>,
    routes: &'a [(u64, Vec<NodeId>)],
    positions: Vec<u64>,
}

impl ReplayNode<'_> {
    fn visit(&mut self, ctx: &mut RoundContext<'_>, segment: usize, index: usize) {
        let (base, route) = &self.routes[segment];
        debug_assert_eq!(route[index], self.me);
        self.positions.push(base + index as u64);
        // The route's final node is the next connector, which records itself.
        if index + 2 < route.len() {
            let next = route[index + 1];
            let port = ctx
                .ports()
                .binary_search_by_key(&next, |p| p.neighbor)
                .expect("consecutive walk nodes are adjacent");
            ctx.send_queued(port, Message::new(kind::REPLAY, [segment as u64, index as u64 + 1, 0, 0]));
        }
    }
}

impl NodeProgram for ReplayNode<'_> {
    fn on_round(&mut self, ctx: &mut RoundContext<'_>) {
        for segment in std::mem::take(&mut self.launches) {
            self.visit(ctx, segment, 0);
        }
        for i in 0..ctx.inbox().len() {
            let m = ctx.inbox()[i].message;
            if m.kind == kind::REPLAY {
                self.visit(ctx, m.words[0] as usize, m.words[1] as usize);
            }
        }
    }

    fn is_halted(&self) -> bool {
        true
    }
}

impl Walker<'_> {
    pub fn regenerate_walk(&mut self, result: &WalkResult) -> Result<WalkResult, WalkError> {
        let trace = result.trace.as_ref().ok_or(WalkError::StaleStore)?;
        let routes: Vec<(u64, Vec<NodeId>)> = trace
            .segments
            .iter()
            .map(|s| s.trajectory.clone().map(|t| (s.offset, t)).ok_or(WalkError::StaleStore))
            .collect::<Result<_, _>>()?;

        let mut launches = vec![Vec::new(); self.g.node_count()];
        for (i, s) in trace.segments.iter().enumerate() {
            launches[s.start as usize].push(i);
        }
        let mut programs: Vec<ReplayNode<'_>> = launches
            .into_iter()
            .enumerate()
            .map(|(u, launches)| ReplayNode { me: u as NodeId, launches, routes: &routes, positions: Vec::new() })
            .collect();
        let sub = self.sim.execute(self.g, &mut programs, &self.options, None)?;

        let mut positions: BTreeMap<NodeId, Vec<u64>> = trace.tail.clone();
        for (u, p) in programs.into_iter().enumerate() {
            if !p.positions.is_empty() {
                positions.entry(u as NodeId).or_default().extend(p.positions);
            }
        }
        positions.values_mut().for_each(|v| v.sort_unstable());

        let mut regenerated = result.clone();
        regenerated.positions = Some(positions);
        regenerated.round_log.absorb("regenerate", &sub);
        Ok(regenerated)
    }
}

/// Informs every node on a stitched walk of all its offsets by replaying the
/// stored short walks; nothing is resampled, so no seed is involved.
pub fn regenerate_walk(g: &Graph, result: &WalkResult) -> Result<WalkResult, WalkError> {
    Walker::new(g).regenerate_walk(result)
}
