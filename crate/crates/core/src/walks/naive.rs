use std::collections::BTreeMap;

use crate::engine::{Message, NodeProgram, RoundContext};
use crate::graph::{Graph, NodeId};
use crate::rng::NodeRng;

use super::session::{Session, Stream, Walker};
use super::{check_node, kind, WalkError, WalkResult, WalkTrace};

/// A token that starts at a node having already completed `offset` steps.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Launch {
    pub start: NodeId,
    pub token: u32,
    pub source: NodeId,
    pub offset: u64,
    pub ell: u64,
}

pub(crate) struct NaiveOutcome {
    pub endpoints: Vec<NodeId>,
    /// Per token, the offsets each node observed (when recorded).
    pub visits: Option<Vec<BTreeMap<NodeId, Vec<u64>>>>,
}

struct NaiveNode<'a> {
    rng: &'a mut NodeRng,
    launches: Vec<Launch>,
    record: bool,
    visits: Vec<(u32, u64)>,
    finished: Vec<u32>,
}

impl NaiveNode<'_> {
    fn hold(&mut self, ctx: &mut RoundContext<'_>, token: u32, source: u64, offset: u64, ell: u64) {
        if self.record {
            self.visits.push((token, offset));
        }
        if offset == ell {
            self.finished.push(token);
        } else {
            let port = ctx.sample_port(self.rng);
            ctx.send_queued(port, Message::new(kind::WALK_TOKEN, [u64::from(token), offset + 1, ell, source]));
        }
    }
}

impl NodeProgram for NaiveNode<'_> {
    fn on_round(&mut self, ctx: &mut RoundContext<'_>) {
        for launch in std::mem::take(&mut self.launches) {
            self.hold(ctx, launch.token, u64::from(launch.source), launch.offset, launch.ell);
        }
        for i in 0..ctx.inbox().len() {
            let m = ctx.inbox()[i].message;
            if m.kind == kind::WALK_TOKEN {
                self.hold(ctx, m.words[0] as u32, m.words[3], m.words[1], m.words[2]);
            }
        }
    }

    fn is_halted(&self) -> bool {
        true
    }
}

impl Session<'_, '_> {
    /// Runs independent tokens concurrently; queued forwarding serializes
    /// tokens that meet on an edge.
    pub(crate) fn naive(&mut self, launches: &[Launch], record: bool) -> Result<NaiveOutcome, WalkError> {
        let tokens = launches.len();
        let mut per_node: Vec<Vec<Launch>> = vec![Vec::new(); self.g.node_count()];
        for l in launches {
            per_node[l.start as usize].push(*l);
        }
        let g = self.g;
        let options = self.options;
        let rngs = self.streams.get(Stream::Walk);
        let mut programs: Vec<NaiveNode<'_>> = rngs
            .iter_mut()
            .zip(per_node)
            .map(|(rng, launches)| NaiveNode {
                rng,
                launches,
                record,
                visits: Vec::new(),
                finished: Vec::new(),
            })
            .collect();
        let sub = self.sim.execute(g, &mut programs, &options, None)?;

        let mut endpoints = vec![NodeId::MAX; tokens];
        let mut visits = record.then(|| vec![BTreeMap::new(); tokens]);
        for (node, p) in programs.iter().enumerate() {
            for &t in &p.finished {
                endpoints[t as usize] = node as NodeId;
            }
            if let Some(visits) = visits.as_mut() {
                for &(t, offset) in &p.visits {
                    visits[t as usize].entry(node as NodeId).or_insert_with(Vec::new).push(offset);
                }
            }
        }
        drop(programs);
        if let Some(visits) = visits.as_mut() {
            visits.iter_mut().flat_map(|m| m.values_mut()).for_each(|v| v.sort_unstable());
        }
        self.log.absorb("naive", &sub);
        Ok(NaiveOutcome { endpoints, visits })
    }
}

impl Walker<'_> {
    pub fn naive_walk(&mut self, s: NodeId, ell: u64, seed: u64) -> Result<WalkResult, WalkError> {
        check_node(self.g, s)?;
        let mut session = self.session(seed, false);
        let launch = Launch { start: s, token: 0, source: s, offset: 0, ell };
        let out = session.naive(&[launch], true)?;
        let positions = out.visits.and_then(|mut v| v.pop());
        let trace = WalkTrace { segments: Vec::new(), tail: positions.clone().unwrap_or_default() };
        Ok(WalkResult {
            source: s,
            ell,
            endpoint: out.endpoints[0],
            connectors: vec![(s, 0)],
            positions,
            round_log: session.log,
            lambda: 0,
            gmw_invocations: 0,
            trace: Some(trace),
        })
    }
}

/// Forwards a single token for `ell` steps, one hop per round.
pub fn naive_walk(g: &Graph, s: NodeId, ell: u64, seed: u64) -> Result<WalkResult, WalkError> {
    Walker::new(g).naive_walk(s, ell, seed)
}
