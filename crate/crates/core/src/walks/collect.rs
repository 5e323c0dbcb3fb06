use std::collections::BTreeMap;

use crate::engine::{Message, NodeProgram, RoundContext};
use crate::graph::{Graph, NodeId};
use crate::rng::NodeRng;

use super::session::{Session, Stream};
use super::{kind, BfsState, WalkError, WalkResult, WalkTrace};

/// Upcasts the whole edge list to the source along a BFS tree (pipelined,
/// each edge reported by its lower endpoint), walks locally at the source,
/// then sends the endpoint back down the tree.
struct CollectNode<'a> {
    me: NodeId,
    is_root: bool,
    rng: &'a mut NodeRng,
    ell: u64,
    bfs: BfsState,
    sent_own: bool,
    ends: usize,
    finished: bool,
    edges: Vec<(NodeId, NodeId, u32)>,
    walk: Option<Vec<NodeId>>,
    endpoint: Option<NodeId>,
}

impl CollectNode<'_> {
    fn report(&mut self, ctx: &mut RoundContext<'_>, edge: (NodeId, NodeId, u32)) {
        if self.is_root {
            self.edges.push(edge);
        } else {
            let parent = self.bfs.tree.parent.expect("non-root has a parent");
            let m = Message::new(kind::EDGE, [u64::from(edge.0), u64::from(edge.1), u64::from(edge.2), 0]);
            ctx.send_queued(parent, m);
        }
    }

    fn announce(&mut self, ctx: &mut RoundContext<'_>, endpoint: NodeId) {
        self.endpoint = Some(endpoint);
        for &c in &self.bfs.tree.children {
            ctx.send(c, Message::new(kind::RESULT, [u64::from(endpoint), 0, 0, 0]));
        }
    }

    fn walk_locally(&mut self) -> Vec<NodeId> {
        let n = self.edges.iter().map(|e| e.0.max(e.1) as usize + 1).max().unwrap_or(1);
        let local = Graph::new(n, &self.edges).expect("collected topology is the connected input graph");
        let mut walk = Vec::with_capacity(self.ell as usize + 1);
        let mut at = self.me;
        walk.push(at);
        for _ in 0..self.ell {
            let port = local.sample_port(at, self.rng);
            at = local.ports(at)[port].neighbor;
            walk.push(at);
        }
        walk
    }
}

impl NodeProgram for CollectNode<'_> {
    fn on_round(&mut self, ctx: &mut RoundContext<'_>) {
        self.bfs.step(ctx, self.is_root);
        for i in 0..ctx.inbox().len() {
            let m = ctx.inbox()[i].message;
            match m.kind {
                kind::EDGE => self.report(ctx, (m.words[0] as NodeId, m.words[1] as NodeId, m.words[2] as u32)),
                kind::END => self.ends += 1,
                kind::RESULT => self.announce(ctx, m.words[0] as NodeId),
                _ => {}
            }
        }
        if !self.sent_own && self.bfs.complete(ctx.ports().len()) {
            self.sent_own = true;
            for i in 0..ctx.ports().len() {
                let p = ctx.ports()[i];
                if p.neighbor > self.me {
                    self.report(ctx, (self.me, p.neighbor, p.multiplicity));
                }
            }
        }
        if self.finished || !self.sent_own || self.ends < self.bfs.tree.children.len() {
            return;
        }
        self.finished = true;
        if let Some(parent) = self.bfs.tree.parent {
            ctx.send_queued(parent, Message::new(kind::END, [0; 4]));
        } else {
            let walk = self.walk_locally();
            let endpoint = *walk.last().unwrap();
            self.walk = Some(walk);
            self.announce(ctx, endpoint);
        }
    }

    fn is_halted(&self) -> bool {
        true
    }
}

impl Session<'_, '_> {
    pub(crate) fn collect(&mut self, s: NodeId, ell: u64) -> Result<WalkResult, WalkError> {
        let g = self.g;
        let options = self.options;
        let rngs = self.streams.get(Stream::Collect);
        let mut programs: Vec<CollectNode<'_>> = rngs
            .iter_mut()
            .enumerate()
            .map(|(u, rng)| CollectNode {
                me: u as NodeId,
                is_root: u as NodeId == s,
                rng,
                ell,
                bfs: BfsState::default(),
                sent_own: false,
                ends: 0,
                finished: false,
                edges: Vec::new(),
                walk: None,
                endpoint: None,
            })
            .collect();
        let sub = self.sim.execute(g, &mut programs, &options, None)?;
        let walk = programs[s as usize].walk.take().expect("the source walks once collection ends");
        let endpoint = *walk.last().unwrap();
        debug_assert!(programs.iter().all(|p| p.endpoint == Some(endpoint)));
        drop(programs);
        self.log.absorb("collection", &sub);

        let mut tail: BTreeMap<NodeId, Vec<u64>> = BTreeMap::new();
        for (t, &v) in walk.iter().enumerate() {
            tail.entry(v).or_default().push(t as u64);
        }
        Ok(WalkResult {
            source: s,
            ell,
            endpoint,
            connectors: vec![(s, 0)],
            positions: None,
            round_log: self.log.clone(),
            lambda: 0,
            gmw_invocations: 0,
            trace: Some(WalkTrace { segments: Vec::new(), tail }),
        })
    }
}
