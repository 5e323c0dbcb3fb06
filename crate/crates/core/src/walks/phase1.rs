use std::cell::RefCell;

use rand::Rng;

use crate::engine::{Message, NodeProgram, RoundContext, RoundLog};
use crate::graph::{Graph, NodeId};
use crate::rng::NodeRng;

use super::session::{Session, Stream, Walker};
use super::{kind, ShortWalk, WalkError, WalkStore};

/// Launches `eta * d(x)` tokens per node, each carrying its own target
/// length `lambda + r`, and forwards them through the engine queues.
struct Phase1Node<'a> {
    me: NodeId,
    rng: &'a mut NodeRng,
    held: &'a mut Vec<ShortWalk>,
    launch: u64,
    first_id: u64,
    lambda: u64,
    trajectories: Option<&'a RefCell<Vec<Vec<NodeId>>>>,
}

impl Phase1Node<'_> {
    fn hold(&mut self, ctx: &mut RoundContext<'_>, source: u64, walk_id: u64, remaining: u64, length: u64) {
        if let Some(t) = self.trajectories {
            t.borrow_mut()[walk_id as usize].push(self.me);
        }
        if remaining == 0 {
            self.held.push(ShortWalk {
                source: source as NodeId,
                length,
                destination: self.me,
                used: false,
                walk_id,
            });
        } else {
            let port = ctx.sample_port(self.rng);
            ctx.send_queued(port, Message::new(kind::PHASE1_TOKEN, [source, walk_id, remaining - 1, length]));
        }
    }
}

impl NodeProgram for Phase1Node<'_> {
    fn on_round(&mut self, ctx: &mut RoundContext<'_>) {
        for i in 0..std::mem::take(&mut self.launch) {
            let length = self.lambda + self.rng.random_range(0..self.lambda);
            self.hold(ctx, u64::from(self.me), self.first_id + i, length, length);
        }
        for i in 0..ctx.inbox().len() {
            let m = ctx.inbox()[i].message;
            if m.kind == kind::PHASE1_TOKEN {
                self.hold(ctx, m.words[0], m.words[1], m.words[2], m.words[3]);
            }
        }
    }

    fn is_halted(&self) -> bool {
        true
    }
}

impl Session<'_, '_> {
    pub(crate) fn phase1(&mut self, eta: u64, lambda: u64) -> Result<(), WalkError> {
        let g = self.g;
        let options = self.options;
        let n = g.node_count();
        let mut first_ids = Vec::with_capacity(n);
        let mut next = self.store.generated;
        for u in 0..n as NodeId {
            first_ids.push(next);
            next += eta * g.degree(u);
        }
        let total = next;
        let rngs = self.streams.get(Stream::Phase1);
        let store = &mut self.store;
        let trajectories = store.trajectories.take().map(|mut t| {
            t.resize(total as usize, Vec::new());
            RefCell::new(t)
        });
        let mut programs: Vec<Phase1Node<'_>> = rngs
            .iter_mut()
            .zip(store.held.iter_mut())
            .enumerate()
            .map(|(u, (rng, held))| Phase1Node {
                me: u as NodeId,
                rng,
                held,
                launch: eta * g.degree(u as NodeId),
                first_id: first_ids[u],
                lambda,
                trajectories: trajectories.as_ref(),
            })
            .collect();
        let result = self.sim.execute(g, &mut programs, &options, None);
        drop(programs);
        self.store.trajectories = trajectories.map(RefCell::into_inner);
        self.store.generated = total;
        self.log.absorb("phase1", &result?);
        Ok(())
    }
}

impl Walker<'_> {
    pub fn phase1_generate(&mut self, eta: u64, lambda: u64, seed: u64) -> Result<(WalkStore, RoundLog), WalkError> {
        if lambda == 0 || eta == 0 {
            return Err(WalkError::InvalidParams("phase 1 needs eta >= 1 and lambda >= 1".into()));
        }
        let mut session = self.session(seed, true);
        session.phase1(eta, lambda)?;
        Ok((session.store, session.log))
    }
}

/// Every node `x` generates `eta * d(x)` short walks with lengths uniform on
/// `[lambda, 2 lambda - 1]`; each record ends up at its destination.
pub fn phase1_generate(g: &Graph, eta: u64, lambda: u64, seed: u64) -> Result<(WalkStore, RoundLog), WalkError> {
    Walker::new(g).phase1_generate(eta, lambda, seed)
}
