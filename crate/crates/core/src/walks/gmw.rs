use std::cell::RefCell;

use rand::Rng;

use crate::engine::{Message, NodeProgram, RoundContext, RoundLog};
use crate::graph::{Graph, NodeId};
use crate::rng::NodeRng;

use super::session::{Session, Stream, Walker};
use super::{check_node, kind, ShortWalk, WalkError, WalkStore};

/// Simulator-side labels of the anonymous walks in transit. Messages carry
/// only counts; labels let trajectories be recorded for regeneration.
struct Labels {
    /// `[parity][node]`: ids arriving at `node` in rounds of that parity.
    arriving: [Vec<Vec<u64>>; 2],
    trajectories: Option<Vec<Vec<NodeId>>>,
}

/// Walks from `source` advance one step per round as per-edge counts. After
/// `lambda` steps each walk stops before step `lambda + i` with probability
/// `1 / (lambda - i)`, which makes the final length uniform on
/// `[lambda, 2 lambda - 1]`.
struct MoreNode<'a> {
    me: NodeId,
    source: NodeId,
    rng: &'a mut NodeRng,
    held: &'a mut Vec<ShortWalk>,
    lambda: u64,
    launch: u64,
    first_id: u64,
    labels: &'a RefCell<Labels>,
    counts: Vec<u64>,
    outgoing: Vec<Vec<u64>>,
}

impl NodeProgram for MoreNode<'_> {
    fn on_round(&mut self, ctx: &mut RoundContext<'_>) {
        let round = ctx.round();
        let mut labels = self.labels.borrow_mut();
        let mut ids = if self.launch > 0 {
            let ids: Vec<u64> = (self.first_id..self.first_id + self.launch).collect();
            self.launch = 0;
            ids
        } else {
            let expected: u64 = ctx
                .inbox()
                .iter()
                .filter(|d| d.message.kind == kind::MORE_COUNT)
                .map(|d| d.message.words[1])
                .sum();
            let ids = std::mem::take(&mut labels.arriving[(round % 2) as usize][self.me as usize]);
            debug_assert_eq!(ids.len() as u64, expected);
            ids
        };
        if ids.is_empty() {
            return;
        }
        if let Some(t) = labels.trajectories.as_mut() {
            for &id in &ids {
                t[id as usize].push(self.me);
            }
        }

        // Every walk held now has taken `round - 1` steps.
        let steps = round - 1;
        if steps >= self.lambda {
            let i = steps - self.lambda;
            let stop_below = self.lambda - i;
            ids.retain(|&id| {
                if self.rng.random_range(0..stop_below) == 0 {
                    self.held.push(ShortWalk {
                        source: self.source,
                        length: steps,
                        destination: self.me,
                        used: false,
                        walk_id: id,
                    });
                    false
                } else {
                    true
                }
            });
        }

        let ports = ctx.ports().len();
        self.counts.clear();
        self.counts.resize(ports, 0);
        self.outgoing.resize_with(ports, Vec::new);
        for id in ids {
            let port = ctx.sample_port(self.rng);
            self.counts[port] += 1;
            self.outgoing[port].push(id);
        }
        let next = ((round + 1) % 2) as usize;
        for port in 0..ports {
            if self.counts[port] > 0 {
                let neighbor = ctx.ports()[port].neighbor as usize;
                labels.arriving[next][neighbor].append(&mut self.outgoing[port]);
                let m = Message::new(kind::MORE_COUNT, [u64::from(self.source), self.counts[port], 0, 0]);
                ctx.send(port, m);
            }
        }
    }

    fn is_halted(&self) -> bool {
        true
    }
}

impl Session<'_, '_> {
    /// Adds `count` fresh short walks from `v`.
    pub(crate) fn more(&mut self, v: NodeId, count: u64, lambda: u64) -> Result<(), WalkError> {
        let g = self.g;
        let options = self.options;
        let n = g.node_count();
        let first_id = self.store.generated;
        let total = first_id + count;
        let trajectories = self.store.trajectories.take().map(|mut t| {
            t.resize(total as usize, Vec::new());
            t
        });
        let labels = RefCell::new(Labels { arriving: [vec![Vec::new(); n], vec![Vec::new(); n]], trajectories });
        let rngs = self.streams.get(Stream::More);
        let mut programs: Vec<MoreNode<'_>> = rngs
            .iter_mut()
            .zip(self.store.held.iter_mut())
            .enumerate()
            .map(|(u, (rng, held))| MoreNode {
                me: u as NodeId,
                source: v,
                rng,
                held,
                lambda,
                launch: if u as NodeId == v { count } else { 0 },
                first_id,
                labels: &labels,
                counts: Vec::new(),
                outgoing: Vec::new(),
            })
            .collect();
        let result = self.sim.execute(g, &mut programs, &options, None);
        drop(programs);
        self.store.trajectories = labels.into_inner().trajectories;
        self.store.generated = total;
        self.log.absorb("get_more_walks", &result?);
        Ok(())
    }
}

impl Walker<'_> {
    pub fn get_more_walks(
        &mut self,
        store: &mut WalkStore,
        v: NodeId,
        ell: u64,
        lambda: u64,
        seed: u64,
    ) -> Result<RoundLog, WalkError> {
        check_node(self.g, v)?;
        if lambda == 0 || lambda > ell {
            return Err(WalkError::InvalidParams(format!("need 1 <= lambda <= ell, got lambda={lambda}, ell={ell}")));
        }
        let n = self.g.node_count();
        let mut session = self.session(seed, false);
        session.store = std::mem::take(store);
        session.store.fit(n);
        let result = session.more(v, ell / lambda, lambda);
        *store = std::mem::take(&mut session.store);
        result?;
        Ok(session.log)
    }
}

/// Generates `floor(ell / lambda)` new short walks from `v` without
/// congestion.
pub fn get_more_walks(
    g: &Graph,
    store: &mut WalkStore,
    v: NodeId,
    ell: u64,
    lambda: u64,
    seed: u64,
) -> Result<RoundLog, WalkError> {
    Walker::new(g).get_more_walks(store, v, ell, lambda, seed)
}
