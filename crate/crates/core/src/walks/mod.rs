//! Distributed random-walk protocols: naive token walks, short-walk
//! generation, sampling and stitching, regeneration and path verification.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::{EngineError, Message, RoundContext, RoundLog};
use crate::graph::NodeId;

pub mod aggregate;
mod collect;
mod gmw;
mod many;
mod naive;
mod phase1;
mod regenerate;
mod sample;
mod session;
mod single;
mod verify;

pub use gmw::get_more_walks;
pub use many::{many_random_walks, ManyWalksResult};
pub use naive::naive_walk;
pub use phase1::phase1_generate;
pub use regenerate::regenerate_walk;
pub use sample::{sample_destination, SampleOutcome};
pub use session::Walker;
pub use single::single_random_walk;
pub use verify::{verify_path, PathVerdict};
pub use aggregate::{convergecast, Convergecast};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WalkError {
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error("node {0} is not in the graph")]
    InvalidNode(NodeId),
    #[error("invalid walk parameters: {0}")]
    InvalidParams(String),
    #[error("short-walk trajectories were not retained; the walk cannot be regenerated")]
    StaleStore,
}

/// Tuning knobs for the stitched walk protocols.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WalkParams {
    pub ell: u64,
    /// Short-walk base length; `None` selects the default formula.
    pub lambda: Option<u64>,
    /// Short walks generated per unit of degree in Phase 1.
    pub eta: u64,
    pub c_lambda: f64,
    /// Reuse BFS trees across Sample-Destination calls from the same root.
    pub cache_bfs: bool,
    /// Collect the topology at the source when `ell > m^2`.
    pub topology_collection: bool,
    /// Keep short-walk trajectories so the walk can be regenerated.
    pub retain_trajectories: bool,
}

impl Default for WalkParams {
    fn default() -> Self {
        WalkParams {
            ell: 0,
            lambda: None,
            eta: 1,
            c_lambda: 1.0,
            cache_bfs: false,
            topology_collection: true,
            retain_trajectories: true,
        }
    }
}

impl WalkParams {
    pub fn new(ell: u64) -> Self {
        WalkParams { ell, ..Self::default() }
    }

    pub fn with_lambda(ell: u64, lambda: u64) -> Self {
        WalkParams { ell, lambda: Some(lambda), ..Self::default() }
    }

    pub(crate) fn validate(&self) -> Result<(), WalkError> {
        if self.lambda == Some(0) {
            return Err(WalkError::InvalidParams("lambda must be at least 1".into()));
        }
        if self.eta == 0 {
            return Err(WalkError::InvalidParams("eta must be at least 1".into()));
        }
        if !(self.c_lambda.is_finite() && self.c_lambda > 0.0) {
            return Err(WalkError::InvalidParams("c_lambda must be positive".into()));
        }
        Ok(())
    }
}

/// `max(1, ceil(c * sqrt(ell * D)))`.
pub fn default_lambda(ell: u64, diameter: u32, c_lambda: f64) -> u64 {
    ((c_lambda * ((ell as f64) * f64::from(diameter)).sqrt()).ceil() as u64).max(1)
}

/// `max(1, ceil(c * (sqrt(k * ell * D) + k)))`.
pub fn default_many_lambda(k: u64, ell: u64, diameter: u32, c_lambda: f64) -> u64 {
    let k_f = k as f64;
    ((c_lambda * ((k_f * ell as f64 * f64::from(diameter)).sqrt() + k_f)).ceil() as u64).max(1)
}

/// A precomputed walk, held by its destination.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShortWalk {
    pub source: NodeId,
    pub length: u64,
    pub destination: NodeId,
    pub used: bool,
    /// Simulator-side label linking the record to its trajectory.
    pub walk_id: u64,
}

/// Short walks grouped by the node that holds them.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkStore {
    pub held: Vec<Vec<ShortWalk>>,
    /// Node sequence of every generated walk, indexed by `walk_id`.
    pub trajectories: Option<Vec<Vec<NodeId>>>,
    pub generated: u64,
    pub consumed: u64,
}

impl WalkStore {
    pub fn new(n: usize, retain_trajectories: bool) -> Self {
        WalkStore {
            held: vec![Vec::new(); n],
            trajectories: retain_trajectories.then(Vec::new),
            generated: 0,
            consumed: 0,
        }
    }

    /// Sizes the per-node lists for an `n`-node graph.
    pub(crate) fn fit(&mut self, n: usize) {
        if self.held.len() < n {
            self.held.resize(n, Vec::new());
        }
    }

    pub fn unused_from(&self, source: NodeId) -> usize {
        self.held
            .iter()
            .flatten()
            .filter(|w| w.source == source && !w.used)
            .count()
    }

    pub fn all(&self) -> impl Iterator<Item = &ShortWalk> {
        self.held.iter().flatten()
    }
}

/// One stitched short walk inside a longer walk.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Segment {
    pub start: NodeId,
    pub offset: u64,
    pub length: u64,
    pub walk_id: u64,
    pub trajectory: Option<Vec<NodeId>>,
}

/// What a stitched walk needs to be replayed later.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WalkTrace {
    pub segments: Vec<Segment>,
    /// Positions recorded by nodes during the naive tail.
    pub tail: BTreeMap<NodeId, Vec<u64>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkResult {
    pub source: NodeId,
    pub ell: u64,
    pub endpoint: NodeId,
    /// `(node, offset)` for the source and every stitch point.
    pub connectors: Vec<(NodeId, u64)>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub positions: Option<BTreeMap<NodeId, Vec<u64>>>,
    pub round_log: RoundLog,
    pub lambda: u64,
    pub gmw_invocations: u64,
    #[serde(skip)]
    pub trace: Option<WalkTrace>,
}

impl WalkResult {
    /// The walk as a node sequence, when positions are known.
    pub fn sequence(&self) -> Option<Vec<NodeId>> {
        let positions = self.positions.as_ref()?;
        let mut seq = vec![NodeId::MAX; self.ell as usize + 1];
        for (&node, offsets) in positions {
            for &t in offsets {
                *seq.get_mut(t as usize)? = node;
            }
        }
        seq.iter().all(|&v| v != NodeId::MAX).then_some(seq)
    }
}

pub(crate) mod kind {
    pub const EXPLORE: u16 = 1;
    pub const CHILD: u16 = 2;
    pub const PHASE1_TOKEN: u16 = 10;
    pub const SAMPLE_UP: u16 = 20;
    pub const SAMPLE_DELIVER: u16 = 21;
    pub const SAMPLE_START: u16 = 22;
    pub const MORE_COUNT: u16 = 30;
    pub const WALK_TOKEN: u16 = 40;
    pub const REPLAY: u16 = 50;
    pub const ORDER: u16 = 60;
    pub const INTERVAL: u16 = 61;
    pub const EDGE: u16 = 70;
    pub const END: u16 = 71;
    pub const RESULT: u16 = 72;
    pub const ENTRY: u16 = 80;
    pub const DOWN: u16 = 81;
    pub const QUERY: u16 = 90;
    pub const MATCH: u16 = 91;
}

/// A node's remembered place in a BFS tree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LocalTree {
    pub parent: Option<usize>,
    pub children: Vec<usize>,
}

/// Node-local BFS construction. Every node sends exactly one message on
/// each port (CHILD to its parent, EXPLORE elsewhere) in the round after it
/// joins, so a node knows its children once it has heard from all ports.
#[derive(Debug, Clone, Default)]
pub(crate) struct BfsState {
    pub joined: bool,
    pub root: NodeId,
    pub level: u64,
    pub tree: LocalTree,
    heard: usize,
}

impl BfsState {
    /// Consumes BFS messages from the inbox.
    pub fn step(&mut self, ctx: &mut RoundContext<'_>, is_root: bool) {
        let mut first_explore: Option<(usize, Message)> = None;
        for d in ctx.inbox() {
            match d.message.kind {
                kind::EXPLORE => {
                    self.heard += 1;
                    if first_explore.is_none_or(|(p, _)| d.port < p) {
                        first_explore = Some((d.port, d.message));
                    }
                }
                kind::CHILD => {
                    self.heard += 1;
                    self.tree.children.push(d.port);
                }
                _ => {}
            }
        }
        if self.joined {
            return;
        }
        let parent = if is_root && ctx.round() == 1 {
            self.root = ctx.node();
            None
        } else if let Some((port, msg)) = first_explore {
            self.root = msg.words[0] as NodeId;
            self.level = msg.words[1] + 1;
            Some(port)
        } else {
            return;
        };
        self.joined = true;
        self.tree.parent = parent;
        for port in 0..ctx.ports().len() {
            let kind = if Some(port) == parent { kind::CHILD } else { kind::EXPLORE };
            ctx.send(port, Message::new(kind, [u64::from(self.root), self.level, 0, 0]));
        }
    }

    /// True once the node knows its parent and all of its children.
    pub fn complete(&self, degree_ports: usize) -> bool {
        self.joined && self.heard == degree_ports
    }
}

pub(crate) fn check_node(g: &crate::graph::Graph, v: NodeId) -> Result<(), WalkError> {
    if (v as usize) < g.node_count() {
        Ok(())
    } else {
        Err(WalkError::InvalidNode(v))
    }
}
