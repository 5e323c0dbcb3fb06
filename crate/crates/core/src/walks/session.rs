use std::cell::OnceCell;
use std::collections::HashMap;

use crate::engine::{RoundLog, RunOptions, Simulator};
use crate::graph::{Graph, NodeId};
use crate::rng::{node_rngs, NodeRng};

use super::{LocalTree, WalkStore};

/// Per-protocol random streams, one per node each.
#[derive(Clone, Copy, PartialEq, Eq)]
pub(crate) enum Stream {
    Phase1,
    Sample,
    More,
    Walk,
    Collect,
}

impl Stream {
    const ALL: usize = 5;

    fn label(self) -> &'static str {
        match self {
            Stream::Phase1 => "phase1",
            Stream::Sample => "sample",
            Stream::More => "more",
            Stream::Walk => "walk",
            Stream::Collect => "collect",
        }
    }
}

/// Reusable per-graph context: caches the diameter and the engine scratch.
pub struct Walker<'g> {
    pub(crate) g: &'g Graph,
    diameter: OnceCell<u32>,
    pub(crate) sim: Simulator,
    pub options: RunOptions,
}

impl<'g> Walker<'g> {
    pub fn new(g: &'g Graph) -> Self {
        Walker { g, diameter: OnceCell::new(), sim: Simulator::new(), options: RunOptions::default() }
    }

    pub fn with_options(g: &'g Graph, options: RunOptions) -> Self {
        Walker { options, ..Self::new(g) }
    }

    pub fn graph(&self) -> &'g Graph {
        self.g
    }

    pub fn diameter(&self) -> u32 {
        *self.diameter.get_or_init(|| self.g.diameter())
    }

    pub(crate) fn session(&mut self, seed: u64, retain_trajectories: bool) -> Session<'_, 'g> {
        let n = self.g.node_count();
        Session {
            g: self.g,
            options: self.options,
            sim: &mut self.sim,
            streams: Streams { seed, n, slots: Default::default() },
            store: WalkStore::new(n, retain_trajectories),
            log: RoundLog::default(),
            bfs_cache: None,
        }
    }
}

/// Lazily derived node streams, one vector per protocol label.
pub(crate) struct Streams {
    seed: u64,
    n: usize,
    slots: [Option<Vec<NodeRng>>; Stream::ALL],
}

impl Streams {
    pub fn get(&mut self, stream: Stream) -> &mut Vec<NodeRng> {
        let (seed, n) = (self.seed, self.n);
        self.slots[stream as usize].get_or_insert_with(|| node_rngs(seed, n, stream.label()))
    }
}

/// State shared by the sub-protocols of one protocol invocation. Node
/// streams persist across sub-runs, so each draws fresh randomness.
pub(crate) struct Session<'w, 'g> {
    pub g: &'g Graph,
    pub options: RunOptions,
    pub sim: &'w mut Simulator,
    pub streams: Streams,
    pub store: WalkStore,
    pub log: RoundLog,
    /// Node-local memory of BFS trees by root, when caching is enabled.
    pub bfs_cache: Option<HashMap<NodeId, Vec<LocalTree>>>,
}
