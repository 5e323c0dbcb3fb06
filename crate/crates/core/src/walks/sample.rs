use rand::Rng;

use crate::engine::{Message, NodeProgram, RoundContext, RoundLog};
use crate::graph::{Graph, NodeId};
use crate::rng::NodeRng;

use super::session::{Session, Stream, Walker};
use super::{check_node, kind, BfsState, LocalTree, ShortWalk, WalkError, WalkStore};

/// The sampled short walk (already marked used), or `None` when the root
/// had no unused walks left.
pub type SampleOutcome = Option<ShortWalk>;

#[derive(Clone, Copy)]
struct Candidate {
    owner: u64,
    record: u64,
    length: u64,
}

/// Sweep 1 builds a BFS tree (or reuses a cached one), Sweep 2 samples a
/// record while converging to the root, Sweep 3 walks back down to the
/// owner, deleting the record and handing over the walk token.
struct SampleNode<'a> {
    me: NodeId,
    is_root: bool,
    rng: &'a mut NodeRng,
    held: &'a mut Vec<ShortWalk>,
    bfs: BfsState,
    cached: Option<LocalTree>,
    started: bool,
    root: NodeId,
    ups: usize,
    total: u64,
    best: Option<Candidate>,
    best_from: Option<usize>,
    reported: bool,
    token: [u64; 2],
    decided: Option<Option<(NodeId, usize)>>,
}

impl SampleNode<'_> {
    fn offer(&mut self, count: u64, candidate: Candidate, from: Option<usize>) {
        if count == 0 {
            return;
        }
        self.total += count;
        if self.rng.random_range(0..self.total) < count {
            self.best = Some(candidate);
            self.best_from = from;
        }
    }

    fn offer_own(&mut self) {
        let mut count = 0u64;
        let mut pick = None;
        for (i, w) in self.held.iter().enumerate() {
            if w.source == self.root && !w.used {
                count += 1;
                if self.rng.random_range(0..count) == 0 {
                    pick = Some((i, w.length));
                }
            }
        }
        if let Some((record, length)) = pick {
            let candidate = Candidate { owner: u64::from(self.me), record: record as u64, length };
            self.offer(count, candidate, None);
        }
    }

    fn children(&self) -> &[usize] {
        match &self.cached {
            Some(tree) => &tree.children,
            None => &self.bfs.tree.children,
        }
    }

    fn parent(&self) -> Option<usize> {
        match &self.cached {
            Some(tree) => tree.parent,
            None => self.bfs.tree.parent,
        }
    }

    fn take_record(&mut self, record: usize) {
        debug_assert!(!self.held[record].used, "a record is consumed at most once");
        self.held[record].used = true;
    }
}

impl NodeProgram for SampleNode<'_> {
    fn on_round(&mut self, ctx: &mut RoundContext<'_>) {
        if self.cached.is_some() {
            let start = if self.is_root && ctx.round() == 1 {
                Some(u64::from(self.me))
            } else {
                ctx.inbox().iter().find(|d| d.message.kind == kind::SAMPLE_START).map(|d| d.message.words[0])
            };
            if let (Some(root), false) = (start, self.started) {
                self.started = true;
                self.root = root as NodeId;
                for &c in self.children() {
                    ctx.send(c, Message::new(kind::SAMPLE_START, [root, 0, 0, 0]));
                }
                self.offer_own();
            }
        } else {
            let was_joined = self.bfs.joined;
            self.bfs.step(ctx, self.is_root);
            if self.bfs.joined && !was_joined {
                self.started = true;
                self.root = self.bfs.root;
                self.offer_own();
            }
        }

        for i in 0..ctx.inbox().len() {
            let d = ctx.inbox()[i];
            let w = d.message.words;
            match d.message.kind {
                kind::SAMPLE_UP => {
                    self.ups += 1;
                    let candidate = Candidate { owner: w[0], record: w[1], length: w[3] };
                    self.offer(w[2], candidate, Some(d.port));
                }
                kind::SAMPLE_DELIVER => match self.best_from {
                    None => self.take_record(w[0] as usize),
                    Some(port) => ctx.send(port, d.message),
                },
                _ => {}
            }
        }

        let tree_known = if self.cached.is_some() {
            self.started
        } else {
            self.bfs.complete(ctx.ports().len())
        };
        if self.reported || !tree_known || self.ups < self.children().len() {
            return;
        }
        self.reported = true;
        let best = self.best.filter(|_| self.total > 0);
        if !self.is_root {
            let c = best.unwrap_or(Candidate { owner: 0, record: 0, length: 0 });
            let parent = self.parent().expect("non-root has a parent");
            ctx.send_queued(parent, Message::new(kind::SAMPLE_UP, [c.owner, c.record, self.total, c.length]));
            return;
        }
        self.decided = Some(best.map(|c| {
            match self.best_from {
                None => self.take_record(c.record as usize),
                Some(port) => {
                    let deliver = [c.record, self.token[0], self.token[1] + c.length, 0];
                    ctx.send(port, Message::new(kind::SAMPLE_DELIVER, deliver));
                }
            }
            (c.owner as NodeId, c.record as usize)
        }));
    }

    fn is_halted(&self) -> bool {
        true
    }
}

impl Session<'_, '_> {
    /// Samples and consumes one unused short walk that started at `v`. The
    /// walk token `(source, offset)` travels to the record's holder.
    pub(crate) fn sample(&mut self, v: NodeId, token: [u64; 2]) -> Result<SampleOutcome, WalkError> {
        let g = self.g;
        let options = self.options;
        let cached: Option<Vec<LocalTree>> = self.bfs_cache.as_ref().and_then(|c| c.get(&v).cloned());
        let rngs = self.streams.get(Stream::Sample);
        let mut cached_iter = cached.map(Vec::into_iter);
        let mut programs: Vec<SampleNode<'_>> = rngs
            .iter_mut()
            .zip(self.store.held.iter_mut())
            .enumerate()
            .map(|(u, (rng, held))| SampleNode {
                me: u as NodeId,
                is_root: u as NodeId == v,
                rng,
                held,
                bfs: BfsState::default(),
                cached: cached_iter.as_mut().and_then(Iterator::next),
                started: false,
                root: v,
                ups: 0,
                total: 0,
                best: None,
                best_from: None,
                reported: false,
                token,
                decided: None,
            })
            .collect();
        let result = self.sim.execute(g, &mut programs, &options, None);
        let decided = programs[v as usize].decided;
        let learned: Option<Vec<LocalTree>> = (self.bfs_cache.is_some() && cached_iter.is_none())
            .then(|| programs.iter().map(|p| p.bfs.tree.clone()).collect());
        drop(programs);
        let sub = result?;
        if let (Some(cache), Some(trees)) = (self.bfs_cache.as_mut(), learned) {
            cache.insert(v, trees);
        }
        self.log.absorb("sample_destination", &sub);
        let decided = decided.expect("root always decides once the sweep completes");
        Ok(decided.map(|(owner, record)| {
            self.store.consumed += 1;
            self.store.held[owner as usize][record]
        }))
    }
}

impl Walker<'_> {
    pub fn sample_destination(
        &mut self,
        store: &mut WalkStore,
        v: NodeId,
        seed: u64,
    ) -> Result<(SampleOutcome, RoundLog), WalkError> {
        check_node(self.g, v)?;
        let n = self.g.node_count();
        let mut session = self.session(seed, false);
        session.store = std::mem::take(store);
        session.store.fit(n);
        let outcome = session.sample(v, [u64::from(v), 0]);
        *store = std::mem::take(&mut session.store);
        Ok((outcome?, session.log))
    }
}

/// Draws one unused short walk from `v` uniformly among all of them and
/// marks it used.
pub fn sample_destination(
    g: &Graph,
    store: &mut WalkStore,
    v: NodeId,
    seed: u64,
) -> Result<(SampleOutcome, RoundLog), WalkError> {
    Walker::new(g).sample_destination(store, v, seed)
}
