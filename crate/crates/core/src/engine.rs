//! Synchronous CONGEST execution with exact round and congestion accounting.
//!
//! A message handed to [`RoundContext::send`] or [`RoundContext::send_queued`]
//! in round `r` is transmitted in round `r` (or later, if queued) and appears
//! in the receiver's inbox at the start of the following round. A run ends
//! once every program is halted and nothing is queued or in flight; a halted
//! program is woken again by any delivery.

use std::collections::{BTreeMap, VecDeque};
use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{self, Graph, NodeId, Port};
use crate::rng::{derive_rng, NodeRng};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("round limit of {max_rounds} exceeded")]
    RoundLimitExceeded { max_rounds: u64 },
    #[error("node {node} sent more than {capacity} message(s) on port {port} in round {round}")]
    BandwidthViolation { round: u64, node: NodeId, port: usize, capacity: u32 },
    #[error("node {node} addressed nonexistent port {port}")]
    InvalidPort { node: NodeId, port: usize },
}

/// One CONGEST message: a kind tag plus four machine words.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Message {
    pub kind: u16,
    pub words: [u64; 4],
}

impl Message {
    pub const fn new(kind: u16, words: [u64; 4]) -> Self {
        Message { kind, words }
    }
}

/// A message as seen by its receiver: `port` is the receiver's local port.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Delivery {
    pub port: usize,
    pub message: Message,
}

/// Behavior of one node. Programs see only what [`RoundContext`] exposes.
pub trait NodeProgram {
    fn on_round(&mut self, ctx: &mut RoundContext<'_>);
    fn is_halted(&self) -> bool;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunOptions {
    pub max_rounds: u64,
    /// Lets an edge of multiplicity `m` carry `m` messages per direction.
    pub bandwidth_per_multiplicity: bool,
}

impl RunOptions {
    pub fn with_max_rounds(max_rounds: u64) -> Self {
        RunOptions { max_rounds, ..Self::default() }
    }
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions { max_rounds: 10_000_000, bandwidth_per_multiplicity: false }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct RoundLog {
    pub total_rounds: u64,
    pub messages_delivered: u64,
    pub max_edge_queue: u64,
    pub phase_breakdown: BTreeMap<String, u64>,
    /// Longest single sub-run per label.
    #[serde(default)]
    pub phase_max: BTreeMap<String, u64>,
}

impl RoundLog {
    /// Appends a sequential sub-run under `label`.
    pub fn absorb(&mut self, label: &str, sub: &RoundLog) {
        self.total_rounds += sub.total_rounds;
        self.messages_delivered += sub.messages_delivered;
        self.max_edge_queue = self.max_edge_queue.max(sub.max_edge_queue);
        *self.phase_breakdown.entry(label.to_string()).or_default() += sub.total_rounds;
        let longest = self.phase_max.entry(label.to_string()).or_default();
        *longest = (*longest).max(sub.total_rounds);
    }

    /// Appends a log that already carries its own phase labels.
    pub fn merge(&mut self, other: &RoundLog) {
        self.total_rounds += other.total_rounds;
        self.messages_delivered += other.messages_delivered;
        self.max_edge_queue = self.max_edge_queue.max(other.max_edge_queue);
        for (label, rounds) in &other.phase_breakdown {
            *self.phase_breakdown.entry(label.clone()).or_default() += rounds;
        }
        for (label, &rounds) in &other.phase_max {
            let longest = self.phase_max.entry(label.clone()).or_default();
            *longest = (*longest).max(rounds);
        }
    }

    pub fn phase(&self, label: &str) -> u64 {
        self.phase_breakdown.get(label).copied().unwrap_or(0)
    }

    pub fn phase_longest(&self, label: &str) -> u64 {
        self.phase_max.get(label).copied().unwrap_or(0)
    }
}

/// One transmitted message.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TranscriptRecord {
    pub round: u64,
    pub from: NodeId,
    pub to: NodeId,
    pub port: usize,
    pub payload: Message,
}

/// Writes a transcript as JSON lines.
pub fn write_transcript<W: Write>(records: &[TranscriptRecord], mut out: W) -> std::io::Result<()> {
    for record in records {
        serde_json::to_writer(&mut out, record)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

pub fn read_transcript(text: &str) -> Result<Vec<TranscriptRecord>, serde_json::Error> {
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(serde_json::from_str)
        .collect()
}

/// Per-node view of one round.
pub struct RoundContext<'a> {
    round: u64,
    node: NodeId,
    ports: &'a [Port],
    cumulative: &'a [u64],
    unit: bool,
    edge_base: usize,
    inbox: &'a [Delivery],
    out: &'a mut Outbox,
}

impl RoundContext<'_> {
    pub fn round(&self) -> u64 {
        self.round
    }

    pub fn node(&self) -> NodeId {
        self.node
    }

    pub fn ports(&self) -> &[Port] {
        self.ports
    }

    pub fn degree(&self) -> u64 {
        self.cumulative.last().copied().unwrap_or(0)
    }

    pub fn inbox(&self) -> &[Delivery] {
        self.inbox
    }

    /// Port chosen with probability multiplicity / degree.
    pub fn sample_port<R: Rng + ?Sized>(&self, rng: &mut R) -> usize {
        graph::sample_port(self.ports, self.cumulative, self.unit, rng)
    }

    fn capacity(&self, port: usize) -> u32 {
        if self.out.per_multiplicity {
            self.ports[port].multiplicity
        } else {
            1
        }
    }

    /// Transmits this round; exceeding the edge capacity fails the run.
    pub fn send(&mut self, port: usize, message: Message) {
        if port >= self.ports.len() {
            self.out.fail(EngineError::InvalidPort { node: self.node, port });
            return;
        }
        let capacity = self.capacity(port);
        let e = self.edge_base + port;
        let used = &mut self.out.direct_count[e];
        if *used >= capacity {
            let err = EngineError::BandwidthViolation {
                round: self.round,
                node: self.node,
                port,
                capacity,
            };
            self.out.fail(err);
            return;
        }
        if *used == 0 {
            self.out.touched.push(e);
        }
        *used += 1;
        self.out.direct.push((e, message));
    }

    /// Appends to the edge's FIFO; the engine drains it with whatever
    /// capacity direct sends leave over, this round and later.
    pub fn send_queued(&mut self, port: usize, message: Message) {
        if port >= self.ports.len() {
            self.out.fail(EngineError::InvalidPort { node: self.node, port });
            return;
        }
        let e = self.edge_base + port;
        let queue = &mut self.out.queues[e];
        if queue.is_empty() {
            self.out.active_queues.push(e);
        }
        queue.push_back(message);
        self.out.max_queue = self.out.max_queue.max(queue.len() as u64);
    }
}

#[derive(Default)]
struct Outbox {
    per_multiplicity: bool,
    direct_count: Vec<u32>,
    touched: Vec<usize>,
    direct: Vec<(usize, Message)>,
    queues: Vec<VecDeque<Message>>,
    active_queues: Vec<usize>,
    max_queue: u64,
    error: Option<EngineError>,
}

impl Outbox {
    fn fail(&mut self, err: EngineError) {
        self.error.get_or_insert(err);
    }

    fn reset(&mut self, edges: usize, per_multiplicity: bool) {
        self.per_multiplicity = per_multiplicity;
        self.direct_count.clear();
        self.direct_count.resize(edges, 0);
        self.touched.clear();
        self.direct.clear();
        if self.queues.len() < edges {
            self.queues.resize_with(edges, VecDeque::new);
        }
        for &e in &self.active_queues {
            self.queues[e].clear();
        }
        self.active_queues.clear();
        self.max_queue = 0;
        self.error = None;
    }
}

/// Reusable scratch space for engine runs.
#[derive(Default)]
pub struct Simulator {
    out: Outbox,
    inbox: Vec<Vec<Delivery>>,
    next_inbox: Vec<Vec<Delivery>>,
    awake: Vec<NodeId>,
    receivers: Vec<NodeId>,
    schedule: Vec<NodeId>,
    is_awake: Vec<bool>,
}

impl Simulator {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs `programs[u]` at node `u` until quiescence.
    pub fn execute<P: NodeProgram>(
        &mut self,
        g: &Graph,
        programs: &mut [P],
        options: &RunOptions,
        mut transcript: Option<&mut Vec<TranscriptRecord>>,
    ) -> Result<RoundLog, EngineError> {
        let n = g.node_count();
        assert_eq!(programs.len(), n, "one program per node");
        self.out.reset(g.directed_edge_count(), options.bandwidth_per_multiplicity);
        for buf in [&mut self.inbox, &mut self.next_inbox] {
            buf.resize_with(n.max(buf.len()), Vec::new);
            buf.iter_mut().for_each(Vec::clear);
        }
        self.is_awake.clear();
        self.is_awake.resize(n, false);
        self.awake.clear();
        self.receivers.clear();

        let mut log = RoundLog::default();
        let mut round = 0u64;
        loop {
            round += 1;
            if round > options.max_rounds.saturating_add(1) {
                return Err(EngineError::RoundLimitExceeded { max_rounds: options.max_rounds });
            }

            // Everyone wakes in round 1; afterwards only running programs
            // and receivers are scheduled, in ascending id order.
            self.schedule.clear();
            if round == 1 {
                self.schedule.extend(0..n as NodeId);
            } else {
                self.schedule.extend_from_slice(&self.awake);
                self.schedule.extend_from_slice(&self.receivers);
                self.schedule.sort_unstable();
                self.schedule.dedup();
            }
            for &u in &self.awake {
                self.is_awake[u as usize] = false;
            }
            self.awake.clear();
            self.receivers.clear();

            for i in 0..self.schedule.len() {
                let u = self.schedule[i];
                let program = &mut programs[u as usize];
                let mut ctx = RoundContext {
                    round,
                    node: u,
                    ports: g.ports(u),
                    cumulative: g.cumulative(u),
                    unit: g.is_simple(),
                    edge_base: g.directed_edge(u, 0),
                    inbox: &self.inbox[u as usize],
                    out: &mut self.out,
                };
                program.on_round(&mut ctx);
                if !program.is_halted() && !self.is_awake[u as usize] {
                    self.is_awake[u as usize] = true;
                    self.awake.push(u);
                }
                self.inbox[u as usize].clear();
            }
            if let Some(err) = self.out.error.take() {
                return Err(err);
            }

            // Transmission: direct sends first, then queue drains in
            // ascending directed-edge order.
            let mut transmitted = 0u64;
            let out = &mut self.out;
            for &(e, message) in &out.direct {
                let (from, port, to) = g.directed_endpoints(e);
                let back = g.reverse_port(from, port);
                if self.next_inbox[to as usize].is_empty() {
                    self.receivers.push(to);
                }
                self.next_inbox[to as usize].push(Delivery { port: back, message });
                transmitted += 1;
                if let Some(t) = transcript.as_deref_mut() {
                    t.push(TranscriptRecord { round, from, to, port, payload: message });
                }
            }
            out.direct.clear();
            if !out.active_queues.is_empty() {
                out.active_queues.sort_unstable();
                let mut still_active = 0;
                for k in 0..out.active_queues.len() {
                    let e = out.active_queues[k];
                    let (from, port, to) = g.directed_endpoints(e);
                    let capacity = if out.per_multiplicity {
                        g.ports(from)[port].multiplicity
                    } else {
                        1
                    };
                    let budget = capacity.saturating_sub(out.direct_count[e]);
                    let back = g.reverse_port(from, port);
                    for _ in 0..budget {
                        let Some(message) = out.queues[e].pop_front() else { break };
                        if self.next_inbox[to as usize].is_empty() {
                            self.receivers.push(to);
                        }
                        self.next_inbox[to as usize].push(Delivery { port: back, message });
                        transmitted += 1;
                        if let Some(t) = transcript.as_deref_mut() {
                            t.push(TranscriptRecord { round, from, to, port, payload: message });
                        }
                    }
                    if !out.queues[e].is_empty() {
                        out.active_queues[still_active] = e;
                        still_active += 1;
                    }
                }
                out.active_queues.truncate(still_active);
            }
            for &e in &out.touched {
                out.direct_count[e] = 0;
            }
            out.touched.clear();

            if transmitted > 0 {
                if round > options.max_rounds {
                    return Err(EngineError::RoundLimitExceeded { max_rounds: options.max_rounds });
                }
                log.total_rounds = round;
                log.messages_delivered += transmitted;
            } else if self.awake.is_empty() && out.active_queues.is_empty() {
                break;
            }
            std::mem::swap(&mut self.inbox, &mut self.next_inbox);
        }
        log.max_edge_queue = self.out.max_queue;
        Ok(log)
    }
}

/// What a program factory sees when a node is created.
pub struct NodeInit<'a> {
    pub id: NodeId,
    pub ports: &'a [Port],
    pub rng: NodeRng,
}

/// Builds one program per node (each with its own derived stream under the
/// label `"node"`) and runs them to quiescence. Returns the final programs,
/// which double as the per-node outputs.
pub fn run<P, F>(g: &Graph, mut factory: F, seed: u64, max_rounds: u64) -> Result<(Vec<P>, RoundLog), EngineError>
where
    P: NodeProgram,
    F: FnMut(NodeInit<'_>) -> P,
{
    let mut programs: Vec<P> = (0..g.node_count() as NodeId)
        .map(|id| factory(NodeInit { id, ports: g.ports(id), rng: derive_rng(seed, id, "node") }))
        .collect();
    let log = Simulator::new().execute(g, &mut programs, &RunOptions::with_max_rounds(max_rounds), None)?;
    Ok((programs, log))
}

/// Like [`run`], also returning the full message transcript.
pub fn run_with_transcript<P, F>(
    g: &Graph,
    mut factory: F,
    seed: u64,
    options: &RunOptions,
) -> Result<(Vec<P>, RoundLog, Vec<TranscriptRecord>), EngineError>
where
    P: NodeProgram,
    F: FnMut(NodeInit<'_>) -> P,
{
    let mut programs: Vec<P> = (0..g.node_count() as NodeId)
        .map(|id| factory(NodeInit { id, ports: g.ports(id), rng: derive_rng(seed, id, "node") }))
        .collect();
    let mut transcript = Vec::new();
    let log = Simulator::new().execute(g, &mut programs, options, Some(&mut transcript))?;
    Ok((programs, log, transcript))
}
