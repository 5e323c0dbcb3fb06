//! Mixing-time estimation from a source: endpoints of many walks of length
//! `ell` are tested for closeness to the stationary distribution, `ell` is
//! doubled until the test passes, then the boundary is binary-searched.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::distribution::Distribution;
use crate::engine::RoundLog;
use crate::graph::{Graph, NodeId};
use crate::rng::sub_seed;
use crate::walks::{check_node, WalkError, WalkParams, Walker};

#[derive(Debug, Error)]
pub enum MixingError {
    #[error("mixing time is undefined on a bipartite graph")]
    BipartiteGraph,
    #[error("closeness test needs at least {need} samples, got {have}")]
    InsufficientSamples { have: u64, need: u64 },
    #[error("no length up to {max_ell} passed the closeness test")]
    NoPass { max_ell: u64 },
    #[error("invalid mixing configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Walk(#[from] WalkError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Verdict {
    Pass,
    Fail,
}

/// Constants of the bucketed closeness test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClosenessParams {
    pub epsilon: f64,
    /// Minimum samples are `c_k * sqrt(n) * log2(n) / epsilon^2`.
    pub c_k: f64,
    /// Coarsened L1 threshold is `c_theta * sqrt(buckets / K)`.
    pub c_theta: f64,
    /// Count deviations beyond `sigma` binomial standard deviations fail.
    pub sigma: f64,
}

pub const DEFAULT_EPSILON: f64 = 1.0 / (12.0 * std::f64::consts::E);

impl Default for ClosenessParams {
    fn default() -> Self {
        ClosenessParams { epsilon: DEFAULT_EPSILON, c_k: 0.005, c_theta: 3.0, sigma: 4.0 }
    }
}

impl ClosenessParams {
    pub fn min_samples(&self, n: usize) -> u64 {
        let n = n as f64;
        (self.c_k * n.sqrt() * n.log2().max(1.0) / (self.epsilon * self.epsilon)).ceil() as u64
    }

    fn validate(&self) -> Result<(), MixingError> {
        let ok = |x: f64| x.is_finite() && x > 0.0;
        if !(ok(self.epsilon) && ok(self.c_k) && ok(self.c_theta) && ok(self.sigma)) {
            return Err(MixingError::InvalidConfig("closeness constants must be positive".into()));
        }
        Ok(())
    }
}

/// Bucket label of a stationary probability: `floor(log_{1+eps}(1/p))`.
/// Computable by a node from its degree and `2m` alone.
pub fn bucket_label(p: f64, epsilon: f64) -> u64 {
    ((1.0 / p).ln() / epsilon.ln_1p()).floor() as u64
}

/// Nodes grouped by stationary probability into geometric classes of
/// ratio `1 + eps`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BucketPartition {
    pub epsilon: f64,
    pub labels: Vec<u64>,
    pub buckets: Vec<Vec<NodeId>>,
    pub bucket_mass: Vec<f64>,
}

impl BucketPartition {
    pub fn new(pi: &Distribution, epsilon: f64) -> Self {
        let mut groups: BTreeMap<u64, Vec<NodeId>> = BTreeMap::new();
        for (v, &p) in pi.probs().iter().enumerate() {
            if p > 0.0 {
                groups.entry(bucket_label(p, epsilon)).or_default().push(v as NodeId);
            }
        }
        let labels = groups.keys().copied().collect();
        let bucket_mass = groups.values().map(|vs| vs.iter().map(|&v| pi.probs()[v as usize]).sum()).collect();
        BucketPartition { epsilon, labels, buckets: groups.into_values().collect(), bucket_mass }
    }

    pub fn len(&self) -> usize {
        self.buckets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buckets.is_empty()
    }
}

/// Sample summaries the decision needs; obtainable either from the raw
/// samples or by aggregation over the network.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSummary {
    pub samples: u64,
    /// Sample counts keyed by bucket label.
    pub bucket_counts: BTreeMap<u64, u64>,
    /// Nodes whose own count deviates beyond the binomial band.
    pub node_violations: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosenessOutcome {
    pub verdict: Verdict,
    pub coarse_l1: f64,
    pub threshold: f64,
    pub bucket_violations: u64,
    pub node_violations: u64,
}

fn outside_band(count: u64, k: u64, p: f64, sigma: f64) -> bool {
    let mean = k as f64 * p;
    let sd = (k as f64 * p * (1.0 - p)).max(0.0).sqrt();
    (count as f64 - mean).abs() > sigma * sd + 1.0
}

/// Whether node `v`'s own count is suspicious; evaluated locally by `v`.
pub fn node_violates(count: u64, k: u64, p: f64, params: &ClosenessParams) -> bool {
    outside_band(count, k, p, params.sigma)
}

/// PASS iff the coarsened L1 distance is within threshold, no bucket count
/// and no node count leaves its binomial band.
pub fn decide(summary: &SampleSummary, partition: &BucketPartition, params: &ClosenessParams) -> ClosenessOutcome {
    let k = summary.samples;
    let kf = k as f64;
    let mut coarse_l1 = 0.0;
    let mut bucket_violations = 0;
    for (label, &mass) in partition.labels.iter().zip(&partition.bucket_mass) {
        let count = summary.bucket_counts.get(label).copied().unwrap_or(0);
        coarse_l1 += (count as f64 / kf - mass).abs();
        bucket_violations += u64::from(outside_band(count, k, mass, params.sigma));
    }
    let stray: u64 = summary
        .bucket_counts
        .iter()
        .filter(|(label, _)| !partition.labels.contains(label))
        .map(|(_, &c)| c)
        .sum();
    coarse_l1 += stray as f64 / kf;
    bucket_violations += u64::from(stray > 0);
    let threshold = params.c_theta * (partition.len() as f64 / kf).sqrt();
    let pass = coarse_l1 <= threshold && bucket_violations == 0 && summary.node_violations == 0;
    ClosenessOutcome {
        verdict: if pass { Verdict::Pass } else { Verdict::Fail },
        coarse_l1,
        threshold,
        bucket_violations,
        node_violations: summary.node_violations,
    }
}

/// Centralized summary of a sample multiset.
pub fn summarize(samples: &[NodeId], pi: &Distribution, params: &ClosenessParams) -> SampleSummary {
    let k = samples.len() as u64;
    let mut per_node = vec![0u64; pi.len()];
    for &s in samples {
        per_node[s as usize] += 1;
    }
    let mut summary = SampleSummary { samples: k, ..SampleSummary::default() };
    for (v, &count) in per_node.iter().enumerate() {
        let p = pi.probs()[v];
        if count > 0 {
            let label = if p > 0.0 { bucket_label(p, params.epsilon) } else { u64::MAX };
            *summary.bucket_counts.entry(label).or_default() += count;
        }
        summary.node_violations += u64::from(node_violates(count, k, p, params));
    }
    summary
}

pub fn closeness_report(
    samples: &[NodeId],
    pi: &Distribution,
    params: &ClosenessParams,
) -> Result<ClosenessOutcome, MixingError> {
    params.validate()?;
    let need = params.min_samples(pi.len());
    if (samples.len() as u64) < need {
        return Err(MixingError::InsufficientSamples { have: samples.len() as u64, need });
    }
    let partition = BucketPartition::new(pi, params.epsilon);
    Ok(decide(&summarize(samples, pi, params), &partition, params))
}

/// Pure function of its inputs, with the default test constants.
pub fn closeness_test(samples: &[NodeId], pi: &Distribution, epsilon: f64) -> Result<Verdict, MixingError> {
    let params = ClosenessParams { epsilon, ..ClosenessParams::default() };
    Ok(closeness_report(samples, pi, &params)?.verdict)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MixingConfig {
    /// Walks per tested length; `None` selects `ceil(10 sqrt(n) log2 n)`.
    pub samples: Option<u64>,
    pub reps: u32,
    pub max_ell: u64,
    pub closeness: ClosenessParams,
}

impl Default for MixingConfig {
    fn default() -> Self {
        MixingConfig { samples: None, reps: 3, max_ell: 1 << 20, closeness: ClosenessParams::default() }
    }
}

impl MixingConfig {
    pub fn samples_for(&self, n: usize) -> u64 {
        self.samples.unwrap_or_else(|| {
            let n = n as f64;
            (10.0 * n.sqrt() * n.log2().max(1.0)).ceil() as u64
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub ell: u64,
    pub verdict: Verdict,
    pub passes: u32,
    pub reps: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingEstimate {
    pub x: NodeId,
    /// Largest length judged FAIL (0 when length 1 already passes).
    pub lower: u64,
    /// Smallest length judged PASS.
    pub upper: u64,
    pub samples_per_length: u64,
    pub epsilon_test: f64,
    pub transcript: Vec<TranscriptEntry>,
}

/// One sampled closeness test, decided at the source from aggregated
/// counts.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledTest {
    pub outcome: ClosenessOutcome,
    pub summary: SampleSummary,
    pub endpoints: Vec<NodeId>,
    pub round_log: RoundLog,
}

/// Convergecast key for the node-violation tally; bucket labels are
/// shifted by one.
const VIOLATION_KEY: u64 = 0;

impl Walker<'_> {
    /// Runs `k` walks of length `ell` from `x`; each endpoint node tallies
    /// its own count, checks it against its binomial band, and the tallies
    /// are summed at `x` by bucket label. The verdict is broadcast back.
    pub fn sampled_closeness(
        &mut self,
        x: NodeId,
        ell: u64,
        k: u64,
        params: &ClosenessParams,
        seed: u64,
    ) -> Result<SampledTest, MixingError> {
        let g = self.g;
        let pi = g.stationary_distribution();
        let walk_params = WalkParams { retain_trajectories: false, ..WalkParams::new(ell) };
        let sources = vec![x; k as usize];
        let walks = self.many_random_walks(&sources, &walk_params, seed)?;
        let endpoints = walks.endpoints();
        let mut round_log = walks.round_log;

        let mut per_node = vec![0u64; g.node_count()];
        for &e in &endpoints {
            per_node[e as usize] += 1;
        }
        let entries = per_node
            .iter()
            .enumerate()
            .map(|(v, &count)| {
                let p = pi.probs()[v];
                let mut local = Vec::with_capacity(2);
                if count > 0 {
                    local.push((bucket_label(p, params.epsilon) + 1, count));
                }
                if node_violates(count, k, p, params) {
                    local.push((VIOLATION_KEY, 1));
                }
                local
            })
            .collect();
        let cast = self.convergecast(x, entries)?;
        round_log.merge(&cast.round_log);
        let summary = SampleSummary {
            samples: k,
            node_violations: cast.totals.get(&VIOLATION_KEY).copied().unwrap_or(0),
            bucket_counts: cast.totals.range(1..).map(|(&label, &c)| (label - 1, c)).collect(),
        };
        let partition = BucketPartition::new(&pi, params.epsilon);
        let outcome = decide(&summary, &partition, params);
        let verdict_word = u64::from(outcome.verdict == Verdict::Pass);
        let (_, down) = self.broadcast(&cast.tree, x, [verdict_word, ell, 0, 0])?;
        round_log.merge(&down);
        Ok(SampledTest { outcome, summary, endpoints, round_log })
    }

    pub fn estimate_mixing_time(
        &mut self,
        x: NodeId,
        config: &MixingConfig,
        seed: u64,
    ) -> Result<(MixingEstimate, RoundLog), MixingError> {
        let g = self.g;
        check_node(g, x)?;
        config.closeness.validate()?;
        if config.reps == 0 || config.max_ell == 0 {
            return Err(MixingError::InvalidConfig("reps and max_ell must be positive".into()));
        }
        if g.is_bipartite() {
            return Err(MixingError::BipartiteGraph);
        }
        let n = g.node_count();
        let k = config.samples_for(n);
        let need = config.closeness.min_samples(n);
        if k < need {
            return Err(MixingError::InsufficientSamples { have: k, need });
        }

        let mut log = RoundLog::default();
        // The source learns 2m, which every node needs for its own pi(v).
        let degrees = (0..n as NodeId).map(|v| vec![(0, g.degree(v))]).collect();
        let cast = self.convergecast(x, degrees)?;
        log.merge(&cast.round_log);
        let (_, down) = self.broadcast(&cast.tree, x, [cast.totals[&0], 0, 0, 0])?;
        log.merge(&down);

        let mut transcript = Vec::new();
        let mut judge = |walker: &mut Self, ell: u64, log: &mut RoundLog| -> Result<Verdict, MixingError> {
            let mut passes = 0;
            for rep in 0..config.reps {
                let s = sub_seed(sub_seed(seed, "mixing", ell), "rep", u64::from(rep));
                let test = walker.sampled_closeness(x, ell, k, &config.closeness, s)?;
                log.merge(&test.round_log);
                passes += u32::from(test.outcome.verdict == Verdict::Pass);
            }
            let verdict = if 2 * passes > config.reps { Verdict::Pass } else { Verdict::Fail };
            transcript.push(TranscriptEntry { ell, verdict, passes, reps: config.reps });
            Ok(verdict)
        };

        let mut lo = 0;
        let mut hi = 1;
        while judge(self, hi, &mut log)? == Verdict::Fail {
            if hi >= config.max_ell {
                return Err(MixingError::NoPass { max_ell: config.max_ell });
            }
            lo = hi;
            hi = (hi * 2).min(config.max_ell);
        }
        while hi - lo > 1 {
            let mid = lo + (hi - lo) / 2;
            match judge(self, mid, &mut log)? {
                Verdict::Pass => hi = mid,
                Verdict::Fail => lo = mid,
            }
        }
        let estimate = MixingEstimate {
            x,
            lower: lo,
            upper: hi,
            samples_per_length: k,
            epsilon_test: config.closeness.epsilon,
            transcript,
        };
        Ok((estimate, log))
    }
}

pub fn estimate_mixing_time(
    g: &Graph,
    x: NodeId,
    config: &MixingConfig,
    seed: u64,
) -> Result<(MixingEstimate, RoundLog), MixingError> {
    Walker::new(g).estimate_mixing_time(x, config, seed)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralBounds {
    /// Interval for the spectral gap, clamped to `[0, 2]`.
    pub gap: (f64, f64),
    /// Interval for the conductance, clamped to `[0, 1]`.
    pub conductance: (f64, f64),
}

/// Inverts `1/gap <= tau <= log2(n)/gap` over the bracket `[lower, upper]`;
/// the conductance interval is `[gap_low, sqrt(gap_high)]` without
/// constants.
pub fn spectral_bounds(estimate: &MixingEstimate, n: usize) -> SpectralBounds {
    let upper = estimate.upper.max(1) as f64;
    let gap_low = (1.0 / upper).clamp(0.0, 2.0);
    let gap_high = if estimate.lower == 0 {
        2.0
    } else {
        ((n as f64).log2() / estimate.lower as f64).clamp(gap_low, 2.0)
    };
    SpectralBounds { gap: (gap_low, gap_high), conductance: (gap_low.min(1.0), gap_high.sqrt().min(1.0)) }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn estimate(lower: u64, upper: u64) -> MixingEstimate {
        MixingEstimate { x: 0, lower, upper, samples_per_length: 1, epsilon_test: DEFAULT_EPSILON, transcript: vec![] }
    }

    #[test]
    fn spectral_bounds_substitute_directly() {
        let b = spectral_bounds(&estimate(8, 8), 16);
        assert_eq!(b.gap, (0.125, 0.5));
        assert_eq!(b.conductance, (0.125, 0.5f64.sqrt()));
        assert_eq!(spectral_bounds(&estimate(0, 1), 8).gap, (1.0, 2.0));
    }

    #[test]
    fn buckets_partition_nodes() {
        let pi = Distribution::new(vec![0.1, 0.1, 0.2, 0.3, 0.3]).unwrap();
        let b = BucketPartition::new(&pi, 0.05);
        assert_eq!(b.buckets, vec![vec![3, 4], vec![2], vec![0, 1]]);
        assert!((b.bucket_mass.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for w in b.labels.windows(2) {
            assert!(w[0] < w[1]);
        }
    }

    #[test]
    fn point_mass_samples_fail() {
        let n = 64;
        let pi = Distribution::uniform(n);
        let k = ClosenessParams::default().min_samples(n);
        let samples = vec![5; k as usize];
        assert_eq!(closeness_test(&samples, &pi, DEFAULT_EPSILON).unwrap(), Verdict::Fail);
    }

    #[test]
    fn too_few_samples() {
        let pi = Distribution::uniform(16);
        assert!(matches!(
            closeness_test(&[0, 1, 2], &pi, DEFAULT_EPSILON),
            Err(MixingError::InsufficientSamples { .. })
        ));
    }
}
