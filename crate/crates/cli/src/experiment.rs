//! Runs a configured protocol over the seed ladder and writes results.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walks_core::oracle::TreeEdges;
use walks_core::stats::{log_log_slope, mean, SlopeFit};
use walks_core::{Graph, MixingEstimate, NodeId, RoundLog, SpanningTree, WalkParams, WalkResult, Walker};

use crate::config::{ConfigError, ExperimentConfig, Protocol};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub n: usize,
    pub m: u64,
    pub diameter: u32,
}

impl GraphSummary {
    pub fn of(g: &Graph) -> Self {
        GraphSummary { n: g.node_count(), m: g.edge_count(), diameter: g.diameter() }
    }
}

/// One walk of one trial. Traces and positions are dropped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WalkRecord {
    pub trial: u32,
    pub seed: u64,
    /// Index among the walks of a multi-walk trial; 0 otherwise.
    pub walk: usize,
    pub result: WalkResult,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KwalkRecord {
    pub trial: u32,
    pub seed: u64,
    pub lambda: u64,
    pub naive_fallback: bool,
    pub round_log: RoundLog,
    pub walks: Vec<WalkRecord>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RstRecord {
    pub trial: u32,
    pub seed: u64,
    pub tree: SpanningTree,
    pub round_log: RoundLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TreeCount {
    pub edges: TreeEdges,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingRecord {
    pub trial: u32,
    pub seed: u64,
    pub estimate: MixingEstimate,
    pub round_log: RoundLog,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifyRecord {
    pub trial: u32,
    pub seed: u64,
    pub sequence: Vec<NodeId>,
    pub verified: bool,
    /// Centralized adjacency check of the same sequence.
    pub expected: bool,
    pub rounds: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub ell: u64,
    pub diameter: u32,
    pub n: usize,
    pub mean_rounds: f64,
    pub naive_rounds: u64,
    pub trials: u32,
}

/// `slope` is present only with at least 4 distinct lengths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub rows: Vec<ScalingRow>,
    pub slope: Option<SlopeFit>,
}

impl ScalingReport {
    /// Aggregates raw walk records by length.
    pub fn from_records(records: &[WalkRecord], g: &GraphSummary) -> Self {
        let mut by_ell: BTreeMap<u64, Vec<f64>> = BTreeMap::new();
        for r in records {
            by_ell.entry(r.result.ell).or_default().push(r.result.round_log.total_rounds as f64);
        }
        let rows: Vec<ScalingRow> = by_ell
            .iter()
            .map(|(&ell, rounds)| ScalingRow {
                ell,
                diameter: g.diameter,
                n: g.n,
                mean_rounds: mean(rounds),
                naive_rounds: ell,
                trials: rounds.len() as u32,
            })
            .collect();
        let slope = if rows.len() >= 4 {
            let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.ell as f64, r.mean_rounds)).collect();
            log_log_slope(&points)
        } else {
            None
        };
        ScalingReport { rows, slope }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "protocol", rename_all = "kebab-case")]
pub enum Records {
    Walk { records: Vec<WalkRecord> },
    Kwalk { records: Vec<KwalkRecord> },
    Rst { records: Vec<RstRecord>, frequencies: Vec<TreeCount> },
    Mixing { records: Vec<MixingRecord> },
    VerifyPath { records: Vec<VerifyRecord> },
    Scaling { records: Vec<WalkRecord>, report: ScalingReport },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultsFile {
    pub config: ExperimentConfig,
    /// Base seed actually used, after any environment override.
    pub seed: u64,
    pub graph: GraphSummary,
    pub records: Records,
    pub violations: Vec<String>,
}

impl ResultsFile {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("results serialize")
    }
}

/// Paths written by [`run_experiment`].
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub json: PathBuf,
    pub csv: PathBuf,
}

/// Standard per-walk CSV row.
#[derive(Debug, Serialize)]
struct WalkRow {
    trial: u32,
    seed: u64,
    ell: u64,
    rounds: u64,
    endpoint: NodeId,
    phase1_rounds: u64,
    phase2_rounds: u64,
    gmw_invocations: u64,
}

impl WalkRow {
    fn of(r: &WalkRecord) -> Self {
        let log = &r.result.round_log;
        let phase1 = log.phase("phase1");
        WalkRow {
            trial: r.trial,
            seed: r.seed,
            ell: r.result.ell,
            rounds: log.total_rounds,
            endpoint: r.result.endpoint,
            phase1_rounds: phase1,
            phase2_rounds: log.total_rounds - phase1,
            gmw_invocations: r.result.gmw_invocations,
        }
    }
}

/// Checks that hold for every stitched walk.
fn walk_violations(r: &WalkRecord, g: &Graph, diameter: u32) -> Vec<String> {
    let mut out = Vec::new();
    let w = &r.result;
    let tag = format!("trial {} walk {}", r.trial, r.walk);
    if (w.endpoint as usize) >= g.node_count() {
        out.push(format!("{tag}: endpoint {} is not a node", w.endpoint));
    }
    let sample = w.round_log.phase_longest("sample_destination");
    if sample > 3 * u64::from(diameter) + 3 {
        out.push(format!("{tag}: sample_destination took {sample} rounds > 3D+3"));
    }
    let gmw = w.round_log.phase_longest("get_more_walks");
    if gmw > 2 * w.lambda + 2 {
        out.push(format!("{tag}: get_more_walks took {gmw} rounds > 2 lambda + 2"));
    }
    out
}

fn strip(mut w: WalkResult) -> WalkResult {
    w.trace = None;
    w.positions = None;
    w
}

fn trial_seeds(seed: u64, trials: u32) -> Vec<(u32, u64)> {
    (0..trials).map(|t| (t, seed + u64::from(t))).collect()
}

fn walk_trials(g: &Graph, seeds: &[(u32, u64)], s: NodeId, params: &WalkParams) -> Result<Vec<WalkRecord>> {
    let params = WalkParams { retain_trajectories: false, ..params.clone() };
    seeds
        .par_iter()
        .map(|&(trial, seed)| {
            let result = Walker::new(g).single_random_walk(s, &params, seed)?;
            Ok(WalkRecord { trial, seed, walk: 0, result: strip(result) })
        })
        .collect()
}

/// Runs every trial and checks per-run invariants.
pub fn execute(cfg: &ExperimentConfig, g: &Graph, seed: u64) -> Result<ResultsFile> {
    cfg.validate(g)?;
    let summary = GraphSummary::of(g);
    let d = summary.diameter;
    let seeds = trial_seeds(seed, cfg.trials);
    let mut violations = Vec::new();
    let records = match &cfg.protocol {
        Protocol::Walk { source, params } => {
            let records = walk_trials(g, &seeds, *source, params)?;
            records.iter().for_each(|r| violations.extend(walk_violations(r, g, d)));
            Records::Walk { records }
        }
        Protocol::Kwalk { sources, params } => {
            let params = WalkParams { retain_trajectories: false, ..params.clone() };
            let records: Vec<KwalkRecord> = seeds
                .par_iter()
                .map(|&(trial, seed)| {
                    let r = Walker::new(g).many_random_walks(sources, &params, seed)?;
                    let walks = r
                        .walks
                        .into_iter()
                        .enumerate()
                        .map(|(walk, w)| WalkRecord { trial, seed, walk, result: strip(w) })
                        .collect();
                    Ok(KwalkRecord {
                        trial,
                        seed,
                        lambda: r.lambda,
                        naive_fallback: r.naive_fallback,
                        round_log: r.round_log,
                        walks,
                    })
                })
                .collect::<Result<_>>()?;
            for r in &records {
                r.walks.iter().for_each(|w| violations.extend(walk_violations(w, g, d)));
                if r.naive_fallback && r.round_log.total_rounds > params.ell {
                    violations.push(format!("trial {}: naive fallback took more than ell rounds", r.trial));
                }
            }
            Records::Kwalk { records }
        }
        Protocol::Rst { root } => {
            let records: Vec<RstRecord> = seeds
                .par_iter()
                .map(|&(trial, seed)| {
                    let (tree, round_log) = Walker::new(g).random_spanning_tree(*root, seed)?;
                    Ok(RstRecord { trial, seed, tree, round_log })
                })
                .collect::<Result<_>>()?;
            let mut counts: BTreeMap<TreeEdges, u64> = BTreeMap::new();
            for r in &records {
                if !r.tree.is_spanning_tree_of(g) {
                    violations.push(format!("trial {}: output is not a spanning tree", r.trial));
                }
                *counts.entry(r.tree.canonical()).or_default() += 1;
            }
            let frequencies = counts.into_iter().map(|(edges, count)| TreeCount { edges, count }).collect();
            Records::Rst { records, frequencies }
        }
        Protocol::Mixing { source, config } => {
            let records: Vec<MixingRecord> = seeds
                .par_iter()
                .map(|&(trial, seed)| {
                    let (estimate, round_log) = Walker::new(g).estimate_mixing_time(*source, config, seed)?;
                    Ok(MixingRecord { trial, seed, estimate, round_log })
                })
                .collect::<Result<_>>()?;
            for r in &records {
                if r.estimate.lower >= r.estimate.upper {
                    violations.push(format!("trial {}: empty bracket", r.trial));
                }
            }
            Records::Mixing { records }
        }
        Protocol::VerifyPath { sequence, ell } => {
            let records: Vec<VerifyRecord> = seeds
                .par_iter()
                .map(|&(trial, seed)| {
                    let mut walker = Walker::new(g);
                    let sequence = match sequence {
                        Some(seq) => seq.clone(),
                        None => walker.naive_walk(0, *ell, seed)?.sequence().expect("naive walks record positions"),
                    };
                    let verdict = walker.verify_path(&sequence)?;
                    let expected = sequence.windows(2).all(|p| g.has_edge(p[0], p[1]));
                    Ok(VerifyRecord {
                        trial,
                        seed,
                        sequence,
                        verified: verdict.verified,
                        expected,
                        rounds: verdict.round_log.total_rounds,
                    })
                })
                .collect::<Result<_>>()?;
            for r in &records {
                if r.verified != r.expected {
                    violations.push(format!("trial {}: verdict {} disagrees with adjacency", r.trial, r.verified));
                }
            }
            Records::VerifyPath { records }
        }
        Protocol::Scaling { source, ells, params } => {
            let mut records = Vec::new();
            for &ell in ells {
                records.extend(walk_trials(g, &seeds, *source, &WalkParams { ell, ..params.clone() })?);
            }
            records.iter().for_each(|r| violations.extend(walk_violations(r, g, d)));
            let report = ScalingReport::from_records(&records, &summary);
            Records::Scaling { records, report }
        }
    };
    Ok(ResultsFile { config: cfg.clone(), seed, graph: summary, records, violations })
}

/// Writes the JSON results and the per-trial CSV.
pub fn write_artifacts(results: &ResultsFile, dir: &Path) -> Result<Artifacts> {
    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let name = &results.config.output.name;
    let json = dir.join(format!("{name}.json"));
    let csv_path = dir.join(format!("{name}.csv"));
    std::fs::write(&json, results.to_json()).with_context(|| format!("writing {}", json.display()))?;
    let mut w = csv::Writer::from_path(&csv_path).with_context(|| format!("writing {}", csv_path.display()))?;
    match &results.records {
        Records::Walk { records } | Records::Scaling { records, .. } => {
            for r in records {
                w.serialize(WalkRow::of(r))?;
            }
        }
        Records::Kwalk { records } => {
            // Rounds and phase split are per trial; all walks share them.
            w.write_record([
                "trial",
                "seed",
                "ell",
                "rounds",
                "endpoint",
                "phase1_rounds",
                "phase2_rounds",
                "gmw_invocations",
                "walk",
                "source",
            ])?;
            for r in records {
                for wr in &r.walks {
                    let row = WalkRow::of(wr);
                    w.write_record([
                        row.trial.to_string(),
                        row.seed.to_string(),
                        row.ell.to_string(),
                        r.round_log.total_rounds.to_string(),
                        row.endpoint.to_string(),
                        r.round_log.phase("phase1").to_string(),
                        (r.round_log.total_rounds - r.round_log.phase("phase1")).to_string(),
                        row.gmw_invocations.to_string(),
                        wr.walk.to_string(),
                        wr.result.source.to_string(),
                    ])?;
                }
            }
        }
        Records::Rst { records, .. } => {
            w.write_record(["trial", "seed", "rounds", "phases", "final_ell", "tree"])?;
            for r in records {
                let tree: Vec<String> = r.tree.canonical().iter().map(|(a, b)| format!("{a}-{b}")).collect();
                w.write_record([
                    r.trial.to_string(),
                    r.seed.to_string(),
                    r.round_log.total_rounds.to_string(),
                    r.tree.phase_count.to_string(),
                    r.tree.final_ell.to_string(),
                    tree.join(" "),
                ])?;
            }
        }
        Records::Mixing { records } => {
            w.write_record(["trial", "seed", "lower", "upper", "samples", "rounds"])?;
            for r in records {
                w.write_record([
                    r.trial.to_string(),
                    r.seed.to_string(),
                    r.estimate.lower.to_string(),
                    r.estimate.upper.to_string(),
                    r.estimate.samples_per_length.to_string(),
                    r.round_log.total_rounds.to_string(),
                ])?;
            }
        }
        Records::VerifyPath { records } => {
            w.write_record(["trial", "seed", "length", "verified", "expected", "rounds"])?;
            for r in records {
                w.write_record([
                    r.trial.to_string(),
                    r.seed.to_string(),
                    (r.sequence.len() - 1).to_string(),
                    r.verified.to_string(),
                    r.expected.to_string(),
                    r.rounds.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;
    Ok(Artifacts { json, csv: csv_path })
}

/// One-paragraph human summary.
pub fn summary_text(results: &ResultsFile) -> String {
    let g = &results.graph;
    let head = format!(
        "{} on n={} m={} D={}, {} trial(s) from seed {}",
        results.config.protocol.name(),
        g.n,
        g.m,
        g.diameter,
        results.config.trials,
        results.seed
    );
    let body = match &results.records {
        Records::Walk { records } => {
            let rounds: Vec<f64> = records.iter().map(|r| r.result.round_log.total_rounds as f64).collect();
            format!("mean rounds {:.1}", mean(&rounds))
        }
        Records::Kwalk { records } => {
            let rounds: Vec<f64> = records.iter().map(|r| r.round_log.total_rounds as f64).collect();
            format!("mean rounds {:.1}", mean(&rounds))
        }
        Records::Rst { frequencies, .. } => format!("{} distinct trees", frequencies.len()),
        Records::Mixing { records } => {
            let brackets: Vec<String> =
                records.iter().map(|r| format!("[{}, {}]", r.estimate.lower, r.estimate.upper)).collect();
            format!("brackets {}", brackets.join(" "))
        }
        Records::VerifyPath { records } => {
            format!("{}/{} verified", records.iter().filter(|r| r.verified).count(), records.len())
        }
        Records::Scaling { report, .. } => {
            let rows: Vec<String> =
                report.rows.iter().map(|r| format!("ell={} rounds={:.1}", r.ell, r.mean_rounds)).collect();
            match &report.slope {
                Some(s) => format!("{}; slope {:.3} [{:.3}, {:.3}]", rows.join(", "), s.slope, s.ci_low, s.ci_high),
                None => rows.join(", "),
            }
        }
    };
    format!("{head}: {body}; {} violation(s)", results.violations.len())
}

/// Loads, executes and writes one experiment. Violations are reported in
/// the results, not as errors.
pub fn run_experiment(config_path: &Path, out_dir: Option<&Path>) -> Result<(ResultsFile, Artifacts)> {
    let cfg = ExperimentConfig::load(config_path)?;
    let base = config_path.parent().unwrap_or(Path::new("."));
    let g = cfg.build_graph(base)?;
    let seed = cfg.effective_seed()?;
    let results = execute(&cfg, &g, seed)?;
    let dir = out_dir.map(Path::to_path_buf).unwrap_or_else(|| base.join(&cfg.output.dir));
    let artifacts = write_artifacts(&results, &dir)?;
    Ok((results, artifacts))
}

/// True when the error chain starts at a configuration problem.
pub fn is_config_error(err: &anyhow::Error) -> bool {
    err.downcast_ref::<ConfigError>().is_some()
}
