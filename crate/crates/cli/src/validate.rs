//! The acceptance suite, runnable at full or reduced scale.
//!
//! Reports contain no timings, so equal seeds give byte-identical reports.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use walks_core::mixing::{spectral_bounds, MixingConfig};
use walks_core::oracle::{
    chi_square_gof, conductance, count_spanning_trees, enumerate_spanning_trees, exact_mixing_time, l1_curve,
    transition_spectrum, walk_distribution, OracleError, TreeEdges,
};
use walks_core::rng::{global_rng, sub_seed};
use walks_core::stats::{log_log_slope, mean};
use walks_core::walks::{get_more_walks, phase1_generate, WalkStore};
use walks_core::{
    generate, generate_gadget_gn, tv_distance, Distribution, Graph, GraphSpec, MixingError, MixingEstimate, NodeId,
    RoundLog, WalkParams, Walker,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Level {
    Quick,
    Full,
}

impl Level {
    /// Scales a full-level sample count.
    fn samples(self, full: u64) -> u64 {
        match self {
            Level::Full => full,
            Level::Quick => (full / 10).max(1),
        }
    }

    /// Widens a full-level distance threshold to the reduced sample size.
    fn threshold(self, full_threshold: f64, full: u64) -> f64 {
        full_threshold * (full as f64 / self.samples(full) as f64).sqrt()
    }
}

impl std::str::FromStr for Level {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "quick" => Ok(Level::Quick),
            "full" => Ok(Level::Full),
            other => Err(format!("unknown level {other:?}; expected quick or full")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionReport {
    pub id: u32,
    pub name: String,
    pub pass: bool,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport {
    pub level: Level,
    pub seed: u64,
    pub criteria: Vec<CriterionReport>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.criteria.iter().all(|c| c.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// Component round bounds observed while running criteria 1 to 4.
#[derive(Debug, Default)]
struct RoundBounds {
    sample_calls: u64,
    gmw_calls: u64,
    failures: Vec<String>,
}

impl RoundBounds {
    /// Checks the longest Sample-Destination and Get-More-Walks sub-runs of
    /// one walk against `3 depth + 3` and `2 lambda + 2`.
    fn walk(&mut self, what: &str, log: &RoundLog, lambda: u64, depth: u32) {
        self.sample(what, log.phase_longest("sample_destination"), depth, log.phase("sample_destination") > 0);
        self.gmw(what, log.phase_longest("get_more_walks"), lambda, log.phase("get_more_walks") > 0);
    }

    fn sample(&mut self, what: &str, rounds: u64, depth: u32, ran: bool) {
        if !ran {
            return;
        }
        self.sample_calls += 1;
        if rounds > 3 * u64::from(depth) + 3 {
            self.failures.push(format!("{what}: sample_destination {rounds} > 3*{depth}+3"));
        }
    }

    fn gmw(&mut self, what: &str, rounds: u64, lambda: u64, ran: bool) {
        if !ran {
            return;
        }
        self.gmw_calls += 1;
        if rounds > 2 * lambda + 2 {
            self.failures.push(format!("{what}: get_more_walks {rounds} > 2*{lambda}+2"));
        }
    }
}

fn fixture(spec: GraphSpec) -> Graph {
    generate(&spec, 0).expect("fixture parameters are valid")
}

fn histogram(n: usize, samples: impl IntoIterator<Item = NodeId>) -> Vec<u64> {
    let mut counts = vec![0u64; n];
    for s in samples {
        counts[s as usize] += 1;
    }
    counts
}

fn empirical(counts: &[u64]) -> Distribution {
    let total: u64 = counts.iter().sum();
    Distribution::new(counts.iter().map(|&c| c as f64 / total as f64).collect()).expect("counts are nonempty")
}

fn report(id: u32, name: &str, pass: bool, detail: String) -> CriterionReport {
    CriterionReport { id, name: name.into(), pass, detail }
}

/// Criterion 1: stitched single-walk endpoints against the matrix power.
fn endpoint_law(level: Level, seed: u64, bounds: &mut RoundBounds) -> CriterionReport {
    const FULL: u64 = 50_000;
    let samples = level.samples(FULL);
    let tv_max = level.threshold(0.02, FULL);
    let fixtures = [
        ("K3", GraphSpec::Clique { n: 3 }),
        ("K4", GraphSpec::Clique { n: 4 }),
        ("C5", GraphSpec::Cycle { n: 5 }),
        ("Q3", GraphSpec::Hypercube { dim: 3 }),
        ("K1,4", GraphSpec::Star { leaves: 4 }),
    ];
    let mut failures = Vec::new();
    let mut min_p = 1.0f64;
    let mut max_tv = 0.0f64;
    let mut stitched = 0u64;
    for (name, spec) in fixtures {
        let g = fixture(spec);
        let depth = g.diameter();
        let n = g.node_count();
        for ell in 1..=8u64 {
            // Forcing lambda small makes Phase 2 stitch for every ell >= 2.
            let lambda = (ell / 3).max(1);
            let params = WalkParams { retain_trajectories: false, ..WalkParams::with_lambda(ell, lambda) };
            let base = sub_seed(seed, &format!("c1/{name}"), ell);
            let logs: Vec<(NodeId, RoundLog)> = (0..samples)
                .into_par_iter()
                .map_init(
                    || Walker::new(&g),
                    |w, i| {
                        let r = w.single_random_walk(0, &params, base.wrapping_add(i)).expect("valid fixture walk");
                        (r.endpoint, r.round_log)
                    },
                )
                .collect();
            for (_, log) in &logs {
                bounds.walk(&format!("c1 {name} ell={ell}"), log, lambda, depth);
                stitched += u64::from(log.phase("sample_destination") > 0);
            }
            let counts = histogram(n, logs.iter().map(|(e, _)| *e));
            let oracle = walk_distribution(&g, 0, ell).expect("small fixture");
            let chi = chi_square_gof(&counts, oracle.probs()).expect("matching dimensions");
            let tv = tv_distance(&empirical(&counts), &oracle).expect("matching dimensions");
            min_p = min_p.min(chi.p_value);
            max_tv = max_tv.max(tv);
            if !chi.pass || tv >= tv_max {
                failures.push(format!("{name} ell={ell}: p={:.2e} tv={tv:.4}", chi.p_value));
            }
        }
    }
    let detail = format!(
        "5 fixtures x 8 lengths x {samples} walks ({stitched} stitched); min p={min_p:.2e}, max tv={max_tv:.4} (< {tv_max:.4}){}",
        if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
    );
    report(1, "endpoint-law exactness", failures.is_empty(), detail)
}

/// Every bin of `counts` within `4 sigma` of `1 / bins`.
fn bins_within_4_sigma(counts: &[u64]) -> (bool, f64) {
    let total: u64 = counts.iter().sum();
    let p = 1.0 / counts.len() as f64;
    let sigma = (p * (1.0 - p) / total as f64).sqrt();
    let worst = counts.iter().map(|&c| (c as f64 / total as f64 - p).abs() / sigma).fold(0.0, f64::max);
    (worst <= 4.0, worst)
}

/// Criterion 2: short-walk lengths uniform on `[lambda, 2 lambda - 1]`.
fn short_walk_lengths(level: Level, seed: u64, bounds: &mut RoundBounds) -> CriterionReport {
    let target = level.samples(20_000);
    let g = fixture(GraphSpec::Torus { rows: 8, cols: 8 });
    let mut failures = Vec::new();
    let mut parts = Vec::new();
    for lambda in [2u64, 4, 8] {
        let mut phase1 = vec![0u64; lambda as usize];
        let mut call = 0u64;
        while phase1.iter().sum::<u64>() < target {
            let (store, _) =
                phase1_generate(&g, 1, lambda, sub_seed(seed, "c2/phase1", lambda * 1_000_000 + call)).expect("phase1");
            for w in store.all() {
                phase1[(w.length - lambda) as usize] += 1;
            }
            call += 1;
        }
        let mut more = vec![0u64; lambda as usize];
        let per_call = 500;
        let mut call = 0u64;
        while more.iter().sum::<u64>() < target {
            let v = (call % g.node_count() as u64) as NodeId;
            let mut store = WalkStore::new(g.node_count(), false);
            let s = sub_seed(seed, "c2/gmw", lambda * 1_000_000 + call);
            let log = get_more_walks(&g, &mut store, v, per_call * lambda, lambda, s).expect("get_more_walks");
            bounds.gmw(&format!("c2 lambda={lambda}"), log.total_rounds, lambda, true);
            for w in store.all() {
                more[(w.length - lambda) as usize] += 1;
            }
            call += 1;
        }
        for (what, counts) in [("phase1", &phase1), ("get_more_walks", &more)] {
            let (ok, worst) = bins_within_4_sigma(counts);
            parts.push(format!("{what} lambda={lambda}: {} walks, worst {worst:.2} sigma", counts.iter().sum::<u64>()));
            if !ok {
                failures.push(format!("{what} lambda={lambda}"));
            }
        }
    }
    report(2, "short-walk length uniformity", failures.is_empty(), parts.join("; "))
}

/// Criterion 3: Sample-Destination picks each unused token with equal
/// probability.
fn sample_destination_uniformity(level: Level, seed: u64, bounds: &mut RoundBounds) -> CriterionReport {
    let draws = level.samples(20_000);
    let g = fixture(GraphSpec::Star { leaves: 5 });
    let (base, _) = phase1_generate(&g, 1, 3, sub_seed(seed, "c3/phase1", 0)).expect("phase1");
    let tokens = base.unused_from(0);
    let depth = g.eccentricity(0);
    let picks: Vec<(Option<u64>, u64)> = (0..draws)
        .into_par_iter()
        .map_init(
            || Walker::new(&g),
            |w, i| {
                let mut store = base.clone();
                let (outcome, log) =
                    w.sample_destination(&mut store, 0, sub_seed(seed, "c3/draw", i)).expect("sample_destination");
                (outcome.map(|s| s.walk_id), log.total_rounds)
            },
        )
        .collect();
    let mut by_id: BTreeMap<u64, u64> = BTreeMap::new();
    let mut empty = 0;
    for (id, rounds) in &picks {
        bounds.sample("c3", *rounds, depth, true);
        match id {
            Some(id) => *by_id.entry(*id).or_default() += 1,
            None => empty += 1,
        }
    }
    let counts: Vec<u64> = by_id.values().copied().collect();
    let chi = chi_square_gof(&counts, &vec![1.0; counts.len()]).expect("nonempty");
    let pass = tokens == 5 && counts.len() == 5 && empty == 0 && chi.pass;
    let detail = format!("{tokens} tokens, {draws} draws, counts {counts:?}, p={:.3e}", chi.p_value);
    report(3, "sample-destination uniformity", pass, detail)
}

/// Criterion 4: mean rounds grow like `sqrt(ell)` on the 10-cube.
fn round_scaling(level: Level, seed: u64, bounds: &mut RoundBounds) -> CriterionReport {
    let trials = match level {
        Level::Full => 20,
        Level::Quick => 4,
    };
    let g = fixture(GraphSpec::Hypercube { dim: 10 });
    let depth = g.diameter();
    let mut rows = Vec::new();
    let mut slow = Vec::new();
    for exp in [8u32, 10, 12, 14] {
        let ell = 1u64 << exp;
        let params = WalkParams { retain_trajectories: false, ..WalkParams::new(ell) };
        let lambda = Walker::new(&g).lambda_for(&params);
        let logs: Vec<RoundLog> = (0..trials)
            .into_par_iter()
            .map_init(
                || Walker::new(&g),
                |w, t| w.single_random_walk(0, &params, sub_seed(seed, "c4", ell * 100 + t)).expect("walk").round_log,
            )
            .collect();
        for log in &logs {
            bounds.walk(&format!("c4 ell={ell}"), log, lambda, depth);
        }
        let m = mean(&logs.iter().map(|l| l.total_rounds as f64).collect::<Vec<_>>());
        if exp >= 10 && m >= ell as f64 {
            slow.push(ell);
        }
        rows.push((ell as f64, m));
    }
    let fit = log_log_slope(&rows);
    let slope_ok = fit.is_some_and(|f| (0.40..=0.70).contains(&f.slope));
    let table: Vec<String> = rows.iter().map(|(l, m)| format!("ell={l} rounds={m:.1}")).collect();
    let detail = format!(
        "n=1024 D={depth}, {trials} trials: {}; slope {} in [0.40, 0.70]{}",
        table.join(", "),
        fit.map_or("undefined".into(), |f| format!("{:.3} (95% CI {:.3}..{:.3})", f.slope, f.ci_low, f.ci_high)),
        if slow.is_empty() { String::new() } else { format!("; not below naive at {slow:?}") }
    );
    report(4, "round-complexity scaling", slope_ok && slow.is_empty(), detail)
}

fn component_bounds(bounds: &RoundBounds) -> CriterionReport {
    let mut detail = format!(
        "{} sample_destination and {} get_more_walks observations from criteria 1-4",
        bounds.sample_calls, bounds.gmw_calls
    );
    if !bounds.failures.is_empty() {
        let shown: Vec<&str> = bounds.failures.iter().take(5).map(String::as_str).collect();
        detail.push_str(&format!("; {} violations, first: {}", bounds.failures.len(), shown.join(", ")));
    }
    let pass = bounds.failures.is_empty() && bounds.sample_calls > 0 && bounds.gmw_calls > 0;
    report(5, "component round bounds", pass, detail)
}

/// Criterion 6: visit and connector counts of regenerated walks.
fn visit_bounds(level: Level, seed: u64) -> CriterionReport {
    let walks = match level {
        Level::Full => 100,
        Level::Quick => 20,
    };
    let ell = 1024;
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, spec) in [("P32", GraphSpec::Path { n: 32 }), ("Q6", GraphSpec::Hypercube { dim: 6 })] {
        let g = fixture(spec);
        let log_n = (g.node_count() as f64).log2();
        let visit_cap = 24.0 * ((ell + 1) as f64).sqrt() * log_n;
        let params = WalkParams { topology_collection: false, ..WalkParams::new(ell) };
        let outcomes: Vec<(bool, bool, f64)> = (0..walks)
            .into_par_iter()
            .map_init(
                || Walker::new(&g),
                |w, i| {
                    let r = w.single_random_walk(0, &params, sub_seed(seed, &format!("c6/{name}"), i)).expect("walk");
                    let full = w.regenerate_walk(&r).expect("trajectories retained");
                    let positions = full.positions.expect("regenerated walks carry positions");
                    let mut connectors: BTreeMap<NodeId, u64> = BTreeMap::new();
                    for &(node, _) in &r.connectors {
                        *connectors.entry(node).or_default() += 1;
                    }
                    let mut worst = 0.0f64;
                    let mut connectors_ok = true;
                    for (&y, offsets) in &positions {
                        let visits = offsets.len() as f64;
                        worst = worst.max(visits / g.degree(y) as f64);
                        let c = connectors.get(&y).copied().unwrap_or(0) as f64;
                        if c > visits * log_n * log_n / r.lambda as f64 + 1.0 {
                            connectors_ok = false;
                        }
                    }
                    (worst <= visit_cap, connectors_ok, worst)
                },
            )
            .collect();
        let visits_ok = outcomes.iter().filter(|o| o.0).count();
        let connectors_ok = outcomes.iter().filter(|o| o.1).count();
        let worst = outcomes.iter().map(|o| o.2).fold(0.0, f64::max);
        pass &= visits_ok == walks as usize && connectors_ok * 100 >= walks as usize * 99;
        parts.push(format!(
            "{name}: visits/degree max {worst:.1} <= {visit_cap:.0} on {visits_ok}/{walks}, connector bound on {connectors_ok}/{walks}"
        ));
    }
    report(6, "visit and connector bounds", pass, parts.join("; "))
}

/// Criterion 7: marginals of concurrent walks on the 3-cube.
fn kwalk_marginals(level: Level, seed: u64) -> CriterionReport {
    const FULL: u64 = 30_000;
    let trials = level.samples(FULL);
    let tv_max = level.threshold(0.03, FULL);
    let g = fixture(GraphSpec::Hypercube { dim: 3 });
    let sources: [NodeId; 4] = [0, 3, 5, 5];
    let ell = 6;
    let mut parts = Vec::new();
    let mut pass = true;
    for (label, lambda) in [("default lambda", None), ("lambda=2", Some(2))] {
        let params = WalkParams { lambda, retain_trajectories: false, ..WalkParams::new(ell) };
        let runs: Vec<(Vec<NodeId>, bool)> = (0..trials)
            .into_par_iter()
            .map_init(
                || Walker::new(&g),
                |w, t| {
                    let r = w.many_random_walks(&sources, &params, sub_seed(seed, label, t)).expect("many walks");
                    (r.endpoints(), r.naive_fallback)
                },
            )
            .collect();
        let fallback = runs.iter().filter(|r| r.1).count();
        let mut worst = 0.0f64;
        for (i, &s) in sources.iter().enumerate() {
            let counts = histogram(8, runs.iter().map(|r| r.0[i]));
            let tv = tv_distance(&empirical(&counts), &walk_distribution(&g, s, ell).expect("oracle")).expect("dims");
            worst = worst.max(tv);
        }
        pass &= worst < tv_max;
        parts.push(format!("{label}: max marginal tv {worst:.4} (< {tv_max:.4}), naive fallback {fallback}/{trials}"));
    }
    report(7, "k-walk marginals", pass, format!("k=4, ell=6, {trials} trials; {}", parts.join("; ")))
}

/// Criterion 8: spanning-tree frequencies against weighted enumeration.
fn rst_uniformity(level: Level, seed: u64) -> CriterionReport {
    let mut parts = Vec::new();
    let mut pass = true;
    for (name, spec, full) in
        [("K4", GraphSpec::Clique { n: 4 }, 32_000u64), ("C5", GraphSpec::Cycle { n: 5 }, 20_000u64)]
    {
        let g = fixture(spec);
        let samples = level.samples(full);
        let trees = enumerate_spanning_trees(&g).expect("small fixture");
        let kirchhoff = count_spanning_trees(&g).expect("small fixture");
        let enumerated: u64 = trees.iter().map(|t| t.1).sum();
        let index: BTreeMap<&TreeEdges, usize> = trees.iter().enumerate().map(|(i, t)| (&t.0, i)).collect();
        let drawn: Vec<Option<TreeEdges>> = (0..samples)
            .into_par_iter()
            .map_init(
                || Walker::new(&g),
                |w, i| {
                    let (tree, _) = w.random_spanning_tree(0, sub_seed(seed, &format!("c8/{name}"), i)).expect("rst");
                    tree.is_spanning_tree_of(&g).then(|| tree.canonical())
                },
            )
            .collect();
        let malformed = drawn.iter().filter(|t| t.is_none()).count();
        let mut counts = vec![0u64; trees.len()];
        let mut unknown = 0;
        for t in drawn.iter().flatten() {
            match index.get(t) {
                Some(&i) => counts[i] += 1,
                None => unknown += 1,
            }
        }
        let weights: Vec<f64> = trees.iter().map(|t| t.1 as f64).collect();
        let chi = chi_square_gof(&counts, &weights).expect("dims");
        let ok = malformed == 0 && unknown == 0 && chi.pass && kirchhoff == enumerated.into();
        pass &= ok;
        parts.push(format!(
            "{name}: {} trees (Kirchhoff {kirchhoff}), {samples} samples, p={:.3e}, malformed {malformed}",
            trees.len(),
            chi.p_value
        ));
    }
    report(8, "random spanning tree uniformity", pass, parts.join("; "))
}

struct MixingRuns {
    name: &'static str,
    graph: Graph,
    estimates: Vec<Result<MixingEstimate, MixingError>>,
}

/// Criterion 9: the estimated bracket contains the exact mixing time.
fn mixing_bracket(level: Level, seed: u64) -> (CriterionReport, Vec<MixingRuns>) {
    let runs = match level {
        Level::Full => 20,
        Level::Quick => 10,
    };
    let tau_eps = 1.0 / (2.0 * std::f64::consts::E);
    let mut parts = Vec::new();
    let mut pass = true;

    // The 4x4 torus is bipartite: no stationary limit, so both routes must refuse.
    let t44 = fixture(GraphSpec::Torus { rows: 4, cols: 4 });
    let oracle_refuses = matches!(exact_mixing_time(&t44, 0, tau_eps), Err(OracleError::BipartiteGraph));
    let estimator_refuses = matches!(
        Walker::new(&t44).estimate_mixing_time(0, &MixingConfig::default(), seed),
        Err(MixingError::BipartiteGraph)
    );
    pass &= oracle_refuses && estimator_refuses;
    parts.push(format!("T44 bipartite: oracle refuses {oracle_refuses}, estimator refuses {estimator_refuses}"));

    let mut all = Vec::new();
    for (name, spec) in [("T55", GraphSpec::Torus { rows: 5, cols: 5 }), ("K8", GraphSpec::Clique { n: 8 })] {
        let g = fixture(spec);
        let tau = exact_mixing_time(&g, 0, tau_eps).expect("oracle");
        let estimates: Vec<Result<MixingEstimate, MixingError>> = (0..runs)
            .into_par_iter()
            .map_init(
                || Walker::new(&g),
                |w, r| {
                    w.estimate_mixing_time(0, &MixingConfig::default(), sub_seed(seed, &format!("c9/{name}"), r))
                        .map(|(e, _)| e)
                },
            )
            .collect();
        let inside = estimates
            .iter()
            .flatten()
            .filter(|e| e.lower as f64 / 2.0 <= tau as f64 && tau <= 2 * e.upper)
            .count();
        let brackets: Vec<String> = estimates
            .iter()
            .map(|e| e.as_ref().map_or_else(|err| err.to_string(), |e| format!("[{},{}]", e.lower, e.upper)))
            .collect();
        pass &= inside * 10 >= runs as usize * 9;
        parts.push(format!("{name}: tau={tau}, inside {inside}/{runs}, brackets {}", brackets.join(" ")));
        all.push(MixingRuns { name, graph: g, estimates });
    }

    let mut monotone = Vec::new();
    for (name, spec) in [
        ("T44", GraphSpec::Torus { rows: 4, cols: 4 }),
        ("T55", GraphSpec::Torus { rows: 5, cols: 5 }),
        ("K8", GraphSpec::Clique { n: 8 }),
        ("C7", GraphSpec::Cycle { n: 7 }),
    ] {
        let curve = l1_curve(&fixture(spec), 0, 200).expect("oracle");
        let ok = curve.windows(2).all(|w| w[1] <= w[0] + 1e-12);
        pass &= ok;
        monotone.push(format!("{name} {ok}"));
    }
    parts.push(format!("L1 curves monotone: {}", monotone.join(", ")));
    (report(9, "mixing-time bracket", pass, parts.join("; ")), all)
}

/// Criterion 10: spectral intervals derived from the brackets of criterion 9.
fn spectral_sandwich(runs: &[MixingRuns]) -> CriterionReport {
    let mut parts = Vec::new();
    let mut pass = true;
    for r in runs {
        let n = r.graph.node_count();
        let spectrum = transition_spectrum(&r.graph, false).expect("oracle");
        let one_minus = 1.0 - spectrum[1];
        let absolute = 1.0 - spectrum[1..].iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let ok: Vec<_> = r.estimates.iter().flatten().map(|e| spectral_bounds(e, n)).collect();
        let within = |gap: f64| ok.iter().filter(|b| b.gap.0 <= gap && gap <= b.gap.1).count();
        let (plain, abs) = (within(one_minus), within(absolute));
        // Judged on 1 - lambda_2; the absolute gap is reported alongside.
        pass &= !ok.is_empty() && plain * 10 >= ok.len() * 9;
        parts.push(format!(
            "{}: 1-lambda2={one_minus:.3} in {plain}/{}, absolute gap {absolute:.3} in {abs}/{}",
            r.name,
            ok.len(),
            ok.len()
        ));
    }
    let c7 = fixture(GraphSpec::Cycle { n: 7 });
    let phi = conductance(&c7).expect("oracle");
    let config = MixingConfig { samples: Some(2000), ..MixingConfig::default() };
    let mut inside = 0;
    for r in 0..5 {
        if let Ok((e, _)) = Walker::new(&c7).estimate_mixing_time(0, &config, r) {
            let b = spectral_bounds(&e, 7);
            inside += usize::from(b.conductance.0 <= phi && phi <= b.conductance.1);
        }
    }
    pass &= inside >= 4;
    parts.push(format!("C7 conductance {phi:.3} in {inside}/5"));
    report(10, "spectral sandwich", pass, parts.join("; "))
}

/// Criterion 11: gadget structure and path verification under tampering.
fn gadget_verification(seed: u64) -> CriterionReport {
    let mut parts = Vec::new();
    let mut pass = true;
    for k in [1usize, 2, 4] {
        for n in [32usize, 64, 128] {
            let gadget = generate_gadget_gn(n, k).expect("gadget");
            let g = &gadget.graph;
            let violations = gadget.violations();
            let path = gadget.canonical_path(gadget.path_len);
            let mut walker = Walker::new(g);
            let accepted = walker.verify_path(&path).expect("verify").verified;
            let mut rng = global_rng(sub_seed(seed, "c11", (k * 1000 + n) as u64), "tamper");
            let mut rejected = 0;
            for _ in 0..10 {
                // Redraw until the tampered sequence is not a path.
                let tampered = loop {
                    let mut t = path.clone();
                    let at = rng.random_range(0..t.len());
                    let to = rng.random_range(0..g.node_count() as NodeId);
                    t[at] = to;
                    if !t.windows(2).all(|p| g.has_edge(p[0], p[1])) {
                        break t;
                    }
                };
                rejected += usize::from(!walker.verify_path(&tampered).expect("verify").verified);
            }
            let ok = violations.is_empty() && accepted && rejected == 10;
            pass &= ok;
            if !ok {
                parts.push(format!("k={k} n={n}: {violations:?}, accepted {accepted}, rejected {rejected}/10"));
            }
        }
    }
    if parts.is_empty() {
        parts.push("9 gadgets well formed; canonical paths accepted; 90/90 tamperings rejected".into());
    }
    report(11, "gadget and path verification", pass, parts.join("; "))
}

/// Runs criteria 1 to 11, calling `progress` after each with its wall time.
pub fn run_suite_with(level: Level, seed: u64, mut progress: impl FnMut(&CriterionReport, Duration)) -> ValidationReport {
    let mut criteria = Vec::new();
    let mut bounds = RoundBounds::default();
    let mut step = |c: CriterionReport, started: Instant, criteria: &mut Vec<CriterionReport>| {
        progress(&c, started.elapsed());
        criteria.push(c);
    };
    let t = Instant::now();
    step(endpoint_law(level, seed, &mut bounds), t, &mut criteria);
    let t = Instant::now();
    step(short_walk_lengths(level, seed, &mut bounds), t, &mut criteria);
    let t = Instant::now();
    step(sample_destination_uniformity(level, seed, &mut bounds), t, &mut criteria);
    let t = Instant::now();
    step(round_scaling(level, seed, &mut bounds), t, &mut criteria);
    let t = Instant::now();
    step(component_bounds(&bounds), t, &mut criteria);
    let t = Instant::now();
    step(visit_bounds(level, seed), t, &mut criteria);
    let t = Instant::now();
    step(kwalk_marginals(level, seed), t, &mut criteria);
    let t = Instant::now();
    step(rst_uniformity(level, seed), t, &mut criteria);
    let t = Instant::now();
    let (c9, runs) = mixing_bracket(level, seed);
    step(c9, t, &mut criteria);
    let t = Instant::now();
    step(spectral_sandwich(&runs), t, &mut criteria);
    let t = Instant::now();
    step(gadget_verification(seed), t, &mut criteria);
    ValidationReport { level, seed, criteria }
}

pub fn run_suite(level: Level, seed: u64) -> ValidationReport {
    run_suite_with(level, seed, |_, _| {})
}
