use std::path::Path;
use std::process::{Command, Output};

use walks_cli::experiment::{execute, write_artifacts, Records, ResultsFile};
use walks_cli::{ExperimentConfig, Level, SEED_ENV};
use walks_core::{generate, Graph, GraphSpec};

fn walks(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_walks"));
    cmd.args(args).env_remove(SEED_ENV);
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn run_in_memory(text: &str) -> (ExperimentConfig, Graph, ResultsFile) {
    let cfg = ExperimentConfig::from_json(text).unwrap();
    let g = cfg.build_graph(Path::new(".")).unwrap();
    let results = execute(&cfg, &g, cfg.seed).unwrap();
    (cfg, g, results)
}

#[test]
fn unknown_config_key_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"graph": {"kind": "cycle", "n": 5}, "protocol": {"kind": "rst"}, "trails": 3}"#,
    );
    let out = walks(&["run", "--config", &config], &[]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("malformed config"));
}

#[test]
fn out_of_range_source_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"graph": {"kind": "cycle", "n": 5}, "protocol": {"kind": "walk", "source": 9, "params": {"ell": 4}}}"#,
    );
    assert_eq!(walks(&["run", "--config", &config], &[]).status.code(), Some(2));
}

#[test]
fn walk_config_on_hypercube_writes_ten_records() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"graph": {"kind": "hypercube", "dim": 4}, "protocol": {"kind": "walk", "source": 3,
            "params": {"ell": 40}}, "seed": 5, "trials": 10, "output": {"dir": "out", "name": "cube"}}"#,
    );
    let out = walks(&["run", "--config", &config], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let results = ResultsFile::load(&dir.path().join("out/cube.json")).unwrap();
    let Records::Walk { records } = &results.records else { panic!("wrong record kind") };
    assert_eq!(records.len(), 10);
    assert_eq!(records.iter().map(|r| r.seed).collect::<Vec<_>>(), (5..15).collect::<Vec<_>>());
    assert!(records.iter().all(|r| r.result.endpoint < 16 && r.result.ell == 40));
    assert!(results.violations.is_empty());

    let mut csv = csv::Reader::from_path(dir.path().join("out/cube.csv")).unwrap();
    let header: Vec<String> = csv.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(
        header,
        ["trial", "seed", "ell", "rounds", "endpoint", "phase1_rounds", "phase2_rounds", "gmw_invocations"]
    );
    let rows: Vec<csv::StringRecord> = csv.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 10);
    for (row, r) in rows.iter().zip(records) {
        let rounds: u64 = row[3].parse().unwrap();
        let phase1: u64 = row[5].parse().unwrap();
        let phase2: u64 = row[6].parse().unwrap();
        assert_eq!(rounds, r.result.round_log.total_rounds);
        assert_eq!(phase1 + phase2, rounds);
    }
}

#[test]
fn seed_env_overrides_config() {
    let dir = tempfile::tempdir().unwrap();
    let config = write_config(
        dir.path(),
        r#"{"graph": {"kind": "cycle", "n": 7}, "protocol": {"kind": "walk", "params": {"ell": 9}},
            "seed": 1, "trials": 2}"#,
    );
    let out = walks(&["run", "--config", &config], &[(SEED_ENV, "77")]);
    assert!(out.status.success());
    let results = ResultsFile::load(&dir.path().join("results/results.json")).unwrap();
    assert_eq!(results.seed, 77);
    let Records::Walk { records } = &results.records else { panic!() };
    assert_eq!(records[1].seed, 78);

    assert_eq!(walks(&["run", "--config", &config], &[(SEED_ENV, "many")]).status.code(), Some(2));
}

#[test]
fn every_protocol_round_trips_through_its_loader() {
    let configs = [
        r#"{"graph": {"kind": "torus", "rows": 3, "cols": 3}, "protocol": {"kind": "walk", "params": {"ell": 30, "lambda": 3}}, "trials": 3}"#,
        r#"{"graph": {"kind": "hypercube", "dim": 3}, "protocol": {"kind": "kwalk", "sources": [0, 1, 1], "params": {"ell": 12, "lambda": 2}}, "trials": 3}"#,
        r#"{"graph": {"kind": "clique", "n": 4}, "protocol": {"kind": "rst", "root": 2}, "trials": 6}"#,
        r#"{"graph": {"kind": "clique", "n": 6}, "protocol": {"kind": "mixing", "config": {"reps": 1}}, "trials": 2}"#,
        r#"{"graph": {"kind": "cycle", "n": 6}, "protocol": {"kind": "verify-path", "sequence": [0, 1, 2, 4]}}"#,
        r#"{"graph": {"kind": "erdos_renyi", "n": 12, "p": 0.4}, "graph_seed": 2, "protocol": {"kind": "verify-path", "ell": 20}, "trials": 3}"#,
        r#"{"graph": {"kind": "path", "n": 8}, "protocol": {"kind": "scaling", "ells": [4, 16], "params": {"topology_collection": false}}, "trials": 2}"#,
    ];
    let dir = tempfile::tempdir().unwrap();
    for (i, text) in configs.iter().enumerate() {
        let (mut cfg, _, _) = run_in_memory(text);
        cfg.output.name = format!("r{i}");
        let g = cfg.build_graph(Path::new(".")).unwrap();
        let results = execute(&cfg, &g, cfg.seed).unwrap();
        assert!(results.violations.is_empty(), "{text}: {:?}", results.violations);
        let artifacts = write_artifacts(&results, dir.path()).unwrap();
        assert_eq!(ResultsFile::load(&artifacts.json).unwrap(), results, "{text}");
        assert!(csv::Reader::from_path(&artifacts.csv).unwrap().records().all(|r| r.is_ok()));
    }
}

#[test]
fn tampered_sequence_is_rejected_without_violation() {
    let (_, _, results) = run_in_memory(
        r#"{"graph": {"kind": "cycle", "n": 6}, "protocol": {"kind": "verify-path", "sequence": [0, 1, 3]}}"#,
    );
    let Records::VerifyPath { records } = &results.records else { panic!() };
    assert!(!records[0].verified && !records[0].expected);
    assert!(results.violations.is_empty());
}

#[test]
fn rst_frequencies_sum_to_trials() {
    let (_, g, results) = run_in_memory(r#"{"graph": {"kind": "cycle", "n": 5}, "protocol": {"kind": "rst"}, "trials": 40}"#);
    let Records::Rst { records, frequencies } = &results.records else { panic!() };
    assert_eq!(frequencies.iter().map(|f| f.count).sum::<u64>(), 40);
    assert!(frequencies.len() <= 5);
    assert!(records.iter().all(|r| r.tree.is_spanning_tree_of(&g)));
}

#[test]
fn scaling_report_has_slope_with_four_lengths() {
    let (_, _, results) = run_in_memory(
        r#"{"graph": {"kind": "hypercube", "dim": 10}, "protocol": {"kind": "scaling", "ells": [64, 256, 1024, 4096],
            "params": {"retain_trajectories": false}}, "trials": 2}"#,
    );
    let Records::Scaling { records, report } = &results.records else { panic!() };
    assert_eq!(records.len(), 8);
    assert_eq!(report.rows.len(), 4);
    assert!(report.rows.iter().all(|r| r.n == 1024 && r.diameter == 10 && r.trials == 2));
    let slope = report.slope.expect("four distinct lengths give a slope");
    assert!(slope.ci_low <= slope.slope && slope.slope <= slope.ci_high);

    let (_, _, short) = run_in_memory(
        r#"{"graph": {"kind": "cycle", "n": 9}, "protocol": {"kind": "scaling", "ells": [8, 16, 32]}}"#,
    );
    let Records::Scaling { report, .. } = &short.records else { panic!() };
    assert!(report.slope.is_none());
}

#[test]
fn generated_graph_file_feeds_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let graph = dir.path().join("g.json");
    let out = walks(&["gen-graph", "--kind", "torus", "--rows", "3", "--cols", "4", "--out", graph.to_str().unwrap()], &[]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let loaded = Graph::load(&graph).unwrap();
    let direct = generate(&GraphSpec::Torus { rows: 3, cols: 4 }, 0).unwrap();
    assert_eq!(loaded.edges().collect::<Vec<_>>(), direct.edges().collect::<Vec<_>>());

    let config = write_config(
        dir.path(),
        r#"{"graph": {"file": "g.json"}, "protocol": {"kind": "walk", "params": {"ell": 5}}, "trials": 2}"#,
    );
    assert!(walks(&["run", "--config", &config], &[]).status.success());
    assert!(!walks(&["gen-graph", "--kind", "torus", "--rows", "3", "--out", "x.json"], &[]).status.success());
}

#[test]
fn validation_reports_are_deterministic_in_process() {
    let a = walks_cli::run_suite(Level::Quick, 3);
    let b = walks_cli::run_suite(Level::Quick, 3);
    assert_eq!(a.to_json(), b.to_json());
    assert_eq!(a.criteria.len(), 11);
}
