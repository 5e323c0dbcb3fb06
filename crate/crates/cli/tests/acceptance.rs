//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. `WALKS_ACCEPTANCE_LEVEL=quick` runs the reduced scale.

use std::process::{Command, ExitCode};
use std::time::Instant;

use walks_cli::{run_suite_with, Level};

const SEED: u64 = 0;

fn line(id: u32, name: &str, pass: bool, secs: f64, detail: &str) {
    let verdict = if pass { "PASS" } else { "FAIL" };
    println!("[{verdict}] criterion {id:>2}: {name} ({secs:.1}s) - {detail}");
}

/// Two quick validations through the binary must print identical reports.
fn determinism() -> (bool, String) {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_walks"))
            .args(["validate", "--level", "quick", "--seed", &SEED.to_string()])
            .output()
            .expect("walks binary runs")
    };
    let (a, b) = (run(), run());
    if !(a.status.success() && b.status.success()) {
        return (false, format!("exit status {} / {}", a.status, b.status));
    }
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    (same, format!("{} report bytes, identical: {same}", a.stdout.len()))
}

fn main() -> ExitCode {
    let level = match std::env::var("WALKS_ACCEPTANCE_LEVEL").as_deref() {
        Ok("quick") => Level::Quick,
        _ => Level::Full,
    };
    println!("acceptance suite at level {level:?}, seed {SEED}");
    let report = run_suite_with(level, SEED, |c, elapsed| {
        line(c.id, &c.name, c.pass, elapsed.as_secs_f64(), &c.detail);
    });

    let started = Instant::now();
    let (same, detail) = determinism();
    line(12, "determinism of quick validation", same, started.elapsed().as_secs_f64(), &detail);

    let failed: Vec<u32> =
        report.criteria.iter().filter(|c| !c.pass).map(|c| c.id).chain((!same).then_some(12)).collect();
    if failed.is_empty() {
        println!("all 12 criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("failed criteria: {failed:?}");
        ExitCode::FAILURE
    }
}
