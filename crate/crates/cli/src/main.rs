use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use walks_cli::experiment::{is_config_error, run_experiment, summary_text};
use walks_cli::{run_suite_with, Level};
use walks_core::{generate, GraphSpec};

#[derive(Parser)]
#[command(name = "walks", version, about = "Distributed random-walk experiments on a CONGEST simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment described by a JSON config.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Overrides the config's output directory.
        #[arg(long)]
        out_dir: Option<PathBuf>,
    },
    /// Run the acceptance suite and print its JSON report.
    Validate {
        #[arg(long, value_enum, default_value_t = LevelArg::Quick)]
        level: LevelArg,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate a fixture graph and write it as JSON.
    GenGraph {
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        p: Option<f64>,
        #[arg(long)]
        d: Option<usize>,
        #[arg(long)]
        dim: Option<u32>,
        #[arg(long)]
        rows: Option<usize>,
        #[arg(long)]
        cols: Option<usize>,
        #[arg(long)]
        leaves: Option<usize>,
        #[arg(long)]
        k: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum LevelArg {
    Quick,
    Full,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Path,
    Cycle,
    Clique,
    Star,
    Hypercube,
    Torus,
    ErdosRenyi,
    RandomRegular,
    Gadget,
}

fn need<T>(value: Option<T>, flag: &str) -> Result<T> {
    value.with_context(|| format!("--{flag} is required for this kind"))
}

#[allow(clippy::too_many_arguments)]
fn graph_spec(
    kind: Kind,
    n: Option<usize>,
    p: Option<f64>,
    d: Option<usize>,
    dim: Option<u32>,
    rows: Option<usize>,
    cols: Option<usize>,
    leaves: Option<usize>,
    k: Option<usize>,
) -> Result<GraphSpec> {
    Ok(match kind {
        Kind::Path => GraphSpec::Path { n: need(n, "n")? },
        Kind::Cycle => GraphSpec::Cycle { n: need(n, "n")? },
        Kind::Clique => GraphSpec::Clique { n: need(n, "n")? },
        Kind::Star => GraphSpec::Star { leaves: need(leaves, "leaves")? },
        Kind::Hypercube => GraphSpec::Hypercube { dim: need(dim, "dim")? },
        Kind::Torus => GraphSpec::Torus { rows: need(rows, "rows")?, cols: need(cols, "cols")? },
        Kind::ErdosRenyi => GraphSpec::ErdosRenyi { n: need(n, "n")?, p: need(p, "p")? },
        Kind::RandomRegular => GraphSpec::RandomRegular { n: need(n, "n")?, d: need(d, "d")? },
        Kind::Gadget => GraphSpec::Gadget { n: need(n, "n")?, k: need(k, "k")? },
    })
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.command {
        Command::Run { config, out_dir } => {
            let (results, artifacts) = run_experiment(&config, out_dir.as_deref())?;
            println!("{}", summary_text(&results));
            println!("wrote {} and {}", artifacts.json.display(), artifacts.csv.display());
            for v in &results.violations {
                eprintln!("violation: {v}");
            }
            Ok(if results.violations.is_empty() { ExitCode::SUCCESS } else { ExitCode::from(2) })
        }
        Command::Validate { level, seed, out } => {
            let level = match level {
                LevelArg::Quick => Level::Quick,
                LevelArg::Full => Level::Full,
            };
            let report = run_suite_with(level, seed, |c, elapsed| {
                let verdict = if c.pass { "PASS" } else { "FAIL" };
                eprintln!("[{verdict}] {:>2} {} ({:.1}s)", c.id, c.name, elapsed.as_secs_f64());
            });
            let json = report.to_json();
            match out {
                Some(path) => std::fs::write(&path, json + "\n").with_context(|| format!("writing {}", path.display()))?,
                None => println!("{json}"),
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::GenGraph { kind, n, p, d, dim, rows, cols, leaves, k, seed, out } => {
            let spec = graph_spec(kind, n, p, d, dim, rows, cols, leaves, k)?;
            let g = generate(&spec, seed)?;
            if g.node_count() == 0 {
                bail!("generated an empty graph");
            }
            g.save(&out).with_context(|| format!("writing {}", out.display()))?;
            println!("n={} m={} written to {}", g.node_count(), g.edge_count(), out.display());
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            if is_config_error(&err) {
                ExitCode::from(2)
            } else {
                ExitCode::FAILURE
            }
        }
    }
}
