//! Experiment configuration files.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;
use walks_core::{generate, Graph, GraphError, GraphSpec, MixingConfig, NodeId, WalkParams};

/// Environment variable that replaces the configured base seed.
pub const SEED_ENV: &str = "WALKS_SEED";

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("malformed config: {0}")]
    Parse(#[from] serde_json::Error),
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
}

/// A graph file on disk, path relative to the config file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphFileRef {
    pub file: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GraphSource {
    File(GraphFileRef),
    Spec(GraphSpec),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Protocol {
    Walk {
        #[serde(default)]
        source: NodeId,
        params: WalkParams,
    },
    Kwalk {
        sources: Vec<NodeId>,
        params: WalkParams,
    },
    Rst {
        #[serde(default)]
        root: NodeId,
    },
    Mixing {
        #[serde(default)]
        source: NodeId,
        #[serde(default)]
        config: MixingConfig,
    },
    /// Verifies `sequence`, or a fresh naive walk of length `ell` per trial.
    VerifyPath {
        #[serde(default)]
        sequence: Option<Vec<NodeId>>,
        #[serde(default = "default_verify_ell")]
        ell: u64,
    },
    Scaling {
        #[serde(default)]
        source: NodeId,
        ells: Vec<u64>,
        #[serde(default)]
        params: WalkParams,
    },
}

fn default_verify_ell() -> u64 {
    16
}

impl Protocol {
    pub fn name(&self) -> &'static str {
        match self {
            Protocol::Walk { .. } => "walk",
            Protocol::Kwalk { .. } => "kwalk",
            Protocol::Rst { .. } => "rst",
            Protocol::Mixing { .. } => "mixing",
            Protocol::VerifyPath { .. } => "verify-path",
            Protocol::Scaling { .. } => "scaling",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Directory for artifacts, relative to the config file.
    pub dir: PathBuf,
    /// File stem: `<dir>/<name>.json` and `<dir>/<name>.csv`.
    pub name: String,
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig { dir: PathBuf::from("results"), name: "results".into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub graph: GraphSource,
    /// Seed for random graph generators.
    #[serde(default)]
    pub graph_seed: u64,
    pub protocol: Protocol,
    /// Trial `i` runs with seed `seed + i`.
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_trials")]
    pub trials: u32,
    #[serde(default)]
    pub output: OutputConfig,
}

fn default_trials() -> u32 {
    1
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, ConfigError> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|source| ConfigError::Io { path: path.to_path_buf(), source })?;
        Self::from_json(&text)
    }

    /// Config seed unless [`SEED_ENV`] is set.
    pub fn effective_seed(&self) -> Result<u64, ConfigError> {
        match std::env::var(SEED_ENV) {
            Ok(raw) => raw
                .trim()
                .parse()
                .map_err(|_| ConfigError::Invalid(format!("{SEED_ENV}={raw:?} is not an unsigned integer"))),
            Err(_) => Ok(self.seed),
        }
    }

    pub fn build_graph(&self, base: &Path) -> Result<Graph, ConfigError> {
        match &self.graph {
            GraphSource::File(r) => Ok(Graph::load(base.join(&r.file))?),
            GraphSource::Spec(spec) => Ok(generate(spec, self.graph_seed)?),
        }
    }

    /// Range checks that need the graph.
    pub fn validate(&self, g: &Graph) -> Result<(), ConfigError> {
        let n = g.node_count();
        let node = |v: NodeId, what: &str| {
            if (v as usize) < n {
                Ok(())
            } else {
                Err(ConfigError::Invalid(format!("{what} {v} out of range for {n} nodes")))
            }
        };
        if self.trials == 0 {
            return Err(ConfigError::Invalid("trials must be at least 1".into()));
        }
        if self.seed.checked_add(u64::from(self.trials)).is_none() {
            return Err(ConfigError::Invalid("seed + trials overflows".into()));
        }
        let check_params = |p: &WalkParams| {
            if p.lambda == Some(0) || p.eta == 0 || !(p.c_lambda.is_finite() && p.c_lambda > 0.0) {
                Err(ConfigError::Invalid("walk params need lambda >= 1, eta >= 1, c_lambda > 0".into()))
            } else {
                Ok(())
            }
        };
        match &self.protocol {
            Protocol::Walk { source, params } => {
                node(*source, "source")?;
                check_params(params)
            }
            Protocol::Kwalk { sources, params } => {
                if sources.is_empty() {
                    return Err(ConfigError::Invalid("kwalk needs at least one source".into()));
                }
                sources.iter().try_for_each(|&s| node(s, "source"))?;
                check_params(params)
            }
            Protocol::Rst { root } => {
                if n < 2 {
                    return Err(ConfigError::Invalid("rst needs at least two nodes".into()));
                }
                node(*root, "root")
            }
            Protocol::Mixing { source, config } => {
                node(*source, "source")?;
                if config.reps == 0 || config.max_ell == 0 || config.samples == Some(0) {
                    return Err(ConfigError::Invalid("mixing needs reps, max_ell and samples >= 1".into()));
                }
                let c = &config.closeness;
                if ![c.epsilon, c.c_k, c.c_theta, c.sigma].iter().all(|x| x.is_finite() && *x > 0.0) {
                    return Err(ConfigError::Invalid("closeness constants must be positive".into()));
                }
                Ok(())
            }
            Protocol::VerifyPath { sequence, .. } => match sequence {
                Some(seq) if seq.is_empty() => Err(ConfigError::Invalid("sequence must be nonempty".into())),
                Some(seq) => seq.iter().try_for_each(|&v| node(v, "sequence entry")),
                None => Ok(()),
            },
            Protocol::Scaling { source, ells, params } => {
                node(*source, "source")?;
                if ells.is_empty() {
                    return Err(ConfigError::Invalid("scaling needs at least one ell".into()));
                }
                check_params(params)
            }
        }
    }
}
