//! Deterministic CONGEST-model simulator with distributed random-walk
//! protocols, random spanning trees and mixing-time estimation, plus exact
//! oracles for validating them.
//!
//! ```
//! use walks_core::{generate, GraphSpec, WalkParams, Walker};
//!
//! # fn main() -> Result<(), Box<dyn std::error::Error>> {
//! let g = generate(&GraphSpec::Hypercube { dim: 6 }, 0)?;
//! let mut walker = Walker::new(&g);
//!
//! let walk = walker.single_random_walk(0, &WalkParams::new(1024), 7)?;
//! assert!(walk.round_log.total_rounds < 1024);
//!
//! let full = walker.regenerate_walk(&walk)?;
//! let sequence = full.sequence().expect("regenerated walks carry positions");
//! assert!(walker.verify_path(&sequence)?.verified);
//!
//! let (tree, _) = walker.random_spanning_tree(0, 7)?;
//! assert!(tree.is_spanning_tree_of(&g));
//! # Ok(())
//! # }
//! ```

pub mod distribution;
pub mod engine;
pub mod graph;
pub mod mixing;
pub mod oracle;
pub mod rng;
pub mod rst;
pub mod stats;
pub mod walks;

pub use distribution::{l1_distance, tv_distance, Distribution, DistributionError};
pub use engine::{EngineError, Message, NodeProgram, RoundContext, RoundLog, RunOptions, Simulator};
pub use graph::{generate, generate_gadget_gn, BfsTree, Gadget, Graph, GraphError, GraphSpec, NodeId, Port};
pub use mixing::{
    closeness_test, estimate_mixing_time, spectral_bounds, BucketPartition, MixingConfig, MixingError, MixingEstimate,
    Verdict,
};
pub use oracle::{
    empirical_cover_time,
    chi_square_gof, conductance, count_spanning_trees, enumerate_spanning_trees, exact_mixing_time,
    second_eigenvalue, walk_distribution, OracleError, TestReport, TransitionOperator,
};
pub use rng::derive_rng;
pub use rst::{first_visit_edges, random_spanning_tree, RstError, SpanningTree};
pub use walks::{
    many_random_walks, naive_walk, regenerate_walk, single_random_walk, verify_path, ManyWalksResult, PathVerdict,
    WalkError, WalkParams, WalkResult, Walker,
};
