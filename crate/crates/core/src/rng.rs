//! Reproducible per-node random streams.
//!
//! Every `(seed, node, label)` triple names an independent ChaCha8 stream:
//! the seed and label select the key and the node selects the stream
//! number, so two nodes never share keystream under the same key.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::graph::NodeId;

/// The stream a node program draws from.
pub type NodeRng = ChaCha8Rng;

fn splitmix64(state: &mut u64) -> u64 {
    *state = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    let mut z = *state;
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

fn key(seed: u64, label: &str) -> [u8; 32] {
    let mut state = seed ^ fnv1a(label).rotate_left(17);
    let mut out = [0u8; 32];
    for chunk in out.chunks_exact_mut(8) {
        chunk.copy_from_slice(&splitmix64(&mut state).to_le_bytes());
    }
    out
}

/// Independent stream for one node under one protocol label.
pub fn derive_rng(seed: u64, node: NodeId, label: &str) -> NodeRng {
    let mut rng = ChaCha8Rng::from_seed(key(seed, label));
    rng.set_stream(u64::from(node));
    rng
}

/// Streams for every node of an `n`-node graph.
pub fn node_rngs(seed: u64, n: usize, label: &str) -> Vec<NodeRng> {
    let base = ChaCha8Rng::from_seed(key(seed, label));
    (0..n as u64)
        .map(|node| {
            let mut rng = base.clone();
            rng.set_stream(node);
            rng
        })
        .collect()
}

/// A simulator-side stream that belongs to no node (fixture sampling).
pub fn global_rng(seed: u64, label: &str) -> NodeRng {
    let mut rng = ChaCha8Rng::from_seed(key(seed, label));
    rng.set_stream(u64::MAX);
    rng
}

/// Derives a child seed, e.g. one per trial or per repetition.
pub fn sub_seed(seed: u64, label: &str, index: u64) -> u64 {
    let mut state = seed ^ fnv1a(label) ^ index.wrapping_mul(0xd6e8_feb8_6659_fd93);
    splitmix64(&mut state)
}
