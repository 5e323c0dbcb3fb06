//! Probability vectors over the node set.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum DistributionError {
    #[error("distributions have different supports ({0} vs {1} nodes)")]
    DimensionMismatch(usize, usize),
    #[error("entry {index} is negative or not finite ({value})")]
    InvalidEntry { index: usize, value: f64 },
    #[error("entries sum to {0}, expected 1")]
    NotNormalized(f64),
}

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    probs: Vec<f64>,
}

impl Distribution {
    /// Validates nonnegativity and normalization.
    pub fn new(probs: Vec<f64>) -> Result<Self, DistributionError> {
        if let Some((index, &value)) = probs
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(DistributionError::InvalidEntry { index, value });
        }
        let total: f64 = probs.iter().sum();
        if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
            return Err(DistributionError::NotNormalized(total));
        }
        Ok(Distribution { probs })
    }

    pub(crate) fn from_vec_unchecked(probs: Vec<f64>) -> Self {
        Distribution { probs }
    }

    pub fn point_mass(n: usize, at: usize) -> Self {
        let mut probs = vec![0.0; n];
        probs[at] = 1.0;
        Distribution { probs }
    }

    pub fn uniform(n: usize) -> Self {
        Distribution { probs: vec![1.0 / n as f64; n] }
    }

    /// Normalized histogram of node samples.
    pub fn empirical(n: usize, samples: &[u32]) -> Self {
        let mut probs = vec![0.0; n];
        for &s in samples {
            probs[s as usize] += 1.0;
        }
        let k = samples.len().max(1) as f64;
        probs.iter_mut().for_each(|p| *p /= k);
        Distribution { probs }
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.probs
    }
}

/// Sum of absolute coordinate differences.
pub fn l1_distance(p: &Distribution, q: &Distribution) -> Result<f64, DistributionError> {
    if p.len() != q.len() {
        return Err(DistributionError::DimensionMismatch(p.len(), q.len()));
    }
    Ok(p.probs.iter().zip(&q.probs).map(|(a, b)| (a - b).abs()).sum())
}

/// Total variation distance, half the L1 distance.
pub fn tv_distance(p: &Distribution, q: &Distribution) -> Result<f64, DistributionError> {
    l1_distance(p, q).map(|d| d / 2.0)
}
