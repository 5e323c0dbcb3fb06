//! Exact, centralized ground truth for the distributed protocols.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, SymmetricEigen};
use num_bigint::BigInt;
use num_traits::{One, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;
use thiserror::Error;

use crate::distribution::{l1_distance, Distribution};
use crate::graph::{Graph, NodeId};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("{op} supports at most {limit} nodes, got {n}")]
    TooLarge { op: &'static str, n: usize, limit: usize },
    #[error("mixing time is undefined on a bipartite graph")]
    BipartiteGraph,
    #[error("graph has {count} spanning trees, more than the limit {limit}")]
    TooMany { count: BigInt, limit: usize },
    #[error("category {0} has zero expected probability but a nonzero count")]
    DegenerateExpected(usize),
    #[error("{0} observed categories but {1} expected probabilities")]
    DimensionMismatch(usize, usize),
    #[error("distance did not fall below {epsilon} within {steps} steps")]
    NoConvergence { epsilon: f64, steps: u64 },
}

const WALK_LIMIT: usize = 4096;
const EIGEN_LIMIT: usize = 1024;
const CUT_LIMIT: usize = 20;
const KIRCHHOFF_LIMIT: usize = 64;
const ENUMERATION_LIMIT: usize = 10_000;
const MIXING_SCAN_LIMIT: u64 = 10_000_000;

fn ensure_size(op: &'static str, g: &Graph, limit: usize) -> Result<(), OracleError> {
    if g.node_count() > limit {
        Err(OracleError::TooLarge { op, n: g.node_count(), limit })
    } else {
        Ok(())
    }
}

/// Row-stochastic `P(u, v) = mult(u, v) / d(u)`, optionally lazy `(I + P) / 2`.
#[derive(Debug, Clone)]
pub struct TransitionOperator {
    rows: Vec<Vec<(usize, f64)>>,
}

impl TransitionOperator {
    pub fn new(g: &Graph) -> Self {
        let rows = (0..g.node_count() as NodeId)
            .map(|u| {
                let d = g.degree(u) as f64;
                g.ports(u)
                    .iter()
                    .map(|p| (p.neighbor as usize, f64::from(p.multiplicity) / d))
                    .collect()
            })
            .collect();
        TransitionOperator { rows }
    }

    pub fn lazy(g: &Graph) -> Self {
        let mut op = Self::new(g);
        for (u, row) in op.rows.iter_mut().enumerate() {
            row.iter_mut().for_each(|(_, p)| *p /= 2.0);
            row.push((u, 0.5));
        }
        op
    }

    pub fn row_sum(&self, u: usize) -> f64 {
        self.rows[u].iter().map(|&(_, p)| p).sum()
    }

    /// One step of the chain applied to a distribution (row vector times P).
    pub fn apply(&self, dist: &Distribution) -> Distribution {
        let mut out = vec![0.0; self.rows.len()];
        for (u, &mass) in dist.probs().iter().enumerate() {
            if mass != 0.0 {
                for &(v, p) in &self.rows[u] {
                    out[v] += mass * p;
                }
            }
        }
        Distribution::from_vec_unchecked(out)
    }

    pub fn dense(&self) -> DMatrix<f64> {
        let n = self.rows.len();
        let mut m = DMatrix::zeros(n, n);
        for (u, row) in self.rows.iter().enumerate() {
            for &(v, p) in row {
                m[(u, v)] += p;
            }
        }
        m
    }
}

/// `e_s P^ell`.
pub fn walk_distribution(g: &Graph, s: NodeId, ell: u64) -> Result<Distribution, OracleError> {
    ensure_size("walk_distribution", g, WALK_LIMIT)?;
    let op = TransitionOperator::new(g);
    let mut d = Distribution::point_mass(g.node_count(), s as usize);
    for _ in 0..ell {
        d = op.apply(&d);
    }
    Ok(d)
}

/// `||pi_x(t) - pi||_1` for `t = 0..=t_max`.
pub fn l1_curve(g: &Graph, x: NodeId, t_max: u64) -> Result<Vec<f64>, OracleError> {
    ensure_size("l1_curve", g, WALK_LIMIT)?;
    let op = TransitionOperator::new(g);
    let pi = g.stationary_distribution();
    let mut d = Distribution::point_mass(g.node_count(), x as usize);
    let mut curve = Vec::with_capacity(t_max as usize + 1);
    for t in 0..=t_max {
        if t > 0 {
            d = op.apply(&d);
        }
        curve.push(l1_distance(&d, &pi).expect("same node set"));
    }
    Ok(curve)
}

/// Smallest `t` with `||pi_x(t) - pi||_1 < epsilon`.
pub fn exact_mixing_time(g: &Graph, x: NodeId, epsilon: f64) -> Result<u64, OracleError> {
    ensure_size("exact_mixing_time", g, WALK_LIMIT)?;
    if g.is_bipartite() {
        return Err(OracleError::BipartiteGraph);
    }
    let op = TransitionOperator::new(g);
    let pi = g.stationary_distribution();
    let mut d = Distribution::point_mass(g.node_count(), x as usize);
    for t in 0..=MIXING_SCAN_LIMIT {
        if l1_distance(&d, &pi).expect("same node set") < epsilon {
            return Ok(t);
        }
        d = op.apply(&d);
    }
    Err(OracleError::NoConvergence { epsilon, steps: MIXING_SCAN_LIMIT })
}

/// Eigenvalues of P in descending order, via the symmetric similarity
/// `D^{1/2} P D^{-1/2} = D^{-1/2} A D^{-1/2}`.
pub fn transition_spectrum(g: &Graph, lazy: bool) -> Result<Vec<f64>, OracleError> {
    ensure_size("transition_spectrum", g, EIGEN_LIMIT)?;
    let n = g.node_count();
    let inv_sqrt: Vec<f64> = g.degrees().iter().map(|&d| 1.0 / (d as f64).sqrt()).collect();
    let mut s = DMatrix::zeros(n, n);
    for u in 0..n as NodeId {
        for p in g.ports(u) {
            let v = p.neighbor as usize;
            s[(u as usize, v)] = f64::from(p.multiplicity) * inv_sqrt[u as usize] * inv_sqrt[v];
        }
    }
    if lazy {
        s = (s + DMatrix::identity(n, n)) * 0.5;
    }
    let mut values: Vec<f64> = SymmetricEigen::new(s).eigenvalues.iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Second-largest eigenvalue of P.
pub fn second_eigenvalue(g: &Graph) -> Result<f64, OracleError> {
    Ok(transition_spectrum(g, false)?.get(1).copied().unwrap_or(1.0))
}

/// Second-largest eigenvalue of the lazy chain `(I + P) / 2`.
pub fn second_eigenvalue_lazy(g: &Graph) -> Result<f64, OracleError> {
    Ok(transition_spectrum(g, true)?.get(1).copied().unwrap_or(1.0))
}

/// `min_S cut(S) / min(vol S, vol S^c)` over all nonempty proper subsets.
pub fn conductance(g: &Graph) -> Result<f64, OracleError> {
    ensure_size("conductance", g, CUT_LIMIT)?;
    let n = g.node_count();
    if n < 2 {
        return Ok(1.0);
    }
    let edges: Vec<(usize, usize, u64)> = g.edges().map(|(u, v, m)| (u as usize, v as usize, u64::from(m))).collect();
    let total_volume: u64 = g.degrees().iter().sum();
    let mut best = f64::INFINITY;
    // Node n-1 stays outside S, so each cut is enumerated once.
    for mask in 1u32..(1 << (n - 1)) {
        let inside = |u: usize| u < n - 1 && mask & (1 << u) != 0;
        let volume: u64 = (0..n - 1).filter(|&u| inside(u)).map(|u| g.degree(u as NodeId)).sum();
        let cut: u64 = edges.iter().filter(|&&(u, v, _)| inside(u) != inside(v)).map(|e| e.2).sum();
        let ratio = cut as f64 / volume.min(total_volume - volume) as f64;
        best = best.min(ratio);
    }
    Ok(best)
}

/// Number of spanning trees (multiplicity-weighted) by the matrix-tree
/// theorem, using fraction-free Bareiss elimination in exact integers.
pub fn count_spanning_trees(g: &Graph) -> Result<BigInt, OracleError> {
    ensure_size("count_spanning_trees", g, KIRCHHOFF_LIMIT)?;
    let n = g.node_count();
    if n == 1 {
        return Ok(BigInt::one());
    }
    // Laplacian with the last row and column removed.
    let k = n - 1;
    let mut a: Vec<Vec<BigInt>> = vec![vec![BigInt::zero(); k]; k];
    for (u, row) in a.iter_mut().enumerate() {
        row[u] = BigInt::from(g.degree(u as NodeId));
        for p in g.ports(u as NodeId) {
            let v = p.neighbor as usize;
            if v < k {
                row[v] -= BigInt::from(p.multiplicity);
            }
        }
    }
    let mut sign = BigInt::one();
    let mut prev = BigInt::one();
    for i in 0..k {
        if a[i][i].is_zero() {
            let Some(r) = (i + 1..k).find(|&r| !a[r][i].is_zero()) else {
                return Ok(BigInt::zero());
            };
            a.swap(i, r);
            sign = -sign;
        }
        for r in i + 1..k {
            for c in i + 1..k {
                let value = (&a[r][c] * &a[i][i] - &a[r][i] * &a[i][c]) / &prev;
                a[r][c] = value;
            }
            a[r][i] = BigInt::zero();
        }
        prev = a[i][i].clone();
    }
    Ok(sign * &a[k - 1][k - 1])
}

/// A spanning tree as sorted `(u, v)` pairs with `u < v`.
pub type TreeEdges = Vec<(NodeId, NodeId)>;

/// All spanning trees with their multiplicity weights (the number of
/// parallel-edge choices realizing each vertex pair set).
pub fn enumerate_spanning_trees(g: &Graph) -> Result<Vec<(TreeEdges, u64)>, OracleError> {
    let count = count_spanning_trees(g)?;
    if count > BigInt::from(ENUMERATION_LIMIT) {
        return Err(OracleError::TooMany { count, limit: ENUMERATION_LIMIT });
    }
    let edges: Vec<(NodeId, NodeId, u32)> = g.edges().collect();
    let n = g.node_count();
    let mut out = Vec::new();
    let mut chosen = Vec::with_capacity(n.saturating_sub(1));
    let parent: Vec<usize> = (0..n).collect();
    enumerate_rec(&edges, 0, n - 1, &parent, &mut chosen, &mut out);
    Ok(out)
}

fn find(parent: &[usize], mut x: usize) -> usize {
    while parent[x] != x {
        x = parent[x];
    }
    x
}

fn enumerate_rec(
    edges: &[(NodeId, NodeId, u32)],
    next: usize,
    needed: usize,
    parent: &[usize],
    chosen: &mut Vec<usize>,
    out: &mut Vec<(TreeEdges, u64)>,
) {
    if chosen.len() == needed {
        let tree = chosen.iter().map(|&i| (edges[i].0, edges[i].1)).collect();
        let weight = chosen.iter().map(|&i| u64::from(edges[i].2)).product();
        out.push((tree, weight));
        return;
    }
    if edges.len() - next < needed - chosen.len() {
        return;
    }
    let (u, v, _) = edges[next];
    let (ru, rv) = (find(parent, u as usize), find(parent, v as usize));
    if ru != rv {
        let mut joined = parent.to_vec();
        joined[ru] = rv;
        chosen.push(next);
        enumerate_rec(edges, next + 1, needed, &joined, chosen, out);
        chosen.pop();
    }
    enumerate_rec(edges, next + 1, needed, parent, chosen, out);
}

/// Pearson goodness-of-fit outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestReport {
    pub statistic: f64,
    pub dof: usize,
    pub p_value: f64,
    pub alpha: f64,
    /// True when the fit is not rejected (`p_value > alpha`).
    pub pass: bool,
}

pub const DEFAULT_ALPHA: f64 = 0.001;

/// Chi-square test of `observed` counts against `expected` probabilities.
/// Categories whose expected count is below 5 are pooled, smallest first.
pub fn chi_square_gof(observed: &[u64], expected: &[f64]) -> Result<TestReport, OracleError> {
    chi_square_gof_at(observed, expected, DEFAULT_ALPHA)
}

pub fn chi_square_gof_at(observed: &[u64], expected: &[f64], alpha: f64) -> Result<TestReport, OracleError> {
    if observed.len() != expected.len() {
        return Err(OracleError::DimensionMismatch(observed.len(), expected.len()));
    }
    let total: u64 = observed.iter().sum();
    let mass: f64 = expected.iter().sum();
    let mut cells: Vec<(f64, u64)> = Vec::with_capacity(observed.len());
    for (i, (&o, &p)) in observed.iter().zip(expected).enumerate() {
        if p <= 0.0 {
            if o > 0 {
                return Err(OracleError::DegenerateExpected(i));
            }
            continue;
        }
        cells.push((total as f64 * p / mass, o));
    }
    cells.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut pooled: Vec<(f64, u64)> = Vec::with_capacity(cells.len());
    let mut pending = (0.0, 0u64);
    for (e, o) in cells {
        if pending.0 > 0.0 || e < 5.0 {
            pending = (pending.0 + e, pending.1 + o);
            if pending.0 >= 5.0 {
                pooled.push(pending);
                pending = (0.0, 0);
            }
        } else {
            pooled.push((e, o));
        }
    }
    if pending.0 > 0.0 {
        match pooled.first_mut() {
            Some(first) => {
                first.0 += pending.0;
                first.1 += pending.1;
            }
            None => pooled.push(pending),
        }
    }
    let statistic: f64 = pooled
        .iter()
        .map(|&(e, o)| {
            let diff = o as f64 - e;
            diff * diff / e
        })
        .sum();
    let dof = pooled.len().saturating_sub(1);
    let p_value = if dof == 0 || statistic <= 0.0 { 1.0 } else { gamma_ur(dof as f64 / 2.0, statistic / 2.0).clamp(0.0, 1.0) };
    Ok(TestReport { statistic, dof, p_value, alpha, pass: p_value > alpha })
}

/// Visit counts of one walk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VisitProfile {
    pub counts: BTreeMap<NodeId, u64>,
    pub total: u64,
    /// `max_y count(y) / d(y)` and the maximizing node.
    pub max_ratio: f64,
    pub argmax: NodeId,
}

pub fn visit_count_profile(g: &Graph, positions: &BTreeMap<NodeId, Vec<u64>>) -> VisitProfile {
    let counts: BTreeMap<NodeId, u64> = positions.iter().map(|(&v, p)| (v, p.len() as u64)).collect();
    let total = counts.values().sum();
    let (argmax, max_ratio) = counts
        .iter()
        .map(|(&v, &c)| (v, c as f64 / g.degree(v) as f64))
        .fold((0, 0.0), |best, cur| if cur.1 > best.1 { cur } else { best });
    VisitProfile { counts, total, max_ratio, argmax }
}

/// Mean number of steps a centralized walk from `s` takes to visit every
/// node, over `trials` runs.
pub fn empirical_cover_time(g: &Graph, s: NodeId, trials: u32, seed: u64) -> f64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = g.node_count();
    let mut total = 0u64;
    for _ in 0..trials {
        let mut seen = vec![false; n];
        seen[s as usize] = true;
        let mut remaining = n - 1;
        let mut at = s;
        let mut steps = 0u64;
        while remaining > 0 {
            at = g.ports(at)[g.sample_port(at, &mut rng)].neighbor;
            steps += 1;
            if !seen[at as usize] {
                seen[at as usize] = true;
                remaining -= 1;
            }
        }
        total += steps;
    }
    total as f64 / f64::from(trials.max(1))
}
