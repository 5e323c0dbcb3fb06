use std::collections::HashMap;

use crate::graph::{Graph, NodeId};

use super::naive::Launch;
use super::session::{Session, Walker};
use super::{check_node, default_lambda, Segment, WalkError, WalkParams, WalkResult, WalkTrace};

impl Session<'_, '_> {
    /// Phase 2 for one source: stitch sampled short walks while at least
    /// `2 lambda` steps remain, then finish naively. The returned log covers
    /// only this walk; it is also merged into the session log.
    pub(crate) fn stitch(&mut self, s: NodeId, ell: u64, lambda: u64) -> Result<WalkResult, WalkError> {
        let outer = std::mem::take(&mut self.log);
        let result = self.stitch_inner(s, ell, lambda);
        let walk_log = std::mem::replace(&mut self.log, outer);
        self.log.merge(&walk_log);
        let mut result = result?;
        result.round_log = walk_log;
        Ok(result)
    }

    fn stitch_inner(&mut self, s: NodeId, ell: u64, lambda: u64) -> Result<WalkResult, WalkError> {
        let mut holder = s;
        let mut completed = 0u64;
        let mut connectors = vec![(s, 0)];
        let mut segments = Vec::new();
        let mut gmw_invocations = 0;
        while completed + 2 * lambda <= ell {
            let token = [u64::from(s), completed];
            let mut sampled = self.sample(holder, token)?;
            if sampled.is_none() {
                self.more(holder, ell / lambda, lambda)?;
                gmw_invocations += 1;
                sampled = self.sample(holder, token)?;
            }
            let walk = sampled.expect("fresh walks were just generated at the holder");
            let trajectory = self
                .store
                .trajectories
                .as_ref()
                .map(|t| t[walk.walk_id as usize].clone());
            segments.push(Segment { start: holder, offset: completed, length: walk.length, walk_id: walk.walk_id, trajectory });
            completed += walk.length;
            holder = walk.destination;
            connectors.push((holder, completed));
        }

        let launch = Launch { start: holder, token: 0, source: s, offset: completed, ell };
        let tail = self.naive(&[launch], true)?;
        Ok(WalkResult {
            source: s,
            ell,
            endpoint: tail.endpoints[0],
            connectors,
            positions: None,
            round_log: Default::default(),
            lambda,
            gmw_invocations,
            trace: Some(WalkTrace {
                segments,
                tail: tail.visits.and_then(|mut v| v.pop()).unwrap_or_default(),
            }),
        })
    }
}

pub(crate) fn check_walkable(g: &Graph, ell: u64) -> Result<(), WalkError> {
    if g.node_count() == 1 && ell > 0 {
        return Err(WalkError::InvalidParams("a single-node graph admits no steps".into()));
    }
    Ok(())
}

impl Walker<'_> {
    /// The lambda [`single_random_walk`] would use.
    pub fn lambda_for(&self, params: &WalkParams) -> u64 {
        params
            .lambda
            .unwrap_or_else(|| default_lambda(params.ell, self.diameter(), params.c_lambda))
    }

    pub fn single_random_walk(&mut self, s: NodeId, params: &WalkParams, seed: u64) -> Result<WalkResult, WalkError> {
        params.validate()?;
        check_node(self.g, s)?;
        let ell = params.ell;
        check_walkable(self.g, ell)?;
        let m = self.g.edge_count();
        if params.topology_collection && ell > m.saturating_mul(m) {
            let mut session = self.session(seed, false);
            return session.collect(s, ell);
        }
        let lambda = self.lambda_for(params);
        let mut session = self.session(seed, params.retain_trajectories);
        if params.cache_bfs {
            session.bfs_cache = Some(HashMap::new());
        }
        if ell >= 2 * lambda {
            session.phase1(params.eta, lambda)?;
        }
        let mut result = session.stitch(s, ell, lambda)?;
        result.round_log = session.log;
        Ok(result)
    }
}

/// Samples an `ell`-step simple random walk from `s` by stitching short
/// walks; the endpoint law is exact for any lambda.
pub fn single_random_walk(g: &Graph, s: NodeId, params: &WalkParams, seed: u64) -> Result<WalkResult, WalkError> {
    Walker::new(g).single_random_walk(s, params, seed)
}
