use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::engine::RoundLog;
use crate::graph::{Graph, NodeId};

use super::naive::Launch;
use super::session::Walker;
use super::single::check_walkable;
use super::{check_node, default_many_lambda, WalkError, WalkParams, WalkResult, WalkTrace};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ManyWalksResult {
    pub walks: Vec<WalkResult>,
    pub round_log: RoundLog,
    pub lambda: u64,
    /// True when all walks ran as concurrent naive tokens.
    pub naive_fallback: bool,
}

impl ManyWalksResult {
    pub fn endpoints(&self) -> Vec<NodeId> {
        self.walks.iter().map(|w| w.endpoint).collect()
    }
}

impl Walker<'_> {
    /// The lambda [`many_random_walks`] would use for `k` sources.
    pub fn many_lambda_for(&self, k: u64, params: &WalkParams) -> u64 {
        params
            .lambda
            .unwrap_or_else(|| default_many_lambda(k, params.ell, self.diameter(), params.c_lambda))
    }

    pub fn many_random_walks(
        &mut self,
        sources: &[NodeId],
        params: &WalkParams,
        seed: u64,
    ) -> Result<ManyWalksResult, WalkError> {
        params.validate()?;
        if sources.is_empty() {
            return Err(WalkError::InvalidParams("need at least one source".into()));
        }
        for &s in sources {
            check_node(self.g, s)?;
        }
        let ell = params.ell;
        check_walkable(self.g, ell)?;
        let k = sources.len() as u64;
        let lambda = self.many_lambda_for(k, params);
        let mut session = self.session(seed, params.retain_trajectories);

        // No stitch can happen when fewer than 2 lambda steps are needed, so
        // every walk runs as a naive token, all of them concurrently.
        if ell < 2 * lambda {
            let launches: Vec<Launch> = sources
                .iter()
                .enumerate()
                .map(|(i, &s)| Launch { start: s, token: i as u32, source: s, offset: 0, ell })
                .collect();
            let out = session.naive(&launches, params.retain_trajectories)?;
            let mut visits = out.visits.map(Vec::into_iter);
            let walks = sources
                .iter()
                .zip(&out.endpoints)
                .map(|(&s, &endpoint)| {
                    let positions = visits.as_mut().and_then(Iterator::next);
                    WalkResult {
                        source: s,
                        ell,
                        endpoint,
                        connectors: vec![(s, 0)],
                        trace: positions.clone().map(|tail| WalkTrace { segments: Vec::new(), tail }),
                        positions,
                        round_log: session.log.clone(),
                        lambda,
                        gmw_invocations: 0,
                    }
                })
                .collect();
            return Ok(ManyWalksResult { walks, round_log: session.log, lambda, naive_fallback: true });
        }

        if params.cache_bfs {
            session.bfs_cache = Some(HashMap::new());
        }
        session.phase1(params.eta, lambda)?;
        let mut walks = Vec::with_capacity(sources.len());
        for &s in sources {
            walks.push(session.stitch(s, ell, lambda)?);
        }
        Ok(ManyWalksResult { walks, round_log: session.log, lambda, naive_fallback: false })
    }
}

/// `k` walks of length `ell`: one shared Phase 1, then the walks are
/// stitched one at a time.
pub fn many_random_walks(
    g: &Graph,
    sources: &[NodeId],
    params: &WalkParams,
    seed: u64,
) -> Result<ManyWalksResult, WalkError> {
    Walker::new(g).many_random_walks(sources, params, seed)
}
