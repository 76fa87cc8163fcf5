//! Edge-exposure oracle over a host graph.
//!
//! Answers "does this edge survive?" exactly once per edge per round, with
//! per-edge randomness derived by hashing `(seed, edge id, round)`. The joint
//! distribution of outcomes is therefore independent of query order, and two
//! states with the same seed expose identically no matter how callers
//! interleave their queries.
//!
//! Re-querying a decided edge is an error, never a cached return: the
//! exploration processes built on top of this oracle are only correct under
//! the query-once discipline, and silent caching would hide violations.

use crate::bitset::VertexSet;
use crate::graph::Graph;
use crate::rng::{mix64, unit_from_hash};
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ExposureError {
    #[error("probability {0} outside [0, 1]")]
    ProbabilityRange(f64),
    #[error("pair ({0}, {1}) is not an edge of the host graph")]
    NotAHostEdge(u32, u32),
    #[error("edge ({0}, {1}) was already tested; re-querying is a contract violation")]
    AlreadyTested(u32, u32),
    #[error("edge ({0}, {1}) is already present; it cannot be re-drawn")]
    AlreadyPresent(u32, u32),
    #[error("second round applies to edges that failed round one; ({0}, {1}) has status {2:?}")]
    NotRoundOneAbsent(u32, u32, EdgeStatus),
}

/// Per-edge exposure status.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EdgeStatus {
    Untested,
    /// Failed its first split-round draw; still eligible for the second round.
    AbsentRoundOne,
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TagCount {
    pub draws: usize,
    pub present: usize,
}

/// Partially exposed random subgraph of a host graph.
pub struct ExposureState {
    host: Arc<Graph>,
    p: f64,
    p1: f64,
    seed: u64,
    status: Vec<EdgeStatus>,
    draws: Vec<u8>,
    /// Untested host edges incident to each vertex.
    untested_adj: Vec<VertexSet>,
    tested: usize,
    successes: usize,
    tags: BTreeMap<String, TagCount>,
}

/// Probability for one of two independent rounds that compose to `p`:
/// `1 - p = (1 - p1)^2`.
pub fn split_round(p: f64) -> Result<f64, ExposureError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ExposureError::ProbabilityRange(p));
    }
    Ok(1.0 - (1.0 - p).sqrt())
}

const ROUND_DIRECT: u64 = 0;
const ROUND_ONE: u64 = 1;
const ROUND_TWO: u64 = 2;
/// Reserved round id for auxiliary coins tied to an edge (e.g. the phase
/// split in the endgame); not an exposure draw.
pub(crate) const ROUND_AUX: u64 = 3;

impl ExposureState {
    pub fn new(host: Arc<Graph>, p: f64, seed: u64) -> Result<ExposureState, ExposureError> {
        if !(0.0..=1.0).contains(&p) {
            return Err(ExposureError::ProbabilityRange(p));
        }
        let m = host.edge_count();
        let untested_adj = (0..host.vertex_count())
            .map(|v| host.neighbors(v as u32).clone())
            .collect();
        Ok(ExposureState {
            p1: split_round(p)?,
            host,
            p,
            seed,
            status: vec![EdgeStatus::Untested; m],
            draws: vec![0; m],
            untested_adj,
            tested: 0,
            successes: 0,
            tags: BTreeMap::new(),
        })
    }

    #[inline]
    pub fn host(&self) -> &Graph {
        &self.host
    }

    pub fn host_arc(&self) -> Arc<Graph> {
        Arc::clone(&self.host)
    }

    #[inline]
    pub fn p(&self) -> f64 {
        self.p
    }

    #[inline]
    pub fn p_round(&self) -> f64 {
        self.p1
    }

    #[inline]
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn status(&self, u: u32, v: u32) -> Result<EdgeStatus, ExposureError> {
        let id = self.edge_id(u, v)?;
        Ok(self.status[id])
    }

    pub fn is_present(&self, u: u32, v: u32) -> bool {
        self.host
            .edge_id(u, v)
            .map(|id| self.status[id] == EdgeStatus::Present)
            .unwrap_or(false)
    }

    pub fn is_untested(&self, u: u32, v: u32) -> bool {
        self.host
            .edge_id(u, v)
            .map(|id| self.status[id] == EdgeStatus::Untested)
            .unwrap_or(false)
    }

    fn edge_id(&self, u: u32, v: u32) -> Result<usize, ExposureError> {
        self.host.edge_id(u, v).ok_or(ExposureError::NotAHostEdge(u, v))
    }

    #[inline]
    fn draw_unit(&self, edge_id: usize, round: u64) -> f64 {
        let h = mix64(self.seed ^ mix64((edge_id as u64) << 8 | round));
        unit_from_hash(h)
    }

    /// Auxiliary per-edge coin, independent of all exposure draws.
    pub(crate) fn aux_unit(&self, u: u32, v: u32) -> f64 {
        let id = self.host.edge_id(u, v).expect("aux coin on non-host edge");
        self.draw_unit(id, ROUND_AUX)
    }

    /// One-shot query at retention probability `p` (the net probability).
    pub fn query(&mut self, u: u32, v: u32, tag: &str) -> Result<bool, ExposureError> {
        let id = self.edge_id(u, v)?;
        if self.status[id] != EdgeStatus::Untested {
            return Err(ExposureError::AlreadyTested(u, v));
        }
        let present = self.draw_unit(id, ROUND_DIRECT) < self.p;
        self.draws[id] += 1;
        let entry = self.tags.entry(tag.to_string()).or_default();
        entry.draws += 1;
        if present {
            entry.present += 1;
            self.successes += 1;
            self.status[id] = EdgeStatus::Present;
        } else {
            self.status[id] = EdgeStatus::Absent;
        }
        self.tested += 1;
        self.untested_adj[u as usize].remove(v);
        self.untested_adj[v as usize].remove(u);
        Ok(present)
    }

    /// First split-round draw at `p1 = split_round(p)`. A failure leaves the
    /// edge eligible for `second_round`.
    pub fn query_round_one(&mut self, u: u32, v: u32, tag: &str) -> Result<bool, ExposureError> {
        let id = self.edge_id(u, v)?;
        if self.status[id] != EdgeStatus::Untested {
            return Err(ExposureError::AlreadyTested(u, v));
        }
        let present = self.draw_unit(id, ROUND_ONE) < self.p1;
        self.draws[id] += 1;
        let entry = self.tags.entry(tag.to_string()).or_default();
        entry.draws += 1;
        if present {
            entry.present += 1;
            self.successes += 1;
            self.status[id] = EdgeStatus::Present;
        } else {
            self.status[id] = EdgeStatus::AbsentRoundOne;
        }
        self.tested += 1;
        self.untested_adj[u as usize].remove(v);
        self.untested_adj[v as usize].remove(u);
        Ok(present)
    }

    /// Second split-round over the given edges: exactly those that failed
    /// round one are re-drawn at `p1`, and successes upgrade to present.
    /// Returns the upgraded edges. Over both rounds the per-edge retention
    /// is `p`, since `1 - p = (1 - p1)^2`.
    pub fn second_round(
        &mut self,
        edges: &[(u32, u32)],
        tag: &str,
    ) -> Result<Vec<(u32, u32)>, ExposureError> {
        // Validate the whole batch first so a failed call leaves no draws.
        for &(u, v) in edges {
            let id = self.edge_id(u, v)?;
            match self.status[id] {
                EdgeStatus::AbsentRoundOne => {}
                EdgeStatus::Present => return Err(ExposureError::AlreadyPresent(u, v)),
                s => return Err(ExposureError::NotRoundOneAbsent(u, v, s)),
            }
        }
        let mut upgraded = Vec::new();
        for &(u, v) in edges {
            let id = self.edge_id(u, v)?;
            let present = self.draw_unit(id, ROUND_TWO) < self.p1;
            self.draws[id] += 1;
            debug_assert!(self.draws[id] <= 2);
            let entry = self.tags.entry(tag.to_string()).or_default();
            entry.draws += 1;
            if present {
                entry.present += 1;
                self.successes += 1;
                self.status[id] = EdgeStatus::Present;
                upgraded.push((u, v));
            } else {
                self.status[id] = EdgeStatus::Absent;
            }
        }
        Ok(upgraded)
    }

    /// Graph on the host vertices holding exactly the present edges.
    pub fn revealed_subgraph(&self) -> Graph {
        let edges: Vec<_> = self.present_edges().collect();
        Graph::from_edges(self.host.vertex_count(), &edges).expect("host edges are simple")
    }

    pub fn present_edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        self.host
            .edges()
            .enumerate()
            .filter(|(id, _)| self.status[*id] == EdgeStatus::Present)
            .map(|(_, e)| e)
    }

    /// Host neighbors of `v` whose edge to `v` is still untested.
    pub fn untested_incident(&self, v: u32) -> &VertexSet {
        &self.untested_adj[v as usize]
    }

    pub fn untested_degree_within(&self, v: u32, within: &VertexSet) -> usize {
        self.untested_adj[v as usize].intersection_len(within)
    }

    /// Query every remaining untested host edge at probability `p`.
    /// Returns the number of new present edges.
    pub fn expose_all_remaining(&mut self, tag: &str) -> usize {
        let untested: Vec<(u32, u32)> = self
            .host
            .edges()
            .enumerate()
            .filter(|(id, _)| {
                matches!(self.status[*id], EdgeStatus::Untested | EdgeStatus::AbsentRoundOne)
            })
            .map(|(_, e)| e)
            .collect();
        let mut new_present = 0;
        for (u, v) in untested {
            let id = self.host.edge_id(u, v).unwrap();
            match self.status[id] {
                EdgeStatus::Untested => {
                    if self.query(u, v, tag).unwrap() {
                        new_present += 1;
                    }
                }
                EdgeStatus::AbsentRoundOne => {
                    if !self.second_round(&[(u, v)], tag).unwrap().is_empty() {
                        new_present += 1;
                    }
                }
                _ => {}
            }
        }
        new_present
    }

    pub fn tested_count(&self) -> usize {
        self.tested
    }

    pub fn success_count(&self) -> usize {
        self.successes
    }

    pub fn total_draws(&self) -> usize {
        self.draws.iter().map(|&d| d as usize).sum()
    }

    pub fn max_draws_per_edge(&self) -> u8 {
        self.draws.iter().copied().max().unwrap_or(0)
    }

    pub fn tag_counts(&self) -> &BTreeMap<String, TagCount> {
        &self.tags
    }
}
