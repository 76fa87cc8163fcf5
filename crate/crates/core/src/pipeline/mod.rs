//! The six-step long-cycle pipeline: pseudo-clique cover, two-round clique
//! preparation, clique-walking DFS with far-pair queries, block
//! certification, rotating-cycle merges, vertex-classification diagnostics,
//! and the expander-plus-sprinkling endgame.
//!
//! `find_long_cycle` orchestrates the steps and returns either a verified
//! cycle certificate of length at least k + 1 or a structured failure
//! report. Every certificate is re-verified against the exposure state at
//! the API boundary.

mod classify;
mod cover;
mod endgame;
mod merge;
mod prepare;
mod rotating;

pub use classify::{classify_vertices, z_diagnostics, VertexClassification, VertexFlags};
pub use cover::{greedy_cover, is_pseudo_clique, PseudoCliqueCover};
pub use endgame::{detect_good_pairs, endgame_good_pair, EndgameOutcome, GoodPair};
pub use merge::{
    clique_connecting_path, merge_clique_clique, merge_mixed, merge_rotating_disjoint,
    merge_rotating_intersecting,
};
pub use prepare::{prepare_cliques, PreparedClique, PreparedCover};
pub use rotating::{build_rotating_cycle, clique_as_rotating, rotate_path_in_cycle, RotatingCycle};

use crate::bitset::VertexSet;
use crate::blocks::{block_algorithm_scoped, BlockError};
use crate::dfs::{dfs_clique_walk, far_pairs, CliqueWalk, DfsError, DfsPriority};
use crate::exposure::{ExposureError, ExposureState};
use crate::graph::{Graph, GraphError};
use crate::posa::PosaError;
use serde::Serialize;
use std::collections::BTreeMap;
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("host has minimum degree {actual}, need at least k = {required}")]
    MinDegree { required: usize, actual: usize },
    #[error("probability {0} outside [0, 1]")]
    Probability(f64),
    #[error("epsilon {0} out of range: need 0 < eps and 4 eps < 1")]
    EpsilonRange(f64),
    #[error("merge precondition violated: {0}")]
    MergePrecondition(String),
    #[error("rotating-cycle precondition violated: {0}")]
    RotatingPrecondition(String),
    #[error("endgame precondition violated: {0}")]
    EndgamePrecondition(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Exposure(#[from] ExposureError),
    #[error(transparent)]
    Dfs(#[from] DfsError),
    #[error(transparent)]
    Block(#[from] BlockError),
    #[error(transparent)]
    Posa(#[from] PosaError),
}

/// Cycle found by the pipeline, with the construction trace.
#[derive(Debug, Clone, Serialize)]
pub struct CycleCertificate {
    pub cycle: Vec<u32>,
    pub provenance: Vec<String>,
}

impl CycleCertificate {
    /// Distinct vertices, cyclically adjacent present edges, and length at
    /// least max(3, k + 1).
    pub fn verify(&self, s: &ExposureState, k: usize) -> bool {
        let len = self.cycle.len();
        if len < 3 || len < k + 1 {
            return false;
        }
        let n = s.host().vertex_count();
        let mut seen = VertexSet::new(n);
        for &v in &self.cycle {
            if v as usize >= n || seen.contains(v) {
                return false;
            }
            seen.insert(v);
        }
        (0..len).all(|i| s.is_present(self.cycle[i], self.cycle[(i + 1) % len]))
    }
}

/// Furthest pipeline stage that did meaningful work (performed queries or
/// produced a structure).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Cover,
    Prepare,
    Dfs,
    FarPairs,
    Blocks,
    BlockSearch,
    Classify,
    Endgame,
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct QueryStat {
    pub draws: usize,
    pub present: usize,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Diagnostics {
    pub cover_size: usize,
    pub outcasts: usize,
    pub surviving_cliques: usize,
    pub waste: usize,
    pub block_count: usize,
    pub far_pairs: usize,
    /// Exceptional-set sizes [Z1, Z2, Z3, Z4]; reported, never enforced.
    pub z_counts: Option<[usize; 4]>,
    pub endgame_gate_passed: Option<bool>,
    pub boosters_consumed: usize,
    pub total_draws: usize,
    pub max_draws_per_edge: u8,
}

/// Outcome of one pipeline run.
#[derive(Debug, Clone, Serialize)]
pub struct RunReport {
    pub success: bool,
    pub stage: Stage,
    pub cycle: Option<Vec<u32>>,
    pub provenance: Vec<String>,
    pub queries: BTreeMap<String, QueryStat>,
    pub diagnostics: Diagnostics,
    pub k: usize,
    pub p: f64,
    pub seed: u64,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    /// Epsilon override; defaults to min(log^(-1/10) k, 0.05).
    pub eps: Option<f64>,
    /// Restarts for Hamiltonicity searches.
    pub restarts: usize,
    /// Fraction of p withheld from the endgame's first phase and released
    /// during sprinkling.
    pub endgame_reserve: f64,
    /// Rotating-cycle pivots attempted per block in step 4.
    pub pivots_per_block: usize,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            eps: None,
            restarts: 8,
            endgame_reserve: 0.05,
            pivots_per_block: 8,
        }
    }
}

pub fn default_eps(k: usize) -> f64 {
    let formula = (k as f64).ln().powf(-0.1);
    if formula.is_finite() && formula > 0.0 {
        formula.min(0.05)
    } else {
        0.05
    }
}

struct StageTracker(Stage);

impl StageTracker {
    fn advance(&mut self, to: Stage) {
        if to > self.0 {
            self.0 = to;
        }
    }
}

/// Runs the full pipeline on a fresh exposure state of `host` at retention
/// probability `p`. Success returns a verified certificate of a cycle of
/// length at least k + 1 in the revealed subgraph; failure is a structured
/// report, not an error.
pub fn find_long_cycle(
    host: Arc<Graph>,
    k: usize,
    p: f64,
    seed: u64,
    cfg: &PipelineConfig,
) -> Result<RunReport, PipelineError> {
    if host.min_degree() < k {
        return Err(PipelineError::MinDegree { required: k, actual: host.min_degree() });
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(PipelineError::Probability(p));
    }
    let eps = cfg.eps.unwrap_or_else(|| default_eps(k));
    if eps <= 0.0 || eps >= 1.0 {
        return Err(PipelineError::EpsilonRange(eps));
    }
    let n = host.vertex_count();
    let mut s = ExposureState::new(Arc::clone(&host), p, seed)?;
    let mut stage = StageTracker(Stage::Cover);
    let mut diag = Diagnostics::default();
    let vacuous = 4.0 * eps >= 1.0;

    // Step 1: cover and preparation. When 4 eps >= 1 the pseudo-clique
    // machinery is vacuous and the pipeline goes straight to exploration.
    let cover = if vacuous {
        PseudoCliqueCover { cliques: Vec::new(), outcasts: VertexSet::full(n), k, eps }
    } else {
        greedy_cover(&host, k, eps)?
    };
    diag.cover_size = cover.cliques.len();
    diag.outcasts = cover.outcasts.len();
    let prep = prepare_cliques(&cover, &mut s, cfg.restarts)?;
    if !cover.cliques.is_empty() {
        stage.advance(Stage::Prepare);
    }
    diag.surviving_cliques = prep.surviving().count();
    diag.waste = prep.waste.len();

    let alive = VertexSet::full(n).difference(&prep.waste);
    let mut result: Option<CycleCertificate> = None;

    if !alive.is_empty() {
        // Snapshot untested degrees for the Z2 diagnostic.
        let untested_before: Vec<usize> =
            (0..n as u32).map(|v| s.untested_incident(v).len()).collect();

        // Step 2: clique-walking DFS, then far-pair queries.
        let walks: Vec<CliqueWalk> = prep
            .surviving()
            .map(|c| CliqueWalk { members: c.remainder.clone(), cycle: c.cycle.clone().unwrap() })
            .collect();
        let prio = DfsPriority { rank: None, alive: Some(alive.clone()), walks };
        let (t, dfs_log) = dfs_clique_walk(&mut s, &prio, "Q2")?;
        if dfs_log.queries > 0 {
            stage.advance(Stage::Dfs);
        }
        let far = far_pairs(&t, &s, k);
        diag.far_pairs = far.len();
        for &(u, v) in &far {
            stage.advance(Stage::FarPairs);
            if s.query(u, v, "Q2pp")? {
                let path = t.tree_path(u, v)?;
                result = Some(CycleCertificate {
                    cycle: path,
                    provenance: vec![format!("far-pair chord ({u}, {v}) closing a tree path")],
                });
                break;
            }
        }

        if result.is_none() {
            // Step 3: block algorithm on T plus the revealed edges.
            let mut h_edges = t.tree_edges();
            for (u, v) in s.present_edges() {
                if alive.contains(u) && alive.contains(v) {
                    h_edges.push((u, v));
                }
            }
            let h = Graph::from_edges(n, &h_edges)?;
            let (m_graph, d, block_log) = block_algorithm_scoped(&h, &mut s, "Q3", Some(&alive))?;
            if block_log.queries > 0 {
                stage.advance(Stage::Blocks);
            }
            diag.block_count = d.block_count();

            // Step 4: per-block structure search.
            let outcome = block_search(
                &mut s, &t, &m_graph, &d, &prep, k, eps, cfg, &mut stage,
            )?;
            if let Some(cert) = outcome {
                result = Some(cert);
            }

            // Step 5: classification diagnostics.
            if result.is_none() {
                let class = classify_vertices(&t, &d, &m_graph, &s, k, eps);
                let z = z_diagnostics(
                    &host, &cover, &prep, &t, &d, &s, &untested_before, k, eps, &class,
                );
                diag.z_counts = Some(z);
                stage.advance(Stage::Classify);
            }
        }
    }

    // Step 6: endgame on a detected (C, N) pair, or on the whole host when
    // it is small or the clique machinery was vacuous.
    if result.is_none() {
        let mut pairs = detect_good_pairs(&host, &cover, k, eps);
        if pairs.is_empty() && (vacuous || (n as f64) <= (1.0 + eps) * k as f64 + 10.0) {
            pairs.push(GoodPair { clique: VertexSet::full(n), nset: VertexSet::new(n), boundary: 0 });
        }
        for pair in pairs.into_iter().take(4) {
            let x = pair.clique.union(&pair.nset);
            if x.len() < k + 1 {
                continue;
            }
            stage.advance(Stage::Endgame);
            let out = endgame_good_pair(
                &mut s,
                &pair.clique,
                &pair.nset,
                k,
                cfg.endgame_reserve,
                cfg.restarts,
                "Q6",
            )?;
            diag.endgame_gate_passed = Some(out.gate_passed);
            diag.boosters_consumed += out.boosters_consumed;
            if let Some(cert) = out.certificate {
                result = Some(cert);
                break;
            }
        }
    }

    // Boundary re-verification of whatever was produced.
    if let Some(cert) = &result {
        if !cert.verify(&s, k) {
            result = None;
        }
    }
    diag.total_draws = s.total_draws();
    diag.max_draws_per_edge = s.max_draws_per_edge();
    let queries: BTreeMap<String, QueryStat> = s
        .tag_counts()
        .iter()
        .map(|(tag, c)| (tag.clone(), QueryStat { draws: c.draws, present: c.present }))
        .collect();
    Ok(RunReport {
        success: result.is_some(),
        stage: stage.0,
        cycle: result.as_ref().map(|c| c.cycle.clone()),
        provenance: result.map(|c| c.provenance).unwrap_or_default(),
        queries,
        diagnostics: diag,
        k,
        p,
        seed,
    })
}

/// Step 4: inside each block, merge pairs of cliques, certify a single long
/// clique, or build and merge rotating cycles.
#[allow(clippy::too_many_arguments)]
fn block_search(
    s: &mut ExposureState,
    t: &crate::dfs::Forest,
    m_graph: &Graph,
    d: &crate::blocks::BlockDecomposition,
    prep: &PreparedCover,
    k: usize,
    eps: f64,
    cfg: &PipelineConfig,
    stage: &mut StageTracker,
) -> Result<Option<CycleCertificate>, PipelineError> {
    let n = m_graph.vertex_count();
    // Map surviving cliques to their blocks via any cycle edge.
    let mut clique_block: Vec<Option<u32>> = Vec::new();
    for c in prep.surviving() {
        let cyc = c.cycle.as_ref().unwrap();
        let b = d.block_of_edge(m_graph, cyc[0], cyc[1]);
        clique_block.push(b);
    }
    let surviving: Vec<&PreparedClique> = prep.surviving().collect();

    for (bi, members_vec) in d.blocks.iter().enumerate() {
        if members_vec.len() < 3 {
            continue;
        }
        let members = VertexSet::from_iter(n, members_vec.iter().copied());
        let in_block: Vec<&PreparedClique> = surviving
            .iter()
            .zip(&clique_block)
            .filter(|(_, b)| **b == Some(bi as u32))
            .map(|(c, _)| *c)
            .collect();

        // Two cliques sharing a block merge into a long cycle directly.
        if in_block.len() >= 2 {
            stage.advance(Stage::BlockSearch);
            if let Some(cert) = merge_clique_clique(
                s, m_graph, &members, in_block[0], in_block[1], k, eps,
            )? {
                if cert.verify(s, k) {
                    return Ok(Some(cert));
                }
            }
        }

        // A single clique whose remainder is already long enough.
        for c in &in_block {
            if c.remainder.len() >= k + 1 {
                let cert = CycleCertificate {
                    cycle: c.cycle.clone().unwrap(),
                    provenance: vec![format!(
                        "prepared pseudo-clique {} Hamilton cycle of size {}",
                        c.index,
                        c.remainder.len()
                    )],
                };
                if cert.verify(s, k) {
                    stage.advance(Stage::BlockSearch);
                    return Ok(Some(cert));
                }
            }
        }

        // Rotating cycles from full vertices; full-poor pivots first, then
        // full pivots with few untested descendant edges, by preorder.
        let class = classify_vertices(t, d, m_graph, s, k, eps);
        let mut pivots: Vec<u32> = Vec::new();
        let mut second: Vec<u32> = Vec::new();
        for &v in members_vec {
            let Some(flags) = class.get(v, bi as u32) else { continue };
            if !flags.full {
                continue;
            }
            let desc_untested = members_vec
                .iter()
                .filter(|&&u| u != v && t.is_ancestor(v, u) && s.is_untested(v, u))
                .count();
            if desc_untested as f64 > eps * k as f64 {
                continue;
            }
            if flags.poor {
                pivots.push(v);
            } else {
                second.push(v);
            }
        }
        pivots.extend(second);
        pivots.truncate(cfg.pivots_per_block);

        let mut cycles: Vec<RotatingCycle> = Vec::new();
        for &v in &pivots {
            stage.advance(Stage::BlockSearch);
            if let Some(j) =
                build_rotating_cycle(s, t, &members, v, k, eps, "Q4")?
            {
                // A chord at distance k or more closes a long cycle by
                // itself.
                if j.len() >= k + 1 {
                    let cert = CycleCertificate {
                        cycle: j.path.clone(),
                        provenance: vec![format!("rotating-cycle chord at pivot {v}")],
                    };
                    if cert.verify(s, k) {
                        return Ok(Some(cert));
                    }
                }
                cycles.push(j);
            }
        }

        // Mixed merge: one clique plus one rotating cycle.
        if let Some(c) = in_block.first() {
            for j in &cycles {
                let overlap = j.vertex_set(n).intersection_len(&c.remainder);
                if (overlap as f64) <= (1.0 - 30.0 * eps) * k as f64 {
                    if let Some(cert) = merge_mixed(s, t, m_graph, &members, j, c, k, eps)? {
                        if cert.verify(s, k) {
                            return Ok(Some(cert));
                        }
                    }
                }
            }
        }

        // Two rotating cycles: disjoint or intersecting merges.
        for i in 0..cycles.len() {
            for l in (i + 1)..cycles.len() {
                let (j1, j2) = (&cycles[i], &cycles[l]);
                let inter = j1.vertex_set(n).intersection_len(&j2.vertex_set(n));
                let cert = if inter == 0 {
                    merge_rotating_disjoint(s, t, m_graph, &members, j1, j2, k, eps)?
                } else if (inter as f64) <= (1.0 - 15.0 * eps) * k as f64 {
                    merge_rotating_intersecting(s, t, m_graph, &members, j1, j2, k, eps)?
                } else {
                    None
                };
                if let Some(cert) = cert {
                    if cert.verify(s, k) {
                        return Ok(Some(cert));
                    }
                }
            }
        }
    }
    Ok(None)
}
