//! Step 6: the (C, N) detector and the expander-gated sprinkling endgame.
//!
//! For a pseudo-clique C and a small set N with few host edges leaving
//! C \ N, the subgraph revealed on X = C union N is dense enough that a
//! p'-expander check plus booster sprinkling finds a Hamilton cycle of
//! G_p[X] — a cycle of length |X| >= k + 1.

use super::cover::PseudoCliqueCover;
use super::{CycleCertificate, PipelineError};
use crate::bitset::VertexSet;
use crate::blocks::decompose;
use crate::exposure::ExposureState;
use crate::graph::Graph;
use crate::posa::{is_pprime_expander, sprinkle_with_restarts, verify_hamilton_cycle};
use crate::rng::derive_seed;

/// Candidate input for the endgame: a pseudo-clique and a small helper set
/// with few edges crossing out of C union N.
#[derive(Debug, Clone)]
pub struct GoodPair {
    pub clique: VertexSet,
    pub nset: VertexSet,
    /// Host edges from C \ N to the outside of C union N.
    pub boundary: usize,
}

/// Scans the original cover for (C, N) pairs with |N| <= 10 and boundary at
/// most eps k. N is assembled from the cut vertices of the host block
/// carrying C plus outsiders with at least eps k neighbors in C — the
/// constructive shape of the small-outcast analysis, used here as a
/// heuristic detector.
pub fn detect_good_pairs(
    host: &Graph,
    cover: &PseudoCliqueCover,
    k: usize,
    eps: f64,
) -> Vec<GoodPair> {
    if cover.cliques.is_empty() {
        return Vec::new();
    }
    let n = host.vertex_count();
    let d = decompose(host);
    let mut out = Vec::new();
    for c in &cover.cliques {
        // Host block with the largest overlap with C.
        let best_block = (0..d.blocks.len()).max_by_key(|&bi| {
            d.blocks[bi].iter().filter(|&&v| c.contains(v)).count()
        });
        let mut nset = VertexSet::new(n);
        if let Some(bi) = best_block {
            for &v in &d.blocks[bi] {
                if d.cut_vertices.contains(v) {
                    nset.insert(v);
                }
            }
        }
        let mut heavy = VertexSet::new(n);
        for v in 0..n as u32 {
            if !c.contains(v) && (host.neighbors(v).intersection_len(c) as f64) >= eps * k as f64 {
                heavy.insert(v);
            }
        }
        nset.union_with(&heavy);
        if nset.len() > 10 {
            // Retry with the heavy outsiders only.
            nset = heavy;
        }
        if nset.len() > 10 {
            continue;
        }
        let x = c.union(&nset);
        let inner = c.difference(&nset);
        let outside = VertexSet::full(n).difference(&x);
        let boundary = host
            .edge_count_between(&inner, &outside)
            .expect("disjoint by construction");
        if (boundary as f64) <= eps * k as f64 {
            out.push(GoodPair { clique: c.clone(), nset, boundary });
        }
    }
    out.sort_by_key(|p| p.boundary);
    out
}

#[derive(Debug)]
pub struct EndgameOutcome {
    pub certificate: Option<CycleCertificate>,
    pub gate_passed: bool,
    pub x_size: usize,
    pub d_size: usize,
    pub boosters_consumed: usize,
    pub sprinkled_edges: usize,
}

/// Exposes the remaining randomness of G_p[X] for X = C union N, couples it
/// into a first-phase graph and a sprinkle set with an independent per-edge
/// coin (an edge present at p joins phase one with probability
/// p1 / p = 1 - reserve, so phase one is distributed exactly as an
/// exposure at p1), gates on the p'-expander check with D = the low-degree
/// set of the phase-one graph, and sprinkles to Hamiltonicity. A gate
/// failure is a failure outcome with diagnostics, not an error.
pub fn endgame_good_pair(
    s: &mut ExposureState,
    c: &VertexSet,
    nset: &VertexSet,
    k: usize,
    reserve: f64,
    restarts: usize,
    tag: &str,
) -> Result<EndgameOutcome, PipelineError> {
    if nset.len() > 10 {
        return Err(PipelineError::EndgamePrecondition(format!(
            "helper set has {} vertices, at most 10 allowed",
            nset.len()
        )));
    }
    if !(0.0..1.0).contains(&reserve) {
        return Err(PipelineError::EndgamePrecondition(format!(
            "reserve {reserve} outside [0, 1)"
        )));
    }
    let x = c.union(nset);
    let m = x.len();
    if m < k + 1 {
        return Err(PipelineError::EndgamePrecondition(format!(
            "|X| = {m} cannot carry a cycle of length at least {}",
            k + 1
        )));
    }

    // Reveal every remaining edge of G[X] at the net probability.
    let host = s.host_arc();
    let mut inner_edges = Vec::new();
    for u in x.iter() {
        for v in host.neighbors(u).intersection(&x).iter() {
            if v > u {
                inner_edges.push((u, v));
            }
        }
    }
    for &(u, v) in &inner_edges {
        match s.status(u, v)? {
            crate::exposure::EdgeStatus::Untested => {
                s.query(u, v, tag)?;
            }
            crate::exposure::EdgeStatus::AbsentRoundOne => {
                s.second_round(&[(u, v)], tag)?;
            }
            _ => {}
        }
    }

    // Relabel X to 0..m and split the present edges by the phase coin.
    let sub_map = host.induced(&x);
    let to_local = |v: u32| sub_map.from_parent[v as usize].unwrap();
    let mut phase_one: Vec<(u32, u32)> = Vec::new();
    let mut sprinkle: Vec<(u32, u32)> = Vec::new();
    for &(u, v) in &inner_edges {
        if !s.is_present(u, v) {
            continue;
        }
        let local = (to_local(u), to_local(v));
        if s.aux_unit(u, v) < 1.0 - reserve {
            phase_one.push(local);
        } else {
            sprinkle.push(local);
        }
    }
    let f_a = Graph::from_edges(m, &phase_one)?;

    // Expander gate on the phase-one graph.
    let pprime = if m >= 3 {
        ((m as f64).ln() + (m as f64).ln().ln()) / m as f64
    } else {
        0.0
    };
    let degree_floor = m as f64 * pprime / 100.0;
    let d_set = VertexSet::from_iter(
        m,
        (0..m as u32).filter(|&v| (f_a.degree(v) as f64) < degree_floor),
    );
    let gate_passed = m < 4 || is_pprime_expander(&f_a, &d_set, pprime)?;
    if !gate_passed {
        return Ok(EndgameOutcome {
            certificate: None,
            gate_passed: false,
            x_size: m,
            d_size: d_set.len(),
            boosters_consumed: 0,
            sprinkled_edges: sprinkle.len(),
        });
    }

    // Sprinkle the reserved edges in random order; probability 1 because
    // their randomness was already decided by the exposure oracle.
    let seed = derive_seed(s.seed(), &[0x6e, m as u64]);
    let out = sprinkle_with_restarts(&f_a, &sprinkle, 1.0, seed, restarts.max(4));
    let mut certificate = None;
    if let Some(local_cycle) = out.cycle {
        debug_assert!(verify_hamilton_cycle(&out.final_graph, &local_cycle));
        let cycle: Vec<u32> =
            local_cycle.iter().map(|&v| sub_map.to_parent[v as usize]).collect();
        certificate = Some(CycleCertificate {
            cycle,
            provenance: vec![format!(
                "endgame Hamilton cycle on |X| = {m} vertices via expander gate and sprinkling"
            )],
        });
    }
    Ok(EndgameOutcome {
        certificate,
        gate_passed: true,
        x_size: m,
        d_size: d_set.len(),
        boosters_consumed: out.boosters_consumed,
        sprinkled_edges: out.edges_added,
    })
}
