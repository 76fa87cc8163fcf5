//! Pseudo-cliques and the greedy disjoint cover.

use super::PipelineError;
use crate::bitset::VertexSet;
use crate::graph::Graph;

/// Disjoint pseudo-cliques plus the uncovered (outcast) vertices.
#[derive(Debug, Clone)]
pub struct PseudoCliqueCover {
    pub cliques: Vec<VertexSet>,
    pub outcasts: VertexSet,
    pub k: usize,
    pub eps: f64,
}

fn check_eps(eps: f64) -> Result<(), PipelineError> {
    if eps <= 0.0 || 4.0 * eps >= 1.0 {
        return Err(PipelineError::EpsilonRange(eps));
    }
    Ok(())
}

/// Definition check: (1 - 4 eps) k < |C| <= (1 + eps) k and the minimum
/// degree of G[C] is at least (1 - 4 eps) k.
pub fn is_pseudo_clique(
    g: &Graph,
    c: &VertexSet,
    k: usize,
    eps: f64,
) -> Result<bool, PipelineError> {
    check_eps(eps)?;
    let kf = k as f64;
    let size = c.len() as f64;
    if size <= (1.0 - 4.0 * eps) * kf || size > (1.0 + eps) * kf {
        return Ok(false);
    }
    Ok(g.min_degree_within(c) as f64 >= (1.0 - 4.0 * eps) * kf)
}

/// Greedy cover with seeded local search: candidates grow from the
/// highest-degree vertex of the residual graph as its closed neighborhood,
/// peel their weakest member until the definition holds or the candidate
/// dies, and the first passing candidate is accepted. Local maximality
/// only: no single additional pseudo-clique is found by this search in the
/// residual graph.
pub fn greedy_cover(g: &Graph, k: usize, eps: f64) -> Result<PseudoCliqueCover, PipelineError> {
    check_eps(eps)?;
    let n = g.vertex_count();
    let kf = k as f64;
    let upper = ((1.0 + eps) * kf).floor() as usize;
    let lower = (1.0 - 4.0 * eps) * kf;
    let mut residual = VertexSet::full(n);
    let mut cliques = Vec::new();
    'grow: loop {
        let mut seeds: Vec<u32> = residual.iter().collect();
        seeds.sort_by_key(|&v| {
            (std::cmp::Reverse(g.neighbors(v).intersection_len(&residual)), v)
        });
        for &seed in &seeds {
            let mut cand = g.neighbors(seed).intersection(&residual);
            cand.insert(seed);
            // Peel: drop the weakest vertex while the candidate is too big
            // or has a vertex under the degree threshold; ties drop the
            // largest id.
            loop {
                if (cand.len() as f64) <= lower {
                    break; // candidate died
                }
                let (weakest, deg) = cand
                    .iter()
                    .map(|v| (v, g.neighbors(v).intersection_len(&cand)))
                    .min_by_key(|&(v, d)| (d, std::cmp::Reverse(v)))
                    .unwrap();
                if cand.len() > upper || (deg as f64) < (1.0 - 4.0 * eps) * kf {
                    cand.remove(weakest);
                    continue;
                }
                break;
            }
            if is_pseudo_clique(g, &cand, k, eps)? {
                residual.difference_with(&cand);
                cliques.push(cand);
                continue 'grow;
            }
        }
        break;
    }
    Ok(PseudoCliqueCover { cliques, outcasts: residual, k, eps })
}
