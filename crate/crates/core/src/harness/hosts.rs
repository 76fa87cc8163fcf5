//! Host-graph families for threshold experiments.
//!
//! Every generated host is validated against its declared minimum degree
//! before it is handed to a sweep.

use crate::bitset::VertexSet;
use crate::graph::{Graph, GraphError};
use crate::rng::derive_seed;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum HostError {
    #[error("infeasible parameters: {0}")]
    Infeasible(String),
    #[error("generated host has minimum degree {actual}, declared k = {declared}")]
    MinDegree { actual: usize, declared: usize },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Host family plus parameters. `seed` only matters for random families.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum HostSpec {
    /// K_n; minimum degree n - 1.
    Complete { n: usize },
    /// K_{a,b}; minimum degree min(a, b).
    CompleteBipartite { a: usize, b: usize },
    /// Random k-regular graph on n vertices via the configuration model.
    RandomRegular { n: usize, k: usize, seed: u64 },
    /// Two copies of K_{k+1}. With `bridges = 0` they share one vertex;
    /// otherwise they are disjoint and joined by `bridges` disjoint edges.
    Barbell { k: usize, bridges: usize },
    /// r-th power of a cycle: i adjacent to i +- 1..=r (mod n); 2r-regular.
    CyclePower { n: usize, r: usize },
    /// Fixed average degree with a skewed degree sequence; no minimum-degree
    /// claim beyond what the sequence yields.
    AvgDegree { n: usize, avg: usize, seed: u64 },
    /// Edge-list file in the `n m` / `u v` text format.
    File { path: String },
}

impl HostSpec {
    /// Minimum-degree parameter this family guarantees by construction.
    pub fn declared_k(&self) -> Option<usize> {
        match self {
            HostSpec::Complete { n } => Some(n.saturating_sub(1)),
            HostSpec::CompleteBipartite { a, b } => Some(*a.min(b)),
            HostSpec::RandomRegular { k, .. } => Some(*k),
            HostSpec::Barbell { k, .. } => Some(*k),
            HostSpec::CyclePower { r, .. } => Some(2 * r),
            HostSpec::AvgDegree { .. } | HostSpec::File { .. } => None,
        }
    }
}

pub fn generate_host(spec: &HostSpec) -> Result<Graph, HostError> {
    let g = match spec {
        HostSpec::Complete { n } => {
            if *n < 2 {
                return Err(HostError::Infeasible("complete host needs n >= 2".into()));
            }
            Graph::complete(*n)
        }
        HostSpec::CompleteBipartite { a, b } => {
            if *a == 0 || *b == 0 {
                return Err(HostError::Infeasible("bipartite parts must be nonempty".into()));
            }
            Graph::complete_bipartite(*a, *b)
        }
        HostSpec::RandomRegular { n, k, seed } => random_regular(*n, *k, *seed)?,
        HostSpec::Barbell { k, bridges } => barbell(*k, *bridges)?,
        HostSpec::CyclePower { n, r } => cycle_power(*n, *r)?,
        HostSpec::AvgDegree { n, avg, seed } => avg_degree(*n, *avg, *seed)?,
        HostSpec::File { path } => Graph::read_edge_list(std::path::Path::new(path))?,
    };
    if let Some(k) = spec.declared_k() {
        let actual = g.min_degree();
        if actual < k {
            return Err(HostError::MinDegree { actual, declared: k });
        }
    }
    Ok(g)
}

/// Configuration model with full rejection of loops and multi-edges.
pub fn random_regular(n: usize, k: usize, seed: u64) -> Result<Graph, HostError> {
    if k >= n {
        return Err(HostError::Infeasible(format!("regular degree {k} needs n > k, got n = {n}")));
    }
    if n * k % 2 != 0 {
        return Err(HostError::Infeasible(format!("n * k must be even, got {n} * {k}")));
    }
    let deg_seq = vec![k; n];
    configuration_model(&deg_seq, seed)
        .ok_or_else(|| HostError::Infeasible("configuration model failed to converge".into()))
}

/// Uniform stub pairing followed by double-edge-swap repair of loops and
/// multi-edges. Plain rejection stalls on skewed degree sequences.
fn configuration_model(deg_seq: &[usize], seed: u64) -> Option<Graph> {
    let n = deg_seq.len();
    let mut stubs: Vec<u32> = Vec::new();
    for (v, &d) in deg_seq.iter().enumerate() {
        stubs.extend(std::iter::repeat(v as u32).take(d));
    }
    if stubs.len() % 2 != 0 || deg_seq.iter().any(|&d| d >= n) {
        return None;
    }
    let half = stubs.len() / 2;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x7e6]));
    for _ in 0..50 {
        stubs.shuffle(&mut rng);
        let mut pairs: Vec<(u32, u32)> = (0..half).map(|i| (stubs[i], stubs[i + half])).collect();
        let mut seen: std::collections::HashSet<(u32, u32)> = std::collections::HashSet::new();
        let key = |u: u32, v: u32| (u.min(v), u.max(v));
        let mut bad: Vec<usize> = Vec::new();
        for (i, &(u, v)) in pairs.iter().enumerate() {
            if u == v || !seen.insert(key(u, v)) {
                bad.push(i);
            }
        }
        let mut swaps = 0;
        while let Some(&i) = bad.last() {
            swaps += 1;
            if swaps > 100_000 {
                break;
            }
            let j = rng.gen_range(0..half);
            if j == i {
                continue;
            }
            let (u, v) = pairs[i];
            let (x, y) = pairs[j];
            // Candidate rewiring (u, x), (v, y); accept only if it removes
            // the defect without creating a new one.
            if u == x || v == y || seen.contains(&key(u, x)) || seen.contains(&key(v, y)) {
                continue;
            }
            if bad.contains(&j) {
                continue;
            }
            if u != v && seen.contains(&key(u, v)) {
                // Multi-edge defect: the duplicate copy stays registered.
            } else if u != v {
                seen.remove(&key(u, v));
            }
            seen.remove(&key(x, y));
            seen.insert(key(u, x));
            seen.insert(key(v, y));
            pairs[i] = (u, x);
            pairs[j] = (v, y);
            bad.pop();
        }
        if bad.is_empty() {
            let mut adj = vec![VertexSet::new(n); n];
            for &(u, v) in &pairs {
                adj[u as usize].insert(v);
                adj[v as usize].insert(u);
            }
            let g = Graph::from_adjacency(adj);
            if g.edge_count() == half {
                return Some(g);
            }
        }
    }
    None
}

fn barbell(k: usize, bridges: usize) -> Result<Graph, HostError> {
    if k < 2 {
        return Err(HostError::Infeasible("barbell needs k >= 2".into()));
    }
    let c = k + 1;
    if bridges == 0 {
        // Two K_{k+1} sharing vertex 0.
        let n = 2 * c - 1;
        let mut edges = Vec::new();
        for u in 0..c as u32 {
            for v in (u + 1)..c as u32 {
                edges.push((u, v));
            }
        }
        let second: Vec<u32> =
            std::iter::once(0u32).chain(c as u32..(2 * c - 1) as u32).collect();
        for i in 0..c {
            for j in (i + 1)..c {
                edges.push((second[i].min(second[j]), second[i].max(second[j])));
            }
        }
        Ok(Graph::from_edges(n, &edges)?)
    } else {
        if bridges > c {
            return Err(HostError::Infeasible(format!(
                "at most {c} disjoint bridges between cliques of size {c}"
            )));
        }
        let n = 2 * c;
        let mut edges = Vec::new();
        for u in 0..c as u32 {
            for v in (u + 1)..c as u32 {
                edges.push((u, v));
                edges.push((u + c as u32, v + c as u32));
            }
        }
        for b in 0..bridges as u32 {
            edges.push((b, b + c as u32));
        }
        Ok(Graph::from_edges(n, &edges)?)
    }
}

fn cycle_power(n: usize, r: usize) -> Result<Graph, HostError> {
    if r == 0 || n < 2 * r + 1 {
        return Err(HostError::Infeasible(format!("cycle power needs n >= 2r + 1, got n={n} r={r}")));
    }
    let mut edges = Vec::new();
    for i in 0..n as u32 {
        for d in 1..=r as u32 {
            let j = (i + d) % n as u32;
            edges.push((i.min(j), i.max(j)));
        }
    }
    edges.sort_unstable();
    edges.dedup();
    Ok(Graph::from_edges(n, &edges)?)
}

/// Skewed degree sequence at a fixed average degree: a few heavy vertices,
/// the rest light, realized by the configuration model.
fn avg_degree(n: usize, avg: usize, seed: u64) -> Result<Graph, HostError> {
    if avg < 2 || n < avg + 2 {
        return Err(HostError::Infeasible("avg-degree host needs avg >= 2 and n > avg + 1".into()));
    }
    let total = n * avg;
    let hubs = (n / 10).max(1);
    let hub_degree = ((avg * 3).min(n - 1)).max(avg + 1);
    let mut deg = vec![0usize; n];
    let mut remaining = total;
    for d in deg.iter_mut().take(hubs) {
        *d = hub_degree;
        remaining = remaining.saturating_sub(hub_degree);
    }
    let light = n - hubs;
    let base = remaining / light;
    let mut extra = remaining - base * light;
    for d in deg.iter_mut().skip(hubs) {
        *d = base.max(1);
        if extra > 0 && base + 1 < n {
            *d += 1;
            extra -= 1;
        }
    }
    let sum: usize = deg.iter().sum();
    if sum % 2 == 1 {
        deg[n - 1] += 1;
    }
    configuration_model(&deg, seed)
        .ok_or_else(|| HostError::Infeasible("configuration model failed to converge".into()))
}

/// Erdos-Renyi G(n, q) sample; used as a random host in oracle test suites.
pub fn random_gnp(n: usize, q: f64, seed: u64) -> Graph {
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, &[0x6e9]));
    let mut edges = Vec::new();
    for u in 0..n as u32 {
        for v in (u + 1)..n as u32 {
            if rng.gen_bool(q) {
                edges.push((u, v));
            }
        }
    }
    Graph::from_edges(n, &edges).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complete_host() {
        let g = generate_host(&HostSpec::Complete { n: 5 }).unwrap();
        assert_eq!(g.vertex_count(), 5);
        assert_eq!(g.edge_count(), 10);
        assert_eq!(g.min_degree(), 4);
    }

    #[test]
    fn cycle_power_is_2r_regular() {
        let g = generate_host(&HostSpec::CyclePower { n: 10, r: 2 }).unwrap();
        assert_eq!(g.vertex_count(), 10);
        for v in 0..10 {
            assert_eq!(g.degree(v), 4);
        }
    }

    #[test]
    fn barbell_shared_vertex() {
        let g = generate_host(&HostSpec::Barbell { k: 4, bridges: 0 }).unwrap();
        assert_eq!(g.vertex_count(), 9);
        assert_eq!(g.min_degree(), 4);
        assert_eq!(g.degree(0), 8); // the shared vertex
        assert_eq!(g.edge_count(), 20);
    }

    #[test]
    fn barbell_with_bridges() {
        let g = generate_host(&HostSpec::Barbell { k: 4, bridges: 2 }).unwrap();
        assert_eq!(g.vertex_count(), 10);
        assert_eq!(g.min_degree(), 4);
        assert!(g.has_edge(0, 5) && g.has_edge(1, 6));
    }

    #[test]
    fn random_regular_is_simple_and_regular() {
        for seed in 0..5 {
            let g = generate_host(&HostSpec::RandomRegular { n: 20, k: 5, seed }).unwrap();
            for v in 0..20 {
                assert_eq!(g.degree(v), 5);
            }
        }
        // nk odd is infeasible.
        assert!(matches!(
            generate_host(&HostSpec::RandomRegular { n: 9, k: 5, seed: 0 }),
            Err(HostError::Infeasible(_))
        ));
    }

    #[test]
    fn avg_degree_hits_average() {
        let g = generate_host(&HostSpec::AvgDegree { n: 40, avg: 6, seed: 3 }).unwrap();
        let avg = 2.0 * g.edge_count() as f64 / g.vertex_count() as f64;
        assert!((avg - 6.0).abs() <= 0.5, "avg {avg}");
    }

    #[test]
    fn generation_is_deterministic() {
        let a = generate_host(&HostSpec::RandomRegular { n: 16, k: 4, seed: 9 }).unwrap();
        let b = generate_host(&HostSpec::RandomRegular { n: 16, k: 4, seed: 9 }).unwrap();
        assert_eq!(a.to_edge_list_string(), b.to_edge_list_string());
    }
}
