//! Step 5 diagnostics: poor/rich, full and branching flags per
//! (vertex, block), and the exceptional-set counts Z1-Z4. The flags drive
//! rotating-cycle pivot selection; the Z counts are reported, never
//! enforced.

use super::cover::PseudoCliqueCover;
use super::prepare::PreparedCover;
use crate::bitset::VertexSet;
use crate::blocks::BlockDecomposition;
use crate::dfs::Forest;
use crate::exposure::ExposureState;
use crate::graph::Graph;
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, Default)]
pub struct VertexFlags {
    /// At most eps k descendants (self included) within the block.
    pub poor: bool,
    /// At least (1 - eps) k untested edges into the block.
    pub full: bool,
    /// At least two rich immediate descendants within the block.
    pub branching: bool,
    pub descendants_in_block: usize,
    pub untested_to_block: usize,
}

pub struct VertexClassification {
    flags: BTreeMap<(u32, u32), VertexFlags>,
}

impl VertexClassification {
    pub fn get(&self, v: u32, block: u32) -> Option<&VertexFlags> {
        self.flags.get(&(v, block))
    }

    pub fn iter(&self) -> impl Iterator<Item = (&(u32, u32), &VertexFlags)> {
        self.flags.iter()
    }
}

/// Exact flags from the forest, the decomposition of `m_graph`, and the
/// untested-edge counts of the exposure state.
pub fn classify_vertices(
    t: &Forest,
    d: &BlockDecomposition,
    m_graph: &Graph,
    s: &ExposureState,
    k: usize,
    eps: f64,
) -> VertexClassification {
    let n = m_graph.vertex_count();
    let kf = k as f64;
    let mut flags = BTreeMap::new();
    for (bi, members_vec) in d.blocks.iter().enumerate() {
        let members = VertexSet::from_iter(n, members_vec.iter().copied());
        // T restricted to the block is a tree: children via tree edges
        // assigned to this block.
        let mut children: BTreeMap<u32, Vec<u32>> = BTreeMap::new();
        let mut desc: BTreeMap<u32, usize> = members_vec.iter().map(|&v| (v, 1usize)).collect();
        for &v in members_vec {
            if let Some(p) = t.parent(v) {
                if members.contains(p)
                    && d.block_of_edge(m_graph, p, v) == Some(bi as u32)
                {
                    children.entry(p).or_default().push(v);
                }
            }
        }
        // Accumulate subtree sizes bottom-up (deepest first).
        let mut by_depth: Vec<u32> = members_vec.clone();
        by_depth.sort_by_key(|&v| std::cmp::Reverse(t.depth(v)));
        for &v in &by_depth {
            if let Some(p) = t.parent(v) {
                if children.get(&p).map(|c| c.contains(&v)).unwrap_or(false) {
                    let dv = desc[&v];
                    *desc.get_mut(&p).unwrap() += dv;
                }
            }
        }
        for &v in members_vec {
            let descendants = desc[&v];
            let poor = descendants as f64 <= eps * kf;
            let untested = s.untested_degree_within(v, &members);
            let full = untested as f64 >= (1.0 - eps) * kf;
            let branching = children
                .get(&v)
                .map(|cs| {
                    cs.iter()
                        .filter(|&&c| desc[&c] as f64 > eps * kf)
                        .count()
                        >= 2
                })
                .unwrap_or(false);
            flags.insert(
                (v, bi as u32),
                VertexFlags { poor, full, branching, descendants_in_block: descendants, untested_to_block: untested },
            );
        }
    }
    VertexClassification { flags }
}

/// Exceptional-set sizes [Z1, Z2, Z3, Z4] per their definitions; purely
/// diagnostic at desk scale.
#[allow(clippy::too_many_arguments)]
pub fn z_diagnostics(
    host: &Graph,
    cover: &PseudoCliqueCover,
    prep: &PreparedCover,
    t: &Forest,
    d: &BlockDecomposition,
    s: &ExposureState,
    untested_before_exploration: &[usize],
    k: usize,
    eps: f64,
    class: &VertexClassification,
) -> [usize; 4] {
    let _ = class;
    let n = host.vertex_count();
    let kf = k as f64;
    // Z1: outcasts that lost an eps/3 fraction of their host neighbors to
    // the waste.
    let mut z1 = VertexSet::new(n);
    for v in cover.outcasts.iter() {
        let deg = host.degree(v);
        let lost = host.neighbors(v).intersection_len(&prep.waste);
        if deg > 0 && (lost as f64) >= eps / 3.0 * deg as f64 {
            z1.insert(v);
        }
    }
    // Z2: vertices outside Z1 touched by at least eps k / 3 exploration or
    // block-algorithm queries.
    let mut z2 = VertexSet::new(n);
    for v in t.vertices().iter() {
        if z1.contains(v) {
            continue;
        }
        let tested_since =
            untested_before_exploration[v as usize].saturating_sub(s.untested_incident(v).len());
        if (tested_since as f64) >= eps * kf / 3.0 {
            z2.insert(v);
        }
    }
    // Z3: cut vertices, outside Z1 and Z2, that are the <=_T-smallest
    // vertex of a block containing a surviving clique.
    let mut z3 = VertexSet::new(n);
    let clique_blocks: Vec<u32> = prep
        .surviving()
        .filter_map(|c| {
            d.blocks
                .iter()
                .position(|members| c.remainder.iter().all(|v| members.contains(&v)))
                .map(|b| b as u32)
        })
        .collect();
    for &bi in &clique_blocks {
        let members = &d.blocks[bi as usize];
        if let Some(&smallest) = members.iter().min_by_key(|&&v| t.depth(v)) {
            if d.cut_vertices.contains(smallest) && !z1.contains(smallest) && !z2.contains(smallest)
            {
                z3.insert(smallest);
            }
        }
    }
    // Z4: cut vertices outside Z1-Z3 with at least eps k / 3 untested edges
    // into blocks where they are the smallest vertex.
    let mut z4 = VertexSet::new(n);
    for v in d.cut_vertices.iter() {
        if z1.contains(v) || z2.contains(v) || z3.contains(v) {
            continue;
        }
        let mut count = 0usize;
        for w in s.untested_incident(v).iter() {
            if let Some(b) = d.common_block(v, w) {
                let members = &d.blocks[b as usize];
                let smallest = members.iter().min_by_key(|&&x| t.depth(x)).copied();
                if smallest == Some(v) {
                    count += 1;
                }
            }
        }
        if (count as f64) >= eps * kf / 3.0 {
            z4.insert(v);
        }
    }
    [z1.len(), z2.len(), z3.len(), z4.len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::blocks::decompose;
    use crate::dfs::{dfs_explore, DfsPriority};
    use std::sync::Arc;

    #[test]
    fn leaf_is_poor_root_of_long_path_is_rich() {
        // Path host: one block per edge... use a cycle so one block holds
        // everything and tree structure is a path.
        let g = Graph::cycle(30);
        let mut s = ExposureState::new(Arc::new(g), 1.0, 1).unwrap();
        let (t, _) = dfs_explore(&mut s, &DfsPriority::default(), "Q2").unwrap();
        s.expose_all_remaining("flush");
        let m = s.revealed_subgraph();
        let d = decompose(&m);
        assert_eq!(d.block_count(), 1);
        let class = classify_vertices(&t, &d, &m, &s, 20, 0.1);
        // eps k = 2: the deepest tree vertex has 1 descendant: poor.
        let deepest = (0..30u32).max_by_key(|&v| t.depth(v)).unwrap();
        assert!(class.get(deepest, 0).unwrap().poor);
        // The root holds the whole block below it: rich.
        assert!(!class.get(0, 0).unwrap().poor);
    }

    #[test]
    fn fresh_state_on_clique_is_all_full() {
        // K_{k+2} host, one block: with everything untested every vertex is
        // full (untested degree k + 1 >= (1 - eps) k).
        let k = 10usize;
        let g = Graph::complete(k + 2);
        // Forest and decomposition from a parallel fully exposed copy.
        let mut probe = ExposureState::new(Arc::new(g.clone()), 1.0, 1).unwrap();
        let (t, _) = dfs_explore(&mut probe, &DfsPriority::default(), "Q2").unwrap();
        probe.expose_all_remaining("flush");
        let m = probe.revealed_subgraph();
        let d = decompose(&m);
        let fresh = ExposureState::new(Arc::new(g), 0.5, 2).unwrap();
        let class = classify_vertices(&t, &d, &m, &fresh, k, 0.1);
        for v in 0..(k + 2) as u32 {
            assert!(class.get(v, 0).unwrap().full, "vertex {v} not full");
        }
    }

    #[test]
    fn branching_needs_two_rich_children() {
        use crate::dfs::Forest;
        // Hand-built forest: root 0 with two chains 1-2-3-4 and 5-6-7-8,
        // closed into one block by edges 4-8, 4-0 and 8-0.
        let parents: Vec<Option<u32>> = vec![
            None,
            Some(0),
            Some(1),
            Some(2),
            Some(3),
            Some(0),
            Some(5),
            Some(6),
            Some(7),
        ];
        let t = Forest::from_parents(&parents, &VertexSet::full(9));
        let mut edges: Vec<(u32, u32)> = (0..9u32)
            .filter_map(|v| parents[v as usize].map(|p| (p.min(v), p.max(v))))
            .collect();
        edges.extend([(4, 8), (0, 4), (0, 8)]);
        let m = Graph::from_edges(9, &edges).unwrap();
        let d = decompose(&m);
        assert_eq!(d.block_count(), 1);
        let s = ExposureState::new(Arc::new(m.clone()), 0.5, 1).unwrap();
        // eps k = 2: each chain below 0 holds 4 > 2 descendants, so both
        // children of the root are rich and the root is branching.
        let class = classify_vertices(&t, &d, &m, &s, 10, 0.2);
        assert!(class.get(0, 0).unwrap().branching);
        assert!(!class.get(1, 0).unwrap().branching);
        assert!(class.get(4, 0).unwrap().poor);
    }
}
