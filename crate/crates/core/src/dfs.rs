//! Depth-first exploration of a partially exposed random subgraph.
//!
//! The DFS reuses already-present edges without re-querying and tests an
//! untested edge only when the top-of-stack vertex looks for active
//! neighbors. The rooted spanning forest it returns is a certificate: its
//! components equal the components of the eventually fully revealed
//! subgraph, every edge successfully tested by the DFS is a tree edge, and
//! every revealed edge joins `<=_T`-comparable endpoints.
//!
//! When a prepared pseudo-clique carries an already exposed Hamilton cycle,
//! the search walks that cycle (minus one edge) as a tree path on first
//! entry instead of testing new edges.

use crate::bitset::VertexSet;
use crate::exposure::{EdgeStatus, ExposureError, ExposureState};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DfsError {
    #[error("clique walk cycle edge ({0}, {1}) is not present in the exposure state")]
    WalkEdgeNotPresent(u32, u32),
    #[error("clique walk cycle must visit at least 3 vertices, got {0}")]
    WalkTooShort(usize),
    #[error("vertices {0} and {1} are in different components")]
    CrossComponent(u32, u32),
    #[error("vertex {0} is not in the forest")]
    NotInForest(u32),
    #[error(transparent)]
    Exposure(#[from] ExposureError),
}

/// Rooted spanning forest with ancestor order, produced by the DFS.
pub struct Forest {
    n: usize,
    parent: Vec<Option<u32>>,
    depth: Vec<u32>,
    pre: Vec<u32>,
    post: Vec<u32>,
    component: Vec<Option<u32>>,
    in_forest: VertexSet,
    /// Binary lifting table; `up[j][v]` is the 2^j-th ancestor (or v itself
    /// past the root).
    up: Vec<Vec<u32>>,
    component_count: usize,
}

const UNSET: u32 = u32::MAX;

impl Forest {
    /// Build a forest from parent pointers over the vertices in `alive`.
    /// `None` parents are roots.
    pub fn from_parents(parents: &[Option<u32>], alive: &VertexSet) -> Forest {
        let n = parents.len();
        let mut children: Vec<Vec<u32>> = vec![Vec::new(); n];
        let mut roots = Vec::new();
        for v in alive.iter() {
            match parents[v as usize] {
                Some(p) => children[p as usize].push(v),
                None => roots.push(v),
            }
        }
        let mut f = Forest {
            n,
            parent: parents.to_vec(),
            depth: vec![0; n],
            pre: vec![UNSET; n],
            post: vec![UNSET; n],
            component: vec![None; n],
            in_forest: alive.clone(),
            up: Vec::new(),
            component_count: roots.len(),
        };
        let mut timer = 0u32;
        let mut post_timer = 0u32;
        for (comp, &root) in roots.iter().enumerate() {
            // Iterative DFS over the explicit children lists.
            let mut stack = vec![(root, 0usize)];
            f.pre[root as usize] = timer;
            timer += 1;
            f.depth[root as usize] = 0;
            f.component[root as usize] = Some(comp as u32);
            while let Some(&mut (v, ref mut idx)) = stack.last_mut() {
                if *idx < children[v as usize].len() {
                    let c = children[v as usize][*idx];
                    *idx += 1;
                    f.pre[c as usize] = timer;
                    timer += 1;
                    f.depth[c as usize] = f.depth[v as usize] + 1;
                    f.component[c as usize] = Some(comp as u32);
                    stack.push((c, 0));
                } else {
                    f.post[v as usize] = post_timer;
                    post_timer += 1;
                    stack.pop();
                }
            }
        }
        f.build_lifting();
        f
    }

    fn build_lifting(&mut self) {
        let n = self.n;
        let max_depth = self.depth.iter().copied().max().unwrap_or(0) as usize;
        let levels = (usize::BITS - max_depth.leading_zeros()).max(1) as usize;
        let mut up = Vec::with_capacity(levels);
        let base: Vec<u32> = (0..n as u32)
            .map(|v| self.parent[v as usize].unwrap_or(v))
            .collect();
        up.push(base);
        for j in 1..levels {
            let prev = &up[j - 1];
            let next: Vec<u32> = (0..n).map(|v| prev[prev[v] as usize]).collect();
            up.push(next);
        }
        self.up = up;
    }

    #[inline]
    pub fn contains(&self, v: u32) -> bool {
        self.in_forest.contains(v)
    }

    pub fn parent(&self, v: u32) -> Option<u32> {
        self.parent[v as usize]
    }

    pub fn depth(&self, v: u32) -> u32 {
        self.depth[v as usize]
    }

    pub fn component(&self, v: u32) -> Option<u32> {
        self.component[v as usize]
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn vertices(&self) -> &VertexSet {
        &self.in_forest
    }

    /// `u <=_T v`: u lies on the path from v to its root.
    pub fn is_ancestor(&self, u: u32, v: u32) -> bool {
        self.contains(u)
            && self.contains(v)
            && self.component[u as usize] == self.component[v as usize]
            && self.pre[u as usize] <= self.pre[v as usize]
            && self.post[v as usize] <= self.post[u as usize]
    }

    pub fn are_comparable(&self, u: u32, v: u32) -> bool {
        self.is_ancestor(u, v) || self.is_ancestor(v, u)
    }

    fn ancestor_at(&self, v: u32, steps: u32) -> u32 {
        let mut v = v;
        let mut steps = steps;
        let mut j = 0;
        while steps > 0 {
            if steps & 1 == 1 {
                v = self.up[j][v as usize];
            }
            steps >>= 1;
            j += 1;
        }
        v
    }

    pub fn lca(&self, u: u32, v: u32) -> Result<u32, DfsError> {
        for w in [u, v] {
            if !self.contains(w) {
                return Err(DfsError::NotInForest(w));
            }
        }
        if self.component[u as usize] != self.component[v as usize] {
            return Err(DfsError::CrossComponent(u, v));
        }
        let (mut a, mut b) = (u, v);
        if self.depth[a as usize] < self.depth[b as usize] {
            std::mem::swap(&mut a, &mut b);
        }
        a = self.ancestor_at(a, self.depth[a as usize] - self.depth[b as usize]);
        if a == b {
            return Ok(a);
        }
        for j in (0..self.up.len()).rev() {
            if self.up[j][a as usize] != self.up[j][b as usize] {
                a = self.up[j][a as usize];
                b = self.up[j][b as usize];
            }
        }
        Ok(self.parent[a as usize].expect("lca lift ended above a root"))
    }

    /// Number of tree edges on the path between u and v.
    pub fn tree_distance(&self, u: u32, v: u32) -> Result<usize, DfsError> {
        let l = self.lca(u, v)?;
        Ok((self.depth[u as usize] + self.depth[v as usize] - 2 * self.depth[l as usize]) as usize)
    }

    /// Vertices on the tree path from u to v, inclusive.
    pub fn tree_path(&self, u: u32, v: u32) -> Result<Vec<u32>, DfsError> {
        let l = self.lca(u, v)?;
        let mut up_part = Vec::new();
        let mut x = u;
        while x != l {
            up_part.push(x);
            x = self.parent[x as usize].expect("walk to lca");
        }
        up_part.push(l);
        let mut down_part = Vec::new();
        let mut y = v;
        while y != l {
            down_part.push(y);
            y = self.parent[y as usize].expect("walk to lca");
        }
        down_part.reverse();
        up_part.extend(down_part);
        Ok(up_part)
    }

    pub fn tree_edges(&self) -> Vec<(u32, u32)> {
        self.in_forest
            .iter()
            .filter_map(|v| self.parent[v as usize].map(|p| (p.min(v), p.max(v))))
            .collect()
    }

    /// Diagnostic dump: one `v parent depth component` line per vertex.
    pub fn dump_text(&self) -> String {
        let mut out = String::new();
        for v in self.in_forest.iter() {
            let p = self.parent[v as usize].map(|p| p as i64).unwrap_or(-1);
            out.push_str(&format!(
                "{} {} {} {}\n",
                v,
                p,
                self.depth[v as usize],
                self.component[v as usize].unwrap()
            ));
        }
        out
    }
}

/// Hamilton cycle of a prepared pseudo-clique remainder, ready to be walked.
#[derive(Clone)]
pub struct CliqueWalk {
    pub members: VertexSet,
    pub cycle: Vec<u32>,
}

/// Priority of the DFS: vertex order for root choice and neighbor scans,
/// an optional alive mask, and the prepared clique walks.
#[derive(Clone, Default)]
pub struct DfsPriority {
    /// `rank[v]` orders vertices; smaller rank is scanned first. `None`
    /// means ascending vertex id.
    pub rank: Option<Vec<u32>>,
    /// Restrict exploration to these vertices. `None` means all.
    pub alive: Option<VertexSet>,
    pub walks: Vec<CliqueWalk>,
}

#[derive(Debug, Clone, Default, serde::Serialize)]
pub struct DfsLog {
    pub queries: usize,
    pub new_present: usize,
    pub cliques_entered: usize,
    pub outcasts_reached: usize,
    pub components: usize,
}

/// Plain DFS exploration (no clique walks).
pub fn dfs_explore(
    s: &mut ExposureState,
    prio: &DfsPriority,
    tag: &str,
) -> Result<(Forest, DfsLog), DfsError> {
    let mut prio = prio.clone();
    prio.walks.clear();
    dfs_clique_walk(s, &prio, tag)
}

/// DFS exploration that walks each prepared clique's Hamilton cycle (minus
/// one edge) as a tree path on first entry, before testing any new edge.
pub fn dfs_clique_walk(
    s: &mut ExposureState,
    prio: &DfsPriority,
    tag: &str,
) -> Result<(Forest, DfsLog), DfsError> {
    let n = s.host().vertex_count();
    let alive = prio.alive.clone().unwrap_or_else(|| VertexSet::full(n));

    // Validate walk cycles up front: all cycle edges must already be present.
    let mut walk_of: Vec<Option<u32>> = vec![None; n];
    for (i, walk) in prio.walks.iter().enumerate() {
        if walk.cycle.len() < 3 {
            return Err(DfsError::WalkTooShort(walk.cycle.len()));
        }
        for j in 0..walk.cycle.len() {
            let u = walk.cycle[j];
            let v = walk.cycle[(j + 1) % walk.cycle.len()];
            if !s.is_present(u, v) {
                return Err(DfsError::WalkEdgeNotPresent(u, v));
            }
        }
        for &v in &walk.cycle {
            walk_of[v as usize] = Some(i as u32);
        }
    }

    // Scan lists in priority order.
    let order: Vec<u32> = match &prio.rank {
        None => (0..n as u32).collect(),
        Some(rank) => {
            let mut vs: Vec<u32> = (0..n as u32).collect();
            vs.sort_by_key(|&v| rank[v as usize]);
            vs
        }
    };
    let rank_of = |v: u32| -> u32 {
        match &prio.rank {
            None => v,
            Some(rank) => rank[v as usize],
        }
    };
    let mut scan: Vec<Vec<u32>> = vec![Vec::new(); n];
    for v in alive.iter() {
        let mut nbrs: Vec<u32> = s.host().neighbors(v).intersection(&alive).to_sorted_vec();
        nbrs.sort_by_key(|&w| rank_of(w));
        scan[v as usize] = nbrs;
    }

    let mut parent: Vec<Option<u32>> = vec![None; n];
    let mut discovered = VertexSet::new(n);
    let mut walk_entered = vec![false; prio.walks.len()];
    let mut stack: Vec<u32> = Vec::new();
    let mut ptr = vec![0usize; n];
    let mut log = DfsLog::default();

    // Walks the prepared cycle from the entry vertex toward its lower-id
    // cycle neighbor, chaining the whole remainder as a tree path.
    let enter = |v: u32,
                 par: Option<u32>,
                 parent: &mut Vec<Option<u32>>,
                 discovered: &mut VertexSet,
                 stack: &mut Vec<u32>,
                 walk_entered: &mut Vec<bool>,
                 log: &mut DfsLog| {
        parent[v as usize] = par;
        discovered.insert(v);
        stack.push(v);
        if let Some(wi) = walk_of[v as usize] {
            let wi = wi as usize;
            if !walk_entered[wi] {
                walk_entered[wi] = true;
                log.cliques_entered += 1;
                let cycle = &prio.walks[wi].cycle;
                let len = cycle.len();
                let pos = cycle.iter().position(|&x| x == v).expect("entry in cycle");
                let next = cycle[(pos + 1) % len];
                let prev = cycle[(pos + len - 1) % len];
                let forward = next < prev;
                let mut cur = v;
                for step in 1..len {
                    let w = if forward {
                        cycle[(pos + step) % len]
                    } else {
                        cycle[(pos + len - step) % len]
                    };
                    parent[w as usize] = Some(cur);
                    discovered.insert(w);
                    stack.push(w);
                    cur = w;
                }
            }
        }
    };

    for &root in &order {
        if !alive.contains(root) || discovered.contains(root) {
            continue;
        }
        log.components += 1;
        enter(
            root,
            None,
            &mut parent,
            &mut discovered,
            &mut stack,
            &mut walk_entered,
            &mut log,
        );
        while let Some(&u) = stack.last() {
            let mut advanced = false;
            while ptr[u as usize] < scan[u as usize].len() {
                let w = scan[u as usize][ptr[u as usize]];
                ptr[u as usize] += 1;
                if discovered.contains(w) {
                    continue;
                }
                let take = match s.status(u, w)? {
                    EdgeStatus::Present => true,
                    EdgeStatus::Untested => {
                        log.queries += 1;
                        let present = s.query(u, w, tag)?;
                        if present {
                            log.new_present += 1;
                        }
                        present
                    }
                    EdgeStatus::Absent | EdgeStatus::AbsentRoundOne => false,
                };
                if take {
                    enter(
                        w,
                        Some(u),
                        &mut parent,
                        &mut discovered,
                        &mut stack,
                        &mut walk_entered,
                        &mut log,
                    );
                    advanced = true;
                    break;
                }
            }
            if !advanced {
                stack.pop();
            }
        }
    }

    log.outcasts_reached = alive
        .iter()
        .filter(|&v| walk_of[v as usize].is_none())
        .count();
    Ok((Forest::from_parents(&parent, &alive), log))
}

/// All untested host edges inside the forest whose endpoints have tree
/// distance at least `k + 1`, sorted lexicographically.
pub fn far_pairs(forest: &Forest, s: &ExposureState, k: usize) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    for u in forest.vertices().iter() {
        for v in s.untested_incident(u).iter() {
            if v <= u || !forest.contains(v) {
                continue;
            }
            if forest.component(u) != forest.component(v) {
                continue;
            }
            if forest.tree_distance(u, v).unwrap() >= k + 1 {
                out.push((u, v));
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use std::sync::Arc;

    fn fresh(g: Graph, p: f64, seed: u64) -> ExposureState {
        ExposureState::new(Arc::new(g), p, seed).unwrap()
    }

    #[test]
    fn k4_at_p1_gives_a_path() {
        let mut s = fresh(Graph::complete(4), 1.0, 1);
        let (t, log) = dfs_explore(&mut s, &DfsPriority::default(), "Q2").unwrap();
        // Depth-first with ascending priority chains through a clique.
        assert_eq!(t.component_count(), 1);
        assert_eq!(log.new_present, 3);
        for v in 1..4u32 {
            assert_eq!(t.parent(v), Some(v - 1));
        }
        assert_eq!(t.depth(3), 3);
    }

    #[test]
    fn two_triangles_give_two_roots() {
        let g = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let mut s = fresh(g, 1.0, 1);
        let (t, log) = dfs_explore(&mut s, &DfsPriority::default(), "Q2").unwrap();
        assert_eq!(t.component_count(), 2);
        assert_eq!(log.components, 2);
        assert_ne!(t.component(0), t.component(3));
    }

    #[test]
    fn p0_gives_isolated_roots() {
        let mut s = fresh(Graph::complete(4), 0.0, 1);
        let (t, log) = dfs_explore(&mut s, &DfsPriority::default(), "Q2").unwrap();
        assert_eq!(t.component_count(), 4);
        assert_eq!(log.new_present, 0);
        assert_eq!(log.queries, 6);
        for v in 0..4 {
            assert_eq!(t.parent(v), None);
            assert_eq!(t.depth(v), 0);
        }
    }

    #[test]
    fn ancestor_and_distance() {
        // Path forest 0 -> 1 -> 2 plus isolated root 3.
        let parents = vec![None, Some(0), Some(1), None];
        let alive = VertexSet::full(4);
        let t = Forest::from_parents(&parents, &alive);
        assert!(t.is_ancestor(0, 2));
        assert!(!t.is_ancestor(2, 0));
        assert_eq!(t.tree_distance(0, 2).unwrap(), 2);
        assert!(matches!(t.tree_distance(0, 3), Err(DfsError::CrossComponent(0, 3))));
        // Siblings under a common parent are incomparable.
        let parents = vec![None, Some(0), Some(0)];
        let t = Forest::from_parents(&parents, &VertexSet::full(3));
        assert!(!t.is_ancestor(1, 2) && !t.is_ancestor(2, 1));
        assert_eq!(t.tree_distance(1, 2).unwrap(), 2);
        assert_eq!(t.lca(1, 2).unwrap(), 0);
    }

    #[test]
    fn tree_path_endpoints() {
        let parents = vec![None, Some(0), Some(1), Some(2), Some(1)];
        let t = Forest::from_parents(&parents, &VertexSet::full(5));
        assert_eq!(t.tree_path(3, 4).unwrap(), vec![3, 2, 1, 4]);
        assert_eq!(t.tree_path(0, 3).unwrap(), vec![0, 1, 2, 3]);
        assert_eq!(t.tree_path(3, 3).unwrap(), vec![3]);
    }

    #[test]
    fn certificate_properties_on_random_hosts() {
        // Every present edge joins comparable endpoints, every DFS success is
        // a tree edge, and components never split after full exposure.
        for seed in 0..30u64 {
            let g = crate::harness::hosts::random_gnp(24, 0.18, seed);
            let mut s = fresh(g, 0.6, seed + 1000);
            let (t, log) = dfs_explore(&mut s, &DfsPriority::default(), "Q2").unwrap();
            assert!(log.new_present <= 23); // query frugality
            let tree: std::collections::HashSet<(u32, u32)> =
                t.tree_edges().into_iter().collect();
            let revealed: Vec<(u32, u32)> = s.present_edges().collect();
            for &(u, v) in &revealed {
                assert!(tree.contains(&(u.min(v), u.max(v))), "dfs success not a tree edge");
            }
            s.expose_all_remaining("flush");
            for (u, v) in s.present_edges() {
                assert!(t.are_comparable(u, v), "present edge {u},{v} incomparable");
            }
            // Components of T match components of the fully revealed graph.
            let full = s.revealed_subgraph();
            let (full_count, full_comp) = full.components();
            assert_eq!(full_count, t.component_count());
            for u in 0..24u32 {
                for v in 0..u {
                    assert_eq!(
                        t.component(u) == t.component(v),
                        full_comp[u as usize] == full_comp[v as usize]
                    );
                }
            }
        }
    }

    #[test]
    fn clique_walk_single_clique() {
        // One prepared clique of size 6 at p = 1: the walk chains the cycle,
        // zero new queries inside the clique.
        let g = Graph::complete(6);
        let mut s = fresh(g, 1.0, 7);
        // Expose the Hamilton cycle 0-1-2-3-4-5-0 by hand.
        for i in 0..6u32 {
            let (u, v) = (i, (i + 1) % 6);
            s.query(u.min(v), u.max(v), "Q1").unwrap();
        }
        let walk = CliqueWalk {
            members: VertexSet::full(6),
            cycle: vec![0, 1, 2, 3, 4, 5],
        };
        let prio = DfsPriority { walks: vec![walk], ..Default::default() };
        let (t, log) = dfs_clique_walk(&mut s, &prio, "Q2").unwrap();
        assert_eq!(log.cliques_entered, 1);
        assert_eq!(log.new_present, 0);
        assert_eq!(t.component_count(), 1);
        // The tree restricted to the clique is a path: every vertex has at
        // most one child and the deepest vertex has depth 5.
        let mut child_count = [0; 6];
        for v in 0..6u32 {
            if let Some(p) = t.parent(v) {
                child_count[p as usize] += 1;
            }
        }
        assert!(child_count.iter().all(|&c| c <= 1));
        assert_eq!((0..6).map(|v| t.depth(v)).max(), Some(5));
    }

    #[test]
    fn clique_walk_rejects_missing_cycle_edge() {
        let g = Graph::complete(5);
        let mut s = fresh(g, 1.0, 7);
        let walk = CliqueWalk {
            members: VertexSet::full(5),
            cycle: vec![0, 1, 2, 3, 4],
        };
        let prio = DfsPriority { walks: vec![walk], ..Default::default() };
        assert!(matches!(
            dfs_clique_walk(&mut s, &prio, "Q2"),
            Err(DfsError::WalkEdgeNotPresent(_, _))
        ));
    }

    #[test]
    fn clique_walk_two_cliques_over_bridge() {
        // Two prepared 4-cliques joined by one present bridge: at most one
        // newly successful query.
        let mut edges = Vec::new();
        for a in 0..4u32 {
            for b in (a + 1)..4 {
                edges.push((a, b));
                edges.push((a + 4, b + 4));
            }
        }
        edges.push((3, 4)); // bridge
        let g = Graph::from_edges(8, &edges).unwrap();
        let mut s = fresh(g, 1.0, 9);
        for c in [0u32, 4] {
            for i in 0..4u32 {
                let (u, v) = (c + i, c + (i + 1) % 4);
                s.query(u.min(v), u.max(v), "Q1").unwrap();
            }
        }
        s.query(3, 4, "Q1").unwrap(); // bridge pre-exposed
        let walks = vec![
            CliqueWalk { members: VertexSet::from_iter(8, 0..4), cycle: vec![0, 1, 2, 3] },
            CliqueWalk { members: VertexSet::from_iter(8, 4..8), cycle: vec![4, 5, 6, 7] },
        ];
        let prio = DfsPriority { walks, ..Default::default() };
        let (t, log) = dfs_clique_walk(&mut s, &prio, "Q2").unwrap();
        assert_eq!(t.component_count(), 1);
        assert_eq!(log.cliques_entered, 2);
        assert!(log.new_present <= 1);
        // Frugality bound from the walk rule.
        assert!(log.new_present < log.outcasts_reached + log.cliques_entered + log.components);
    }

    #[test]
    fn no_walks_match_plain_dfs() {
        let g = Graph::complete(5);
        let mut s1 = fresh(g.clone(), 0.8, 123);
        let mut s2 = fresh(g, 0.8, 123);
        let (t1, _) = dfs_explore(&mut s1, &DfsPriority::default(), "Q2").unwrap();
        let (t2, _) = dfs_clique_walk(&mut s2, &DfsPriority::default(), "Q2").unwrap();
        assert_eq!(t1.tree_edges(), t2.tree_edges());
        assert_eq!(t1.dump_text(), t2.dump_text());
    }

    #[test]
    fn far_pairs_examples() {
        // Star forest: all tree distances <= 2.
        let parents = vec![None, Some(0), Some(0), Some(0)];
        let t = Forest::from_parents(&parents, &VertexSet::full(4));
        let s = fresh(Graph::complete(4), 0.5, 3);
        assert!(far_pairs(&t, &s, 2).is_empty());

        // Path host 0..=10 plus untested chord (0, 10).
        let mut edges: Vec<(u32, u32)> = (0..10).map(|i| (i, i + 1)).collect();
        edges.push((0, 10));
        let g = Graph::from_edges(11, &edges).unwrap();
        let mut s = fresh(g, 1.0, 3);
        let (t, _) = dfs_explore(&mut s, &DfsPriority::default(), "Q2").unwrap();
        assert!(s.is_untested(0, 10));
        let pairs = far_pairs(&t, &s, 8);
        assert!(pairs.contains(&(0, 10)), "pairs: {pairs:?}");
        // k >= n: nothing is far enough.
        assert!(far_pairs(&t, &s, 11).is_empty());
    }

    #[test]
    fn dump_format() {
        let parents = vec![None, Some(0)];
        let t = Forest::from_parents(&parents, &VertexSet::full(2));
        assert_eq!(t.dump_text(), "0 -1 0 0\n1 0 1 0\n");
    }
}
