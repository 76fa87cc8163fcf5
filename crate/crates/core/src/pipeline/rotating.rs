//! Rotating cycles: near-k cycles made of a vertical tree path plus one
//! chord, whose pivot keeps a reservoir of untested edges into the cycle.

use super::{PipelineError, PreparedClique};
use crate::bitset::VertexSet;
use crate::dfs::Forest;
use crate::exposure::ExposureState;

/// A cycle formed by a descending tree path and the chord joining its two
/// ends. The pivot (deepest vertex) is the rotation point.
#[derive(Debug, Clone)]
pub struct RotatingCycle {
    /// Tree path from the `<=_T`-smallest vertex down to the pivot;
    /// `path[0]` is the top, `path.last()` the pivot. The chord
    /// `(pivot, top)` closes the cycle.
    pub path: Vec<u32>,
    pub pivot: u32,
}

impl RotatingCycle {
    pub fn top(&self) -> u32 {
        self.path[0]
    }

    pub fn len(&self) -> usize {
        self.path.len()
    }

    pub fn is_empty(&self) -> bool {
        self.path.is_empty()
    }

    pub fn vertex_set(&self, n: usize) -> VertexSet {
        VertexSet::from_iter(n, self.path.iter().copied())
    }

    pub fn position(&self, v: u32) -> Option<usize> {
        self.path.iter().position(|&x| x == v)
    }

    /// (P1*) size in [(1 - 4 eps) k, k]; (P2*) the path is a descending
    /// tree path and the closing chord is present; (P3*) the pivot keeps at
    /// least (1 - 4 eps) k untested edges into the cycle.
    pub fn validate(
        &self,
        s: &ExposureState,
        t: &Forest,
        k: usize,
        eps: f64,
    ) -> Result<(), PipelineError> {
        let kf = k as f64;
        let len = self.path.len() as f64;
        if len < (1.0 - 4.0 * eps) * kf || len > kf {
            return Err(PipelineError::RotatingPrecondition(format!(
                "size {} outside [(1-4eps)k, k] = [{}, {}]",
                self.path.len(),
                (1.0 - 4.0 * eps) * kf,
                kf
            )));
        }
        if *self.path.last().unwrap() != self.pivot {
            return Err(PipelineError::RotatingPrecondition(
                "pivot must be the last path vertex".into(),
            ));
        }
        for w in self.path.windows(2) {
            if t.parent(w[1]) != Some(w[0]) {
                return Err(PipelineError::RotatingPrecondition(format!(
                    "({}, {}) is not a descending tree edge",
                    w[0], w[1]
                )));
            }
            if !s.is_present(w[0], w[1]) {
                return Err(PipelineError::RotatingPrecondition(format!(
                    "tree edge ({}, {}) not present",
                    w[0], w[1]
                )));
            }
        }
        if !s.is_present(self.pivot, self.top()) {
            return Err(PipelineError::RotatingPrecondition("chord not present".into()));
        }
        let members = self.vertex_set(s.host().vertex_count());
        let untested = s.untested_degree_within(self.pivot, &members);
        if (untested as f64) < (1.0 - 4.0 * eps) * kf {
            return Err(PipelineError::RotatingPrecondition(format!(
                "pivot has {untested} untested edges into the cycle, need {}",
                (1.0 - 4.0 * eps) * kf
            )));
        }
        Ok(())
    }
}

/// Builds a rotating cycle with pivot `v` (a full vertex of its block with
/// few untested descendant edges) by querying the ceil(eps k) untested
/// ancestor edges farthest from `v`, farthest first. The first success
/// closes the tree path into a cycle; total failure is a valid outcome.
pub fn build_rotating_cycle(
    s: &mut ExposureState,
    t: &Forest,
    block: &VertexSet,
    v: u32,
    k: usize,
    eps: f64,
    tag: &str,
) -> Result<Option<RotatingCycle>, PipelineError> {
    let untested = s.untested_incident(v).intersection(block);
    let desc = untested.iter().filter(|&u| t.is_ancestor(v, u)).count();
    if desc as f64 > eps * k as f64 {
        return Err(PipelineError::RotatingPrecondition(format!(
            "pivot {v} has {desc} untested descendant edges, allowed {}",
            eps * k as f64
        )));
    }
    let mut ancestors: Vec<(usize, u32)> = untested
        .iter()
        .filter(|&u| u != v && t.is_ancestor(u, v))
        .map(|u| (t.tree_distance(u, v).expect("same component"), u))
        .collect();
    // Farthest first, lexicographic tiebreak.
    ancestors.sort_by_key(|&(dist, u)| (std::cmp::Reverse(dist), u));
    let window = (eps * k as f64).ceil().max(1.0) as usize;
    for &(_, y) in ancestors.iter().take(window) {
        if s.query(v.min(y), v.max(y), tag)? {
            let path = t.tree_path(y, v)?;
            return Ok(Some(RotatingCycle { path, pivot: v }));
        }
    }
    Ok(None)
}

/// Views a prepared clique remainder as a rotating-cycle-shaped object: the
/// clique-walk left the remainder as a vertical tree path whose two ends
/// are joined by the dropped (present) cycle edge. The pivot carries no
/// untested reservoir, so only arc and stitch operations may use it.
pub fn clique_as_rotating(t: &Forest, s: &ExposureState, c: &PreparedClique) -> Option<RotatingCycle> {
    let members = &c.remainder;
    if members.len() < 3 {
        return None;
    }
    // Top = unique member whose parent is outside; chain downward.
    let mut top = None;
    for v in members.iter() {
        let p = t.parent(v);
        if p.map(|p| !members.contains(p)).unwrap_or(true) {
            if top.is_some() {
                return None; // not a single vertical path
            }
            top = Some(v);
        }
    }
    let top = top?;
    let mut path = vec![top];
    let mut cur = top;
    loop {
        let child = members
            .iter()
            .find(|&u| t.parent(u) == Some(cur));
        match child {
            Some(u) => {
                path.push(u);
                cur = u;
            }
            None => break,
        }
    }
    if path.len() != members.len() {
        return None;
    }
    let pivot = *path.last().unwrap();
    if !s.is_present(pivot, top) {
        return None;
    }
    Some(RotatingCycle { path, pivot })
}

/// Rotation inside a rotating cycle: a path between `x` and `y` (both on
/// the cycle, neither the pivot) of length at least (2 - 10 eps) k / 3.
/// Returns a long arc when one suffices; otherwise queries the pivot's
/// untested edges into the eps-k window of the far arc nearest `x` and
/// stitches arc + chord + arc. All-absent queries give a no-path outcome.
pub fn rotate_path_in_cycle(
    s: &mut ExposureState,
    j: &RotatingCycle,
    x: u32,
    y: u32,
    k: usize,
    eps: f64,
    tag: &str,
) -> Result<Option<Vec<u32>>, PipelineError> {
    if x == y || x == j.pivot || y == j.pivot {
        return Err(PipelineError::RotatingPrecondition(format!(
            "rotation endpoints ({x}, {y}) must be distinct non-pivot cycle vertices"
        )));
    }
    let (px, py) = match (j.position(x), j.position(y)) {
        (Some(a), Some(b)) => (a, b),
        _ => {
            return Err(PipelineError::RotatingPrecondition(
                "rotation endpoints must lie on the cycle".into(),
            ))
        }
    };
    let target = ((2.0 - 10.0 * eps) * k as f64 / 3.0).ceil() as usize;
    let len = j.path.len();
    let (a, b) = (px.min(py), px.max(py));

    // Inner arc: the path segment between the endpoints (pivot-free).
    let inner: Vec<u32> = j.path[a..=b].to_vec();
    // Outer arc: down to the pivot, across the chord, down from the top.
    let mut outer: Vec<u32> = j.path[b..len].to_vec();
    outer.extend(j.path[0..=a].iter());

    let orient = |mut path: Vec<u32>| -> Vec<u32> {
        if path[0] != x {
            path.reverse();
        }
        debug_assert_eq!(path[0], x);
        debug_assert_eq!(*path.last().unwrap(), y);
        path
    };
    if inner.len().max(outer.len()) - 1 >= target {
        return Ok(Some(orient(if inner.len() >= outer.len() { inner } else { outer })));
    }

    // Stitch: walk the pivot arc from x, cross a fresh pivot chord into
    // the inner arc near x, finish along the inner arc to y.
    let members = j.vertex_set(s.host().vertex_count());
    let untested = s.untested_incident(j.pivot).intersection(&members);
    // Candidates on the inner arc, nearest to x first.
    let mut candidates: Vec<u32> = inner
        .iter()
        .copied()
        .filter(|&w| w != x && w != y && untested.contains(w))
        .collect();
    if inner[0] != x {
        candidates.reverse();
    }
    let window = (eps * k as f64).ceil().max(1.0) as usize;
    for &w in candidates.iter().take(window) {
        let (lo, hi) = (j.pivot.min(w), j.pivot.max(w));
        if s.query(lo, hi, tag)? {
            // Outer arc from x to the pivot (not through y), then the new
            // chord, then the inner arc from w to y.
            let pw = j.position(w).unwrap();
            let mut path: Vec<u32> = if px > py {
                // x below y on the tree path: descend x -> pivot.
                j.path[px..len].to_vec()
            } else {
                // x above y: climb x -> top, cross the cycle chord to the
                // pivot.
                let mut p: Vec<u32> = j.path[0..=px].iter().rev().copied().collect();
                p.push(j.pivot);
                p
            };
            // Chord pivot -> w, then along the inner arc toward y.
            path.push(w);
            if pw < py.max(px) && pw > py.min(px) {
                if py > px {
                    path.extend(j.path[pw + 1..=py].iter());
                } else {
                    path.extend(j.path[py..pw].iter().rev());
                }
            }
            debug_assert_eq!(path[0], x);
            debug_assert_eq!(*path.last().unwrap(), y);
            return Ok(Some(path));
        }
    }
    Ok(None)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dfs::{dfs_explore, DfsPriority};
    use crate::graph::Graph;
    use std::sync::Arc;

    /// Path host 0-1-...-(m-1) plus chords from deep vertices to ancestors.
    fn path_host_with_chords(m: usize, chords: &[(u32, u32)]) -> Graph {
        let mut edges: Vec<(u32, u32)> = (1..m as u32).map(|i| (i - 1, i)).collect();
        edges.extend(chords.iter().copied());
        Graph::from_edges(m, &edges).unwrap()
    }

    #[test]
    fn build_at_p1_succeeds_on_first_query() {
        // Path of 30 with chords from vertex 25 to its ancestors; DFS
        // leaves the chords untested.
        let chords: Vec<(u32, u32)> = (5..25).map(|a| (a, 25)).collect();
        let g = path_host_with_chords(30, &chords);
        let mut s = ExposureState::new(Arc::new(g), 1.0, 1).unwrap();
        let (t, _) = dfs_explore(&mut s, &DfsPriority::default(), "Q2").unwrap();
        let block = VertexSet::full(30);
        let k = 22;
        let eps = 0.05;
        let j = build_rotating_cycle(&mut s, &t, &block, 25, k, eps, "Q4")
            .unwrap()
            .expect("p = 1 must succeed");
        assert_eq!(j.pivot, 25);
        // Farthest untested ancestor is vertex 5: the path spans 5..=25.
        assert_eq!(j.top(), 5);
        assert_eq!(j.len(), 21);
        j.validate(&s, &t, k, eps).unwrap();
    }

    #[test]
    fn build_at_p0_exhausts_window() {
        let chords: Vec<(u32, u32)> = (5..25).map(|a| (a, 25)).collect();
        let g = path_host_with_chords(30, &chords);
        let mut s = ExposureState::new(Arc::new(g.clone()), 1.0, 1).unwrap();
        let (t, _) = dfs_explore(&mut s, &DfsPriority::default(), "Q2").unwrap();
        // Fresh state at p = 0 with the same forest shape: tree edges match
        // because the host is a path.
        let mut s0 = ExposureState::new(Arc::new(g), 0.0, 1).unwrap();
        for i in 1..30u32 {
            s0.query(i - 1, i, "setup").ok();
        }
        // All path edges absent at p = 0, so the forest does not actually
        // match; build against the p = 1 forest but query on s0 where all
        // chords fail.
        let block = VertexSet::full(30);
        let out = build_rotating_cycle(&mut s0, &t, &block, 25, 22, 0.05, "Q4").unwrap();
        assert!(out.is_none());
    }

    #[test]
    fn rotate_returns_long_arc_without_queries() {
        // Rotating cycle on 15 vertices (chords from 5..): endpoints far
        // apart leave an arc of length >= target, so no queries happen.
        let chords: Vec<(u32, u32)> = (5..19).map(|a| (a, 19)).collect();
        let g = path_host_with_chords(20, &chords);
        let mut s = ExposureState::new(Arc::new(g), 1.0, 1).unwrap();
        let (t, _) = dfs_explore(&mut s, &DfsPriority::default(), "Q2").unwrap();
        let block = VertexSet::full(20);
        let j = build_rotating_cycle(&mut s, &t, &block, 19, 15, 0.05, "Q4")
            .unwrap()
            .unwrap();
        assert_eq!(j.top(), 5);
        assert_eq!(j.len(), 15);
        j.validate(&s, &t, 15, 0.05).unwrap();
        let tested_before = s.tested_count();
        // Inner arc between path[1] and path[11] has 10 edges >= target
        // ceil((2 - 0.5) * 15 / 3) = 8.
        let path = rotate_path_in_cycle(&mut s, &j, j.path[1], j.path[11], 15, 0.05, "Q4")
            .unwrap()
            .unwrap();
        assert!(path.len() - 1 >= 8);
        assert_eq!(s.tested_count(), tested_before);
        assert_eq!(path[0], j.path[1]);
        assert_eq!(*path.last().unwrap(), j.path[11]);
    }

    #[test]
    fn rotate_rejects_pivot_endpoints() {
        let chords: Vec<(u32, u32)> = (0..19).map(|a| (a, 19)).collect();
        let g = path_host_with_chords(20, &chords);
        let mut s = ExposureState::new(Arc::new(g), 1.0, 1).unwrap();
        let (t, _) = dfs_explore(&mut s, &DfsPriority::default(), "Q2").unwrap();
        let j = build_rotating_cycle(&mut s, &t, &VertexSet::full(20), 19, 18, 0.05, "Q4")
            .unwrap()
            .unwrap();
        assert!(rotate_path_in_cycle(&mut s, &j, j.pivot, j.path[0], 18, 0.05, "Q4").is_err());
    }

    #[test]
    fn rotate_stitches_with_pivot_chord() {
        // Make both arcs short relative to the target by picking x, y near
        // the quarter points, with eps large enough that the window covers
        // candidates but the arcs stay below target.
        let chords: Vec<(u32, u32)> = (0..39).map(|a| (a, 39)).collect();
        let g = path_host_with_chords(40, &chords);
        let mut s = ExposureState::new(Arc::new(g), 1.0, 1).unwrap();
        let (t, _) = dfs_explore(&mut s, &DfsPriority::default(), "Q2").unwrap();
        let k = 36;
        let eps = 0.1;
        let j = build_rotating_cycle(&mut s, &t, &VertexSet::full(40), 39, k, eps, "Q4")
            .unwrap()
            .unwrap();
        let len = j.len();
        // Endpoints at one third and two thirds: both arcs ~len * 2/3 - 1 <
        // target = (2 - 10 eps) k / 3 = 0.33 k.
        let x = j.path[len / 3];
        let y = j.path[2 * len / 3];
        let path = rotate_path_in_cycle(&mut s, &j, x, y, k, eps, "Q4").unwrap();
        if let Some(p) = path {
            assert_eq!(p[0], x);
            assert_eq!(*p.last().unwrap(), y);
            // Verify all edges present.
            for w in p.windows(2) {
                assert!(s.is_present(w[0], w[1]), "edge {:?} missing", w);
            }
            let mut sorted = p.clone();
            sorted.sort_unstable();
            sorted.dedup();
            assert_eq!(sorted.len(), p.len(), "path revisits a vertex");
        }
    }
}
