//! Merging long structures inside a block: clique + clique, rotating
//! cycle + rotating cycle (disjoint or intersecting), and the mixed case.
//!
//! Every merge returns a `CycleCertificate` whose edges are all present in
//! the exposure state; callers re-verify at the boundary. A `None` outcome
//! means the random queries the merge was allowed to make all failed, or a
//! degenerate configuration was hit; both are valid non-results.

use super::rotating::{clique_as_rotating, rotate_path_in_cycle, RotatingCycle};
use super::{CycleCertificate, PipelineError, PreparedClique};
use crate::bitset::VertexSet;
use crate::blocks::two_disjoint_paths;
use crate::dfs::Forest;
use crate::exposure::ExposureState;
use crate::graph::Graph;

/// A path inside a prepared clique remainder connecting `u` to `v` of
/// length at least (1 - 20 eps) k: the long arc of the clique's Hamilton
/// cycle, or two arc segments stitched through a present edge between the
/// 6-eps-k windows nearest the far ends.
pub fn clique_connecting_path(
    s: &ExposureState,
    c: &PreparedClique,
    u: u32,
    v: u32,
    k: usize,
    eps: f64,
) -> Result<Option<Vec<u32>>, PipelineError> {
    let cycle = c.cycle.as_ref().ok_or_else(|| {
        PipelineError::MergePrecondition(format!("clique {} has no Hamilton cycle", c.index))
    })?;
    let len = cycle.len();
    let pu = cycle.iter().position(|&x| x == u);
    let pv = cycle.iter().position(|&x| x == v);
    let (pu, pv) = match (pu, pv) {
        (Some(a), Some(b)) if a != b => (a, b),
        _ => {
            return Err(PipelineError::MergePrecondition(format!(
                "endpoints {u}, {v} must be distinct vertices of clique {}",
                c.index
            )))
        }
    };
    let target = ((1.0 - 20.0 * eps) * k as f64).ceil().max(1.0) as usize;

    // The two arcs of the Hamilton cycle between u and v, both oriented
    // u -> v.
    let forward: Vec<u32> = (0..=((pv + len - pu) % len))
        .map(|i| cycle[(pu + i) % len])
        .collect();
    let backward: Vec<u32> = (0..=((pu + len - pv) % len))
        .map(|i| cycle[(pv + i) % len])
        .rev()
        .collect();
    let (long, short) = if forward.len() >= backward.len() {
        (forward, backward)
    } else {
        (backward, forward)
    };
    if long.len() - 1 >= target {
        return Ok(Some(long));
    }
    // Stitch: X = window of the long arc nearest v, Y = window of the
    // short arc nearest u; any present edge between them patches
    // u ->long-> x ->edge-> y ->short-> v.
    let w = (6.0 * eps * k as f64).ceil().max(1.0) as usize;
    let x_window: Vec<(usize, u32)> =
        long.iter().copied().enumerate().rev().skip(1).take(w).collect();
    let y_window: Vec<(usize, u32)> =
        short.iter().copied().enumerate().skip(1).take(w).collect();
    for &(xi, x) in &x_window {
        for &(yi, y) in &y_window {
            if s.is_present(x, y) {
                let mut path: Vec<u32> = long[..=xi].to_vec();
                path.extend(short[yi..].iter());
                debug_assert_eq!(path[0], u);
                debug_assert_eq!(*path.last().unwrap(), v);
                return Ok(Some(path));
            }
        }
    }
    Ok(None)
}

/// Concatenates path parts into a simple cycle; the junction vertices must
/// chain and the last part must return to the start.
fn assemble(parts: Vec<Vec<u32>>, provenance: Vec<String>) -> Option<CycleCertificate> {
    let mut cycle: Vec<u32> = Vec::new();
    for part in parts {
        if part.is_empty() {
            return None;
        }
        if let Some(&last) = cycle.last() {
            if last != part[0] {
                return None;
            }
            cycle.extend(part[1..].iter());
        } else {
            cycle.extend(part);
        }
    }
    if cycle.len() < 4 || cycle.first() != cycle.last() {
        return None;
    }
    cycle.pop();
    distinct(&cycle).then_some(CycleCertificate { cycle, provenance })
}

fn distinct(cycle: &[u32]) -> bool {
    let mut sorted = cycle.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    sorted.len() == cycle.len()
}

fn reversed(p: &[u32]) -> Vec<u32> {
    p.iter().rev().copied().collect()
}

/// Menger paths between two vertex sets inside the block, lifted back to
/// host ids. Paths run first-set to second-set.
fn block_paths(
    m_graph: &Graph,
    block: &VertexSet,
    a: &VertexSet,
    b: &VertexSet,
) -> Result<(Vec<u32>, Vec<u32>), PipelineError> {
    let sub = m_graph.induced(block);
    let map = |set: &VertexSet| {
        VertexSet::from_iter(
            sub.graph.vertex_count(),
            set.iter().filter_map(|v| sub.from_parent[v as usize]),
        )
    };
    let paths = two_disjoint_paths(&sub.graph, &map(a), &map(b))?;
    let lift = |p: &[u32]| -> Vec<u32> { p.iter().map(|&v| sub.to_parent[v as usize]).collect() };
    Ok((lift(&paths.first), lift(&paths.second)))
}

/// Two prepared cliques inside one 2-connected block: Menger paths join
/// them, long intra-clique paths close the cycle. Performs no queries.
pub fn merge_clique_clique(
    s: &ExposureState,
    m_graph: &Graph,
    block: &VertexSet,
    c1: &PreparedClique,
    c2: &PreparedClique,
    k: usize,
    eps: f64,
) -> Result<Option<CycleCertificate>, PipelineError> {
    for (c, name) in [(c1, "first"), (c2, "second")] {
        if !c.remainder.is_subset(block) {
            return Err(PipelineError::MergePrecondition(format!(
                "{name} clique remainder not inside the block"
            )));
        }
    }
    let (q1, q2) = block_paths(m_graph, block, &c1.remainder, &c2.remainder)?;
    let (u1, u2) = (q1[0], *q1.last().unwrap());
    let (v1, v2) = (q2[0], *q2.last().unwrap());
    let Some(p3) = clique_connecting_path(s, c1, u1, v1, k, eps)? else {
        return Ok(None);
    };
    let Some(p4) = clique_connecting_path(s, c2, v2, u2, k, eps)? else {
        return Ok(None);
    };
    Ok(assemble(
        vec![p3, q2, p4, reversed(&q1)],
        vec![format!(
            "merged prepared cliques {} and {} through two disjoint block paths",
            c1.index, c2.index
        )],
    ))
}

/// The unique minimal tree path connecting two disjoint vertex sets; its
/// endpoints lie in the sets, its interior avoids both.
fn tree_connector(t: &Forest, from: &VertexSet, to: &VertexSet) -> Option<Vec<u32>> {
    let mut best: Option<Vec<u32>> = None;
    for u in from.iter() {
        for v in to.iter() {
            if t.component(u) != t.component(v) {
                continue;
            }
            let path = t.tree_path(u, v).ok()?;
            let first_to = path.iter().position(|w| to.contains(*w))?;
            let last_from = path[..first_to].iter().rposition(|w| from.contains(*w))?;
            let trimmed = path[last_from..=first_to].to_vec();
            if best.as_ref().map(|b| trimmed.len() < b.len()).unwrap_or(true) {
                best = Some(trimmed);
            }
        }
    }
    best
}

/// The longer of the two arcs of a rotating cycle between two of its
/// vertices, oriented from `from` to `to`.
fn arc_between(j: &RotatingCycle, from: u32, to: u32) -> Option<Vec<u32>> {
    arc_impl(j, from, to, None)
}

/// The longest arc between two cycle vertices that avoids `avoid`; exists
/// whenever `avoid` is neither endpoint.
fn arc_avoiding(j: &RotatingCycle, from: u32, to: u32, avoid: u32) -> Option<Vec<u32>> {
    arc_impl(j, from, to, Some(avoid))
}

fn arc_impl(j: &RotatingCycle, from: u32, to: u32, avoid: Option<u32>) -> Option<Vec<u32>> {
    let (pf, pt) = (j.position(from)?, j.position(to)?);
    if pf == pt {
        return None;
    }
    let len = j.path.len();
    let (a, b) = (pf.min(pt), pf.max(pt));
    let inner: Vec<u32> = j.path[a..=b].to_vec();
    let mut outer: Vec<u32> = j.path[b..len].to_vec();
    outer.extend(j.path[0..=a].iter());
    let mut options = [inner, outer];
    options.sort_by_key(|arc| std::cmp::Reverse(arc.len()));
    for arc in options {
        if avoid.map(|z| arc.contains(&z)).unwrap_or(false) {
            continue;
        }
        let mut arc = arc;
        if arc[0] != from {
            arc.reverse();
        }
        return Some(arc);
    }
    None
}

/// Close via rotation on `ja` (whose endpoints avoid its pivot) and an arc
/// on `jb`: x ->rotation-> y ->q2-> b2 ->arc-> a2 ->q1 reversed-> x, where
/// q1 = x..a2 and q2 = y..b2.
fn rotate_and_close(
    s: &mut ExposureState,
    ja: &RotatingCycle,
    jb: &RotatingCycle,
    q1: &[u32],
    q2: &[u32],
    k: usize,
    eps: f64,
    provenance: Vec<String>,
) -> Result<Option<CycleCertificate>, PipelineError> {
    let (x, y) = (q1[0], q2[0]);
    let (a2, b2) = (*q1.last().unwrap(), *q2.last().unwrap());
    let Some(p3) = rotate_path_in_cycle(s, ja, x, y, k, eps, "Q4")? else {
        return Ok(None);
    };
    let Some(p4) = arc_between(jb, b2, a2) else {
        return Ok(None);
    };
    Ok(assemble(vec![p3, q2.to_vec(), p4, reversed(q1)], provenance))
}

/// Close using the full tree path of `j1` from its pivot to its top:
/// pivot ->J1 path-> top ->q2-> w2 ->arc on J2-> a2 ->q1 reversed-> pivot.
fn full_path_close(
    j1: &RotatingCycle,
    j2: &RotatingCycle,
    q1: &[u32],
    q2: &[u32],
    provenance: Vec<String>,
) -> Result<Option<CycleCertificate>, PipelineError> {
    let full: Vec<u32> = reversed(&j1.path); // pivot .. top
    let (w2, a2) = (*q2.last().unwrap(), *q1.last().unwrap());
    let parts = if w2 == a2 {
        vec![full, q2.to_vec(), reversed(q1)]
    } else {
        let Some(arc) = arc_between(j2, w2, a2) else {
            return Ok(None);
        };
        vec![full, q2.to_vec(), arc, reversed(q1)]
    };
    Ok(assemble(parts, provenance))
}

/// Two vertex-disjoint rotating cycles inside one block. Rotates on a side
/// whose Menger endpoints avoid its pivot; when both sides collide with
/// their pivots, the tree connector reroutes one path so that either a
/// rotation applies or the full pivot-to-top tree path closes the cycle
/// with no further queries.
pub fn merge_rotating_disjoint(
    s: &mut ExposureState,
    t: &Forest,
    m_graph: &Graph,
    block: &VertexSet,
    j1: &RotatingCycle,
    j2: &RotatingCycle,
    k: usize,
    eps: f64,
) -> Result<Option<CycleCertificate>, PipelineError> {
    let n = m_graph.vertex_count();
    let (s1, s2) = (j1.vertex_set(n), j2.vertex_set(n));
    if !s1.is_disjoint(&s2) {
        return Err(PipelineError::MergePrecondition(
            "rotating cycles must be vertex-disjoint".into(),
        ));
    }
    if !s1.is_subset(block) || !s2.is_subset(block) {
        return Err(PipelineError::MergePrecondition(
            "rotating cycles must lie inside the block".into(),
        ));
    }
    let (q1, q2) = block_paths(m_graph, block, &s1, &s2)?;
    let provenance = vec!["merged two disjoint rotating cycles".to_string()];

    // Case 1: rotate in J1 when its endpoints avoid pivot 1.
    if q1[0] != j1.pivot && q2[0] != j1.pivot {
        return rotate_and_close(s, j1, j2, &q1, &q2, k, eps, provenance);
    }
    // Case 1': symmetric, rotate in J2.
    if *q1.last().unwrap() != j2.pivot && *q2.last().unwrap() != j2.pivot {
        return rotate_and_close(s, j2, j1, &reversed(&q1), &reversed(&q2), k, eps, provenance);
    }
    // Case 2: both sides hit a pivot. Reroute along the tree connector
    // from the side whose connector endpoint is that cycle's top.
    let connector = match tree_connector(t, &s1, &s2) {
        Some(c) => c,
        None => return Ok(None),
    };
    let (j1, j2, q1, q2, connector) = if connector[0] == j1.top() {
        (j1, j2, q1, q2, connector)
    } else if *connector.last().unwrap() == j2.top() {
        (j2, j1, reversed(&q1), reversed(&q2), reversed(&connector))
    } else {
        return Ok(None);
    };
    // Normalize so q1 starts at pivot 1 (exactly one endpoint on the J1
    // side is the pivot, since Menger endpoints are distinct).
    let (q1, q2) = if q1[0] == j1.pivot { (q1, q2) } else { (q2, q1) };
    if q1[0] != j1.pivot {
        return Ok(None);
    }
    let q1_set = VertexSet::from_iter(n, q1.iter().copied());
    let q2_set = VertexSet::from_iter(n, q2.iter().copied());
    // Walk the connector from top(J1) until it hits q1, q2, or reaches J2.
    let mut hit: Option<(usize, u8)> = None;
    for (i, &w) in connector.iter().enumerate().skip(1) {
        if q1_set.contains(w) {
            hit = Some((i, 1));
            break;
        }
        if q2_set.contains(w) {
            hit = Some((i, 2));
            break;
        }
    }
    match hit {
        Some((i, 1)) => {
            // New q1 runs top(J1) .. z .. J2; the J1 endpoints become the
            // top and q2's endpoint, so a rotation applies.
            let z = connector[i];
            let zi = q1.iter().position(|&x| x == z).unwrap();
            let mut new_q1: Vec<u32> = connector[..=i].to_vec();
            new_q1.extend(q1[zi + 1..].iter());
            if q2[0] == j1.pivot {
                return Ok(None);
            }
            rotate_and_close(s, j1, j2, &new_q1, &q2, k, eps, provenance)
        }
        Some((i, 2)) => {
            // New q2 runs top(J1) .. z .. J2; J1's endpoints are its pivot
            // (via q1) and its top, so the full tree path closes the cycle.
            let z = connector[i];
            let zi = q2.iter().position(|&x| x == z).unwrap();
            let mut new_q2: Vec<u32> = connector[..=i].to_vec();
            new_q2.extend(q2[zi + 1..].iter());
            full_path_close(j1, j2, &q1, &new_q2, provenance)
        }
        _ => {
            // Connector meets neither path: it replaces q2 entirely.
            let w2 = *connector.last().unwrap();
            if !j2.vertex_set(n).contains(w2) {
                return Ok(None);
            }
            full_path_close(j1, j2, &q1, &connector, provenance)
        }
    }
}

/// Two intersecting rotating cycles in one block with overlap at most
/// (1 - 15 eps) k vertices. Small overlaps stitch through the shared tree
/// segment without queries; large overlaps spend pivot queries into the
/// eps-k window nearest the bottom of the intersection. A single shared
/// vertex separates the cycles from each other, so that case routes
/// through two block paths and pivot-free arcs instead.
#[allow(clippy::too_many_arguments)]
pub fn merge_rotating_intersecting(
    s: &mut ExposureState,
    t: &Forest,
    m_graph: &Graph,
    block: &VertexSet,
    j1: &RotatingCycle,
    j2: &RotatingCycle,
    k: usize,
    eps: f64,
) -> Result<Option<CycleCertificate>, PipelineError> {
    let n = s.host().vertex_count();
    let (s1, s2) = (j1.vertex_set(n), j2.vertex_set(n));
    let inter = s1.intersection(&s2);
    if inter.is_empty() {
        return Err(PipelineError::MergePrecondition(
            "cycles do not intersect; use the disjoint merge".into(),
        ));
    }
    if (inter.len() as f64) > (1.0 - 15.0 * eps) * k as f64 {
        return Err(PipelineError::MergePrecondition(format!(
            "intersection of size {} exceeds (1 - 15 eps) k",
            inter.len()
        )));
    }
    if j1.pivot == j2.pivot {
        return Err(PipelineError::MergePrecondition(
            "equal pivots contradict the intersection bound".into(),
        ));
    }
    if inter.len() == 1 {
        let z = inter.first().unwrap();
        return merge_through_shared_vertex(s, m_graph, block, j1, j2, z);
    }
    // Order so that top(J1) is the shallower top.
    let (j1, j2) = if t.depth(j1.top()) <= t.depth(j2.top()) { (j1, j2) } else { (j2, j1) };
    let v2 = j2.top();
    let w = inter.iter().max_by_key(|&v| t.depth(v)).expect("nonempty");

    // The intersection must be the vertical segment from v2 down to w.
    let iw1 = match j1.position(w) {
        Some(i) => i,
        None => return Ok(None),
    };
    let i2 = match j1.position(v2) {
        Some(i) => i,
        None => return Ok(None),
    };
    if iw1 < i2 || inter.len() != iw1 - i2 + 1 {
        return Ok(None); // the overlap is not a clean vertical segment
    }
    let jw2 = j2.position(w).unwrap();
    let (p1, p2) = (&j1.path, &j2.path);
    let (l1, l2) = (p1.len(), p2.len());

    if (inter.len() as f64) < 100.0 * eps * k as f64 {
        // Pure stitch: v1 -> u1 (chord), u1 up to w, w down to u2, chord
        // to v2, then v2's parent side up to just below v1. When the tops
        // coincide the final segment is empty and the chord to v2 = v1
        // closes the cycle directly.
        let mut cycle: Vec<u32> = vec![p1[0], j1.pivot];
        cycle.extend(p1[iw1..l1 - 1].iter().rev());
        cycle.extend(p2[jw2 + 1..l2].iter());
        if i2 > 0 {
            cycle.push(v2);
            cycle.extend(p1[1..i2].iter().rev());
        }
        if !distinct(&cycle) {
            return Ok(None);
        }
        return Ok(Some(CycleCertificate {
            cycle,
            provenance: vec![format!(
                "stitched intersecting rotating cycles, overlap {}",
                inter.len()
            )],
        }));
    }

    // Large overlap: query pivot-2 chords into the eps-k window of the
    // intersection nearest w (strictly above it).
    let window = (eps * k as f64).ceil().max(1.0) as usize;
    let candidates: Vec<u32> = (i2..iw1)
        .rev()
        .map(|i| p1[i])
        .filter(|&x| s.is_untested(j2.pivot, x))
        .take(window)
        .collect();
    for x in candidates {
        let (lo, hi) = (j2.pivot.min(x), j2.pivot.max(x));
        if s.query(lo, hi, "Q4")? {
            let ix = j1.position(x).unwrap();
            let mut cycle: Vec<u32> = vec![p1[0], j1.pivot];
            cycle.extend(p1[iw1..l1 - 1].iter().rev());
            cycle.extend(p2[jw2 + 1..l2].iter());
            cycle.push(x);
            cycle.extend(p1[1..ix].iter().rev());
            if !distinct(&cycle) {
                return Ok(None);
            }
            return Ok(Some(CycleCertificate {
                cycle,
                provenance: vec![format!(
                    "large-overlap merge of rotating cycles via fresh pivot chord to {x}"
                )],
            }));
        }
    }
    Ok(None)
}

/// Cycles sharing exactly one vertex z: no cycle within their union can
/// pass z once, so route two block paths between the z-free sides and use
/// z-avoiding arcs. Query-free.
fn merge_through_shared_vertex(
    s: &ExposureState,
    m_graph: &Graph,
    block: &VertexSet,
    j1: &RotatingCycle,
    j2: &RotatingCycle,
    z: u32,
) -> Result<Option<CycleCertificate>, PipelineError> {
    let _ = s;
    let n = m_graph.vertex_count();
    let mut a = j1.vertex_set(n);
    a.remove(z);
    let mut b = j2.vertex_set(n);
    b.remove(z);
    let (q1, q2) = block_paths(m_graph, block, &a, &b)?;
    let (a1, b1) = (q1[0], q2[0]);
    let (a2, b2) = (*q1.last().unwrap(), *q2.last().unwrap());
    // Cycle: a1 ->q1-> a2 ->J2 arc-> b2 ->q2 reversed-> b1 ->J1 arc-> a1.
    let Some(arc2) = arc_avoiding(j2, a2, b2, z) else {
        return Ok(None);
    };
    let Some(arc1) = arc_avoiding(j1, b1, a1, z) else {
        return Ok(None);
    };
    Ok(assemble(
        vec![q1.clone(), arc2, reversed(&q2), arc1],
        vec!["merged rotating cycles sharing one vertex via block paths".to_string()],
    ))
}

/// A rotating cycle and a prepared clique sharing a block, with overlap at
/// most (1 - 30 eps) k. Overlapping cases reuse the intersecting-cycle
/// machinery with the clique's walk structure (tree path plus its present
/// closing edge) standing in for the second cycle; the clique side carries
/// no untested reservoir, so it takes the query-free role.
#[allow(clippy::too_many_arguments)]
pub fn merge_mixed(
    s: &mut ExposureState,
    t: &Forest,
    m_graph: &Graph,
    block: &VertexSet,
    j: &RotatingCycle,
    c: &PreparedClique,
    k: usize,
    eps: f64,
) -> Result<Option<CycleCertificate>, PipelineError> {
    let n = m_graph.vertex_count();
    let js = j.vertex_set(n);
    let overlap = js.intersection_len(&c.remainder);
    if (overlap as f64) > (1.0 - 30.0 * eps) * k as f64 {
        return Err(PipelineError::MergePrecondition(format!(
            "overlap {overlap} exceeds (1 - 30 eps) k"
        )));
    }
    if overlap == 0 {
        // Disjoint: Menger paths, arc on the rotating side, long path in
        // the clique; rotation only as a fallback for more length.
        let (q1, q2) = block_paths(m_graph, block, &js, &c.remainder)?;
        let (a1, b1) = (q1[0], q2[0]);
        let (a2, b2) = (*q1.last().unwrap(), *q2.last().unwrap());
        let provenance = vec![format!("merged rotating cycle with prepared clique {}", c.index)];
        let Some(p4) = clique_connecting_path(s, c, b2, a2, k, eps)? else {
            return Ok(None);
        };
        if let Some(arc) = arc_between(j, a1, b1) {
            if let Some(cert) =
                assemble(vec![arc, q2.clone(), p4.clone(), reversed(&q1)], provenance.clone())
            {
                if cert.cycle.len() >= k + 1 {
                    return Ok(Some(cert));
                }
            }
        }
        if a1 != j.pivot && b1 != j.pivot {
            if let Some(p3) = rotate_path_in_cycle(s, j, a1, b1, k, eps, "Q4")? {
                return Ok(assemble(vec![p3, q2, p4, reversed(&q1)], provenance));
            }
        }
        return Ok(None);
    }
    let Some(jc) = clique_as_rotating(t, s, c) else {
        return Ok(None);
    };
    if t.depth(jc.top()) <= t.depth(j.top()) {
        merge_rotating_intersecting(s, t, m_graph, block, &jc, j, k, eps)
    } else {
        merge_rotating_intersecting(s, t, m_graph, block, j, &jc, k, eps)
    }
}
