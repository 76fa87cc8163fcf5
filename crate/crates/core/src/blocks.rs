//! Block (biconnected component) decomposition and the query-efficient
//! block algorithm for partially exposed graphs.
//!
//! `decompose` is the exact deterministic oracle (lowpoint DFS).
//! `block_algorithm` grows a revealed graph by querying crossing pairs until
//! the block structure of the eventually fully exposed graph is certified;
//! every present edge it reveals strictly decreases the running block count,
//! so it reveals fewer present edges than the input graph has blocks.
//!
//! Isolated vertices form their own size-1 blocks here, so the blocks always
//! cover the vertex set.

use crate::bitset::VertexSet;
use crate::exposure::{EdgeStatus, ExposureError, ExposureState};
use crate::graph::Graph;
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum BlockError {
    #[error("pair ({0}, {1}) is an edge; crossing pairs are non-edges")]
    CrossingPairIsEdge(u32, u32),
    #[error("graph for disjoint paths must be 2-connected")]
    NotTwoConnected,
    #[error("endpoint sets must be nonempty and disjoint")]
    BadEndpointSets,
    #[error("could not realize two vertex-disjoint paths")]
    ExtractionFailure,
    #[error("input graph must contain every present edge of the exposure state")]
    MissingPresentEdge(u32, u32),
    #[error("input edges must be host edges; ({0}, {1}) is not")]
    NotAHostEdge(u32, u32),
    #[error("a present crossing edge joined two components; the input violated the equal-components precondition")]
    ComponentJoin(u32, u32),
    #[error(transparent)]
    Exposure(#[from] ExposureError),
}

/// Blocks, cut vertices and the block-cutpoint incidence of a graph.
pub struct BlockDecomposition {
    /// Vertex sets of the blocks, each sorted ascending.
    pub blocks: Vec<Vec<u32>>,
    pub cut_vertices: VertexSet,
    /// (cut vertex, block index) incidence pairs of the block-cutpoint graph.
    pub block_cut_edges: Vec<(u32, u32)>,
    /// Block index per canonical edge id of the decomposed graph.
    edge_block: Vec<u32>,
    /// Blocks containing each vertex, ascending.
    vertex_blocks: Vec<Vec<u32>>,
    component: Vec<u32>,
    component_count: usize,
}

#[derive(Serialize)]
pub struct DecompositionDump {
    pub blocks: Vec<Vec<u32>>,
    pub cut_vertices: Vec<u32>,
    pub tree_edges: Vec<(u32, u32)>,
}

const UNSET: u32 = u32::MAX;

/// Exact block decomposition via lowpoint DFS.
pub fn decompose(g: &Graph) -> BlockDecomposition {
    let n = g.vertex_count();
    let mut disc = vec![UNSET; n];
    let mut low = vec![0u32; n];
    let mut comp = vec![UNSET; n];
    let mut timer = 0u32;
    let mut blocks: Vec<Vec<u32>> = Vec::new();
    let mut edge_block = vec![UNSET; g.edge_count()];
    let mut emissions = vec![0u32; n];
    let mut comp_count = 0u32;

    let scan: Vec<Vec<u32>> = (0..n).map(|v| g.neighbors(v as u32).to_sorted_vec()).collect();

    // Emits the block closed by tree edge (p, v), consuming the edge stack.
    fn emit(
        g: &Graph,
        n: usize,
        blocks: &mut Vec<Vec<u32>>,
        edge_block: &mut [u32],
        edge_stack: &mut Vec<(u32, u32)>,
        p: u32,
        v: u32,
    ) {
        let mut members = VertexSet::new(n);
        let idx = blocks.len() as u32;
        while let Some(&(a, b)) = edge_stack.last() {
            edge_stack.pop();
            members.insert(a);
            members.insert(b);
            edge_block[g.edge_id(a, b).expect("stacked edge")] = idx;
            if (a, b) == (p, v) {
                break;
            }
        }
        blocks.push(members.to_sorted_vec());
    }

    for root in 0..n as u32 {
        if disc[root as usize] != UNSET {
            continue;
        }
        if g.degree(root) == 0 {
            disc[root as usize] = timer;
            timer += 1;
            comp[root as usize] = comp_count;
            comp_count += 1;
            blocks.push(vec![root]);
            continue;
        }
        let mut edge_stack: Vec<(u32, u32)> = Vec::new();
        let mut frames: Vec<(u32, u32, usize)> = vec![(root, UNSET, 0)];
        disc[root as usize] = timer;
        low[root as usize] = timer;
        comp[root as usize] = comp_count;
        timer += 1;
        while let Some(&mut (v, parent, ref mut ptr)) = frames.last_mut() {
            if *ptr < scan[v as usize].len() {
                let w = scan[v as usize][*ptr];
                *ptr += 1;
                if w == parent {
                    continue;
                }
                if disc[w as usize] == UNSET {
                    edge_stack.push((v, w));
                    disc[w as usize] = timer;
                    low[w as usize] = timer;
                    comp[w as usize] = comp_count;
                    timer += 1;
                    frames.push((w, v, 0));
                } else if disc[w as usize] < disc[v as usize] {
                    edge_stack.push((v, w));
                    low[v as usize] = low[v as usize].min(disc[w as usize]);
                }
            } else {
                frames.pop();
                if let Some(&mut (p, _, _)) = frames.last_mut() {
                    low[p as usize] = low[p as usize].min(low[v as usize]);
                    if low[v as usize] >= disc[p as usize] {
                        emit(g, n, &mut blocks, &mut edge_block, &mut edge_stack, p, v);
                        emissions[p as usize] += 1;
                    }
                }
            }
        }
        comp_count += 1;
        debug_assert!(edge_stack.is_empty());
    }

    let mut cut_vertices = VertexSet::new(n);
    for v in 0..n as u32 {
        let is_root = g.degree(v) == 0 || {
            // A vertex is a DFS root of its component iff it was discovered
            // first there; roots need two emissions to be cut.
            disc[v as usize] != UNSET
                && scan[v as usize]
                    .iter()
                    .all(|&w| comp[w as usize] != comp[v as usize] || disc[w as usize] > disc[v as usize])
        };
        let needed = if is_root { 2 } else { 1 };
        if emissions[v as usize] >= needed {
            cut_vertices.insert(v);
        }
    }

    let mut vertex_blocks: Vec<Vec<u32>> = vec![Vec::new(); n];
    for (idx, block) in blocks.iter().enumerate() {
        for &v in block {
            vertex_blocks[v as usize].push(idx as u32);
        }
    }
    let mut block_cut_edges = Vec::new();
    for v in cut_vertices.iter() {
        for &b in &vertex_blocks[v as usize] {
            block_cut_edges.push((v, b));
        }
    }

    BlockDecomposition {
        blocks,
        cut_vertices,
        block_cut_edges,
        edge_block,
        vertex_blocks,
        component: comp,
        component_count: comp_count as usize,
    }
}

impl BlockDecomposition {
    pub fn block_count(&self) -> usize {
        self.blocks.len()
    }

    pub fn component(&self, v: u32) -> u32 {
        self.component[v as usize]
    }

    pub fn component_count(&self) -> usize {
        self.component_count
    }

    pub fn blocks_of_vertex(&self, v: u32) -> &[u32] {
        &self.vertex_blocks[v as usize]
    }

    /// Block index of an edge of the decomposed graph.
    pub fn block_of_edge(&self, g: &Graph, u: u32, v: u32) -> Option<u32> {
        let id = g.edge_id(u, v)?;
        let b = self.edge_block[id];
        (b != UNSET).then_some(b)
    }

    pub fn common_block(&self, u: u32, v: u32) -> Option<u32> {
        let (a, b) = (&self.vertex_blocks[u as usize], &self.vertex_blocks[v as usize]);
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].cmp(&b[j]) {
                std::cmp::Ordering::Equal => return Some(a[i]),
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
            }
        }
        None
    }

    /// Is the non-edge (u, v) crossing for the decomposed graph `g`: same
    /// component, no common block?
    pub fn is_crossing(&self, g: &Graph, u: u32, v: u32) -> Result<bool, BlockError> {
        if g.has_edge(u, v) {
            return Err(BlockError::CrossingPairIsEdge(u, v));
        }
        if u == v {
            return Ok(false);
        }
        Ok(self.component[u as usize] == self.component[v as usize]
            && self.common_block(u, v).is_none())
    }

    pub fn dump(&self) -> DecompositionDump {
        DecompositionDump {
            blocks: self.blocks.clone(),
            cut_vertices: self.cut_vertices.to_sorted_vec(),
            tree_edges: self.block_cut_edges.clone(),
        }
    }

    /// Multiset of block vertex sets plus the cut set; the invariant-level
    /// notion of equality for oracle comparisons.
    pub fn same_structure(&self, other: &BlockDecomposition) -> bool {
        let mut a = self.blocks.clone();
        let mut b = other.blocks.clone();
        a.sort();
        b.sort();
        a == b && self.cut_vertices == other.cut_vertices
    }

    /// Structural isomorphism of the block-cutpoint forests (AHU canonical
    /// encoding, cut nodes and block nodes kept distinguishable).
    pub fn bcp_isomorphic(&self, other: &BlockDecomposition) -> bool {
        fn canonical(d: &BlockDecomposition) -> Vec<String> {
            // Nodes: blocks 0..b, cut vertices b..b+c.
            let b = d.blocks.len();
            let cuts: Vec<u32> = d.cut_vertices.to_sorted_vec();
            let cut_idx: std::collections::HashMap<u32, usize> =
                cuts.iter().enumerate().map(|(i, &v)| (v, b + i)).collect();
            let total = b + cuts.len();
            let mut adj: Vec<Vec<usize>> = vec![Vec::new(); total];
            for &(v, blk) in &d.block_cut_edges {
                let ci = cut_idx[&v];
                adj[ci].push(blk as usize);
                adj[blk as usize].push(ci);
            }
            // AHU encoding of each tree in the forest, rooted at its
            // canonical centroid-free choice: encode from every node and
            // take the minimum to stay canonical on small forests.
            fn encode(adj: &[Vec<usize>], is_block: &[bool], root: usize) -> String {
                fn rec(
                    adj: &[Vec<usize>],
                    is_block: &[bool],
                    v: usize,
                    parent: usize,
                ) -> String {
                    let mut parts: Vec<String> = adj[v]
                        .iter()
                        .filter(|&&w| w != parent)
                        .map(|&w| rec(adj, is_block, w, v))
                        .collect();
                    parts.sort();
                    let tag = if is_block[v] { 'B' } else { 'c' };
                    format!("({tag}{})", parts.concat())
                }
                rec(adj, is_block, root, usize::MAX)
            }
            let is_block: Vec<bool> = (0..total).map(|i| i < b).collect();
            let mut seen = vec![false; total];
            let mut forest_codes = Vec::new();
            for r in 0..total {
                if seen[r] {
                    continue;
                }
                // Collect this tree's nodes.
                let mut stack = vec![r];
                let mut nodes = Vec::new();
                seen[r] = true;
                while let Some(v) = stack.pop() {
                    nodes.push(v);
                    for &w in &adj[v] {
                        if !seen[w] {
                            seen[w] = true;
                            stack.push(w);
                        }
                    }
                }
                let code = nodes
                    .iter()
                    .map(|&v| encode(&adj, &is_block, v))
                    .min()
                    .unwrap();
                forest_codes.push(code);
            }
            forest_codes.sort();
            forest_codes
        }
        canonical(self) == canonical(other)
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct BlockAlgorithmLog {
    pub queries: usize,
    pub present_added: usize,
    pub initial_blocks: usize,
    pub final_blocks: usize,
    /// Running block counts after each present addition; strictly
    /// decreasing by construction.
    pub block_count_trace: Vec<usize>,
}

/// The block algorithm on input (h, partially exposed host): queries
/// crossing pairs of the running graph M until none remain. Returns M, its
/// decomposition (which equals the decomposition of the fully exposed
/// graph), and a query log.
///
/// `h` must contain every currently present edge and have the same number
/// of connected components as the eventually revealed subgraph (callers
/// ensure this by including a DFS spanning forest).
pub fn block_algorithm(
    h: &Graph,
    s: &mut ExposureState,
    tag: &str,
) -> Result<(Graph, BlockDecomposition, BlockAlgorithmLog), BlockError> {
    block_algorithm_scoped(h, s, tag, None)
}

/// `block_algorithm` restricted to host edges inside `scope`; present edges
/// and crossing candidates outside the scope are ignored. Used when a
/// pipeline works on the graph minus its waste vertices.
pub fn block_algorithm_scoped(
    h: &Graph,
    s: &mut ExposureState,
    tag: &str,
    scope: Option<&VertexSet>,
) -> Result<(Graph, BlockDecomposition, BlockAlgorithmLog), BlockError> {
    let in_scope = |u: u32, v: u32| match scope {
        None => true,
        Some(set) => set.contains(u) && set.contains(v),
    };
    for (u, v) in h.edges() {
        if s.host().edge_id(u, v).is_none() {
            return Err(BlockError::NotAHostEdge(u, v));
        }
    }
    for (u, v) in s.present_edges() {
        if in_scope(u, v) && !h.has_edge(u, v) {
            return Err(BlockError::MissingPresentEdge(u, v));
        }
    }
    let mut m = h.clone();
    let mut d = decompose(&m);
    let mut log = BlockAlgorithmLog {
        initial_blocks: d.block_count(),
        ..Default::default()
    };
    'outer: loop {
        let host_edges: Vec<(u32, u32)> = s.host().edges().collect();
        for (u, v) in host_edges {
            if !in_scope(u, v) || m.has_edge(u, v) {
                continue;
            }
            match s.status(u, v)? {
                EdgeStatus::Absent | EdgeStatus::AbsentRoundOne => continue,
                EdgeStatus::Present => {
                    // Present but outside M: the precondition h superset of
                    // present edges was violated mid-run.
                    return Err(BlockError::MissingPresentEdge(u, v));
                }
                EdgeStatus::Untested => {}
            }
            if !d.is_crossing(&m, u, v)? {
                continue;
            }
            log.queries += 1;
            if s.query(u, v, tag)? {
                if d.component(u) != d.component(v) {
                    return Err(BlockError::ComponentJoin(u, v));
                }
                let before = d.block_count();
                m = m.add_edges(&[(u, v)]).expect("validated pair");
                d = decompose(&m);
                log.present_added += 1;
                log.block_count_trace.push(d.block_count());
                debug_assert!(d.block_count() < before, "crossing edge must merge blocks");
                continue 'outer;
            }
        }
        break;
    }
    log.final_blocks = d.block_count();
    debug_assert!(
        log.present_added < log.initial_blocks.max(1),
        "budget: present edges added must stay below the initial block count"
    );
    Ok((m, d, log))
}

/// Two internally vertex-disjoint paths from A to B inside a 2-connected
/// graph, with distinct endpoints on each side whenever the side has at
/// least two vertices. Unit-vertex-capacity max-flow via vertex splitting.
#[derive(Debug, Clone)]
pub struct DisjointPaths {
    /// Each path runs from a vertex of A to a vertex of B and meets
    /// A and B only there.
    pub first: Vec<u32>,
    pub second: Vec<u32>,
}

impl DisjointPaths {
    /// Internal disjointness plus path validity in `g`.
    pub fn validate(&self, g: &Graph) -> bool {
        for path in [&self.first, &self.second] {
            if path.is_empty() {
                return false;
            }
            for w in path.windows(2) {
                if !g.has_edge(w[0], w[1]) {
                    return false;
                }
            }
            let mut sorted = path.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != path.len() {
                return false;
            }
        }
        let interior = |p: &[u32]| p[1..p.len().saturating_sub(1)].to_vec();
        let i1 = interior(&self.first);
        let i2: std::collections::HashSet<u32> = self.second.iter().copied().collect();
        i1.iter().all(|v| !i2.contains(v))
            && !i2.contains(&self.first[0])
            && !i2.contains(self.first.last().unwrap())
            || {
                // Shared endpoints are allowed only when a side is a single
                // vertex; interiors must never meet.
                let int2: std::collections::HashSet<u32> =
                    interior(&self.second).into_iter().collect();
                i1.iter().all(|v| !int2.contains(v))
                    && !int2.contains(&self.first[0])
                    && !int2.contains(self.first.last().unwrap())
                    && !interior(&self.second)
                        .iter()
                        .any(|v| self.first.contains(v))
            }
    }
}

struct FlowNet {
    to: Vec<usize>,
    cap: Vec<i32>,
    head: Vec<Vec<usize>>,
}

impl FlowNet {
    fn new(nodes: usize) -> FlowNet {
        FlowNet { to: Vec::new(), cap: Vec::new(), head: vec![Vec::new(); nodes] }
    }

    fn add(&mut self, from: usize, to: usize, cap: i32) {
        self.head[from].push(self.to.len());
        self.to.push(to);
        self.cap.push(cap);
        self.head[to].push(self.to.len());
        self.to.push(from);
        self.cap.push(0);
    }

    /// One unit of augmentation via BFS; returns false when the sink is
    /// unreachable in the residual network.
    fn augment(&mut self, source: usize, sink: usize) -> bool {
        let mut pred: Vec<Option<usize>> = vec![None; self.head.len()];
        let mut queue = std::collections::VecDeque::from([source]);
        pred[source] = Some(usize::MAX);
        while let Some(v) = queue.pop_front() {
            if v == sink {
                break;
            }
            for &e in &self.head[v] {
                if self.cap[e] > 0 && pred[self.to[e]].is_none() {
                    pred[self.to[e]] = Some(e);
                    queue.push_back(self.to[e]);
                }
            }
        }
        if pred[sink].is_none() {
            return false;
        }
        let mut v = sink;
        while v != source {
            let e = pred[v].unwrap();
            self.cap[e] -= 1;
            self.cap[e ^ 1] += 1;
            v = self.to[e ^ 1];
        }
        true
    }

    fn flow_on(&self, e: usize) -> i32 {
        self.cap[e ^ 1]
    }
}

pub fn two_disjoint_paths(
    b: &Graph,
    a_set: &VertexSet,
    b_set: &VertexSet,
) -> Result<DisjointPaths, BlockError> {
    if a_set.is_empty() || b_set.is_empty() || !a_set.is_disjoint(b_set) {
        return Err(BlockError::BadEndpointSets);
    }
    let d = decompose(b);
    if b.vertex_count() < 3 || d.block_count() != 1 {
        return Err(BlockError::NotTwoConnected);
    }
    let n = b.vertex_count();
    let node_in = |v: u32| 2 * v as usize;
    let node_out = |v: u32| 2 * v as usize + 1;
    let source = 2 * n;
    let sink = 2 * n + 1;
    let mut net = FlowNet::new(2 * n + 2);
    let mut split_edges = vec![usize::MAX; n];
    for v in 0..n as u32 {
        if a_set.contains(v) {
            net.add(source, node_out(v), if a_set.len() == 1 { 2 } else { 1 });
        } else if b_set.contains(v) {
            net.add(node_in(v), sink, if b_set.len() == 1 { 2 } else { 1 });
        } else {
            split_edges[v as usize] = net.to.len();
            net.add(node_in(v), node_out(v), 1);
        }
    }
    let mut arc_ids: std::collections::HashMap<(u32, u32), usize> = std::collections::HashMap::new();
    for (u, v) in b.edges() {
        arc_ids.insert((u, v), net.to.len());
        net.add(node_out(u), node_in(v), 1);
        arc_ids.insert((v, u), net.to.len());
        net.add(node_out(v), node_in(u), 1);
    }
    let mut flow = 0;
    while flow < 2 && net.augment(source, sink) {
        flow += 1;
    }
    if flow < 2 {
        return Err(BlockError::ExtractionFailure);
    }

    // Walk the two flow units from A-side starts.
    let mut arc_flow: std::collections::HashMap<(u32, u32), i32> = std::collections::HashMap::new();
    for (&(u, v), &e) in &arc_ids {
        let f = net.flow_on(e);
        if f > 0 {
            arc_flow.insert((u, v), f);
        }
    }
    let mut starts: Vec<u32> = Vec::new();
    for v in a_set.iter() {
        // Count outgoing flow from this A vertex.
        let mut out = 0;
        for w in b.neighbors(v).iter() {
            out += arc_flow.get(&(v, w)).copied().unwrap_or(0);
        }
        for _ in 0..out {
            starts.push(v);
        }
    }
    if starts.len() != 2 {
        return Err(BlockError::ExtractionFailure);
    }
    let mut paths = Vec::new();
    for &start in &starts {
        let mut path = vec![start];
        let mut cur = start;
        loop {
            if b_set.contains(cur) && path.len() > 1 {
                break;
            }
            let next = b
                .neighbors(cur)
                .iter()
                .find(|&w| arc_flow.get(&(cur, w)).copied().unwrap_or(0) > 0)
                .ok_or(BlockError::ExtractionFailure)?;
            *arc_flow.get_mut(&(cur, next)).unwrap() -= 1;
            path.push(next);
            cur = next;
        }
        paths.push(path);
    }
    let out = DisjointPaths { first: paths[0].clone(), second: paths[1].clone() };
    debug_assert!(out.validate(b));
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::Graph;
    use std::sync::Arc;

    #[test]
    fn triangle_with_pendant() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        let d = decompose(&g);
        let mut blocks = d.blocks.clone();
        blocks.sort();
        assert_eq!(blocks, vec![vec![0, 1, 2], vec![2, 3]]);
        assert_eq!(d.cut_vertices.to_sorted_vec(), vec![2]);
        assert_eq!(d.block_count(), 2);
    }

    #[test]
    fn tree_has_one_block_per_edge() {
        let g = Graph::path(7);
        let d = decompose(&g);
        assert_eq!(d.block_count(), 6);
        assert_eq!(d.cut_vertices.len(), 5); // interior vertices
    }

    #[test]
    fn cycle_is_one_block() {
        let d = decompose(&Graph::cycle(5));
        assert_eq!(d.block_count(), 1);
        assert!(d.cut_vertices.is_empty());
        assert_eq!(d.blocks[0], vec![0, 1, 2, 3, 4]);
    }

    #[test]
    fn isolated_vertices_are_singleton_blocks() {
        let g = Graph::from_edges(4, &[(0, 1)]).unwrap();
        let d = decompose(&g);
        let mut blocks = d.blocks.clone();
        blocks.sort();
        assert_eq!(blocks, vec![vec![0, 1], vec![2], vec![3]]);
        assert_eq!(d.component_count(), 3);
    }

    #[test]
    fn edges_partition_into_blocks() {
        for seed in 0..20u64 {
            let g = crate::harness::hosts::random_gnp(18, 0.2, seed);
            let d = decompose(&g);
            // Every edge has exactly one block.
            for (u, v) in g.edges() {
                assert!(d.block_of_edge(&g, u, v).is_some());
            }
            // Union of blocks is the vertex set, pairwise intersections are
            // single cut vertices.
            let mut covered = VertexSet::new(18);
            for b in &d.blocks {
                for &v in b {
                    covered.insert(v);
                }
            }
            assert_eq!(covered.len(), 18);
            for i in 0..d.blocks.len() {
                for j in 0..i {
                    let a: Vec<u32> = d.blocks[i]
                        .iter()
                        .filter(|v| d.blocks[j].contains(v))
                        .copied()
                        .collect();
                    assert!(a.len() <= 1);
                    if let [v] = a[..] {
                        assert!(d.cut_vertices.contains(v));
                    }
                }
            }
        }
    }

    #[test]
    fn crossing_examples() {
        let g = Graph::from_edges(4, &[(0, 1), (1, 2), (0, 2), (2, 3)]).unwrap();
        let d = decompose(&g);
        assert!(d.is_crossing(&g, 0, 3).unwrap());
        assert!(matches!(d.is_crossing(&g, 0, 1), Err(BlockError::CrossingPairIsEdge(0, 1))));

        let two = Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let d = decompose(&two);
        assert!(!d.is_crossing(&two, 0, 3).unwrap());
    }

    #[test]
    fn block_algorithm_path_inside_c4() {
        let host = Graph::cycle(4);
        let mut s = ExposureState::new(Arc::new(host), 1.0, 5).unwrap();
        // Reveal the path 0-1-2-3 first.
        for (u, v) in [(0u32, 1u32), (1, 2), (2, 3)] {
            s.query(u, v, "Q1").unwrap();
        }
        let h = Graph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]).unwrap();
        let (m, d, log) = block_algorithm(&h, &mut s, "Q3").unwrap();
        assert_eq!(d.block_count(), 1);
        assert_eq!(m.edge_count(), 4);
        assert!(log.present_added < 3, "budget violated: {}", log.present_added);
        assert_eq!(log.initial_blocks, 3);
    }

    #[test]
    fn block_algorithm_two_connected_input_asks_nothing() {
        let host = Graph::complete(5);
        let mut s = ExposureState::new(Arc::new(host), 1.0, 5).unwrap();
        let mut cycle_edges = Vec::new();
        for i in 0..5u32 {
            let (u, v) = (i, (i + 1) % 5);
            s.query(u.min(v), u.max(v), "Q1").unwrap();
            cycle_edges.push((u.min(v), u.max(v)));
        }
        let h = Graph::from_edges(5, &cycle_edges).unwrap();
        let (m, d, log) = block_algorithm(&h, &mut s, "Q3").unwrap();
        assert_eq!(log.queries, 0);
        assert_eq!(m.edge_count(), 5);
        assert_eq!(d.block_count(), 1);
    }

    #[test]
    fn block_algorithm_p0_tests_all_crossing_pairs() {
        let host = Graph::cycle(4);
        let mut s = ExposureState::new(Arc::new(host), 0.0, 5).unwrap();
        // Pretend the path was revealed: impossible at p = 0, so build the
        // input directly from a separate state at p = 1 semantics. Here we
        // instead drive with an empty input on an untouched state where each
        // vertex is its own component: no crossing pairs at all.
        let h = Graph::empty(4);
        let (m, d, log) = block_algorithm(&h, &mut s, "Q3").unwrap();
        assert_eq!(log.queries, 0);
        assert_eq!(m.edge_count(), 0);
        assert_eq!(d.block_count(), 4);
    }

    #[test]
    fn block_algorithm_certifies_oracle_decomposition() {
        use crate::dfs::{dfs_explore, DfsPriority};
        for seed in 0..40u64 {
            let host = crate::harness::hosts::random_gnp(16, 0.25, seed);
            let p = 0.3 + 0.5 * ((seed % 5) as f64) / 5.0;
            let mut s = ExposureState::new(Arc::new(host.clone()), p, seed ^ 0xabc).unwrap();
            let (t, _) = dfs_explore(&mut s, &DfsPriority::default(), "Q2").unwrap();
            let h = Graph::from_edges(16, &t.tree_edges()).unwrap();
            let blocks_h = decompose(&h).block_count();
            let (_m, d, log) = block_algorithm(&h, &mut s, "Q3").unwrap();
            assert!(log.present_added < blocks_h.max(1));
            s.expose_all_remaining("flush");
            let full = s.revealed_subgraph();
            let oracle = decompose(&full);
            assert!(d.same_structure(&oracle), "decomposition mismatch at seed {seed}");
        }
    }

    #[test]
    fn disjoint_paths_on_c4() {
        let g = Graph::cycle(4);
        let a = VertexSet::from_iter(4, [0]);
        let b = VertexSet::from_iter(4, [2]);
        let paths = two_disjoint_paths(&g, &a, &b).unwrap();
        assert!(paths.validate(&g));
        let mut mids: Vec<u32> = vec![paths.first[1], paths.second[1]];
        mids.sort_unstable();
        assert_eq!(mids, vec![1, 3]);
    }

    #[test]
    fn disjoint_paths_on_k4_with_two_sided_sets() {
        let g = Graph::complete(4);
        let a = VertexSet::from_iter(4, [0, 1]);
        let b = VertexSet::from_iter(4, [2, 3]);
        let paths = two_disjoint_paths(&g, &a, &b).unwrap();
        assert!(paths.validate(&g));
        assert_ne!(paths.first[0], paths.second[0]);
        assert_ne!(paths.first.last(), paths.second.last());
    }

    #[test]
    fn disjoint_paths_rejects_bad_input() {
        let g = Graph::complete(3);
        let a = VertexSet::from_iter(3, [0, 1]);
        assert!(matches!(
            two_disjoint_paths(&g, &a, &a),
            Err(BlockError::BadEndpointSets)
        ));
        let path = Graph::path(4);
        let a = VertexSet::from_iter(4, [0]);
        let b = VertexSet::from_iter(4, [3]);
        assert!(matches!(
            two_disjoint_paths(&path, &a, &b),
            Err(BlockError::NotTwoConnected)
        ));
    }

    #[test]
    fn menger_feasibility_on_small_two_connected_graphs() {
        // On 2-connected graphs, 2 disjoint A-B paths always exist for
        // |A| = |B| = 2.
        let mut checked = 0;
        for seed in 0..200u64 {
            let g = crate::harness::hosts::random_gnp(8, 0.45, seed);
            let d = decompose(&g);
            if g.vertex_count() < 3 || d.block_count() != 1 {
                continue;
            }
            checked += 1;
            for a1 in 0..8u32 {
                for b1 in 0..8u32 {
                    if a1 == b1 {
                        continue;
                    }
                    let a2 = (a1 + 1) % 8;
                    let b2 = (b1 + 7) % 8;
                    let aset = VertexSet::from_iter(8, [a1, a2]);
                    let bset = VertexSet::from_iter(8, [b1, b2]);
                    if !aset.is_disjoint(&bset) || aset.len() != 2 || bset.len() != 2 {
                        continue;
                    }
                    let paths = two_disjoint_paths(&g, &aset, &bset).unwrap();
                    assert!(paths.validate(&g));
                }
            }
        }
        assert!(checked > 5, "want enough 2-connected samples, got {checked}");
    }

    #[test]
    fn spanning_subgraph_cut_vertex_properties() {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        // For H spanning subgraph of H* with equal component counts:
        // cut(H*) is a subset of cut(H); equal cut sets give isomorphic
        // block-cutpoint forests.
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(77);
        for seed in 0..120u64 {
            let hstar = crate::harness::hosts::random_gnp(11, 0.3, seed);
            // Spanning subgraph with the same components: keep a spanning
            // forest, drop a random subset of the rest.
            let mut sstate =
                ExposureState::new(Arc::new(hstar.clone()), 1.0, seed).unwrap();
            let (t, _) =
                crate::dfs::dfs_explore(&mut sstate, &crate::dfs::DfsPriority::default(), "Q2")
                    .unwrap();
            let forest: std::collections::HashSet<(u32, u32)> =
                t.tree_edges().into_iter().collect();
            let mut kept: Vec<(u32, u32)> = forest.iter().copied().collect();
            let mut rest: Vec<(u32, u32)> =
                hstar.edges().filter(|e| !forest.contains(e)).collect();
            rest.shuffle(&mut rng);
            kept.extend(rest.iter().take(rest.len() / 2));
            let h = Graph::from_edges(11, &kept).unwrap();

            let dh = decompose(&h);
            let dstar = decompose(&hstar);
            assert_eq!(h.components().0, hstar.components().0);
            // (iv) every cut vertex of H* is a cut vertex of H.
            assert!(dstar.cut_vertices.is_subset(&dh.cut_vertices));
            // (v) a cut vertex of H that is not one of H* witnesses an edge
            // of H* outside all blocks of H.
            let lost = dh.cut_vertices.difference(&dstar.cut_vertices);
            if !lost.is_empty() {
                let found = hstar.edges().any(|(u, v)| {
                    !h.has_edge(u, v) && dh.common_block(u, v).is_none()
                });
                assert!(found, "seed {seed}: no crossing witness for lost cut vertex");
            }
            // (vi) equal cut sets imply isomorphic block-cutpoint forests,
            // provided no crossing pair of H remains among the extra edges
            // of H* (equal cut sets alone do not suffice: merging two bridge
            // blocks at a shared cut vertex into a triangle keeps every cut
            // vertex yet changes the block family).
            let crossing_left = hstar
                .edges()
                .any(|(u, v)| !h.has_edge(u, v) && dh.is_crossing(&h, u, v).unwrap());
            if dh.cut_vertices == dstar.cut_vertices && !crossing_left {
                assert!(dh.bcp_isomorphic(&dstar), "seed {seed}");
                assert!(dh.same_structure(&dstar), "seed {seed}");
            }
        }
    }

    #[test]
    fn dump_is_serializable() {
        let d = decompose(&Graph::cycle(4));
        let dump = serde_json::to_value(d.dump()).unwrap();
        assert_eq!(dump["blocks"][0], serde_json::json!([0, 1, 2, 3]));
        assert_eq!(dump["cut_vertices"], serde_json::json!([]));
    }
}
