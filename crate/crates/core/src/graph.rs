//! Immutable simple undirected graphs with dense vertex ids and bitset
//! adjacency rows.
//!
//! Construction validates symmetry and rejects self-loops; after that a
//! `Graph` never changes, so it can be shared freely across trial threads.
//! Mutating operations (`add_edges`, `induced`) return new values.

use crate::bitset::VertexSet;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("self-loop at vertex {0} is not allowed")]
    SelfLoop(u32),
    #[error("vertex {v} out of range for graph on {n} vertices")]
    VertexOutOfRange { v: u32, n: usize },
    #[error("vertex sets must be disjoint")]
    OverlappingSets,
    #[error("edge list parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Simple undirected graph. Vertices are `0..n`, adjacency is one bitset row
/// per vertex, `m` counts undirected edges.
#[derive(Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    m: usize,
    adj: Vec<VertexSet>,
    /// `edge_offsets[u]` = number of canonical edges `(x, y)` with `x < u`.
    /// Together with a rank query inside row `u` this gives every edge a
    /// stable dense id in lexicographic order.
    edge_offsets: Vec<u32>,
}

/// Result of `induced`: the relabeled graph plus both directions of the
/// vertex map.
pub struct InducedSubgraph {
    pub graph: Graph,
    /// New id -> old id, ascending in old ids.
    pub to_parent: Vec<u32>,
    /// Old id -> new id.
    pub from_parent: Vec<Option<u32>>,
}

impl Graph {
    pub fn empty(n: usize) -> Graph {
        Graph {
            n,
            m: 0,
            adj: vec![VertexSet::new(n); n],
            edge_offsets: vec![0; n + 1],
        }
    }

    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Graph, GraphError> {
        let mut adj = vec![VertexSet::new(n); n];
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            for w in [u, v] {
                if w as usize >= n {
                    return Err(GraphError::VertexOutOfRange { v: w, n });
                }
            }
            adj[u as usize].insert(v);
            adj[v as usize].insert(u);
        }
        Ok(Self::from_adjacency(adj))
    }

    /// Build from symmetric adjacency rows (duplicates already absorbed).
    pub(crate) fn from_adjacency(adj: Vec<VertexSet>) -> Graph {
        let n = adj.len();
        let mut offsets = vec![0u32; n + 1];
        let mut m2 = 0usize;
        for u in 0..n {
            debug_assert!(!adj[u].contains(u as u32));
            let canonical = adj[u].count_range(u as u32 + 1, n as u32);
            offsets[u + 1] = offsets[u] + canonical as u32;
            m2 += adj[u].len();
        }
        debug_assert_eq!(m2 % 2, 0);
        Graph { n, m: m2 / 2, adj, edge_offsets: offsets }
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.m
    }

    #[inline]
    pub fn has_edge(&self, u: u32, v: u32) -> bool {
        (u as usize) < self.n && self.adj[u as usize].contains(v)
    }

    #[inline]
    pub fn neighbors(&self, v: u32) -> &VertexSet {
        &self.adj[v as usize]
    }

    #[inline]
    pub fn degree(&self, v: u32) -> usize {
        self.adj[v as usize].len()
    }

    pub fn min_degree(&self) -> usize {
        (0..self.n).map(|v| self.degree(v as u32)).min().unwrap_or(0)
    }

    pub fn vertices(&self) -> VertexSet {
        VertexSet::full(self.n)
    }

    /// Dense id of the canonical edge `(min(u,v), max(u,v))`, in
    /// lexicographic order over all edges.
    pub fn edge_id(&self, u: u32, v: u32) -> Option<usize> {
        if !self.has_edge(u, v) {
            return None;
        }
        let (a, b) = if u < v { (u, v) } else { (v, u) };
        let rank = self.adj[a as usize].count_range(a + 1, b);
        Some(self.edge_offsets[a as usize] as usize + rank)
    }

    /// Canonical edges in id (lexicographic) order.
    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n as u32).flat_map(move |u| {
            self.adj[u as usize]
                .iter()
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// N(X): vertices outside `X` with at least one neighbor inside.
    pub fn neighborhood(&self, x: &VertexSet) -> VertexSet {
        let mut out = VertexSet::new(self.n);
        for v in x.iter() {
            out.union_with(&self.adj[v as usize]);
        }
        out.difference_with(x);
        out
    }

    /// e(X, Y) for disjoint X and Y.
    pub fn edge_count_between(&self, x: &VertexSet, y: &VertexSet) -> Result<usize, GraphError> {
        if !x.is_disjoint(y) {
            return Err(GraphError::OverlappingSets);
        }
        Ok(x.iter().map(|v| self.adj[v as usize].intersection_len(y)).sum())
    }

    /// e(X): edges spanned by X.
    pub fn edges_inside(&self, x: &VertexSet) -> usize {
        let total: usize = x.iter().map(|v| self.adj[v as usize].intersection_len(x)).sum();
        total / 2
    }

    /// Minimum degree of the induced subgraph G[X], without relabeling.
    pub fn min_degree_within(&self, x: &VertexSet) -> usize {
        x.iter()
            .map(|v| self.adj[v as usize].intersection_len(x))
            .min()
            .unwrap_or(0)
    }

    /// G[X] relabeled onto `0..|X|`, keeping the old<->new map.
    pub fn induced(&self, x: &VertexSet) -> InducedSubgraph {
        let to_parent = x.to_sorted_vec();
        let mut from_parent = vec![None; self.n];
        for (new, &old) in to_parent.iter().enumerate() {
            from_parent[old as usize] = Some(new as u32);
        }
        let k = to_parent.len();
        let mut adj = vec![VertexSet::new(k); k];
        for (new_u, &old_u) in to_parent.iter().enumerate() {
            for old_v in self.adj[old_u as usize].intersection(x).iter() {
                if let Some(new_v) = from_parent[old_v as usize] {
                    adj[new_u].insert(new_v);
                }
            }
        }
        InducedSubgraph { graph: Graph::from_adjacency(adj), to_parent, from_parent }
    }

    /// G + E. Existing edges and duplicates are absorbed, self-pairs rejected.
    pub fn add_edges(&self, edges: &[(u32, u32)]) -> Result<Graph, GraphError> {
        let mut adj = self.adj.clone();
        for &(u, v) in edges {
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            for w in [u, v] {
                if w as usize >= self.n {
                    return Err(GraphError::VertexOutOfRange { v: w, n: self.n });
                }
            }
            adj[u as usize].insert(v);
            adj[v as usize].insert(u);
        }
        Ok(Graph::from_adjacency(adj))
    }

    /// Connected components: (count, component id per vertex).
    pub fn components(&self) -> (usize, Vec<u32>) {
        let mut comp = vec![u32::MAX; self.n];
        let mut count = 0;
        let mut stack = Vec::new();
        for s in 0..self.n {
            if comp[s] != u32::MAX {
                continue;
            }
            comp[s] = count;
            stack.push(s as u32);
            while let Some(u) = stack.pop() {
                for v in self.adj[u as usize].iter() {
                    if comp[v as usize] == u32::MAX {
                        comp[v as usize] = count;
                        stack.push(v);
                    }
                }
            }
            count += 1;
        }
        (count as usize, comp)
    }

    pub fn is_connected(&self) -> bool {
        self.n == 0 || self.components().0 == 1
    }

    // -- small constructors used throughout the crate and the harness --

    pub fn complete(n: usize) -> Graph {
        let mut adj = vec![VertexSet::full(n); n];
        for (v, row) in adj.iter_mut().enumerate() {
            row.remove(v as u32);
        }
        Graph::from_adjacency(adj)
    }

    pub fn cycle(n: usize) -> Graph {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let edges: Vec<_> = (0..n as u32).map(|i| (i, (i + 1) % n as u32)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    pub fn path(n: usize) -> Graph {
        let edges: Vec<_> = (1..n as u32).map(|i| (i - 1, i)).collect();
        Graph::from_edges(n, &edges).unwrap()
    }

    pub fn complete_bipartite(a: usize, b: usize) -> Graph {
        let mut edges = Vec::with_capacity(a * b);
        for u in 0..a as u32 {
            for v in 0..b as u32 {
                edges.push((u, a as u32 + v));
            }
        }
        Graph::from_edges(a + b, &edges).unwrap()
    }

    // -- edge-list text format: `n m` header, then `u v` lines with u < v --

    pub fn to_edge_list_string(&self) -> String {
        let mut out = String::with_capacity(16 + 8 * self.m);
        out.push_str(&format!("{} {}\n", self.n, self.m));
        for (u, v) in self.edges() {
            out.push_str(&format!("{u} {v}\n"));
        }
        out
    }

    pub fn parse_edge_list(text: &str) -> Result<Graph, GraphError> {
        let mut lines = text.lines().enumerate();
        let (_, header) = lines
            .next()
            .ok_or_else(|| GraphError::Parse { line: 1, msg: "empty input".into() })?;
        let mut it = header.split_whitespace();
        let parse_num = |s: Option<&str>, line: usize| -> Result<usize, GraphError> {
            s.ok_or_else(|| GraphError::Parse { line, msg: "missing field".into() })?
                .parse()
                .map_err(|e| GraphError::Parse { line, msg: format!("{e}") })
        };
        let n = parse_num(it.next(), 1)?;
        let m = parse_num(it.next(), 1)?;
        let mut edges = Vec::with_capacity(m);
        for (idx, line) in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut it = line.split_whitespace();
            let u = parse_num(it.next(), idx + 1)? as u32;
            let v = parse_num(it.next(), idx + 1)? as u32;
            if u >= v {
                return Err(GraphError::Parse {
                    line: idx + 1,
                    msg: format!("expected u < v, got {u} {v}"),
                });
            }
            edges.push((u, v));
        }
        if edges.len() != m {
            return Err(GraphError::Parse {
                line: 1,
                msg: format!("header claims {m} edges, found {}", edges.len()),
            });
        }
        let g = Graph::from_edges(n, &edges)?;
        if g.edge_count() != m {
            return Err(GraphError::Parse { line: 1, msg: "duplicate edges in input".into() });
        }
        Ok(g)
    }

    pub fn write_edge_list(&self, path: &std::path::Path) -> Result<(), GraphError> {
        std::fs::write(path, self.to_edge_list_string())?;
        Ok(())
    }

    pub fn read_edge_list(path: &std::path::Path) -> Result<Graph, GraphError> {
        Self::parse_edge_list(&std::fs::read_to_string(path)?)
    }
}

impl std::fmt::Debug for Graph {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "Graph(n={}, m={})", self.n, self.m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn neighborhood_examples() {
        let triangle = Graph::complete(3);
        let x = VertexSet::from_iter(3, [0]);
        assert_eq!(triangle.neighborhood(&x).to_sorted_vec(), vec![1, 2]);

        let p4 = Graph::path(4);
        let x = VertexSet::from_iter(4, [1, 2]);
        assert_eq!(p4.neighborhood(&x).to_sorted_vec(), vec![0, 3]);

        let all = p4.vertices();
        assert!(p4.neighborhood(&all).is_empty());
        assert!(p4.neighborhood(&VertexSet::new(4)).is_empty());
    }

    #[test]
    fn edge_count_between_examples() {
        let k4 = Graph::complete(4);
        let x = VertexSet::from_iter(4, [0, 1]);
        let y = VertexSet::from_iter(4, [2, 3]);
        assert_eq!(k4.edge_count_between(&x, &y).unwrap(), 4);

        let c4 = Graph::cycle(4);
        let x = VertexSet::from_iter(4, [0]);
        let y = VertexSet::from_iter(4, [2]);
        assert_eq!(c4.edge_count_between(&x, &y).unwrap(), 0);

        let x = VertexSet::from_iter(4, [0, 2]);
        let y = VertexSet::from_iter(4, [1, 3]);
        assert_eq!(c4.edge_count_between(&x, &y).unwrap(), 4);

        let overlapping = VertexSet::from_iter(4, [0, 1]);
        assert!(c4.edge_count_between(&x, &overlapping).is_err());
    }

    #[test]
    fn induced_examples() {
        let k5 = Graph::complete(5);
        let x = VertexSet::from_iter(5, [1, 2, 4]);
        let sub = k5.induced(&x);
        assert_eq!(sub.graph.vertex_count(), 3);
        assert_eq!(sub.graph.edge_count(), 3);
        assert_eq!(sub.to_parent, vec![1, 2, 4]);

        let c5 = Graph::cycle(5);
        let x = VertexSet::from_iter(5, [1, 2, 3]);
        let sub = c5.induced(&x);
        assert_eq!(sub.graph.edge_count(), 2); // path on 3 vertices

        let empty = c5.induced(&VertexSet::new(5));
        assert_eq!(empty.graph.vertex_count(), 0);
        assert_eq!(empty.graph.edge_count(), 0);
    }

    #[test]
    fn add_edges_examples() {
        let p3 = Graph::path(3);
        let k3 = p3.add_edges(&[(0, 2)]).unwrap();
        assert_eq!(k3.edge_count(), 3);

        let same = k3.add_edges(&[(0, 1)]).unwrap();
        assert_eq!(same.edge_count(), 3);

        let c4 = Graph::empty(4)
            .add_edges(&[(0, 1), (1, 2), (2, 3), (0, 3)])
            .unwrap();
        assert_eq!(c4, Graph::cycle(4));

        assert!(p3.add_edges(&[(1, 1)]).is_err());
    }

    #[test]
    fn edge_ids_are_dense_and_lexicographic() {
        let g = Graph::from_edges(5, &[(0, 1), (0, 4), (1, 2), (2, 4), (3, 4)]).unwrap();
        let ids: Vec<_> = g.edges().map(|(u, v)| g.edge_id(u, v).unwrap()).collect();
        assert_eq!(ids, (0..g.edge_count()).collect::<Vec<_>>());
        assert_eq!(g.edge_id(4, 0), g.edge_id(0, 4));
        assert_eq!(g.edge_id(1, 3), None);
    }

    #[test]
    fn edge_list_round_trip() {
        let g = Graph::from_edges(6, &[(0, 3), (1, 2), (2, 5), (0, 1)]).unwrap();
        let text = g.to_edge_list_string();
        assert!(text.starts_with("6 4\n"));
        assert!(text.ends_with('\n'));
        let back = Graph::parse_edge_list(&text).unwrap();
        assert_eq!(back, g);
        assert!(Graph::parse_edge_list("3 1\n2 1\n").is_err()); // u >= v
    }

    #[test]
    fn components_and_min_degree() {
        let two_triangles =
            Graph::from_edges(6, &[(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]).unwrap();
        let (count, comp) = two_triangles.components();
        assert_eq!(count, 2);
        assert_eq!(comp[0], comp[2]);
        assert_ne!(comp[0], comp[3]);
        assert_eq!(two_triangles.min_degree(), 2);
        assert!(!two_triangles.is_connected());
    }
}
