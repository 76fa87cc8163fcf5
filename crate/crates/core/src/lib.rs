//! Constructive machinery for finding long cycles in random subgraphs of
//! minimum-degree-k host graphs: edge-exposure oracles, DFS and block
//! certificates, rotation-extension search with boosters, pseudo-clique and
//! rotating-cycle merging, and a Monte Carlo threshold harness.

pub mod bitset;
pub mod blocks;
pub mod dfs;
pub mod exposure;
pub mod graph;
pub mod harness;
pub mod pipeline;
pub mod posa;
pub mod rng;

pub use bitset::VertexSet;
pub use graph::Graph;
