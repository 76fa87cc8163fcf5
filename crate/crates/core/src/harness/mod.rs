//! Host-graph generators, Monte Carlo threshold sweeps and the statistics
//! utilities that back them.

pub mod hosts;
pub mod stats;

pub use hosts::{generate_host, HostError, HostSpec};
pub use stats::{chernoff_lower, chernoff_tail, chernoff_upper, wilson_interval};
