use longcycle_core::exposure::ExposureState;
use longcycle_core::graph::Graph;
use longcycle_core::posa::hamilton_cycle_search;
use rayon::prelude::*;
use std::sync::Arc;

fn trial(n: usize, p: f64, seed: u64, restarts: usize) -> (bool, bool) {
    let host = Arc::new(Graph::complete(n));
    let mut s = ExposureState::new(host, p, seed).unwrap();
    s.expose_all_remaining("t");
    let g = s.revealed_subgraph();
    let deg_ok = g.min_degree() >= 2 && g.is_connected();
    if !deg_ok {
        return (false, false);
    }
    let found = hamilton_cycle_search(&g, restarts, seed ^ 0x55).is_some();
    (true, found)
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    let n: usize = args[1].parse().unwrap();
    let c: f64 = args[2].parse().unwrap();
    let trials: u64 = args[3].parse().unwrap();
    let restarts: usize = args.get(4).map(|s| s.parse().unwrap()).unwrap_or(8);
    let nf = n as f64;
    let p = (nf.ln() + nf.ln().ln() + c) / nf;
    let start = std::time::Instant::now();
    let results: Vec<(bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|t| trial(n, p, 1_000_000 + t, restarts))
        .collect();
    let eligible = results.iter().filter(|r| r.0).count();
    let found = results.iter().filter(|r| r.1).count();
    println!(
        "n={} c={} p={:.6} trials={} | delta>=2&conn: {:.4} | found: {:.4} | found|eligible: {:.4} | {:?}",
        n, c, p, trials,
        eligible as f64 / trials as f64,
        found as f64 / trials as f64,
        if eligible > 0 { found as f64 / eligible as f64 } else { 0.0 },
        start.elapsed()
    );
}
