use longcycle_core::exposure::ExposureState;
use longcycle_core::graph::Graph;
use longcycle_core::posa::hamilton_cycle_search;
use rayon::prelude::*;
use std::sync::Arc;

fn main() {
    // Criterion 2 exact config: host K_500, k = 499, c = 0, k-formula p.
    let n = 500usize;
    let k = 499f64;
    let p = (k.ln() + k.ln().ln()) / k;
    let trials = 4000u64;
    let host = Arc::new(Graph::complete(n));
    let found: usize = (0..trials)
        .into_par_iter()
        .map(|t| {
            let mut s = ExposureState::new(Arc::clone(&host), p, 77_000 + t).unwrap();
            s.expose_all_remaining("t");
            let g = s.revealed_subgraph();
            if g.min_degree() >= 2 && g.is_connected() {
                hamilton_cycle_search(&g, 8, t ^ 0x55).is_some() as usize
            } else {
                0
            }
        })
        .sum();
    let phat = found as f64 / trials as f64;
    let se = (phat * (1.0 - phat) / trials as f64).sqrt();
    println!("k-formula p={p:.7} phat={phat:.4} +- {:.4} (2se)", 2.0 * se);
    // And the asymptotic-formula E[#deg<=1] sanity value.
    let np = p * (n as f64 - 1.0);
    let e0 = n as f64 * (1.0 - p).powi(n as i32 - 1);
    let e1 = n as f64 * (n as f64 - 1.0) * p * (1.0 - p).powi(n as i32 - 2);
    println!("E[deg0]={e0:.3} E[deg1]={e1:.3} Poisson P[min deg >= 2] ~ {:.4}, np={np:.3}", (-(e0 + e1)).exp());
}
