//! Binomial tail bounds and confidence intervals used by the harness and
//! by test sizing.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum StatsError {
    #[error("parameter out of domain: {0}")]
    Domain(String),
}

/// Lower-tail bound: P[X < (1 - a) n p] < exp(-a^2 n p / 2) for a > 0,
/// X ~ Bin(n, p).
pub fn chernoff_lower(n: usize, p: f64, a: f64) -> Result<f64, StatsError> {
    if a <= 0.0 {
        return Err(StatsError::Domain(format!("lower tail needs a > 0, got {a}")));
    }
    Ok((-a * a * n as f64 * p / 2.0).exp())
}

/// Upper-tail bound: P[X > (1 + a) n p] < exp(-a^2 n p / 3) for 0 < a < 1.
pub fn chernoff_upper(n: usize, p: f64, a: f64) -> Result<f64, StatsError> {
    if a <= 0.0 || a >= 1.0 {
        return Err(StatsError::Domain(format!("upper tail needs 0 < a < 1, got {a}")));
    }
    Ok((-a * a * n as f64 * p / 3.0).exp())
}

/// Tail bound P[X >= a] <= (e n p / a)^a for integer a >= 1.
pub fn chernoff_tail(n: usize, p: f64, a: usize) -> Result<f64, StatsError> {
    if a == 0 {
        return Err(StatsError::Domain("tail bound needs integer a >= 1".into()));
    }
    let base = std::f64::consts::E * n as f64 * p / a as f64;
    Ok(base.powi(a as i32))
}

/// 95% Wilson score interval for a binomial proportion, clamped to [0, 1].
pub fn wilson_interval(successes: usize, trials: usize) -> (f64, f64) {
    wilson_interval_z(successes, trials, 1.96)
}

pub fn wilson_interval_z(successes: usize, trials: usize, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let phat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = phat + z2 / (2.0 * n);
    let margin = z * (phat * (1.0 - phat) / n + z2 / (4.0 * n * n)).sqrt();
    (
        ((center - margin) / denom).clamp(0.0, 1.0),
        ((center + margin) / denom).clamp(0.0, 1.0),
    )
}

/// Exact Bin(n, p) point mass, for small n.
pub fn binomial_pmf(n: usize, p: f64, j: usize) -> f64 {
    if j > n {
        return 0.0;
    }
    let mut choose = 1.0f64;
    for i in 0..j {
        choose = choose * (n - i) as f64 / (i + 1) as f64;
    }
    choose * p.powi(j as i32) * (1.0 - p).powi((n - j) as i32)
}
