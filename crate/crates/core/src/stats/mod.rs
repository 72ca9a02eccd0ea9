//! Goodness-of-fit and two-sample machinery used to check distributional
//! claims empirically.

mod closure;
mod energy;
mod ks;
mod mass;

pub use closure::closure_experiment;
pub use energy::{energy_statistic, energy_test, DEFAULT_PERMUTATIONS};
pub use ks::{kolmogorov_survival, ks_statistic, ks_test};
pub use mass::{mc_mass, mc_mass_with, quad_mass_p1, quad_mass_p1_with, MassEstimate};

use serde::{Deserialize, Serialize};

/// Outcome of one statistical check. `passed` is `p_value > alpha`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GofReport {
    pub test_name: String,
    pub n1: usize,
    pub n2: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub seed: u64,
    pub alpha: f64,
    pub passed: bool,
}

impl GofReport {
    pub fn new(test_name: impl Into<String>, n1: usize, n2: usize, statistic: f64, p_value: f64, seed: u64, alpha: f64) -> Self {
        let p_value = p_value.clamp(0.0, 1.0);
        Self { test_name: test_name.into(), n1, n2, statistic, p_value, seed, alpha, passed: p_value > alpha }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}

/// Two-sided binomial band `[lo, hi]` holding at least `level` of the
/// Binomial(trials, rate) mass, with `level/2`-quantile endpoints.
pub fn binomial_band(trials: u64, rate: f64, level: f64) -> (u64, u64) {
    let tail = (1.0 - level) / 2.0;
    let mut pmf = (1.0 - rate).powi(trials as i32);
    let mut cdf = 0.0;
    let (mut lo, mut hi) = (None, None);
    for k in 0..=trials {
        if k > 0 {
            pmf *= (trials - k + 1) as f64 / k as f64 * rate / (1.0 - rate);
        }
        cdf += pmf;
        // smallest k with P(X ≤ k) > tail; smallest k with P(X ≤ k) ≥ 1 − tail
        if lo.is_none() && cdf > tail {
            lo = Some(k);
        }
        if hi.is_none() && cdf >= 1.0 - tail {
            hi = Some(k);
        }
    }
    (lo.unwrap_or(0), hi.unwrap_or(trials))
}
