use super::GofReport;
use crate::error::{Error, Result};

const MIN_SAMPLES: usize = 10;

/// `D_n = sup |F_n − F|` over sorted data.
pub fn ks_statistic(sorted: &[f64], cdf: impl Fn(f64) -> f64) -> Result<f64> {
    let n = sorted.len() as f64;
    let mut d: f64 = 0.0;
    for (i, &x) in sorted.iter().enumerate() {
        let f = cdf(x);
        if !(0.0..=1.0).contains(&f) {
            return Err(Error::InvalidCdf { value: f });
        }
        d = d.max((i + 1) as f64 / n - f).max(f - i as f64 / n);
    }
    Ok(d)
}

/// `Q(λ) = 2 Σ_{k≥1} (−1)^{k−1} e^{−2k²λ²}`, the limiting survival function
/// of `√n D_n`. Terms are summed until they drop below 1e-10.
pub fn kolmogorov_survival(lambda: f64) -> f64 {
    if lambda <= 0.0 {
        return 1.0;
    }
    if lambda < 0.2 {
        // the alternating series converges slowly here; Q is 1 to double precision
        return 1.0;
    }
    let mut sum = 0.0;
    let mut sign = 1.0;
    for k in 1..=1000 {
        let kf = k as f64;
        let term = (-2.0 * kf * kf * lambda * lambda).exp();
        sum += sign * term;
        if term < 1e-10 {
            break;
        }
        sign = -sign;
    }
    (2.0 * sum).clamp(0.0, 1.0)
}

/// One-sample Kolmogorov–Smirnov test against a continuous `cdf`.
///
/// The p-value uses the asymptotic distribution at `(√n + 0.12 + 0.11/√n) D_n`.
pub fn ks_test(samples: &[f64], cdf: impl Fn(f64) -> f64, alpha: f64) -> Result<GofReport> {
    if samples.len() < MIN_SAMPLES {
        return Err(Error::InvalidArgument(format!("ks_test needs at least {MIN_SAMPLES} samples")));
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    let d = ks_statistic(&sorted, cdf)?;
    let sn = (sorted.len() as f64).sqrt();
    let p = kolmogorov_survival((sn + 0.12 + 0.11 / sn) * d);
    Ok(GofReport::new("ks", sorted.len(), 0, d, p, 0, alpha))
}
