use super::GofReport;
use crate::error::{Error, Result};
use crate::rng::stream_rng;
use ndarray::Array2;
use rand::seq::SliceRandom;
use rayon::prelude::*;

/// Default permutation count (p-value resolution 1/500).
pub const DEFAULT_PERMUTATIONS: usize = 499;

const MIN_SIZE: usize = 50;
const MIN_PERMUTATIONS: usize = 199;
/// Permutations evaluated per matrix product.
const BATCH: usize = 64;

fn dist(x: &[f64], y: &[f64]) -> f64 {
    x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt()
}

/// V-statistic energy distance
/// `2·mean‖a−b‖ − mean‖a−a′‖ − mean‖b−b′‖` (diagonal pairs included).
pub fn energy_statistic(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    let mean = |x: &[Vec<f64>], y: &[Vec<f64>]| {
        x.iter().map(|u| y.iter().map(|v| dist(u, v)).sum::<f64>()).sum::<f64>() / (x.len() * y.len()) as f64
    };
    2.0 * mean(a, b) - mean(a, a) - mean(b, b)
}

/// Pooled-sample sums needed to evaluate the statistic for any labelling.
struct Pooled {
    d: Array2<f64>,
    row_sums: Vec<f64>,
    total: f64,
    n: usize,
    m: usize,
}

impl Pooled {
    fn new(a: &[Vec<f64>], b: &[Vec<f64>]) -> Self {
        let pts: Vec<&[f64]> = a.iter().chain(b).map(Vec::as_slice).collect();
        let big_n = pts.len();
        let rows: Vec<Vec<f64>> = (0..big_n)
            .into_par_iter()
            .map(|i| pts.iter().map(|q| dist(pts[i], q)).collect())
            .collect();
        let d = Array2::from_shape_vec((big_n, big_n), rows.concat()).expect("square");
        let row_sums: Vec<f64> = d.rows().into_iter().map(|r| r.sum()).collect();
        let total = row_sums.iter().sum();
        Self { d, row_sums, total, n: a.len(), m: b.len() }
    }

    /// Statistic from `q = s'Ds` and `sr = s'r` for a 0/1 label vector `s`.
    fn stat(&self, q: f64, sr: f64) -> f64 {
        let (n, m) = (self.n as f64, self.m as f64);
        let x_ab = sr - q;
        let x_bb = self.total - 2.0 * sr + q;
        2.0 * x_ab / (n * m) - q / (n * n) - x_bb / (m * m)
    }

    /// Statistics for a batch of first-sample index sets.
    fn batch(&self, sets: &[Vec<usize>]) -> Vec<f64> {
        let big_n = self.n + self.m;
        let mut s = Array2::<f64>::zeros((big_n, sets.len()));
        for (j, set) in sets.iter().enumerate() {
            for &i in set {
                s[[i, j]] = 1.0;
            }
        }
        let ds = self.d.dot(&s);
        sets.iter()
            .enumerate()
            .map(|(j, set)| {
                let q: f64 = set.iter().map(|&i| ds[[i, j]]).sum();
                let sr: f64 = set.iter().map(|&i| self.row_sums[i]).sum();
                self.stat(q, sr)
            })
            .collect()
    }
}

/// Two-sample energy-distance permutation test.
///
/// Permutations are drawn sequentially from stream 0 of `seed` and scored in
/// batches, so the result does not depend on the thread count. The p-value
/// is `(k + 1)/(R + 1)` with `k` the number of permuted statistics at least
/// as large as the observed one.
pub fn energy_test(a: &[Vec<f64>], b: &[Vec<f64>], n_permutations: usize, seed: u64, alpha: f64) -> Result<GofReport> {
    if a.len() < MIN_SIZE || b.len() < MIN_SIZE {
        return Err(Error::InvalidArgument(format!("energy_test needs at least {MIN_SIZE} points per sample")));
    }
    if n_permutations < MIN_PERMUTATIONS {
        return Err(Error::InvalidArgument(format!("energy_test needs at least {MIN_PERMUTATIONS} permutations")));
    }
    let dim = a[0].len();
    if dim == 0 {
        return Err(Error::InvalidArgument("zero-dimensional points".into()));
    }
    if let Some(bad) = a.iter().chain(b).find(|v| v.len() != dim) {
        return Err(Error::DimensionMismatch { expected: dim, found: bad.len() });
    }

    let pooled = Pooled::new(a, b);
    let big_n = a.len() + b.len();
    let mut rng = stream_rng(seed, 0);
    let mut idx: Vec<usize> = (0..big_n).collect();
    let mut sets: Vec<Vec<usize>> = Vec::with_capacity(n_permutations + 1);
    sets.push((0..a.len()).collect());
    for _ in 0..n_permutations {
        idx.shuffle(&mut rng);
        sets.push(idx[..a.len()].to_vec());
    }
    let stats: Vec<f64> = sets.par_chunks(BATCH).flat_map_iter(|c| pooled.batch(c)).collect();

    let observed = stats[0];
    let mean_dist = pooled.total / (big_n * big_n) as f64;
    let tol = 1e-9 * mean_dist;
    let exceed = stats[1..].iter().filter(|&&s| s >= observed - tol).count();
    let p = (exceed + 1) as f64 / (n_permutations + 1) as f64;
    Ok(GofReport::new("energy", a.len(), b.len(), energy_statistic(a, b), p, seed, alpha))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cauchy::{interleaved_real, ComplexCauchy};
    use crate::linalg::C64;

    fn draws(d: &ComplexCauchy, n: usize, seed: u64) -> Vec<Vec<f64>> {
        d.sample(n, seed).unwrap().iter().map(|z| interleaved_real(z)).collect()
    }

    #[test]
    fn pooled_route_matches_direct_statistic() {
        let g = ComplexCauchy::standard(2);
        let (a, b) = (draws(&g, 60, 1), draws(&g, 70, 2));
        let pooled = Pooled::new(&a, &b);
        let s = pooled.batch(&[(0..60).collect()])[0];
        let direct = energy_statistic(&a, &b);
        assert!((s - direct).abs() <= 1e-10 * direct.abs().max(1.0), "{s} vs {direct}");
    }

    #[test]
    fn identical_samples() {
        let a = draws(&ComplexCauchy::standard(2), 80, 3);
        let r = energy_test(&a, &a, 199, 1, 0.01).unwrap();
        assert!(r.statistic <= 1e-12, "{}", r.statistic);
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn calibrated_under_null() {
        let g = ComplexCauchy::standard(2);
        let passes = (0..100u64)
            .filter(|&s| {
                let r = energy_test(&draws(&g, 100, 2 * s), &draws(&g, 100, 2 * s + 1), 199, s, 0.01).unwrap();
                r.passed
            })
            .count();
        assert!(passes >= 95, "{passes}");
    }

    #[test]
    fn detects_location_shift() {
        let g = ComplexCauchy::standard(2);
        let shifted = ComplexCauchy::new(vec![C64::new(3.0, 0.0), C64::new(0.0, 0.0)], crate::linalg::CMat::identity(2)).unwrap();
        let r = energy_test(&draws(&g, 500, 10), &draws(&shifted, 500, 11), DEFAULT_PERMUTATIONS, 4, 0.01).unwrap();
        assert!(r.p_value < 0.01, "{}", r.p_value);
    }

    #[test]
    fn deterministic_in_seed() {
        let g = ComplexCauchy::standard(1);
        let (a, b) = (draws(&g, 60, 5), draws(&g, 60, 6));
        assert_eq!(energy_test(&a, &b, 199, 9, 0.05).unwrap(), energy_test(&a, &b, 199, 9, 0.05).unwrap());
    }

    #[test]
    fn argument_checks() {
        let a = vec![vec![0.0]; 60];
        assert!(energy_test(&a[..10], &a, 199, 0, 0.01).is_err());
        assert!(energy_test(&a, &a, 10, 0, 0.01).is_err());
        let b = vec![vec![0.0, 1.0]; 60];
        assert!(matches!(energy_test(&a, &b, 199, 0, 0.01), Err(Error::DimensionMismatch { .. })));
    }
}
