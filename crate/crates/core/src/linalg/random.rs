use super::{qr_decompose, singular_values, CMat};
use crate::error::{Error, Result};
use crate::rng::{complex_normal, stream_rng};
use rand::Rng;

/// Smallest admissible σ_min / σ_max for [`random_invertible`].
pub const DEFAULT_CONDITION_GUARD: f64 = 1e-4;

const MAX_ATTEMPTS: usize = 100;

/// `n × n` matrix of iid standard complex Gaussians.
pub fn ginibre<R: Rng + ?Sized>(n: usize, rng: &mut R) -> CMat {
    CMat::from_fn(n, n, |_, _| complex_normal(rng))
}

/// Haar-distributed unitary: the Q factor of a Ginibre matrix whose R
/// factor has been normalized to a positive real diagonal.
pub fn random_unitary(n: usize, seed: u64) -> CMat {
    assert!(n >= 1);
    let mut rng = stream_rng(seed, 0);
    loop {
        // a Ginibre draw is singular with probability zero
        if let Ok((q, _)) = qr_decompose(&ginibre(n, &mut rng)) {
            return q;
        }
    }
}

/// Ginibre draw conditioned on `σ_min/σ_max ≥ guard`, resampling from the
/// same stream up to 100 times.
pub fn random_invertible(n: usize, seed: u64, guard: f64) -> Result<CMat> {
    assert!(n >= 1);
    let mut rng = stream_rng(seed, 0);
    for _ in 0..MAX_ATTEMPTS {
        let g = ginibre(n, &mut rng);
        let sv = singular_values(&g);
        if sv[0] > 0.0 && sv[n - 1] / sv[0] >= guard {
            return Ok(g);
        }
    }
    Err(Error::ResampleExhausted { attempts: MAX_ATTEMPTS })
}
