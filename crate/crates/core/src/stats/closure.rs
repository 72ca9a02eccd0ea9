use super::{energy_test, GofReport, DEFAULT_PERMUTATIONS};
use crate::cauchy::{interleaved_real, ComplexCauchy};
use crate::error::{Error, Result};
use crate::mobius::MobiusMap;
use crate::rng::derive_seed;

const MIN_DRAWS: usize = 500;

/// Compares the image of `d` under `m` (sampled then mapped) with the
/// family member computed by [`ComplexCauchy::pushforward`] (sampled
/// directly), using the energy test on the `2p` real coordinates.
///
/// A draw landing on a pole is an error, not a skipped sample.
pub fn closure_experiment(d: &ComplexCauchy, m: &MobiusMap, n: usize, seed: u64, alpha: f64) -> Result<GofReport> {
    if n < MIN_DRAWS {
        return Err(Error::InvalidArgument(format!("closure_experiment needs n >= {MIN_DRAWS}")));
    }
    if m.p() != d.p() {
        return Err(Error::DimensionMismatch { expected: d.p(), found: m.p() });
    }
    let mapped: Vec<Vec<f64>> = d
        .sample(n, derive_seed(seed, 1))?
        .iter()
        .map(|z| m.apply(z).map(|w| interleaved_real(&w)))
        .collect::<Result<_>>()?;
    let image = d.pushforward(m)?;
    let direct: Vec<Vec<f64>> = image.sample(n, derive_seed(seed, 2))?.iter().map(|z| interleaved_real(z)).collect();
    let mut report = energy_test(&mapped, &direct, DEFAULT_PERMUTATIONS, derive_seed(seed, 3), alpha)?;
    report.test_name = "closure".into();
    report.seed = seed;
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_invertible, CMat, DEFAULT_CONDITION_GUARD};

    #[test]
    fn inversion_of_standard_p1() {
        let inv = MobiusMap::new(CMat::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0]).unwrap()).unwrap();
        let r = closure_experiment(&ComplexCauchy::standard(1), &inv, 500, 1, 0.01).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn random_map_p2_seed17() {
        let d = ComplexCauchy::from_affine_factor(
            vec![crate::linalg::C64::new(1.0, -1.0), crate::linalg::C64::new(0.5, 2.0)],
            &random_invertible(2, 170, DEFAULT_CONDITION_GUARD).unwrap(),
        )
        .unwrap();
        let g = MobiusMap::new(random_invertible(3, 17, DEFAULT_CONDITION_GUARD).unwrap()).unwrap();
        let r = closure_experiment(&d, &g, 500, 17, 0.01).unwrap();
        assert!(r.passed, "{r:?}");
    }

    #[test]
    fn wrong_image_is_detected() {
        // the standard member is not invariant under z -> 2z + 1
        let d = ComplexCauchy::standard(1);
        let m = MobiusMap::new(CMat::from_real(2, 2, &[2.0, 1.0, 0.0, 1.0]).unwrap()).unwrap();
        let mapped: Vec<Vec<f64>> =
            d.sample(500, 1).unwrap().iter().map(|z| interleaved_real(&m.apply(z).unwrap())).collect();
        let other: Vec<Vec<f64>> = d.sample(500, 2).unwrap().iter().map(|z| interleaved_real(z)).collect();
        assert!(!energy_test(&mapped, &other, 499, 3, 0.01).unwrap().passed);
    }

    #[test]
    fn argument_checks() {
        let d = ComplexCauchy::standard(2);
        assert!(closure_experiment(&d, &MobiusMap::identity(2), 100, 0, 0.01).is_err());
        assert!(matches!(
            closure_experiment(&d, &MobiusMap::identity(1), 500, 0, 0.01),
            Err(Error::DimensionMismatch { .. })
        ));
    }
}
