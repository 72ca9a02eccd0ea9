use ccauchy::linalg::{det, random_invertible, rq_decompose, DEFAULT_CONDITION_GUARD};
use ccauchy::mobius::proj_distance;
use ccauchy::rng::stream_rng;
use ccauchy::verify::{random_distribution, random_map};
use ccauchy::{marginal_cdf, AffineMap, CMat, ComplexCauchy, HermitianPd, MobiusMap, C64};
use proptest::prelude::*;
use rand::Rng;

fn point(p: usize, seed: u64) -> Vec<C64> {
    let mut rng = stream_rng(seed, 99);
    (0..p).map(|_| C64::new(rng.random::<f64>() * 4.0 - 2.0, rng.random::<f64>() * 4.0 - 2.0)).collect()
}

fn vec_gap(a: &[C64], b: &[C64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn rq_postconditions(n in 1usize..=7, seed in any::<u64>()) {
        let m = random_invertible(n, seed, DEFAULT_CONDITION_GUARD).unwrap();
        let f = rq_decompose(&m).unwrap();
        prop_assert!(f.product().max_abs_diff(&m) <= 1e-10 * m.max_norm().max(1.0));
        prop_assert!(f.q.unitarity_residual() <= 1e-12);
        prop_assert!(f.r.is_upper_triangular(0.0));
        for i in 0..n {
            prop_assert!(f.r[(i, i)].re > 0.0 && f.r[(i, i)].im == 0.0);
        }
        prop_assert_eq!(rq_decompose(&m).unwrap(), f);
    }

    #[test]
    fn det_is_multiplicative(n in 1usize..=6, s1 in any::<u64>(), s2 in any::<u64>()) {
        let a = random_invertible(n, s1, DEFAULT_CONDITION_GUARD).unwrap();
        let b = random_invertible(n, s2, DEFAULT_CONDITION_GUARD).unwrap();
        let lhs = det(&(&a * &b));
        let rhs = det(&a) * det(&b);
        prop_assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm().max(1e-300));
    }

    #[test]
    fn cholesky_reconstructs(n in 1usize..=8, seed in any::<u64>()) {
        let f = random_invertible(n, seed, DEFAULT_CONDITION_GUARD).unwrap();
        let s = HermitianPd::from_gram(&f).unwrap();
        let l = s.factor();
        prop_assert!(l.is_lower_triangular(0.0));
        let back = l * &l.adjoint();
        prop_assert!(back.max_abs_diff(s.matrix()) <= 1e-12 * s.matrix().max_norm());
    }

    #[test]
    fn group_laws(p in 1usize..=3, s1 in any::<u64>(), s2 in any::<u64>(), s3 in any::<u64>()) {
        let (f, g, h) = (random_map(p, s1), random_map(p, s2), random_map(p, s3));
        let id = MobiusMap::identity(p);
        prop_assert!(proj_distance(&f.compose(&f.invert()).unwrap(), &id) <= 1e-10);
        let left = f.compose(&g).unwrap().compose(&h).unwrap();
        let right = f.compose(&g.compose(&h).unwrap()).unwrap();
        prop_assert!(proj_distance(&left, &right) <= 1e-10);
        let z = point(p, s1 ^ s2);
        if let (Ok(gz), Ok(fg)) = (g.apply(&z), f.compose(&g)) {
            if let (Ok(a), Ok(b)) = (f.apply(&gz), fg.apply(&z)) {
                let scale = a.iter().map(|c| c.norm()).fold(1.0, f64::max);
                prop_assert!(vec_gap(&a, &b) <= 1e-8 * scale);
            }
        }
    }

    #[test]
    fn affine_pushforward_is_closed_form(p in 1usize..=4, s1 in any::<u64>(), s2 in any::<u64>()) {
        let d = random_distribution(p, s1);
        let lin = random_invertible(p, s2, DEFAULT_CONDITION_GUARD).unwrap();
        let off = point(p, s2);
        let map = AffineMap::from_parts(&lin, &off).unwrap();
        let got = d.pushforward_affine(&map).unwrap();
        let tau: Vec<C64> = lin.matvec(d.tau()).iter().zip(&off).map(|(a, b)| a + b).collect();
        let sigma = &(&lin * d.sigma().matrix()) * &lin.adjoint();
        let want = ComplexCauchy::new(tau, sigma).unwrap();
        prop_assert!(got.relative_param_gap(&want) <= 1e-10);
        let via_rq = d.pushforward(map.as_mobius()).unwrap();
        prop_assert!(via_rq.relative_param_gap(&want) <= 1e-10);
    }

    #[test]
    fn pushforward_is_functorial(p in 1usize..=3, s in any::<u64>()) {
        let d = random_distribution(p, s);
        let (g, h) = (random_map(p, s.wrapping_add(1)), random_map(p, s.wrapping_add(2)));
        let two_step = d.pushforward(&g).unwrap().pushforward(&h).unwrap();
        let one_step = d.pushforward(&h.compose(&g).unwrap()).unwrap();
        prop_assert!(two_step.relative_param_gap(&one_step) <= 1e-8);
    }

    #[test]
    fn marginal_cdf_is_monotone_and_symmetric(a in -1e6f64..1e6, b in -1e6f64..1e6) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(marginal_cdf(lo) <= marginal_cdf(hi));
        prop_assert!((marginal_cdf(a) + marginal_cdf(-a) - 1.0).abs() <= 1e-15);
    }
}

#[test]
fn marginal_cdf_extreme_arguments() {
    assert_eq!(marginal_cdf(f64::NEG_INFINITY), 0.0);
    assert_eq!(marginal_cdf(f64::INFINITY), 1.0);
    assert_eq!(marginal_cdf(1e300), 1.0);
    let tiny = marginal_cdf(-1e100);
    assert!(tiny > 0.0 && (tiny - 0.25e-200).abs() <= 1e-214);
}

#[test]
fn sigma_must_be_square() {
    let bad = CMat::zeros(2, 3);
    assert!(ComplexCauchy::new(vec![C64::new(0.0, 0.0); 2], bad).is_err());
}
