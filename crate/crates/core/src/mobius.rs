//! Projective maps `z ↦ (az + b)/(cz + d)` on `ℂᵖ`.
//!
//! A map is an invertible `(p+1) × (p+1)` complex matrix
//!
//! ```text
//! g = | a  b |    a: p×p, b: p×1
//!     | c  d |    c: 1×p, d: scalar
//! ```
//!
//! acting on homogeneous coordinates `(z, 1)`. Matrices that differ by a
//! nonzero scalar give the same map, so `g` is stored scaled to
//! `|det g| = 1`; the leftover unit phase is absorbed by [`proj_distance`].

use crate::error::{Error, Result};
use crate::linalg::{inverse, qr_decompose, CMat, C64};
use std::f64::consts::TAU;

/// Default relative tolerance for [`MobiusMap::as_affine`].
pub const DEFAULT_AFFINE_TOL: f64 = 1e-12;

/// Denominators at or below this multiple of `‖az + b‖ + 1` are poles.
const POLE_REL: f64 = 1e-300;

#[derive(Clone, Debug, PartialEq)]
pub struct MobiusMap {
    p: usize,
    g: CMat,
}

/// Scales `g` to unit `|det|`; the determinant modulus comes from the
/// QR diagonal so it cannot overflow. Matrices already at unit `|det|` up
/// to rounding are returned unchanged, so canonicalization is idempotent.
fn canonicalize(g: &CMat) -> Result<CMat> {
    let (_, r) = qr_decompose(g)?;
    let n = g.rows();
    let log_abs_det: f64 = (0..n).map(|i| r[(i, i)].re.ln()).sum();
    if log_abs_det.abs() <= 64.0 * n as f64 * f64::EPSILON {
        return Ok(g.clone());
    }
    let s = (-log_abs_det / n as f64).exp();
    Ok(g.scale(C64::new(s, 0.0)))
}

impl MobiusMap {
    /// Wraps an invertible `(p+1) × (p+1)` matrix, `p ≥ 1`.
    pub fn new(g: CMat) -> Result<Self> {
        if !g.is_square() || g.rows() < 2 {
            return Err(Error::InvalidShape(format!(
                "map matrix must be square of size p+1 >= 2, got {}x{}",
                g.rows(),
                g.cols()
            )));
        }
        // pivot guard; also ensures `invert` cannot fail later
        inverse(&g)?;
        let p = g.rows() - 1;
        Ok(Self { p, g: canonicalize(&g)? })
    }

    pub fn identity(p: usize) -> Self {
        Self { p, g: CMat::identity(p + 1) }
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.p
    }

    /// The canonical (`|det| = 1`) matrix representative.
    pub fn matrix(&self) -> &CMat {
        &self.g
    }

    pub fn a(&self) -> CMat {
        self.g.block(0, self.p, 0, self.p)
    }

    pub fn b(&self) -> Vec<C64> {
        (0..self.p).map(|i| self.g[(i, self.p)]).collect()
    }

    pub fn c(&self) -> Vec<C64> {
        self.g.row(self.p)[..self.p].to_vec()
    }

    pub fn d(&self) -> C64 {
        self.g[(self.p, self.p)]
    }

    /// `M_g(z) = (az + b)/(cz + d)`.
    pub fn apply(&self, z: &[C64]) -> Result<Vec<C64>> {
        let p = self.p;
        if z.len() != p {
            return Err(Error::DimensionMismatch { expected: p, found: z.len() });
        }
        let mut num: Vec<C64> = (0..p)
            .map(|i| {
                let row = self.g.row(i);
                row[..p].iter().zip(z).map(|(a, x)| a * x).sum::<C64>() + row[p]
            })
            .collect();
        let last = self.g.row(p);
        let den = last[..p].iter().zip(z).map(|(c, x)| c * x).sum::<C64>() + last[p];
        let num_norm = num.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if den.norm() <= POLE_REL * (num_norm + 1.0) {
            return Err(Error::PoleHit);
        }
        for v in &mut num {
            *v /= den;
        }
        Ok(num)
    }

    /// `self ∘ other`, i.e. the map `z ↦ self(other(z))`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.p != other.p {
            return Err(Error::DimensionMismatch { expected: self.p, found: other.p });
        }
        Ok(Self { p: self.p, g: canonicalize(&(&self.g * &other.g))? })
    }

    pub fn invert(&self) -> Self {
        let inv = inverse(&self.g).expect("map matrices are invertible by construction");
        Self { p: self.p, g: canonicalize(&inv).expect("inverse of an invertible matrix") }
    }

    /// Affine view when `max|c| ≤ tol·max|g|` and `|d| > tol`; the `c` block
    /// of the returned map is exactly zero.
    pub fn as_affine(&self, tol: f64) -> Result<AffineMap> {
        let c_max = self.c().iter().map(|z| z.norm()).fold(0.0, f64::max);
        if c_max <= tol * self.g.max_norm() && self.d().norm() > tol {
            let mut g = self.g.clone();
            for j in 0..self.p {
                g[(self.p, j)] = C64::new(0.0, 0.0);
            }
            Ok(AffineMap { map: Self { p: self.p, g } })
        } else {
            Err(Error::NotAffine)
        }
    }
}

/// A map with `c = 0`: `z ↦ (a z + b)/d`.
#[derive(Clone, Debug, PartialEq)]
pub struct AffineMap {
    map: MobiusMap,
}

impl AffineMap {
    /// The map `z ↦ linear·z + offset`.
    pub fn from_parts(linear: &CMat, offset: &[C64]) -> Result<Self> {
        let p = linear.rows();
        if !linear.is_square() {
            return Err(Error::InvalidShape("linear part must be square".into()));
        }
        if offset.len() != p {
            return Err(Error::DimensionMismatch { expected: p, found: offset.len() });
        }
        let g = CMat::from_fn(p + 1, p + 1, |i, j| match (i < p, j < p) {
            (true, true) => linear[(i, j)],
            (true, false) => offset[i],
            (false, true) => C64::new(0.0, 0.0),
            (false, false) => C64::new(1.0, 0.0),
        });
        inverse(linear)?;
        Ok(Self { map: MobiusMap::new(g)? })
    }

    pub fn p(&self) -> usize {
        self.map.p
    }

    pub fn as_mobius(&self) -> &MobiusMap {
        &self.map
    }

    pub fn into_mobius(self) -> MobiusMap {
        self.map
    }

    /// `a / d`.
    pub fn linear_part(&self) -> CMat {
        self.map.a().scale(self.map.d().inv())
    }

    /// `b / d`.
    pub fn offset(&self) -> Vec<C64> {
        let d = self.map.d();
        self.map.b().into_iter().map(|b| b / d).collect()
    }

    pub fn apply(&self, z: &[C64]) -> Result<Vec<C64>> {
        self.map.apply(z)
    }

    pub fn compose(&self, other: &Self) -> Result<Self> {
        let m = self.map.compose(&other.map)?;
        m.as_affine(DEFAULT_AFFINE_TOL)
    }
}

impl From<AffineMap> for MobiusMap {
    fn from(a: AffineMap) -> Self {
        a.map
    }
}

/// `min_φ max|g₁ − e^{iφ} g₂|` over unit phases, for canonical matrices.
/// Zero exactly when both describe the same projective map.
pub fn proj_distance(m1: &MobiusMap, m2: &MobiusMap) -> f64 {
    assert_eq!(m1.p, m2.p, "proj_distance needs equal dimensions");
    let x = m1.g.as_slice();
    let y = m2.g.as_slice();
    let at = |phi: f64| {
        let w = C64::from_polar(1.0, phi);
        x.iter().zip(y).map(|(a, b)| (a - w * b).norm()).fold(0.0, f64::max)
    };

    const GRID: usize = 256;
    let inner: C64 = x.iter().zip(y).map(|(a, b)| b.conj() * a).sum();
    let mut best_phi = inner.arg();
    let mut best = at(best_phi);
    for k in 0..GRID {
        let phi = TAU * k as f64 / GRID as f64;
        let v = at(phi);
        if v < best {
            best = v;
            best_phi = phi;
        }
    }

    // golden-section refinement around the best candidate
    let h = TAU / GRID as f64;
    let (mut lo, mut hi) = (best_phi - h, best_phi + h);
    let ratio = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - ratio * (hi - lo);
    let mut d = lo + ratio * (hi - lo);
    let (mut fc, mut fd) = (at(c), at(d));
    for _ in 0..80 {
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - ratio * (hi - lo);
            fc = at(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + ratio * (hi - lo);
            fd = at(d);
        }
    }
    best.min(fc).min(fd)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{det, random_invertible, DEFAULT_CONDITION_GUARD};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn real_map(n: usize, v: &[f64]) -> MobiusMap {
        MobiusMap::new(CMat::from_real(n, n, v).unwrap()).unwrap()
    }

    fn inversion() -> MobiusMap {
        real_map(2, &[0.0, 1.0, 1.0, 0.0])
    }

    #[test]
    fn construction_canonicalizes_determinant() {
        let m = real_map(2, &[4.0, 0.0, 0.0, 1.0]);
        assert!((det(m.matrix()).norm() - 1.0).abs() < 1e-14);
        assert!(MobiusMap::new(CMat::from_real(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap()).is_err());
        assert!(MobiusMap::new(CMat::identity(1)).is_err());
    }

    #[test]
    fn apply_examples() {
        let id = MobiusMap::identity(2);
        let z = vec![c(0.3, -1.0), c(2.0, 5.0)];
        assert_eq!(id.apply(&z).unwrap(), z);

        let w = inversion().apply(&[c(2.0, 0.0)]).unwrap();
        assert!((w[0] - c(0.5, 0.0)).norm() < 1e-15);

        let aff = real_map(3, &[1.0, 0.0, 1.0, 0.0, 1.0, 2.0, 0.0, 0.0, 1.0]);
        let w = aff.apply(&[c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert!((w[0] - c(4.0, 0.0)).norm() < 1e-15);
        assert!((w[1] - c(2.0, 4.0)).norm() < 1e-15);
    }

    #[test]
    fn apply_reports_poles_and_bad_dimensions() {
        assert_eq!(inversion().apply(&[c(0.0, 0.0)]).unwrap_err(), Error::PoleHit);
        assert!(matches!(inversion().apply(&[]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn scalar_case_is_classical_mobius() {
        let g = CMat::from_rows(&[vec![c(1.0, 2.0), c(-0.5, 0.0)], vec![c(0.25, 1.0), c(3.0, -1.0)]]).unwrap();
        let m = MobiusMap::new(g).unwrap();
        let (a, b, cc, d) = (m.matrix()[(0, 0)], m.matrix()[(0, 1)], m.matrix()[(1, 0)], m.matrix()[(1, 1)]);
        for z in [c(0.1, 0.2), c(-3.0, 4.0), c(10.0, -0.5)] {
            assert_eq!(m.apply(&[z]).unwrap()[0], (a * z + b) / (cc * z + d));
        }
    }

    #[test]
    fn compose_examples() {
        let m = MobiusMap::new(random_invertible(3, 1, DEFAULT_CONDITION_GUARD).unwrap()).unwrap();
        assert!(proj_distance(&m.compose(&MobiusMap::identity(2)).unwrap(), &m) < 1e-12);
        assert!(proj_distance(&m.compose(&m.invert()).unwrap(), &MobiusMap::identity(2)) < 1e-10);

        let shift = real_map(2, &[1.0, 1.0, 0.0, 1.0]);
        let w = inversion().compose(&shift).unwrap().apply(&[c(1.0, 0.0)]).unwrap();
        assert!((w[0] - c(0.5, 0.0)).norm() < 1e-15);
        assert!(matches!(
            m.compose(&MobiusMap::identity(1)),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn invert_examples() {
        let id = MobiusMap::identity(3);
        assert!(proj_distance(&id.invert(), &id) < 1e-15);
        let dbl = real_map(2, &[2.0, 0.0, 0.0, 1.0]);
        let w = dbl.invert().apply(&[c(4.0, 0.0)]).unwrap();
        assert!((w[0] - c(2.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn invert_round_trip_random_points() {
        let m = MobiusMap::new(random_invertible(3, 3, DEFAULT_CONDITION_GUARD).unwrap()).unwrap();
        let inv = m.invert();
        let mut rng = crate::rng::stream_rng(3, 1);
        let mut checked = 0;
        for _ in 0..100 {
            let z: Vec<C64> = (0..2).map(|_| crate::rng::complex_normal(&mut rng)).collect();
            let Ok(w) = m.apply(&z) else { continue };
            let back = inv.apply(&w).unwrap();
            let err = back.iter().zip(&z).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let scale = z.iter().map(|v| v.norm()).fold(1.0, f64::max);
            assert!(err <= 1e-10 * scale, "{err}");
            checked += 1;
        }
        assert_eq!(checked, 100);
    }

    #[test]
    fn as_affine_examples() {
        let m = real_map(2, &[1.0, 5.0, 0.0, 1.0]).as_affine(DEFAULT_AFFINE_TOL).unwrap();
        assert!((m.linear_part()[(0, 0)] - c(1.0, 0.0)).norm() < 1e-15);
        assert!((m.offset()[0] - c(5.0, 0.0)).norm() < 1e-14);
        assert_eq!(inversion().as_affine(DEFAULT_AFFINE_TOL).unwrap_err(), Error::NotAffine);

        let lin = CMat::from_rows(&[vec![c(1.0, 1.0), c(0.5, 0.0)], vec![c(0.0, -2.0), c(3.0, 0.0)]]).unwrap();
        let off = vec![c(1.0, -1.0), c(0.0, 7.0)];
        let a = AffineMap::from_parts(&lin, &off).unwrap();
        let back = a.as_mobius().as_affine(DEFAULT_AFFINE_TOL).unwrap();
        assert!(back.linear_part().max_abs_diff(&lin) <= 1e-12);
        assert!(back.offset().iter().zip(&off).all(|(x, y)| (x - y).norm() <= 1e-12));
    }

    #[test]
    fn from_parts_examples() {
        let id = AffineMap::from_parts(&CMat::identity(2), &[c(0.0, 0.0); 2]).unwrap();
        assert!(proj_distance(id.as_mobius(), &MobiusMap::identity(2)) < 1e-15);
        let a = AffineMap::from_parts(&CMat::diag(&[c(2.0, 0.0)]), &[c(3.0, 0.0)]).unwrap();
        assert!((a.apply(&[c(1.0, 0.0)]).unwrap()[0] - c(5.0, 0.0)).norm() < 1e-14);
        assert_eq!(
            AffineMap::from_parts(&CMat::from_real(2, 2, &[1.0, 1.0, 1.0, 1.0]).unwrap(), &[c(0.0, 0.0); 2])
                .unwrap_err(),
            Error::SingularInput
        );
    }

    #[test]
    fn from_parts_random_round_trip() {
        let lin = random_invertible(2, 5, DEFAULT_CONDITION_GUARD).unwrap();
        let tau = vec![c(0.3, 0.1), c(-2.0, 1.5)];
        let a = AffineMap::from_parts(&lin, &tau).unwrap();
        let id = a.as_mobius().compose(&a.as_mobius().invert()).unwrap();
        assert!(proj_distance(&id, &MobiusMap::identity(2)) <= 1e-10);
        let z = vec![c(1.0, 2.0), c(-1.0, 0.5)];
        let back = a.as_mobius().invert().apply(&a.apply(&z).unwrap()).unwrap();
        assert!(back.iter().zip(&z).all(|(x, y)| (x - y).norm() <= 1e-10));
    }

    #[test]
    fn affine_maps_compose_to_affine() {
        let a = AffineMap::from_parts(&random_invertible(3, 8, DEFAULT_CONDITION_GUARD).unwrap(), &[c(1.0, 0.0); 3]).unwrap();
        let b = AffineMap::from_parts(&random_invertible(3, 9, DEFAULT_CONDITION_GUARD).unwrap(), &[c(0.0, 2.0); 3]).unwrap();
        assert!(a.compose(&b).is_ok());
    }

    #[test]
    fn canonicalization_is_idempotent() {
        for seed in 0..50 {
            let m = MobiusMap::new(random_invertible(3, seed, DEFAULT_CONDITION_GUARD).unwrap()).unwrap();
            assert_eq!(MobiusMap::new(m.matrix().clone()).unwrap(), m);
            assert!((det(m.matrix()).norm() - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn proj_distance_examples() {
        let m = MobiusMap::new(random_invertible(2, 21, DEFAULT_CONDITION_GUARD).unwrap()).unwrap();
        assert_eq!(proj_distance(&m, &m), 0.0);
        let scaled = MobiusMap::new(m.matrix().scale(c(2.0, 0.0))).unwrap();
        assert!(proj_distance(&m, &scaled) < 1e-14);
        let rotated = MobiusMap::new(m.matrix().scale(c(0.0, -3.0))).unwrap();
        assert!(proj_distance(&m, &rotated) < 1e-12);
    }

    #[test]
    fn proj_distance_identity_vs_inversion_matches_dense_scan() {
        let (id, inv) = (MobiusMap::identity(1), inversion());
        // brute-force oracle: dense phase grid
        let (x, y) = (id.matrix().as_slice(), inv.matrix().as_slice());
        let oracle = (0..100_000)
            .map(|k| {
                let w = C64::from_polar(1.0, TAU * k as f64 / 100_000.0);
                x.iter().zip(y).map(|(a, b)| (a - w * b).norm()).fold(0.0, f64::max)
            })
            .fold(f64::INFINITY, f64::min);
        let d = proj_distance(&id, &inv);
        assert!(d > 0.5);
        assert!(d <= oracle + 1e-12 && d >= oracle - 1e-6, "{d} vs {oracle}");
    }
}
