//! The Cauchy family on `ℂᵖ`.
//!
//! A member is parameterized by a location `τ ∈ ℂᵖ` and a Hermitian
//! positive-definite scatter `Σ`, and has density
//!
//! ```text
//! π⁻ᵖ Γ(p+1) / det Σ · (1 + (z−τ)* Σ⁻¹ (z−τ))^-(p+1)
//! ```
//!
//! with respect to Lebesgue measure on `ℂᵖ ≅ ℝ²ᵖ`. It is the law of
//! `L Z̃ + τ` where `Σ = L L*` and `Z̃` follows the standard member
//! (`τ = 0`, `Σ = I`).
//!
//! The standard member is the law of `(W₁/W_{p+1}, …, W_p/W_{p+1})` for a
//! standard complex Gaussian `W ∈ ℂᵖ⁺¹`; equivalently the affine chart of a
//! uniform point on the unit sphere of `ℂᵖ⁺¹`. Because unitary maps preserve
//! that sphere, any projective map `g` sends the member with affine
//! parameter `α` to the member with parameter `r`, where `gα = r q` is an
//! RQ factorization.

use crate::error::{Error, Result};
use crate::linalg::{cholesky_real, rq_decompose, CMat, HermitianPd, C64};
use crate::mobius::{AffineMap, MobiusMap};
use crate::rng::{complex_normal, stream_rng, SAMPLE_CHUNK};
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::PI;

/// Tolerance on `‖y‖ = 1` for sphere points and projection directions.
pub const UNIT_NORM_TOL: f64 = 1e-12;

/// `ln Γ(p+1) = ln p!`.
pub fn ln_factorial(p: usize) -> f64 {
    (2..=p).map(|k| (k as f64).ln()).sum()
}

/// `−p ln π + ln Γ(p+1)`, the log density of the standard member at 0.
pub fn standard_log_peak(p: usize) -> f64 {
    -(p as f64) * PI.ln() + ln_factorial(p)
}

/// CDF of `Re Z₁` for the standard member (any `p`):
/// `F(t) = 1/2 + t / (2√(1+t²))`.
pub fn marginal_cdf(t: f64) -> f64 {
    if t.is_infinite() {
        return if t > 0.0 { 1.0 } else { 0.0 };
    }
    let r = t.hypot(1.0);
    if t < 0.0 {
        0.5 / (r * (r - t))
    } else {
        0.5 + 0.5 * t / r
    }
}

/// Inverse of [`marginal_cdf`].
pub fn marginal_quantile(u: f64) -> f64 {
    let s = 2.0 * u - 1.0;
    s / (1.0 - s * s).sqrt()
}

#[derive(Clone, Debug, PartialEq)]
pub struct ComplexCauchy {
    tau: Vec<C64>,
    sigma: HermitianPd,
}

impl ComplexCauchy {
    /// The standard member `γ`: `τ = 0`, `Σ = I`.
    pub fn standard(p: usize) -> Self {
        assert!(p >= 1, "dimension must be positive");
        Self { tau: vec![C64::new(0.0, 0.0); p], sigma: HermitianPd::identity(p) }
    }

    /// Validates `sigma` as Hermitian positive definite.
    pub fn new(tau: Vec<C64>, sigma: CMat) -> Result<Self> {
        Self::from_parts(tau, HermitianPd::new(sigma)?)
    }

    pub fn from_parts(tau: Vec<C64>, sigma: HermitianPd) -> Result<Self> {
        if tau.len() != sigma.dim() {
            return Err(Error::DimensionMismatch { expected: sigma.dim(), found: tau.len() });
        }
        if let Some(i) = tau.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { tau, sigma })
    }

    /// The law of `linear·Z̃ + tau` with `Z̃` standard.
    pub fn from_affine_factor(tau: Vec<C64>, linear: &CMat) -> Result<Self> {
        Self::from_parts(tau, HermitianPd::from_gram(linear)?)
    }

    #[inline]
    pub fn p(&self) -> usize {
        self.tau.len()
    }

    pub fn tau(&self) -> &[C64] {
        &self.tau
    }

    pub fn sigma(&self) -> &HermitianPd {
        &self.sigma
    }

    /// Cached lower-triangular `L`, `L L* = Σ`.
    pub fn chol(&self) -> &CMat {
        self.sigma.factor()
    }

    /// Log density at the mode `z = τ`: `−p ln π + ln Γ(p+1) − ln det Σ`.
    pub fn log_peak(&self) -> f64 {
        standard_log_peak(self.p()) - self.sigma.ln_det()
    }

    /// `(z−τ)* Σ⁻¹ (z−τ)`.
    pub fn mahalanobis_sq(&self, z: &[C64]) -> f64 {
        assert_eq!(z.len(), self.p(), "point dimension");
        let diff: Vec<C64> = z.iter().zip(&self.tau).map(|(a, b)| a - b).collect();
        self.sigma.quad_form_inv(&diff)
    }

    /// Log density with respect to Lebesgue measure on `ℝ²ᵖ`.
    ///
    /// Panics if `z.len() != p`.
    pub fn log_density(&self, z: &[C64]) -> f64 {
        let q = self.mahalanobis_sq(z);
        self.log_peak() - (self.p() as f64 + 1.0) * q.ln_1p()
    }

    /// One draw of the standard member: ratio of complex Gaussians.
    fn standard_draw<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Result<Vec<C64>> {
        let mut w = vec![C64::new(0.0, 0.0); p + 1];
        for _attempt in 0..2 {
            for x in w.iter_mut() {
                *x = complex_normal(rng);
            }
            let last = w[p];
            if last.norm() > f64::MIN_POSITIVE {
                return Ok(w[..p].iter().map(|x| x / last).collect());
            }
        }
        Err(Error::DegenerateDraw)
    }

    /// Draws `len` points of chunk `chunk` of the run keyed by `seed`.
    ///
    /// [`sample`](Self::sample) with `n` draws is the concatenation of chunks
    /// `0, 1, …` of length [`SAMPLE_CHUNK`] (the last one truncated), so any
    /// partition of the chunks can be generated independently.
    pub fn sample_chunk(&self, seed: u64, chunk: usize, len: usize) -> Result<Vec<Vec<C64>>> {
        let mut rng = stream_rng(seed, chunk as u64);
        let l = self.chol();
        (0..len)
            .map(|_| {
                let zt = Self::standard_draw(self.p(), &mut rng)?;
                let mut z = l.matvec(&zt);
                for (zi, ti) in z.iter_mut().zip(&self.tau) {
                    *zi += ti;
                }
                Ok(z)
            })
            .collect()
    }

    /// `n` iid draws, deterministic in `seed`.
    pub fn sample(&self, n: usize, seed: u64) -> Result<Vec<Vec<C64>>> {
        let chunks = n.div_ceil(SAMPLE_CHUNK);
        let parts: Vec<Result<Vec<Vec<C64>>>> = (0..chunks)
            .into_par_iter()
            .map(|k| self.sample_chunk(seed, k, SAMPLE_CHUNK.min(n - k * SAMPLE_CHUNK)))
            .collect();
        let mut out = Vec::with_capacity(n);
        for part in parts {
            out.extend(part?);
        }
        Ok(out)
    }

    /// Image law under `m`, computed through `g α = r q`.
    pub fn pushforward(&self, m: &MobiusMap) -> Result<Self> {
        let p = self.p();
        if m.p() != p {
            return Err(Error::DimensionMismatch { expected: p, found: m.p() });
        }
        let l = self.chol();
        let alpha = CMat::from_fn(p + 1, p + 1, |i, j| match (i < p, j < p) {
            (true, true) => l[(i, j)],
            (true, false) => self.tau[i],
            (false, true) => C64::new(0.0, 0.0),
            (false, false) => C64::new(1.0, 0.0),
        });
        let rq = rq_decompose(&(m.matrix() * &alpha))?;
        let delta = rq.r[(p, p)];
        assert!(delta.re > 0.0, "triangular factor of an invertible matrix has nonzero pivots");
        let inv = delta.inv();
        let tau = (0..p).map(|i| rq.r[(i, p)] * inv).collect();
        let linear = rq.r.block(0, p, 0, p).scale(inv);
        Self::from_affine_factor(tau, &linear)
    }

    /// Closed-form image under an affine map `z ↦ Gz + h`: `(Gτ + h, GΣG*)`.
    pub fn pushforward_affine(&self, a: &AffineMap) -> Result<Self> {
        if a.p() != self.p() {
            return Err(Error::DimensionMismatch { expected: self.p(), found: a.p() });
        }
        let g = a.linear_part();
        let mut tau = g.matvec(&self.tau);
        for (t, h) in tau.iter_mut().zip(a.offset()) {
            *t += h;
        }
        Self::from_affine_factor(tau, &(&g * self.chol()))
    }

    /// Largest parameter discrepancy, relative: location differences are
    /// measured against `max(‖τ‖, √‖Σ‖)` of `self`, scatter differences
    /// against `‖Σ‖` (all max-norms).
    pub fn relative_param_gap(&self, other: &Self) -> f64 {
        assert_eq!(self.p(), other.p());
        let s_norm = self.sigma.matrix().max_norm();
        let t_norm = self.tau.iter().map(|z| z.norm()).fold(0.0, f64::max).max(s_norm.sqrt());
        let dt = self.tau.iter().zip(&other.tau).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        let ds = self.sigma.matrix().max_abs_diff(other.sigma.matrix());
        (dt / t_norm).max(ds / s_norm)
    }

    /// Equivalent real `2p`-dimensional t-distribution with 2 degrees of
    /// freedom over `x = (Re z, Im z)`.
    pub fn real_embedding(&self) -> RealT2 {
        let p = self.p();
        let eta = self.tau.iter().map(|z| z.re).chain(self.tau.iter().map(|z| z.im)).collect();
        let w = self.sigma.matrix().realify();
        let w_chol = cholesky_real(&w, 2 * p).expect("realification of a positive-definite matrix");
        RealT2 { p, eta, w, w_chol }
    }

    /// Location and scale of `Re(u* Z)`: `Re(u* τ)` and `‖L* u‖`.
    pub fn projection_params(&self, u: &[C64]) -> Result<(f64, f64)> {
        if u.len() != self.p() {
            return Err(Error::DimensionMismatch { expected: self.p(), found: u.len() });
        }
        let norm = u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidArgument(format!("direction must have unit norm, got {norm}")));
        }
        let loc = u.iter().zip(&self.tau).map(|(a, t)| a.conj() * t).sum::<C64>().re;
        let lt_u = self.chol().adjoint().matvec(u);
        let scale = lt_u.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        Ok((loc, scale))
    }
}

/// A point on the unit sphere of `ℂᵖ⁺¹`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpherePoint {
    y: Vec<C64>,
}

impl SpherePoint {
    pub fn new(y: Vec<C64>) -> Result<Self> {
        if y.len() < 2 {
            return Err(Error::InvalidShape("sphere point needs at least 2 coordinates".into()));
        }
        let norm = y.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > UNIT_NORM_TOL {
            return Err(Error::InvalidArgument(format!("sphere point norm {norm}")));
        }
        Ok(Self { y })
    }

    pub fn coords(&self) -> &[C64] {
        &self.y
    }

    /// `Y_{p+1}⁻¹ (Y₁, …, Y_p)`.
    pub fn affine_chart(&self) -> Result<Vec<C64>> {
        let (head, last) = self.y.split_at(self.y.len() - 1);
        let last = last[0];
        if last.norm() <= f64::MIN_POSITIVE {
            return Err(Error::PoleHit);
        }
        Ok(head.iter().map(|x| x / last).collect())
    }
}

/// `n` uniform points on the unit sphere of `ℂᵖ⁺¹` (normalized complex
/// Gaussians), with the same chunked stream layout as
/// [`ComplexCauchy::sample`].
pub fn sample_sphere(p: usize, n: usize, seed: u64) -> Vec<SpherePoint> {
    assert!(p >= 1);
    let chunks = n.div_ceil(SAMPLE_CHUNK);
    let parts: Vec<Vec<SpherePoint>> = (0..chunks)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let len = SAMPLE_CHUNK.min(n - k * SAMPLE_CHUNK);
            (0..len)
                .map(|_| loop {
                    let w: Vec<C64> = (0..=p).map(|_| complex_normal(&mut rng)).collect();
                    let norm = w.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
                    if norm > 0.0 {
                        break SpherePoint { y: w.into_iter().map(|z| z / norm).collect() };
                    }
                })
                .collect()
        })
        .collect();
    parts.into_iter().flatten().collect()
}

/// Real elliptical t-distribution with 2 degrees of freedom on `ℝ²ᵖ`:
/// density `π⁻ᵖ Γ(p+1) (det W)^-½ (1 + (x−η)ᵀ W⁻¹ (x−η))^-(p+1)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealT2 {
    p: usize,
    eta: Vec<f64>,
    w: Vec<f64>,
    w_chol: Vec<f64>,
}

impl RealT2 {
    /// Real dimension `2p`.
    pub fn dim(&self) -> usize {
        2 * self.p
    }

    pub fn dof(&self) -> f64 {
        2.0
    }

    pub fn eta(&self) -> &[f64] {
        &self.eta
    }

    /// Row-major `2p × 2p`.
    pub fn w(&self) -> &[f64] {
        &self.w
    }

    pub fn ln_det_w(&self) -> f64 {
        let n = self.dim();
        2.0 * (0..n).map(|i| self.w_chol[i * n + i].ln()).sum::<f64>()
    }

    pub fn log_density(&self, x: &[f64]) -> f64 {
        let n = self.dim();
        assert_eq!(x.len(), n, "point dimension");
        let mut y = vec![0.0; n];
        for i in 0..n {
            let dot: f64 = (0..i).map(|k| self.w_chol[i * n + k] * y[k]).sum();
            y[i] = (x[i] - self.eta[i] - dot) / self.w_chol[i * n + i];
        }
        let q: f64 = y.iter().map(|v| v * v).sum();
        standard_log_peak(self.p) - 0.5 * self.ln_det_w() - (self.p as f64 + 1.0) * q.ln_1p()
    }
}

/// `(Re z₁, Im z₁, …, Re z_p, Im z_p)`, the CSV column order.
pub fn interleaved_real(z: &[C64]) -> Vec<f64> {
    z.iter().flat_map(|c| [c.re, c.im]).collect()
}

/// `(Re z₁, …, Re z_p, Im z₁, …, Im z_p)`, the coordinate order of
/// [`RealT2`].
pub fn stacked_real(z: &[C64]) -> Vec<f64> {
    z.iter().map(|c| c.re).chain(z.iter().map(|c| c.im)).collect()
}
