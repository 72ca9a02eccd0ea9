use crate::cauchy::ComplexCauchy;
use crate::error::{Error, Result};
use crate::linalg::C64;
use std::f64::consts::{FRAC_PI_2, TAU};

const MIN_MC_DRAWS: usize = 10_000;

/// Total probability mass by polar tensor quadrature, `p = 1` only.
///
/// The disc `|z − τ| ≤ r_max` is integrated with the radial substitution
/// `r = √Σ tan φ` (midpoint rule, `n_r` nodes) and the periodic trapezoid
/// rule in angle (`n_theta` nodes). The mass outside the disc is added
/// analytically: for the standardized radius `R = r_max/√Σ` it is
/// `1/(1 + R²)`.
pub fn quad_mass_p1(d: &ComplexCauchy, r_max: f64, n_r: usize, n_theta: usize) -> Result<f64> {
    quad_mass_p1_with(d, |z| d.log_density(z), r_max, n_r, n_theta)
}

/// [`quad_mass_p1`] with an arbitrary log-density in place of the
/// distribution's own.
pub fn quad_mass_p1_with(
    d: &ComplexCauchy,
    log_density: impl Fn(&[C64]) -> f64,
    r_max: f64,
    n_r: usize,
    n_theta: usize,
) -> Result<f64> {
    if d.p() != 1 {
        return Err(Error::DimensionMismatch { expected: 1, found: d.p() });
    }
    if !(r_max > 0.0) || n_r == 0 || n_theta == 0 {
        return Err(Error::InvalidArgument("quadrature needs r_max > 0 and nonempty grids".into()));
    }
    let tau = d.tau()[0];
    let s = d.sigma().matrix()[(0, 0)].re;
    let c = s.sqrt();
    let phi_max = (r_max / c).atan().min(FRAC_PI_2);
    let h_phi = phi_max / n_r as f64;
    let h_theta = TAU / n_theta as f64;
    let mut inner = 0.0;
    for i in 0..n_r {
        let phi = (i as f64 + 0.5) * h_phi;
        let r = c * phi.tan();
        let dr = c / (phi.cos() * phi.cos());
        let ring: f64 = (0..n_theta)
            .map(|k| {
                let z = tau + C64::from_polar(r, k as f64 * h_theta);
                log_density(&[z]).exp()
            })
            .sum();
        inner += ring * h_theta * r * dr;
    }
    let big_r = r_max / c;
    Ok(inner * h_phi + 1.0 / (1.0 + big_r * big_r))
}

/// Importance-sampling estimate with its jackknife standard error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MassEstimate {
    pub estimate: f64,
    pub standard_error: f64,
}

impl MassEstimate {
    /// `|estimate − target| ≤ k·SE`.
    pub fn within(&self, target: f64, k: f64) -> bool {
        (self.estimate - target).abs() <= k * self.standard_error
    }
}

/// Total mass of `d`'s density estimated by importance sampling from the
/// standard member of the same dimension.
pub fn mc_mass(d: &ComplexCauchy, n: usize, seed: u64) -> Result<MassEstimate> {
    mc_mass_with(|z| d.log_density(z), &ComplexCauchy::standard(d.p()), n, seed)
}

/// Mean of `exp(log_density − log q)` over `n` draws from `proposal`.
pub fn mc_mass_with(
    log_density: impl Fn(&[C64]) -> f64,
    proposal: &ComplexCauchy,
    n: usize,
    seed: u64,
) -> Result<MassEstimate> {
    if n < MIN_MC_DRAWS {
        return Err(Error::InvalidArgument(format!("mc_mass needs at least {MIN_MC_DRAWS} draws")));
    }
    let weights: Vec<f64> = proposal
        .sample(n, seed)?
        .iter()
        .map(|z| (log_density(z) - proposal.log_density(z)).exp())
        .collect();
    let nf = n as f64;
    let total: f64 = weights.iter().sum();
    let estimate = total / nf;
    // leave-one-out means and their spread
    let loo: Vec<f64> = weights.iter().map(|w| (total - w) / (nf - 1.0)).collect();
    let loo_mean = loo.iter().sum::<f64>() / nf;
    let var = (nf - 1.0) / nf * loo.iter().map(|t| (t - loo_mean).powi(2)).sum::<f64>();
    Ok(MassEstimate { estimate, standard_error: var.sqrt() })
}
