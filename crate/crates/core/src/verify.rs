//! Seeded verification suite.
//!
//! Each group turns one property of the family into a runnable check and
//! reports one or more [`CheckRow`]s. The same suite backs `ccauchy verify`
//! and the acceptance tests. Every tolerance is a named constant below.

use crate::cauchy::{interleaved_real, marginal_cdf, sample_sphere, stacked_real, standard_log_peak, ComplexCauchy};
use crate::error::Result;
use crate::linalg::{det, random_invertible, rq_decompose, CMat, C64, DEFAULT_CONDITION_GUARD};
use crate::mobius::{proj_distance, AffineMap, MobiusMap};
use crate::rng::{complex_normal, derive_seed, stream_rng};
use crate::stats::{
    binomial_band, energy_test, ks_test, mc_mass_with, quad_mass_p1_with, closure_experiment, GofReport,
    DEFAULT_PERMUTATIONS,
};
use rand::Rng;
use rayon::prelude::*;
use std::f64::consts::PI;
use std::fmt::Write as _;

pub const MASS_QUAD_TOL: f64 = 1e-3;
pub const MASS_MC_SE: f64 = 3.0;
pub const RQ_RECONSTRUCTION_TOL: f64 = 1e-10;
pub const RQ_UNITARITY_TOL: f64 = 1e-12;
pub const RQ_TRIANGULAR_TOL: f64 = 1e-12;
pub const EMBEDDING_TOL: f64 = 1e-10;
pub const DET_IDENTITY_TOL: f64 = 1e-10;
pub const GROUP_INVERSE_TOL: f64 = 1e-10;
pub const ACTION_TOL: f64 = 1e-9;
/// Points whose denominators fall below this are excluded from action checks.
pub const POLE_MARGIN: f64 = 1e-6;
pub const FUNCTORIALITY_TOL: f64 = 1e-8;
pub const AFFINE_LAW_TOL: f64 = 1e-10;
pub const FIXED_POINT_TOL: f64 = 1e-12;
/// Closure trials that must pass out of [`Scale::closure_trials`] (45 of 50).
pub const CLOSURE_PASS_FRACTION: f64 = 0.9;
/// Sphere-path runs that must pass (95 of 100).
pub const SPHERE_PASS_FRACTION: f64 = 0.95;

pub const GROUPS: [&str; 9] =
    ["normalization", "sampler", "sphere", "closure", "rq", "embedding", "group", "functoriality", "fixed_points"];

/// Trial counts and sample sizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Scale {
    pub quad_instances: usize,
    pub mc_draws: usize,
    pub ks_runs: usize,
    pub ks_draws: usize,
    pub sphere_runs: usize,
    pub sphere_draws: usize,
    pub sphere_permutations: usize,
    pub closure_trials: usize,
    pub closure_draws: usize,
    pub rq_matrices: usize,
    pub embedding_instances: usize,
    pub embedding_points: usize,
    pub group_maps: usize,
    pub functoriality_triples: usize,
}

impl Scale {
    /// The acceptance scale.
    pub const FULL: Scale = Scale {
        quad_instances: 10,
        mc_draws: 100_000,
        ks_runs: 100,
        ks_draws: 100_000,
        sphere_runs: 100,
        sphere_draws: 2000,
        sphere_permutations: DEFAULT_PERMUTATIONS,
        closure_trials: 50,
        closure_draws: 500,
        rq_matrices: 1000,
        embedding_instances: 10,
        embedding_points: 1000,
        group_maps: 1000,
        functoriality_triples: 100,
    };

    /// A fast smoke configuration.
    pub const QUICK: Scale = Scale {
        quad_instances: 3,
        mc_draws: 20_000,
        ks_runs: 20,
        ks_draws: 10_000,
        sphere_runs: 20,
        sphere_draws: 300,
        sphere_permutations: 199,
        closure_trials: 10,
        closure_draws: 500,
        rq_matrices: 100,
        embedding_instances: 3,
        embedding_points: 200,
        group_maps: 100,
        functoriality_triples: 20,
    };
}

#[derive(Clone, Debug)]
pub struct SuiteConfig {
    pub seed: u64,
    pub alpha: f64,
    pub scale: Scale,
    /// Multiplies every density fed to the normalization checks; anything
    /// other than 1 must make them fail.
    pub density_scale: f64,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self { seed: 20140208, alpha: 0.01, scale: Scale::FULL, density_scale: 1.0 }
    }
}

/// One summary line.
#[derive(Clone, Debug, PartialEq)]
pub struct CheckRow {
    pub test: String,
    pub group: &'static str,
    pub p: usize,
    pub seed: u64,
    /// Worst error, or a count for aggregated statistical checks.
    pub statistic: f64,
    pub p_value: Option<f64>,
    pub passed: bool,
}

#[derive(Clone, Debug, Default)]
pub struct SuiteOutcome {
    pub rows: Vec<CheckRow>,
    /// Every individual statistical test behind the rows.
    pub reports: Vec<GofReport>,
}

impl SuiteOutcome {
    pub fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.passed)
    }

    fn extend(&mut self, other: SuiteOutcome) {
        self.rows.extend(other.rows);
        self.reports.extend(other.reports);
    }

    /// `test,p,seed,statistic,p_value,passed` with a header row.
    pub fn summary_csv(&self) -> String {
        let mut out = String::from("test,p,seed,statistic,p_value,passed\n");
        for r in &self.rows {
            let pv = r.p_value.map(|v| format!("{v:e}")).unwrap_or_default();
            writeln!(out, "{},{},{},{:e},{},{}", r.test, r.p, r.seed, r.statistic, pv, r.passed).unwrap();
        }
        out
    }

    pub fn reports_jsonl(&self) -> String {
        self.reports.iter().map(|r| r.to_json_line() + "\n").collect()
    }
}

fn row(test: impl Into<String>, group: &'static str, p: usize, seed: u64, statistic: f64, passed: bool) -> CheckRow {
    CheckRow { test: test.into(), group, p, seed, statistic, p_value: None, passed }
}

/// Runs the named groups (all of [`GROUPS`] when `only` is empty).
pub fn run_suite(cfg: &SuiteConfig, only: &[&str]) -> Result<SuiteOutcome> {
    let mut out = SuiteOutcome::default();
    for name in GROUPS {
        if only.is_empty() || only.contains(&name) {
            out.extend(run_group(name, cfg)?);
        }
    }
    Ok(out)
}

pub fn run_group(name: &str, cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    match name {
        "normalization" => normalization(cfg),
        "sampler" => sampler(cfg),
        "sphere" => sphere(cfg),
        "closure" => closure(cfg),
        "rq" => rq(cfg),
        "embedding" => embedding(cfg),
        "group" => group_laws(cfg),
        "functoriality" => functoriality(cfg),
        "fixed_points" => fixed_points(cfg),
        other => Err(crate::Error::InvalidArgument(format!("unknown check group '{other}'"))),
    }
}

fn group_seed(cfg: &SuiteConfig, group: u64) -> u64 {
    derive_seed(cfg.seed, group)
}

/// Random member: complex-normal location scaled by 2, Ginibre scale factor.
pub fn random_distribution(p: usize, seed: u64) -> ComplexCauchy {
    let mut rng = stream_rng(seed, 1);
    let tau = (0..p).map(|_| complex_normal(&mut rng) * 2.0).collect();
    let l = random_invertible(p, seed, DEFAULT_CONDITION_GUARD).expect("guarded draw");
    ComplexCauchy::from_affine_factor(tau, &l).expect("Ginibre factor is invertible")
}

pub fn random_map(p: usize, seed: u64) -> MobiusMap {
    MobiusMap::new(random_invertible(p + 1, seed, DEFAULT_CONDITION_GUARD).expect("guarded draw"))
        .expect("guarded draw is invertible")
}

fn random_point<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<C64> {
    (0..p).map(|_| complex_normal(rng)).collect()
}

fn unit_vector<R: Rng + ?Sized>(p: usize, rng: &mut R) -> Vec<C64> {
    let v = random_point(p, rng);
    let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / n).collect()
}

fn normalization(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let seed = group_seed(cfg, 1);
    let ln_scale = cfg.density_scale.ln();
    let mut out = SuiteOutcome::default();

    let mut instances = vec![ComplexCauchy::standard(1)];
    let mut rng = stream_rng(seed, 0);
    for _ in 0..cfg.scale.quad_instances {
        let tau = complex_normal(&mut rng) * 3.0;
        let s = (rng.random::<f64>() * 4.0 - 2.0).exp();
        instances.push(ComplexCauchy::new(vec![tau], CMat::from_real(1, 1, &[s]).expect("scalar"))?);
    }
    let masses: Vec<f64> = instances
        .par_iter()
        .map(|d| quad_mass_p1_with(d, |z| d.log_density(z) + ln_scale, 200.0, 2000, 64))
        .collect::<Result<_>>()?;
    for (i, m) in masses.iter().enumerate() {
        let name = if i == 0 { "quad_mass_standard".to_string() } else { format!("quad_mass_random_{i}") };
        out.rows.push(row(name, "normalization", 1, seed, (m - 1.0).abs(), (m - 1.0).abs() <= MASS_QUAD_TOL));
    }

    for p in [2usize, 3] {
        let s = derive_seed(seed, p as u64);
        let d = random_distribution(p, s);
        let est = mc_mass_with(|z| d.log_density(z) + ln_scale, &ComplexCauchy::standard(p), cfg.scale.mc_draws, s)?;
        let z = (est.estimate - 1.0).abs() / est.standard_error;
        out.rows.push(row("mc_mass", "normalization", p, s, z, est.within(1.0, MASS_MC_SE)));
    }
    Ok(out)
}

fn sampler(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let base = group_seed(cfg, 2);
    let runs = cfg.scale.ks_runs;
    let (_, max_rejections) = binomial_band(runs as u64, cfg.alpha, 0.99);
    let mut out = SuiteOutcome::default();
    for p in 1..=3usize {
        let reports: Vec<GofReport> = (0..runs)
            .into_par_iter()
            .map(|r| {
                let s = derive_seed(base, (p * 1_000_000 + r) as u64);
                let d = random_distribution(p, s);
                let u = unit_vector(p, &mut stream_rng(s, 2));
                let (loc, scale) = d.projection_params(&u)?;
                let xs: Vec<f64> = d
                    .sample(cfg.scale.ks_draws, s)?
                    .iter()
                    .map(|z| (u.iter().zip(z).map(|(a, b)| a.conj() * b).sum::<C64>().re - loc) / scale)
                    .collect();
                let mut rep = ks_test(&xs, marginal_cdf, cfg.alpha)?;
                rep.test_name = format!("ks_projection_p{p}");
                rep.seed = s;
                Ok(rep)
            })
            .collect::<Result<_>>()?;
        let rejections = reports.iter().filter(|r| !r.passed).count();
        out.rows.push(row("ks_rejections", "sampler", p, base, rejections as f64, rejections as u64 <= max_rejections));
        out.reports.extend(reports);
    }
    Ok(out)
}

fn sphere(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let base = group_seed(cfg, 3);
    let runs = cfg.scale.sphere_runs;
    let n = cfg.scale.sphere_draws;
    let reports: Vec<GofReport> = (0..runs)
        .map(|r| {
            let p = 1 + r % 3;
            let s = derive_seed(base, r as u64);
            let chart: Vec<Vec<f64>> = sample_sphere(p, n, derive_seed(s, 1))
                .iter()
                .map(|y| y.affine_chart().map(|z| interleaved_real(&z)))
                .collect::<Result<_>>()?;
            let direct: Vec<Vec<f64>> =
                ComplexCauchy::standard(p).sample(n, derive_seed(s, 2))?.iter().map(|z| interleaved_real(z)).collect();
            let mut rep = energy_test(&chart, &direct, cfg.scale.sphere_permutations, derive_seed(s, 3), cfg.alpha)?;
            rep.test_name = format!("sphere_path_p{p}");
            Ok(rep)
        })
        .collect::<Result<_>>()?;
    let passes = reports.iter().filter(|r| r.passed).count();
    let need = (SPHERE_PASS_FRACTION * runs as f64).ceil() as usize;
    let mut out = SuiteOutcome::default();
    out.rows.push(row("sphere_path_passes", "sphere", 0, base, passes as f64, passes >= need));
    out.reports = reports;
    Ok(out)
}

fn closure(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let base = group_seed(cfg, 4);
    let trials = cfg.scale.closure_trials;
    let reports: Vec<GofReport> = (0..trials)
        .map(|t| {
            let p = 1 + t % 3;
            let s = derive_seed(base, t as u64);
            let d = random_distribution(p, derive_seed(s, 1));
            let g = random_map(p, derive_seed(s, 2));
            let mut rep = closure_experiment(&d, &g, cfg.scale.closure_draws, s, cfg.alpha)?;
            rep.test_name = format!("closure_p{p}");
            Ok(rep)
        })
        .collect::<Result<_>>()?;
    let passes = reports.iter().filter(|r| r.passed).count();
    let need = (CLOSURE_PASS_FRACTION * trials as f64).ceil() as usize;

    let mut worst_affine: f64 = 0.0;
    for t in 0..trials {
        let p = 1 + t % 3;
        let s = derive_seed(base, 10_000 + t as u64);
        let d = random_distribution(p, derive_seed(s, 1));
        let lin = random_invertible(p, derive_seed(s, 2), DEFAULT_CONDITION_GUARD)?;
        let off = random_point(p, &mut stream_rng(s, 3));
        let a = AffineMap::from_parts(&lin, &off)?;
        let via_rq = d.pushforward(a.as_mobius())?;
        // closed form from the raw parts, independent of the map's canonical scaling
        let tau: Vec<C64> = lin.matvec(d.tau()).iter().zip(&off).map(|(x, y)| x + y).collect();
        let closed = ComplexCauchy::from_affine_factor(tau, &(&lin * d.chol()))?;
        worst_affine = worst_affine.max(closed.relative_param_gap(&via_rq));
    }

    let mut out = SuiteOutcome::default();
    out.rows.push(row("closure_passes", "closure", 0, base, passes as f64, passes >= need));
    out.rows.push(row("affine_rq_vs_closed_form", "closure", 0, base, worst_affine, worst_affine <= AFFINE_LAW_TOL));
    out.reports = reports;
    Ok(out)
}

fn rq(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let base = group_seed(cfg, 5);
    let (mut recon, mut unit, mut tri) = (0.0f64, 0.0f64, 0.0f64);
    let mut canonical = true;
    let mut repeatable = true;
    for i in 0..cfg.scale.rq_matrices {
        let n = 1 + i % 6;
        let m = random_invertible(n, derive_seed(base, i as u64), DEFAULT_CONDITION_GUARD)?;
        let f = rq_decompose(&m)?;
        let scale = m.max_norm();
        recon = recon.max(f.product().max_abs_diff(&m) / scale);
        unit = unit.max(f.q.unitarity_residual());
        for r in 0..n {
            for c in 0..r {
                tri = tri.max(f.r[(r, c)].norm() / scale);
            }
            let d = f.r[(r, r)];
            canonical &= d.im == 0.0 && d.re > 0.0;
        }
        repeatable &= rq_decompose(&m)? == f;
    }
    let mut out = SuiteOutcome::default();
    out.rows.push(row("rq_reconstruction", "rq", 0, base, recon, recon <= RQ_RECONSTRUCTION_TOL));
    out.rows.push(row("rq_unitarity", "rq", 0, base, unit, unit <= RQ_UNITARITY_TOL));
    out.rows.push(row("rq_triangularity", "rq", 0, base, tri, tri <= RQ_TRIANGULAR_TOL));
    out.rows.push(row("rq_canonical_diagonal", "rq", 0, base, 0.0, canonical));
    out.rows.push(row("rq_bitwise_repeatable", "rq", 0, base, 0.0, repeatable));
    Ok(out)
}

fn embedding(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let base = group_seed(cfg, 6);
    let mut out = SuiteOutcome::default();
    for p in 1..=3usize {
        let (mut worst_pt, mut worst_det) = (0.0f64, 0.0f64);
        for k in 0..cfg.scale.embedding_instances {
            let s = derive_seed(base, (p * 1000 + k) as u64);
            let d = random_distribution(p, s);
            let rt = d.real_embedding();
            // half the points from the law itself, half from a wide Gaussian cloud
            let mut pts = d.sample(cfg.scale.embedding_points / 2, s)?;
            let mut rng = stream_rng(s, 7);
            while pts.len() < cfg.scale.embedding_points {
                pts.push(random_point(p, &mut rng).into_iter().map(|z| z * 5.0).collect());
            }
            for z in &pts {
                worst_pt = worst_pt.max((d.log_density(z) - rt.log_density(&stacked_real(z))).abs());
            }
            let det_sigma = det(d.sigma().matrix()).re;
            let w = CMat::from_real(2 * p, 2 * p, rt.w())?;
            let det_w = det(&w).re;
            worst_det = worst_det.max((det_w - det_sigma * det_sigma).abs() / (det_sigma * det_sigma));
        }
        out.rows.push(row("embedding_pointwise", "embedding", p, base, worst_pt, worst_pt <= EMBEDDING_TOL));
        out.rows.push(row("embedding_det_identity", "embedding", p, base, worst_det, worst_det <= DET_IDENTITY_TOL));
    }
    Ok(out)
}

fn max_rel_diff(a: &[C64], b: &[C64]) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
    let scale = b.iter().map(|z| z.norm()).fold(0.0, f64::max);
    diff / scale.max(f64::MIN_POSITIVE)
}

/// `|cz + d|` of a map at a point.
fn denominator(m: &MobiusMap, z: &[C64]) -> f64 {
    (m.c().iter().zip(z).map(|(c, x)| c * x).sum::<C64>() + m.d()).norm()
}

fn group_laws(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let base = group_seed(cfg, 7);
    let mut out = SuiteOutcome::default();
    for p in 1..=3usize {
        let (mut worst_inv, mut worst_act) = (0.0f64, 0.0f64);
        let mut rng = stream_rng(base, p as u64);
        let id = MobiusMap::identity(p);
        for k in 0..cfg.scale.group_maps {
            let s = derive_seed(base, (p * 1_000_000 + k) as u64);
            let m1 = random_map(p, s);
            let m2 = random_map(p, derive_seed(s, 1));
            worst_inv = worst_inv.max(proj_distance(&m1.compose(&m1.invert())?, &id));

            let comp = m1.compose(&m2)?;
            let z = random_point(p, &mut rng);
            if denominator(&m2, &z) <= POLE_MARGIN || denominator(&comp, &z) <= POLE_MARGIN {
                continue;
            }
            let inner = m2.apply(&z)?;
            if denominator(&m1, &inner) <= POLE_MARGIN {
                continue;
            }
            worst_act = worst_act.max(max_rel_diff(&comp.apply(&z)?, &m1.apply(&inner)?));
        }
        out.rows.push(row("compose_inverse_identity", "group", p, base, worst_inv, worst_inv <= GROUP_INVERSE_TOL));
        out.rows.push(row("action_compatibility", "group", p, base, worst_act, worst_act <= ACTION_TOL));
    }
    Ok(out)
}

fn functoriality(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let base = group_seed(cfg, 8);
    let mut worst: f64 = 0.0;
    for k in 0..cfg.scale.functoriality_triples {
        let p = 1 + k % 3;
        let s = derive_seed(base, k as u64);
        let d = random_distribution(p, s);
        let g = random_map(p, derive_seed(s, 1));
        let h = random_map(p, derive_seed(s, 2));
        let chained = d.pushforward(&g)?.pushforward(&h)?;
        let direct = d.pushforward(&h.compose(&g)?)?;
        worst = worst.max(direct.relative_param_gap(&chained));
    }
    let mut out = SuiteOutcome::default();
    out.rows.push(row("pushforward_functoriality", "functoriality", 0, base, worst, worst <= FUNCTORIALITY_TOL));
    Ok(out)
}

fn fixed_points(cfg: &SuiteConfig) -> Result<SuiteOutcome> {
    let seed = group_seed(cfg, 9);
    let mut out = SuiteOutcome::default();

    let inversion = MobiusMap::new(CMat::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])?)?;
    let img = ComplexCauchy::standard(1).pushforward(&inversion)?;
    let err = img.tau()[0].norm().max((img.sigma().matrix()[(0, 0)] - C64::new(1.0, 0.0)).norm());
    out.rows.push(row("inversion_invariance", "fixed_points", 1, seed, err, err <= FIXED_POINT_TOL));

    let mut worst_id: f64 = 0.0;
    for p in 1..=3usize {
        let d = random_distribution(p, derive_seed(seed, p as u64));
        let e = d.pushforward(&MobiusMap::identity(p))?;
        worst_id = worst_id.max(d.relative_param_gap(&e));
    }
    out.rows.push(row("identity_noop", "fixed_points", 0, seed, worst_id, worst_id <= FIXED_POINT_TOL));

    let scale_ln = cfg.density_scale.ln();
    let e1 = (ComplexCauchy::standard(1).log_density(&[C64::new(0.0, 0.0)]) + scale_ln + PI.ln()).abs();
    out.rows.push(row("density_peak", "fixed_points", 1, seed, e1, e1 <= FIXED_POINT_TOL));
    let e2 = (ComplexCauchy::standard(2).log_density(&[C64::new(0.0, 0.0); 2]) + scale_ln
        - (2f64.ln() - 2.0 * PI.ln()))
    .abs();
    out.rows.push(row("density_peak", "fixed_points", 2, seed, e2, e2 <= FIXED_POINT_TOL));
    debug_assert_eq!(standard_log_peak(1), -PI.ln());
    Ok(out)
}
