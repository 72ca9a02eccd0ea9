use super::{CMat, HermitianPd, C64};
use crate::error::{Error, Result};

/// Relative pivot floor for Cholesky: pivots must exceed this times the
/// largest diagonal entry.
const CHOLESKY_PIVOT_REL: f64 = 1e-13;

/// Relative floor below which a triangular pivot counts as zero.
const SINGULAR_PIVOT_REL: f64 = 1e-14;

const ZERO: C64 = C64::new(0.0, 0.0);

/// Lower-triangular Cholesky factor of a validated scatter matrix.
pub fn cholesky(sigma: &HermitianPd) -> CMat {
    sigma.factor().clone()
}

/// Lower-triangular `L` with real positive diagonal and `L L* = m`.
///
/// Only the lower triangle of `m` is read.
pub fn cholesky_factor(m: &CMat) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::InvalidShape("cholesky needs a square matrix".into()));
    }
    let n = m.rows();
    let max_diag = (0..n).map(|i| m[(i, i)].re).fold(f64::NEG_INFINITY, f64::max);
    if max_diag <= 0.0 {
        return Err(Error::NotPositiveDefinite { index: 0, pivot: max_diag });
    }
    let floor = CHOLESKY_PIVOT_REL * max_diag;
    let mut l = CMat::zeros(n, n);
    for j in 0..n {
        let s = m[(j, j)].re - l.row(j)[..j].iter().map(|z| z.norm_sqr()).sum::<f64>();
        if !(s > floor) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: s });
        }
        let ljj = s.sqrt();
        l[(j, j)] = C64::new(ljj, 0.0);
        for i in j + 1..n {
            let dot: C64 = l.row(i)[..j].iter().zip(&l.row(j)[..j]).map(|(a, b)| a * b.conj()).sum();
            l[(i, j)] = (m[(i, j)] - dot) / ljj;
        }
    }
    Ok(l)
}

/// Real symmetric Cholesky on a row-major `n × n` slice; lower factor.
pub fn cholesky_real(a: &[f64], n: usize) -> Result<Vec<f64>> {
    if a.len() != n * n || n == 0 {
        return Err(Error::InvalidShape("cholesky_real".into()));
    }
    let max_diag = (0..n).map(|i| a[i * n + i]).fold(f64::NEG_INFINITY, f64::max);
    if max_diag <= 0.0 {
        return Err(Error::NotPositiveDefinite { index: 0, pivot: max_diag });
    }
    let floor = CHOLESKY_PIVOT_REL * max_diag;
    let mut l = vec![0.0; n * n];
    for j in 0..n {
        let s = a[j * n + j] - (0..j).map(|k| l[j * n + k] * l[j * n + k]).sum::<f64>();
        if !(s > floor) {
            return Err(Error::NotPositiveDefinite { index: j, pivot: s });
        }
        let ljj = s.sqrt();
        l[j * n + j] = ljj;
        for i in j + 1..n {
            let dot: f64 = (0..j).map(|k| l[i * n + k] * l[j * n + k]).sum();
            l[i * n + j] = (a[i * n + j] - dot) / ljj;
        }
    }
    Ok(l)
}

/// Solves `L y = v` for lower-triangular `L`.
pub(crate) fn forward_substitute(l: &CMat, v: &[C64]) -> Vec<C64> {
    let n = l.rows();
    let mut y = vec![ZERO; n];
    for i in 0..n {
        let dot: C64 = l.row(i)[..i].iter().zip(&y[..i]).map(|(a, b)| a * b).sum();
        y[i] = (v[i] - dot) / l[(i, i)];
    }
    y
}

/// Solves `L* w = y` for lower-triangular `L`.
fn back_substitute_adjoint(l: &CMat, y: &[C64]) -> Vec<C64> {
    let n = l.rows();
    let mut w = vec![ZERO; n];
    for i in (0..n).rev() {
        let dot: C64 = (i + 1..n).map(|k| l[(k, i)].conj() * w[k]).sum();
        w[i] = (y[i] - dot) / l[(i, i)].conj();
    }
    w
}

/// `Σ⁻¹ v` through the Cholesky factor.
pub fn solve_hpd(sigma: &HermitianPd, v: &[C64]) -> Result<Vec<C64>> {
    if v.len() != sigma.dim() {
        return Err(Error::DimensionMismatch { expected: sigma.dim(), found: v.len() });
    }
    let y = forward_substitute(sigma.factor(), v);
    Ok(back_substitute_adjoint(sigma.factor(), &y))
}

/// LU with partial pivoting, in place. Returns the permutation parity and
/// the row permutation.
fn lu_in_place(a: &mut CMat) -> (f64, Vec<usize>) {
    let n = a.rows();
    let mut sign = 1.0;
    let mut perm: Vec<usize> = (0..n).collect();
    for k in 0..n {
        let piv = (k..n)
            .max_by(|&i, &j| a[(i, k)].norm().total_cmp(&a[(j, k)].norm()))
            .unwrap_or(k);
        if a[(piv, k)] == ZERO {
            continue;
        }
        if piv != k {
            for j in 0..n {
                let t = a[(k, j)];
                a[(k, j)] = a[(piv, j)];
                a[(piv, j)] = t;
            }
            perm.swap(k, piv);
            sign = -sign;
        }
        let pivot = a[(k, k)];
        for i in k + 1..n {
            let f = a[(i, k)] / pivot;
            if f == ZERO {
                continue;
            }
            a[(i, k)] = f;
            for j in k + 1..n {
                let t = a[(k, j)];
                a[(i, j)] -= f * t;
            }
        }
    }
    (sign, perm)
}

/// Determinant. Triangular inputs return the exact diagonal product; others
/// go through partially pivoted LU. Singular input yields zero.
pub fn det(m: &CMat) -> C64 {
    assert!(m.is_square(), "det of non-square matrix");
    let n = m.rows();
    if m.is_upper_triangular(0.0) || m.is_lower_triangular(0.0) {
        return (0..n).map(|i| m[(i, i)]).product();
    }
    let mut a = m.clone();
    let (sign, _) = lu_in_place(&mut a);
    (0..n).map(|i| a[(i, i)]).product::<C64>() * sign
}

/// Matrix inverse via pivoted LU; `SingularInput` when a pivot falls below
/// `1e-14 × max|m|`.
pub fn inverse(m: &CMat) -> Result<CMat> {
    if !m.is_square() {
        return Err(Error::InvalidShape("inverse of non-square matrix".into()));
    }
    let n = m.rows();
    let floor = SINGULAR_PIVOT_REL * m.max_norm();
    let mut a = m.clone();
    let (_, perm) = lu_in_place(&mut a);
    if (0..n).any(|i| !(a[(i, i)].norm() > floor)) {
        return Err(Error::SingularInput);
    }
    let mut inv = CMat::zeros(n, n);
    for col in 0..n {
        // P m = L U; solve L U x = P e_col
        let mut y: Vec<C64> = perm.iter().map(|&p| if p == col { C64::new(1.0, 0.0) } else { ZERO }).collect();
        for i in 0..n {
            let dot: C64 = (0..i).map(|k| a[(i, k)] * y[k]).sum();
            y[i] -= dot;
        }
        for i in (0..n).rev() {
            let dot: C64 = (i + 1..n).map(|k| a[(i, k)] * y[k]).sum();
            y[i] = (y[i] - dot) / a[(i, i)];
        }
        for i in 0..n {
            inv[(i, col)] = y[i];
        }
    }
    Ok(inv)
}

/// Householder QR of a square matrix, `m = q r`, with the diagonal of `r`
/// real and positive and its strict lower triangle exactly zero.
pub fn qr_decompose(m: &CMat) -> Result<(CMat, CMat)> {
    if !m.is_square() {
        return Err(Error::InvalidShape("qr needs a square matrix".into()));
    }
    let n = m.rows();
    let floor = SINGULAR_PIVOT_REL * m.max_norm();
    let mut r = m.clone();
    let mut q = CMat::identity(n);
    let mut v = vec![ZERO; n];

    for k in 0..n {
        let tail_sq: f64 = (k + 1..n).map(|i| r[(i, k)].norm_sqr()).sum();
        if tail_sq == 0.0 {
            continue;
        }
        let x0 = r[(k, k)];
        let norm = (x0.norm_sqr() + tail_sq).sqrt();
        let phase = if x0 == ZERO { C64::new(1.0, 0.0) } else { x0 / x0.norm() };
        let alpha = -phase * norm;
        v[k] = x0 - alpha;
        for i in k + 1..n {
            v[i] = r[(i, k)];
        }
        let vnorm_sq: f64 = v[k..].iter().map(|z| z.norm_sqr()).sum();
        let tau = 2.0 / vnorm_sq;

        // r <- (I - tau v v*) r on rows k.., cols k..
        for j in k..n {
            let s: C64 = (k..n).map(|i| v[i].conj() * r[(i, j)]).sum::<C64>() * tau;
            for i in k..n {
                let vi = v[i];
                r[(i, j)] -= vi * s;
            }
        }
        r[(k, k)] = alpha;
        for i in k + 1..n {
            r[(i, k)] = ZERO;
        }
        // q <- q (I - tau v v*)
        for i in 0..n {
            let s: C64 = (k..n).map(|j| q[(i, j)] * v[j]).sum::<C64>() * tau;
            for j in k..n {
                let vj = v[j].conj();
                q[(i, j)] -= s * vj;
            }
        }
    }

    for k in 0..n {
        let d = r[(k, k)];
        let mag = d.norm();
        if !(mag > floor) {
            return Err(Error::SingularInput);
        }
        if d.im != 0.0 || d.re < 0.0 {
            let ph = d / mag;
            for j in k + 1..n {
                r[(k, j)] *= ph.conj();
            }
            for i in 0..n {
                q[(i, k)] *= ph;
            }
        }
        r[(k, k)] = C64::new(mag, 0.0);
    }
    Ok((q, r))
}

/// `m = r q` with `r` upper-triangular (real positive diagonal) and `q`
/// unitary.
#[derive(Clone, Debug, PartialEq)]
pub struct RqFactors {
    pub r: CMat,
    pub q: CMat,
}

impl RqFactors {
    pub fn product(&self) -> CMat {
        &self.r * &self.q
    }
}

/// RQ factorization with canonical phase.
///
/// With `J` the exchange matrix, QR of `(J m)* = Q̃ R̃` gives
/// `m = (J R̃* J)(J Q̃*)`, and `J R̃* J` is upper-triangular with the
/// diagonal of `R̃` reversed.
pub fn rq_decompose(m: &CMat) -> Result<RqFactors> {
    if !m.is_square() {
        return Err(Error::InvalidShape("rq needs a square matrix".into()));
    }
    let n = m.rows();
    let flipped = CMat::from_fn(n, n, |i, j| m[(n - 1 - j, i)].conj());
    let (qt, rt) = qr_decompose(&flipped)?;
    let r = CMat::from_fn(n, n, |i, j| {
        let z = rt[(n - 1 - j, n - 1 - i)].conj();
        if i > j {
            ZERO
        } else if i == j {
            C64::new(z.re, 0.0)
        } else {
            z
        }
    });
    let q = CMat::from_fn(n, n, |i, j| qt[(j, n - 1 - i)].conj());
    Ok(RqFactors { r, q })
}

/// Singular values in descending order (one-sided Jacobi).
pub fn singular_values(m: &CMat) -> Vec<f64> {
    let (rows, n) = (m.rows(), m.cols());
    // columns of m as separate vectors
    let mut cols: Vec<Vec<C64>> = (0..n).map(|j| (0..rows).map(|i| m[(i, j)]).collect()).collect();
    for _sweep in 0..60 {
        let mut rotated = false;
        for j in 0..n {
            for k in j + 1..n {
                let a: f64 = cols[j].iter().map(|z| z.norm_sqr()).sum();
                let b: f64 = cols[k].iter().map(|z| z.norm_sqr()).sum();
                let g: C64 = cols[j].iter().zip(&cols[k]).map(|(x, y)| x.conj() * y).sum();
                let gm = g.norm();
                if gm <= 1e-15 * (a * b).sqrt() || gm == 0.0 {
                    continue;
                }
                rotated = true;
                let ph = g / gm;
                let zeta = (b - a) / (2.0 * gm);
                let t = zeta.signum() / (zeta.abs() + (1.0 + zeta * zeta).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                let (lo, hi) = cols.split_at_mut(k);
                for (cj, ck) in lo[j].iter_mut().zip(hi[0].iter_mut()) {
                    let x = *cj;
                    let y = *ck * ph.conj();
                    *cj = x * c - y * s;
                    *ck = (x * s + y * c) * ph;
                }
            }
        }
        if !rotated {
            break;
        }
    }
    let mut sv: Vec<f64> = cols.iter().map(|c| c.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()).collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{random_invertible, random_unitary, DEFAULT_CONDITION_GUARD};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn real(n: usize, v: &[f64]) -> CMat {
        CMat::from_real(n, n, v).unwrap()
    }

    #[test]
    fn cholesky_identity() {
        let l = cholesky(&HermitianPd::new(CMat::identity(2)).unwrap());
        assert_eq!(l, CMat::identity(2));
    }

    #[test]
    fn cholesky_complex_reproduces_input() {
        let s = CMat::from_rows(&[vec![c(2.0, 0.0), c(0.0, 1.0)], vec![c(0.0, -1.0), c(2.0, 0.0)]]).unwrap();
        let l = cholesky(&HermitianPd::new(s.clone()).unwrap());
        assert!(l.is_lower_triangular(0.0));
        assert!((0..2).all(|i| l[(i, i)].im == 0.0 && l[(i, i)].re > 0.0));
        assert!((&l * &l.adjoint()).max_abs_diff(&s) <= 1e-12 * s.max_norm());
    }

    #[test]
    fn cholesky_rejects_near_singular() {
        // rank one plus a perturbation far below the pivot floor
        let e = 1e-15;
        let s = real(2, &[1.0, 1.0 - e, 1.0 - e, 1.0]);
        let pivot2 = 1.0 - (1.0 - e) * (1.0 - e);
        assert!(pivot2 < 1e-13);
        assert!(matches!(cholesky_factor(&s), Err(Error::NotPositiveDefinite { index: 1, .. })));
        assert!(matches!(HermitianPd::new(s), Err(Error::NotPositiveDefinite { .. })));
        assert!(cholesky_factor(&real(1, &[-1.0])).is_err());
    }

    #[test]
    fn det_examples() {
        assert_eq!(det(&real(2, &[2.0, 0.0, 0.0, 3.0])), c(6.0, 0.0));
        assert_eq!(det(&CMat::identity(5)), c(1.0, 0.0));
        assert_eq!(det(&real(2, &[0.0, 1.0, 1.0, 0.0])), c(-1.0, 0.0));
        assert_eq!(det(&real(2, &[1.0, 2.0, 2.0, 4.0])), c(0.0, 0.0));
        let lower = CMat::from_rows(&[vec![c(1.0, 1.0), c(0.0, 0.0)], vec![c(5.0, 0.0), c(0.0, 2.0)]]).unwrap();
        assert_eq!(det(&lower), c(1.0, 1.0) * c(0.0, 2.0));
    }

    #[test]
    fn det_is_multiplicative() {
        for seed in 0..20 {
            let a = random_invertible(4, seed, DEFAULT_CONDITION_GUARD).unwrap();
            let b = random_invertible(4, seed + 100, DEFAULT_CONDITION_GUARD).unwrap();
            let lhs = det(&(&a * &b));
            let rhs = det(&a) * det(&b);
            assert!((lhs - rhs).norm() <= 1e-10 * rhs.norm(), "seed {seed}");
        }
    }

    #[test]
    fn solve_examples() {
        let i2 = HermitianPd::identity(2);
        assert_eq!(solve_hpd(&i2, &[c(1.0, 0.0), c(0.0, 2.0)]).unwrap(), vec![c(1.0, 0.0), c(0.0, 2.0)]);
        let d = HermitianPd::new(real(2, &[2.0, 0.0, 0.0, 4.0])).unwrap();
        let w = solve_hpd(&d, &[c(2.0, 0.0), c(4.0, 0.0)]).unwrap();
        assert!(w.iter().all(|z| (z - c(1.0, 0.0)).norm() <= 1e-15));
        assert!(matches!(solve_hpd(&d, &[c(1.0, 0.0)]), Err(Error::DimensionMismatch { .. })));
    }

    #[test]
    fn solve_random_hpd_residual() {
        let g = random_invertible(4, 11, DEFAULT_CONDITION_GUARD).unwrap();
        let sigma = HermitianPd::from_gram(&g).unwrap();
        let v = random_unitary(4, 12).row(0).to_vec();
        let w = solve_hpd(&sigma, &v).unwrap();
        let back = sigma.matrix().matvec(&w);
        let res: f64 = back.iter().zip(&v).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>().sqrt();
        let vn: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        assert!(res <= 1e-10 * vn, "{res}");
    }

    #[test]
    fn rq_of_upper_triangular_is_trivial() {
        let m = CMat::from_rows(&[
            vec![c(2.0, 0.0), c(1.0, -1.0), c(0.5, 3.0)],
            vec![c(0.0, 0.0), c(1.5, 0.0), c(-2.0, 0.0)],
            vec![c(0.0, 0.0), c(0.0, 0.0), c(0.25, 0.0)],
        ])
        .unwrap();
        let f = rq_decompose(&m).unwrap();
        assert!(f.r.max_abs_diff(&m) <= 1e-12);
        assert!(f.q.max_abs_diff(&CMat::identity(3)) <= 1e-12);
    }

    #[test]
    fn rq_of_swap() {
        let m = real(2, &[0.0, 1.0, 1.0, 0.0]);
        let f = rq_decompose(&m).unwrap();
        assert!(f.product().max_abs_diff(&m) <= 1e-12);
        assert!(f.q.unitarity_residual() <= 1e-12);
        assert!(f.r.is_upper_triangular(0.0));
    }

    #[test]
    fn rq_random_ginibre_seed7() {
        let m = random_invertible(4, 7, DEFAULT_CONDITION_GUARD).unwrap();
        let f = rq_decompose(&m).unwrap();
        assert!(f.product().max_abs_diff(&m) <= 1e-10 * m.max_norm());
        assert!(f.q.unitarity_residual() <= 1e-12);
        for i in 0..4 {
            assert_eq!(f.r[(i, i)].im, 0.0);
            assert!(f.r[(i, i)].re > 0.0);
        }
        assert_eq!(rq_decompose(&m).unwrap(), f);
    }

    #[test]
    fn rq_rejects_singular() {
        let m = real(2, &[1.0, 2.0, 2.0, 4.0]);
        assert_eq!(rq_decompose(&m).unwrap_err(), Error::SingularInput);
        assert_eq!(inverse(&m).unwrap_err(), Error::SingularInput);
    }

    #[test]
    fn inverse_round_trip() {
        let m = random_invertible(5, 3, DEFAULT_CONDITION_GUARD).unwrap();
        let inv = inverse(&m).unwrap();
        assert!((&m * &inv).max_abs_diff(&CMat::identity(5)) < 1e-10);
    }

    #[test]
    fn singular_values_of_diagonal_and_unitary() {
        let sv = singular_values(&CMat::diag(&[c(0.0, 3.0), c(-1.0, 0.0), c(2.0, 0.0)]));
        assert_eq!(sv, vec![3.0, 2.0, 1.0]);
        let u = random_unitary(5, 4);
        assert!(singular_values(&u).iter().all(|s| (s - 1.0).abs() < 1e-12));
    }
}
