//! Dense complex matrix kernels.
//!
//! Everything here targets small matrices (the design envelope is `p ≤ 16`,
//! so at most 17×17). Storage is row-major `Vec<C64>`.

mod factor;
mod random;

pub use factor::{
    cholesky, cholesky_factor, cholesky_real, det, inverse, qr_decompose, rq_decompose,
    singular_values, solve_hpd, RqFactors,
};
pub use random::{ginibre, random_invertible, random_unitary, DEFAULT_CONDITION_GUARD};

use crate::error::{Error, Result};
use num_complex::Complex64;
use std::fmt;
use std::ops::{Index, IndexMut, Mul};

pub type C64 = Complex64;

/// Absolute tolerance for the Hermitian check on scatter matrices.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMat {
    /// Builds a matrix from row-major entries, rejecting empty shapes and
    /// non-finite entries.
    pub fn new(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidShape(format!("{rows}x{cols}")));
        }
        if data.len() != rows * cols {
            return Err(Error::InvalidShape(format!(
                "{rows}x{cols} needs {} entries, got {}",
                rows * cols,
                data.len()
            )));
        }
        if let Some(i) = data.iter().position(|z| !z.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(Self { rows, cols, data })
    }

    /// Builds a matrix from nested rows.
    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let n = rows.len();
        let m = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::InvalidShape("ragged rows".into()));
        }
        Self::new(n, m, rows.concat())
    }

    /// Real-valued convenience constructor, row-major.
    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Result<Self> {
        Self::new(rows, cols, data.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        Self { rows, cols, data: vec![C64::new(0.0, 0.0); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        Self::diag(&vec![C64::new(1.0, 0.0); n])
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &e) in entries.iter().enumerate() {
            m[(i, i)] = e;
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        assert!(rows > 0 && cols > 0, "empty matrix");
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<C64> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<C64>> {
        (0..self.rows).map(|i| self.row(i).to_vec()).collect()
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn matmul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "matmul shape mismatch");
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == C64::new(0.0, 0.0) {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(self.cols, v.len(), "matvec shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|z| z * s).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        Self { rows: self.rows, cols: self.cols, data }
    }

    /// Largest entry modulus.
    pub fn max_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.sub(other).max_norm()
    }

    /// Copy of rows `r0..r1`, columns `c0..c1`.
    pub fn block(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> Self {
        Self::from_fn(r1 - r0, c1 - c0, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn is_upper_triangular(&self, tol: f64) -> bool {
        (0..self.rows).all(|i| (0..self.cols.min(i)).all(|j| self[(i, j)].norm() <= tol))
    }

    pub fn is_lower_triangular(&self, tol: f64) -> bool {
        (0..self.rows).all(|i| (i + 1..self.cols).all(|j| self[(i, j)].norm() <= tol))
    }

    /// `max |m m* − I|`, the unitarity residual.
    pub fn unitarity_residual(&self) -> f64 {
        self.matmul(&self.adjoint()).max_abs_diff(&Self::identity(self.rows))
    }

    /// Real block form `[[Re A, −Im A], [Im A, Re A]]`, row-major `2r × 2c`.
    pub fn realify(&self) -> Vec<f64> {
        let (r, c) = (self.rows, self.cols);
        let w = 2 * c;
        let mut out = vec![0.0; 4 * r * c];
        for i in 0..r {
            for j in 0..c {
                let z = self[(i, j)];
                out[i * w + j] = z.re;
                out[i * w + c + j] = -z.im;
                out[(r + i) * w + j] = z.im;
                out[(r + i) * w + c + j] = z.re;
            }
        }
        out
    }
}

impl Index<(usize, usize)> for CMat {
    type Output = C64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMat {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &CMat {
    type Output = CMat;
    fn mul(self, rhs: &CMat) -> CMat {
        self.matmul(rhs)
    }
}

impl fmt::Debug for CMat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, " ")?;
            for z in self.row(i) {
                write!(f, " {:+.6e}{:+.6e}i", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// A Hermitian positive-definite matrix together with its lower Cholesky
/// factor `L` (`L L* = Σ`, real positive diagonal).
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianPd {
    matrix: CMat,
    factor: CMat,
}

impl HermitianPd {
    /// Validates `m`: square, Hermitian to [`HERMITIAN_TOL`] and with a
    /// successful Cholesky factorization.
    pub fn new(m: CMat) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::InvalidShape(format!("{}x{} scatter is not square", m.rows, m.cols)));
        }
        let n = m.rows;
        for i in 0..n {
            for j in 0..=i {
                let gap = (m[(i, j)] - m[(j, i)].conj()).norm();
                if gap > HERMITIAN_TOL {
                    return Err(Error::NotHermitian { row: i, col: j, gap });
                }
            }
        }
        // Average with the adjoint; exactly Hermitian inputs are unchanged.
        let matrix = CMat::from_fn(n, n, |i, j| (m[(i, j)] + m[(j, i)].conj()) * 0.5);
        let factor = cholesky_factor(&matrix)?;
        Ok(Self { matrix, factor })
    }

    /// Builds `F F*`, exactly Hermitian by construction, and validates it.
    pub fn from_gram(f: &CMat) -> Result<Self> {
        let n = f.rows;
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..=i {
                let s: C64 = f.row(i).iter().zip(f.row(j)).map(|(a, b)| a * b.conj()).sum();
                if i == j {
                    m[(i, i)] = C64::new(s.re, 0.0);
                } else {
                    m[(i, j)] = s;
                    m[(j, i)] = s.conj();
                }
            }
        }
        let factor = cholesky_factor(&m)?;
        Ok(Self { matrix: m, factor })
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: CMat::identity(n), factor: CMat::identity(n) }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.matrix.rows
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    /// Lower-triangular `L` with `L L* = Σ`.
    pub fn factor(&self) -> &CMat {
        &self.factor
    }

    /// `ln det Σ`, from the factor's diagonal.
    pub fn ln_det(&self) -> f64 {
        2.0 * (0..self.dim()).map(|i| self.factor[(i, i)].re.ln()).sum::<f64>()
    }

    /// `v* Σ⁻¹ v` via one triangular solve, clamped at zero.
    pub fn quad_form_inv(&self, v: &[C64]) -> f64 {
        let y = factor::forward_substitute(&self.factor, v);
        y.iter().map(|z| z.norm_sqr()).sum::<f64>().max(0.0)
    }
}
