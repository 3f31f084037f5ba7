//! Dense complex linear algebra.
//!
//! The analyses in this crate live on dense matrices of modest size (orbit
//! experiments rarely exceed a few hundred rows), so everything here is a
//! straightforward row-major implementation tuned for clarity and exact
//! reproducibility rather than BLAS-level throughput.  Heavier factorizations
//! live in the submodules: [`qr`] for Householder orthogonalization, [`svd`]
//! for a one-sided Jacobi singular value decomposition, and [`schur`] for the
//! unitary triangularization that drives all spectral splitting.

pub mod qr;
pub mod schur;
pub mod svd;

use alloc::vec;
use alloc::vec::Vec;

use num_complex::Complex;

use crate::math;

/// Complex double-precision scalar used everywhere in the crate.
pub type C64 = Complex<f64>;

/// Zero scalar, handy for accumulators.
pub const ZERO: C64 = Complex::new(0.0, 0.0);
/// One scalar.
pub const ONE: C64 = Complex::new(1.0, 0.0);

/// Dense row-major complex matrix.
#[derive(Clone, PartialEq)]
pub struct CMat {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl core::fmt::Debug for CMat {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        writeln!(f, "CMat {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self.at(i, j);
                write!(f, "{:+.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl CMat {
    /// Matrix of zeros.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat { rows, cols, data: vec![ZERO; rows * cols] }
    }

    /// Identity matrix.
    pub fn identity(n: usize) -> Self {
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = ONE;
        }
        m
    }

    /// Matrix built entry-by-entry from `f(row, col)`.
    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    /// Matrix wrapping an existing row-major buffer.
    ///
    /// Panics if the buffer length does not match `rows * cols`.
    pub fn from_data(rows: usize, cols: usize, data: Vec<C64>) -> Self {
        assert_eq!(data.len(), rows * cols, "row-major buffer has wrong length");
        CMat { rows, cols, data }
    }

    /// Square diagonal matrix from its diagonal entries.
    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        let mut m = CMat::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = diag[i];
        }
        m
    }

    /// Number of rows.
    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry at `(i, j)`.
    #[inline]
    pub fn at(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.cols + j]
    }

    /// Mutable entry at `(i, j)`.
    #[inline]
    pub fn at_mut(&mut self, i: usize, j: usize) -> &mut C64 {
        &mut self.data[i * self.cols + j]
    }

    /// Row `i` as a slice.
    #[inline]
    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    /// Column `j` as an owned vector.
    pub fn col(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self.at(i, j)).collect()
    }

    /// Overwrite column `j`.
    pub fn set_col(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for i in 0..self.rows {
            *self.at_mut(i, j) = v[i];
        }
    }

    /// Underlying row-major buffer.
    pub fn data(&self) -> &[C64] {
        &self.data
    }

    /// Diagonal entries (square or rectangular: `min(rows, cols)` of them).
    pub fn diag(&self) -> Vec<C64> {
        (0..self.rows.min(self.cols)).map(|i| self.at(i, i)).collect()
    }

    /// Matrix-vector product `A x`.
    pub fn matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.cols, "matvec dimension mismatch");
        let mut out = vec![ZERO; self.rows];
        for i in 0..self.rows {
            let row = self.row(i);
            let mut acc = ZERO;
            for j in 0..self.cols {
                acc += row[j] * x[j];
            }
            out[i] = acc;
        }
        out
    }

    /// Adjoint-vector product `Aᴴ x` without forming the adjoint.
    pub fn adjoint_matvec(&self, x: &[C64]) -> Vec<C64> {
        assert_eq!(x.len(), self.rows, "adjoint matvec dimension mismatch");
        let mut out = vec![ZERO; self.cols];
        for i in 0..self.rows {
            let row = self.row(i);
            let xi = x[i];
            for j in 0..self.cols {
                out[j] += row[j].conj() * xi;
            }
        }
        out
    }

    /// Matrix product `A B`.
    pub fn mul(&self, other: &CMat) -> CMat {
        assert_eq!(self.cols, other.rows, "matmul dimension mismatch");
        let m = self.rows;
        let n = self.cols;
        let p = other.cols;
        let mut out = vec![ZERO; m * p];
        for i in 0..m {
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                let brow = &other.data[k * p..(k + 1) * p];
                let orow = &mut out[i * p..(i + 1) * p];
                for j in 0..p {
                    orow[j] += a * brow[j];
                }
            }
        }
        CMat { rows: m, cols: p, data: out }
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat {
        CMat::from_fn(self.cols, self.rows, |i, j| self.at(j, i).conj())
    }

    /// Entry-wise sum.
    pub fn add(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a + b).collect();
        CMat { rows: self.rows, cols: self.cols, data }
    }

    /// Entry-wise difference.
    pub fn sub(&self, other: &CMat) -> CMat {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        let data = self.data.iter().zip(&other.data).map(|(a, b)| a - b).collect();
        CMat { rows: self.rows, cols: self.cols, data }
    }

    /// Scalar multiple.
    pub fn scale(&self, s: C64) -> CMat {
        let data = self.data.iter().map(|a| a * s).collect();
        CMat { rows: self.rows, cols: self.cols, data }
    }

    /// Frobenius norm.
    pub fn fro_norm(&self) -> f64 {
        math::sqrt(self.data.iter().map(|z| z.norm_sqr()).sum())
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// True when every entry is finite.
    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Copy of the block with rows `r0..r1` and columns `c0..c1`.
    pub fn submatrix(&self, r0: usize, r1: usize, c0: usize, c1: usize) -> CMat {
        assert!(r0 <= r1 && r1 <= self.rows && c0 <= c1 && c1 <= self.cols);
        CMat::from_fn(r1 - r0, c1 - c0, |i, j| self.at(r0 + i, c0 + j))
    }

    /// Columns `c0..c1` as a new matrix.
    pub fn columns(&self, c0: usize, c1: usize) -> CMat {
        self.submatrix(0, self.rows, c0, c1)
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hcat(&self, other: &CMat) -> CMat {
        assert_eq!(self.rows, other.rows);
        CMat::from_fn(self.rows, self.cols + other.cols, |i, j| {
            if j < self.cols {
                self.at(i, j)
            } else {
                other.at(i, j - self.cols)
            }
        })
    }

    /// `A^e` by repeated squaring (square matrices only).
    pub fn matpow(&self, mut e: usize) -> CMat {
        assert_eq!(self.rows, self.cols, "matpow needs a square matrix");
        let mut base = self.clone();
        let mut acc = CMat::identity(self.rows);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }
}

/// Hermitian inner product `⟨a, b⟩ = Σ conj(aᵢ) bᵢ` (conjugate-linear in the
/// first argument).
pub fn dot(a: &[C64], b: &[C64]) -> C64 {
    assert_eq!(a.len(), b.len());
    let mut acc = ZERO;
    for i in 0..a.len() {
        acc += a[i].conj() * b[i];
    }
    acc
}

/// Euclidean norm.
pub fn norm2(a: &[C64]) -> f64 {
    math::sqrt(a.iter().map(|z| z.norm_sqr()).sum())
}

/// Normalize in place; returns the original norm (zero vectors are left alone).
pub fn normalize(a: &mut [C64]) -> f64 {
    let n = norm2(a);
    if n > 0.0 {
        let inv = 1.0 / n;
        for z in a.iter_mut() {
            *z *= inv;
        }
    }
    n
}

/// `y += alpha * x`.
pub fn axpy(alpha: C64, x: &[C64], y: &mut [C64]) {
    assert_eq!(x.len(), y.len());
    for i in 0..x.len() {
        y[i] += alpha * x[i];
    }
}

/// Entry-wise difference `a - b`.
pub fn vec_sub(a: &[C64], b: &[C64]) -> Vec<C64> {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Scalar multiple of a vector.
pub fn vec_scale(a: &[C64], s: C64) -> Vec<C64> {
    a.iter().map(|x| x * s).collect()
}

/// True when every entry is finite.
pub fn vec_is_finite(a: &[C64]) -> bool {
    a.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

#[cfg(test)]
pub(crate) fn assert_near(a: f64, b: f64, tol: f64, what: &str) {
    assert!(
        (a - b).abs() <= tol,
        "{what}: {a} vs {b} differ by {} (tol {tol})",
        (a - b).abs()
    );
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        Complex::new(re, im)
    }

    #[test]
    fn matvec_and_mul_agree() {
        let a = CMat::from_fn(3, 3, |i, j| c((i + 1) as f64, (j as f64) - 1.0));
        let x = alloc::vec![c(1.0, 0.0), c(0.0, 1.0), c(-2.0, 0.5)];
        let direct = a.matvec(&x);
        let via_mul = a.mul(&CMat::from_data(3, 1, x.clone()));
        for i in 0..3 {
            assert!((direct[i] - via_mul.at(i, 0)).norm() < 1e-14);
        }
    }

    #[test]
    fn adjoint_matvec_matches_explicit_adjoint() {
        let a = CMat::from_fn(4, 3, |i, j| c(i as f64 - j as f64, (i * j) as f64 * 0.1));
        let x = alloc::vec![c(1.0, 2.0), c(-0.5, 0.0), c(0.0, -1.0), c(2.0, 2.0)];
        let fast = a.adjoint_matvec(&x);
        let slow = a.adjoint().matvec(&x);
        for i in 0..3 {
            assert!((fast[i] - slow[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn matpow_matches_iterated_mul() {
        let a = CMat::from_fn(3, 3, |i, j| c(0.3 * (i as f64 + 1.0), 0.1 * j as f64));
        let mut iter = CMat::identity(3);
        for _ in 0..5 {
            iter = iter.mul(&a);
        }
        let fast = a.matpow(5);
        assert!(iter.sub(&fast).max_abs() < 1e-12);
    }

    #[test]
    fn dot_is_conjugate_linear_in_first_argument() {
        let a = alloc::vec![c(0.0, 1.0)];
        let b = alloc::vec![c(0.0, 1.0)];
        // ⟨i, i⟩ = conj(i)·i = 1.
        assert!((dot(&a, &b) - ONE).norm() < 1e-15);
    }

    #[test]
    fn normalize_returns_previous_norm() {
        let mut v = alloc::vec![c(3.0, 0.0), c(0.0, 4.0)];
        let n = normalize(&mut v);
        assert_near(n, 5.0, 1e-15, "norm before scaling");
        assert_near(norm2(&v), 1.0, 1e-15, "norm after scaling");
    }
}
