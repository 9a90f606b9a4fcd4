use std::fmt;
use std::ops::{Add, Index, IndexMut, Mul, Neg, Sub};

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

pub type C64 = Complex64;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// Dense complex matrix stored row-major.
///
/// Vectorization is column-stacking: `vec(X)[i + j * rows] = X[(i, j)]`, so
/// that `vec(x yᵀ) = y ⊗ x` and `vec(A X B) = (Bᵀ ⊗ A) vec(X)`.
#[derive(Clone, PartialEq)]
pub struct CMatrix {
    rows: usize,
    cols: usize,
    data: Vec<C64>,
}

impl CMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![ZERO; rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries, rejecting non-finite values.
    pub fn from_row_major(rows: usize, cols: usize, data: Vec<C64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Shape(format!(
                "{} entries for a {rows}x{cols} matrix",
                data.len()
            )));
        }
        if let Some(k) = data.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite {
                row: k / cols.max(1),
                col: k % cols.max(1),
            });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_real(rows: usize, cols: usize, data: &[f64]) -> Self {
        assert_eq!(data.len(), rows * cols, "entry count");
        Self {
            rows,
            cols,
            data: data.iter().map(|&x| C64::new(x, 0.0)).collect(),
        }
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn diag(entries: &[C64]) -> Self {
        let n = entries.len();
        let mut m = Self::zeros(n, n);
        for (i, &z) in entries.iter().enumerate() {
            m[(i, i)] = z;
        }
        m
    }

    pub fn diag_real(entries: &[f64]) -> Self {
        let e: Vec<C64> = entries.iter().map(|&x| C64::new(x, 0.0)).collect();
        Self::diag(&e)
    }

    /// Matrix unit `E_ij` of shape `rows x cols`.
    pub fn unit(rows: usize, cols: usize, i: usize, j: usize) -> Self {
        let mut m = Self::zeros(rows, cols);
        m[(i, j)] = ONE;
        m
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns(rows: usize, columns: &[Vec<C64>]) -> Self {
        let cols = columns.len();
        let mut m = Self::zeros(rows, cols);
        for (j, c) in columns.iter().enumerate() {
            assert_eq!(c.len(), rows, "column length");
            for (i, &z) in c.iter().enumerate() {
                m[(i, j)] = z;
            }
        }
        m
    }

    /// Entries drawn i.i.d. from the standard complex Gaussian.
    pub fn random_gaussian<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Self {
        Self::from_fn(rows, cols, |_, _| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            C64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
        })
    }

    pub fn random_hermitian<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let g = Self::random_gaussian(n, n, rng);
        (&g + &g.adjoint()).scale_real(0.5)
    }

    pub fn random_unitary<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let g = Self::random_gaussian(n, n, rng);
        let (q, _) = crate::linalg::decomp::qr(&g);
        q
    }

    /// Random density matrix (PSD, unit trace) of full rank almost surely.
    pub fn random_density<R: Rng + ?Sized>(n: usize, rng: &mut R) -> Self {
        let g = Self::random_gaussian(n, n, rng);
        let p = &g * &g.adjoint();
        let t = p.trace().re;
        p.scale_real(1.0 / t)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.rows == 0 || self.cols == 0
    }

    pub fn as_slice(&self) -> &[C64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[C64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    pub fn set_column(&mut self, j: usize, v: &[C64]) {
        assert_eq!(v.len(), self.rows);
        for (i, &z) in v.iter().enumerate() {
            self[(i, j)] = z;
        }
    }

    pub fn all_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn conj(&self) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: C64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn scale_real(&self, s: f64) -> Self {
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> C64 {
        (0..self.rows.min(self.cols)).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> Result<f64> {
        crate::linalg::decomp::op_norm(self)
    }

    /// `‖self − selfᴴ‖_F`.
    pub fn hermitian_residual(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += (self[(i, j)] - self[(j, i)].conj()).norm_sqr();
            }
        }
        s.sqrt()
    }

    /// `(A + Aᴴ) / 2`.
    pub fn hermitian_part(&self) -> Self {
        (self + &self.adjoint()).scale_real(0.5)
    }

    /// Column-stacking vectorization.
    pub fn vec(&self) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.rows * self.cols);
        for j in 0..self.cols {
            for i in 0..self.rows {
                v.push(self[(i, j)]);
            }
        }
        v
    }

    /// Inverse of [`CMatrix::vec`].
    pub fn unvec(v: &[C64], rows: usize, cols: usize) -> Self {
        assert_eq!(v.len(), rows * cols, "vector length");
        Self::from_fn(rows, cols, |i, j| v[i + j * rows])
    }

    pub fn mul_vec(&self, v: &[C64]) -> Vec<C64> {
        assert_eq!(v.len(), self.cols, "vector length");
        (0..self.rows)
            .map(|i| {
                self.row(i)
                    .iter()
                    .zip(v)
                    .fold(ZERO, |acc, (&a, &b)| acc + a * b)
            })
            .collect()
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.cols != rhs.rows {
            return Err(Error::Shape(format!(
                "cannot multiply {}x{} by {}x{}",
                self.rows, self.cols, rhs.rows, rhs.cols
            )));
        }
        Ok(self.matmul_unchecked(rhs))
    }

    fn matmul_unchecked(&self, rhs: &Self) -> Self {
        let (m, k, n) = (self.rows, self.cols, rhs.cols);
        let mut out = vec![ZERO; m * n];
        for i in 0..m {
            let orow = &mut out[i * n..(i + 1) * n];
            for p in 0..k {
                let a = self.data[i * k + p];
                if a == ZERO {
                    continue;
                }
                let brow = &rhs.data[p * n..(p + 1) * n];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Self {
            rows: m,
            cols: n,
            data: out,
        }
    }

    /// Kronecker product `self ⊗ rhs`.
    pub fn kron(&self, rhs: &Self) -> Self {
        let (p, q) = rhs.shape();
        let mut out = Self::zeros(self.rows * p, self.cols * q);
        for i in 0..self.rows {
            for j in 0..self.cols {
                let a = self[(i, j)];
                if a == ZERO {
                    continue;
                }
                for k in 0..p {
                    for l in 0..q {
                        out[(i * p + k, j * q + l)] = a * rhs[(k, l)];
                    }
                }
            }
        }
        out
    }

    /// Submatrix `[r0, r0 + rows) x [c0, c0 + cols)`.
    pub fn block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    pub fn set_block(&mut self, r0: usize, c0: usize, b: &Self) {
        for i in 0..b.rows {
            for j in 0..b.cols {
                self[(r0 + i, c0 + j)] = b[(i, j)];
            }
        }
    }

    /// Real part of `tr(selfᴴ rhs)`, the real Hilbert–Schmidt inner product.
    pub fn re_inner(&self, rhs: &Self) -> f64 {
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| a.re * b.re + a.im * b.im)
            .sum()
    }

    /// Bilinear trace pairing `tr(selfᵀ rhs)`.
    pub fn pairing(&self, rhs: &Self) -> C64 {
        self.data.iter().zip(&rhs.data).map(|(&a, &b)| a * b).sum()
    }

    pub fn pow(&self, k: usize) -> Self {
        assert!(self.is_square());
        let mut result = Self::identity(self.rows);
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = &base * &base;
            }
        }
        result
    }

    pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
        self.shape() == other.shape() && (self - other).max_abs() <= tol
    }
}

impl Index<(usize, usize)> for CMatrix {
    type Output = C64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for CMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<'a> Add<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;

    fn add(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in add");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }
}

impl<'a> Sub<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;

    fn sub(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(self.shape(), rhs.shape(), "shape mismatch in sub");
        CMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }
}

impl<'a> Mul<&'a CMatrix> for &'a CMatrix {
    type Output = CMatrix;

    fn mul(self, rhs: &CMatrix) -> CMatrix {
        assert_eq!(
            self.cols, rhs.rows,
            "cannot multiply {}x{} by {}x{}",
            self.rows, self.cols, rhs.rows, rhs.cols
        );
        self.matmul_unchecked(rhs)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;

    fn neg(self) -> CMatrix {
        self.scale_real(-1.0)
    }
}

impl fmt::Debug for CMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "CMatrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                let z = self[(i, j)];
                write!(f, "{:>10.4}{:+.4}i ", z.re, z.im)?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

/// Pauli matrices, handy in tests and scenarios.
pub mod pauli {
    use super::{CMatrix, C64};

    pub fn x() -> CMatrix {
        CMatrix::from_real(2, 2, &[0.0, 1.0, 1.0, 0.0])
    }

    pub fn y() -> CMatrix {
        CMatrix::from_row_major(
            2,
            2,
            vec![
                C64::new(0.0, 0.0),
                C64::new(0.0, -1.0),
                C64::new(0.0, 1.0),
                C64::new(0.0, 0.0),
            ],
        )
        .expect("finite")
    }

    pub fn z() -> CMatrix {
        CMatrix::from_real(2, 2, &[1.0, 0.0, 0.0, -1.0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn vec_convention_is_column_stacking() {
        let x = CMatrix::from_real(2, 1, &[1.0, 2.0]);
        let y = CMatrix::from_real(3, 1, &[3.0, 5.0, 7.0]);
        let outer = &x * &y.transpose();
        let lhs = outer.vec();
        let rhs = y.kron(&x).column(0);
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn kron_of_diagonals() {
        let a = CMatrix::diag_real(&[1.0, 2.0]);
        let b = CMatrix::diag_real(&[1.0, 3.0]);
        assert_eq!(a.kron(&b), CMatrix::diag_real(&[1.0, 3.0, 2.0, 6.0]));
        let i2 = CMatrix::identity(2);
        assert_eq!(i2.kron(&i2), CMatrix::identity(4));
    }

    #[test]
    fn kron_vec_identity_for_pauli_x() {
        // (X ⊗ X) vec(I) = vec(X I Xᵀ)
        let x = pauli::x();
        let lhs = x.kron(&x).mul_vec(&CMatrix::identity(2).vec());
        let rhs = (&(&x * &CMatrix::identity(2)) * &x.transpose()).vec();
        assert_eq!(lhs, rhs);
    }

    #[test]
    fn rejects_non_finite() {
        let err = CMatrix::from_row_major(1, 2, vec![ONE, C64::new(f64::NAN, 0.0)]).unwrap_err();
        assert_eq!(err, Error::NonFinite { row: 0, col: 1 });
        assert!(CMatrix::from_row_major(2, 2, vec![ONE]).is_err());
    }

    #[test]
    fn pow_matches_repeated_product() {
        let a = CMatrix::from_real(2, 2, &[1.0, 1.0, 0.0, 1.0]);
        let expected = CMatrix::from_real(2, 2, &[1.0, 5.0, 0.0, 1.0]);
        assert_eq!(a.pow(5), expected);
        assert_eq!(a.pow(0), CMatrix::identity(2));
    }
}
