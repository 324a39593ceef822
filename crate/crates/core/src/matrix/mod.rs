//! Dense complex matrices.
//!
//! Storage is row-major. Vectorization stacks rows, so the entry order of a
//! matrix is also its vectorized form, and `vec(A X B^dag) = (A ⊗ B*) vec(X)`.

mod decomp;
mod expm;
mod scalar;

use std::ops::{Add, AddAssign, Index, IndexMut, Mul, Neg, Sub, SubAssign};

use num_complex::Complex;
use num_traits::{One, Zero};

pub use decomp::{eigh, householder_qr, qr_unitary, EigenDecomposition};
pub use expm::matrix_exp;
pub use scalar::Scalar;

use crate::error::{Error, Result};
use crate::policy::POLICY;

/// Dense complex matrix with row-major storage.
#[derive(Clone, Debug, PartialEq)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<Complex<T>>,
}

impl<T: Scalar> Matrix<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![Complex::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = Complex::one();
        }
        m
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<Complex<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::dims(format!("{} entries", rows * cols), format!("{} entries", data.len())));
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    /// Builds a matrix from nested rows; all rows must have equal length.
    pub fn from_rows(rows: &[Vec<Complex<T>>]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if let Some(bad) = rows.iter().find(|row| row.len() != c) {
            return Err(Error::dims(format!("rows of length {c}"), format!("row of length {}", bad.len())));
        }
        Ok(Self { rows: r, cols: c, data: rows.iter().flatten().copied().collect() })
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let nested: Vec<Vec<Complex<T>>> =
            rows.iter().map(|row| row.iter().map(|&x| Complex::new(T::lit(x), T::zero())).collect()).collect();
        Self::from_rows(&nested)
    }

    pub fn from_diag(diag: &[Complex<T>]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, &d) in diag.iter().enumerate() {
            m.data[i * n + i] = d;
        }
        m
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let d: Vec<Complex<T>> = diag.iter().map(|&x| Complex::new(T::lit(x), T::zero())).collect();
        Self::from_diag(&d)
    }

    /// Column vector holding `v`.
    pub fn column(v: Vec<Complex<T>>) -> Self {
        Self { rows: v.len(), cols: 1, data: v }
    }

    /// Outer product `|a><b|`.
    pub fn outer(a: &[Complex<T>], b: &[Complex<T>]) -> Self {
        Self::from_fn(a.len(), b.len(), |i, j| a[i] * b[j].conj())
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

    /// Side length of a square matrix.
    pub fn dim(&self) -> Result<usize> {
        if self.is_square() {
            Ok(self.rows)
        } else {
            Err(Error::NotSquare { rows: self.rows, cols: self.cols })
        }
    }

    pub fn as_slice(&self) -> &[Complex<T>] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [Complex<T>] {
        &mut self.data
    }

    pub fn into_vec(self) -> Vec<Complex<T>> {
        self.data
    }

    pub fn row(&self, i: usize) -> &[Complex<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column_vec(&self, j: usize) -> Vec<Complex<T>> {
        (0..self.rows).map(|i| self.data[i * self.cols + j]).collect()
    }

    pub fn diagonal(&self) -> Vec<Complex<T>> {
        (0..self.rows.min(self.cols)).map(|i| self.data[i * self.cols + i]).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i].conj())
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self.data[j * self.cols + i])
    }

    pub fn conj(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(Complex::conj).collect() }
    }

    pub fn trace(&self) -> Complex<T> {
        self.diagonal().into_iter().fold(Complex::zero(), |acc, x| acc + x)
    }

    pub fn scale(&self, s: Complex<T>) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn scale_real(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: Complex<T>, other: &Self) {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols), "axpy shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += alpha * b;
        }
    }

    pub fn try_matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::dims(
                format!("{} rows on the right", self.cols),
                format!("{}x{}", other.rows, other.cols),
            ));
        }
        let mut out = Self::zeros(self.rows, other.cols);
        mul_into(self, other, &mut out);
        Ok(out)
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[Complex<T>]) -> Vec<Complex<T>> {
        assert_eq!(self.cols, v.len(), "mul_vec shape mismatch");
        (0..self.rows)
            .map(|i| self.row(i).iter().zip(v).fold(Complex::zero(), |acc, (&a, &b)| acc + a * b))
            .collect()
    }

    /// `<u| self |v>`.
    pub fn sandwich(&self, u: &[Complex<T>], v: &[Complex<T>]) -> Complex<T> {
        self.mul_vec(v).iter().zip(u).fold(Complex::zero(), |acc, (&a, &b)| acc + b.conj() * a)
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().fold(T::zero(), |acc, x| acc + x.norm_sqr()).sqrt()
    }

    /// Largest column absolute sum.
    pub fn one_norm(&self) -> T {
        (0..self.cols)
            .map(|j| (0..self.rows).fold(T::zero(), |acc, i| acc + self.data[i * self.cols + j].norm()))
            .fold(T::zero(), T::max)
    }

    /// Largest singular value, from the eigenvalues of `A^dag A`.
    pub fn spectral_norm(&self) -> T {
        if self.data.is_empty() {
            return T::zero();
        }
        let gram = &self.adjoint() * self;
        let eig = eigh(&gram).expect("gram matrix is square");
        eig.values.iter().copied().fold(T::zero(), T::max).max(T::zero()).sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.re.is_finite() && x.im.is_finite())
    }

    pub fn is_hermitian(&self, tol: T) -> bool {
        self.is_square() && frobenius_distance(self, &self.adjoint()).is_ok_and(|d| d <= tol)
    }

    /// `||U^dag U - 1||_F`.
    pub fn unitarity_defect(&self) -> T {
        let n = self.cols;
        (&(&self.adjoint() * self) - &Self::identity(n)).frobenius_norm()
    }

    pub fn is_unitary(&self, tol: T) -> bool {
        self.is_square() && self.unitarity_defect() <= tol
    }

    /// Errors unless the matrix is unitary within the library tolerance.
    pub fn ensure_unitary(&self) -> Result<()> {
        self.dim()?;
        let defect = self.unitarity_defect();
        if defect <= T::lit(POLICY.unitarity) {
            Ok(())
        } else {
            Err(Error::NotUnitary { deviation: defect.to_f64_lossy() })
        }
    }

    /// Row-stacked vectorization as a `rows*cols x 1` column.
    pub fn vectorize(&self) -> Self {
        Self::column(self.data.clone())
    }

    /// Inverse of [`Matrix::vectorize`] for a square `dim x dim` result.
    pub fn unvectorize(v: &[Complex<T>], dim: usize) -> Result<Self> {
        Self::from_vec(dim, dim, v.to_vec())
    }

    /// `(A + A^dag) / 2`.
    pub fn hermitian_part(&self) -> Self {
        let half = T::lit(0.5);
        Self::from_fn(self.rows, self.cols, |i, j| {
            (self.data[i * self.cols + j] + self.data[j * self.cols + i].conj()) * half
        })
    }

    /// Subtracts `(Tr A / n) 1`, returning the shifted matrix and the removed scalar.
    pub fn traceless_part(&self) -> (Self, Complex<T>) {
        let n = self.rows;
        let shift = self.trace() / T::from_usize(n).unwrap();
        let mut out = self.clone();
        for i in 0..n {
            out.data[i * n + i] -= shift;
        }
        (out, shift)
    }

    pub fn cast<U: Scalar>(&self) -> Matrix<U> {
        Matrix {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|x| Complex::new(U::lit(x.re.to_f64_lossy()), U::lit(x.im.to_f64_lossy())))
                .collect(),
        }
    }
}

/// `out = a * b` without allocating. Panics on shape mismatch.
pub fn mul_into<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>, out: &mut Matrix<T>) {
    assert_eq!(a.cols, b.rows, "matmul inner dimension mismatch");
    assert_eq!((out.rows, out.cols), (a.rows, b.cols), "matmul output shape mismatch");
    let (n, m) = (b.rows, b.cols);
    out.data.iter_mut().for_each(|x| *x = Complex::zero());
    for i in 0..a.rows {
        let out_row = &mut out.data[i * m..(i + 1) * m];
        for k in 0..n {
            let aik = a.data[i * n + k];
            if aik.re == T::zero() && aik.im == T::zero() {
                continue;
            }
            let b_row = &b.data[k * m..(k + 1) * m];
            for (o, &bkj) in out_row.iter_mut().zip(b_row) {
                *o += aik * bkj;
            }
        }
    }
}

/// Kronecker product. Fails when the result would exceed the superoperator size cap.
pub fn kron<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    let rows = a.rows * b.rows;
    let cols = a.cols * b.cols;
    let cap = POLICY.superop_cap;
    if rows.max(cols) > cap {
        return Err(Error::SizeLimit { what: "kronecker product", dim: rows.max(cols), cap });
    }
    let mut out = Matrix::zeros(rows, cols);
    for i in 0..a.rows {
        for j in 0..a.cols {
            let aij = a.data[i * a.cols + j];
            if aij.is_zero() {
                continue;
            }
            for k in 0..b.rows {
                let base = (i * b.rows + k) * cols + j * b.cols;
                for (l, &bkl) in b.row(k).iter().enumerate() {
                    out.data[base + l] = aij * bkl;
                }
            }
        }
    }
    Ok(out)
}

pub fn frobenius_distance<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<T> {
    if (a.rows, a.cols) != (b.rows, b.cols) {
        return Err(Error::dims(format!("{}x{}", a.rows, a.cols), format!("{}x{}", b.rows, b.cols)));
    }
    Ok(a.data.iter().zip(&b.data).fold(T::zero(), |acc, (&x, &y)| acc + (x - y).norm_sqr()).sqrt())
}

/// `[a, b] = ab - ba`.
pub fn commutator<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    &(a * b) - &(b * a)
}

/// `{a, b} = ab + ba`.
pub fn anticommutator<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Matrix<T> {
    &(a * b) + &(b * a)
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = Complex<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex<T> {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        let mut out = Matrix::zeros(self.rows, rhs.cols);
        mul_into(self, rhs, &mut out);
        out
    }
}

impl<T: Scalar> Add for &Matrix<T> {
    type Output = Matrix<T>;
    fn add(self, rhs: &Matrix<T>) -> Matrix<T> {
        let mut out = self.clone();
        out += rhs;
        out
    }
}

impl<T: Scalar> Sub for &Matrix<T> {
    type Output = Matrix<T>;
    fn sub(self, rhs: &Matrix<T>) -> Matrix<T> {
        let mut out = self.clone();
        out -= rhs;
        out
    }
}

impl<T: Scalar> Neg for &Matrix<T> {
    type Output = Matrix<T>;
    fn neg(self) -> Matrix<T> {
        Matrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| -x).collect() }
    }
}

impl<T: Scalar> AddAssign<&Matrix<T>> for Matrix<T> {
    fn add_assign(&mut self, rhs: &Matrix<T>) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "add shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a += b;
        }
    }
}

impl<T: Scalar> SubAssign<&Matrix<T>> for Matrix<T> {
    fn sub_assign(&mut self, rhs: &Matrix<T>) {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols), "sub shape mismatch");
        for (a, &b) in self.data.iter_mut().zip(&rhs.data) {
            *a -= b;
        }
    }
}
