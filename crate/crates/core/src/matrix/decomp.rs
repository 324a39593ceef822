use num_complex::Complex;
use num_traits::{One, Zero};

use super::{Matrix, Scalar};
use crate::error::{Error, Result};
use crate::policy::POLICY;

/// Householder QR of a square matrix without any phase normalization.
///
/// `R` comes back with whatever diagonal phases the reflections produce.
pub fn householder_qr<T: Scalar>(a: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let n = a.dim()?;
    let mut r = a.clone();
    let mut reflectors: Vec<Vec<Complex<T>>> = Vec::with_capacity(n);
    let threshold = T::lit(POLICY.rank);
    let two = T::lit(2.0);

    for k in 0..n {
        let norm_x = (k..n).fold(T::zero(), |acc, i| acc + r[(i, k)].norm_sqr()).sqrt();
        if norm_x < threshold {
            return Err(Error::RankDeficient { index: k, value: norm_x.to_f64_lossy() });
        }
        let x0 = r[(k, k)];
        let phase = if x0.norm() > T::zero() { x0 / x0.norm() } else { Complex::one() };
        let alpha = -phase * norm_x;
        let mut v: Vec<Complex<T>> = (k..n).map(|i| r[(i, k)]).collect();
        v[0] -= alpha;
        let vnorm = v.iter().fold(T::zero(), |acc, x| acc + x.norm_sqr()).sqrt();
        if vnorm > T::zero() {
            v.iter_mut().for_each(|x| *x /= vnorm);
            // R <- (1 - 2 v v^dag) R on rows k.., columns k..
            for j in k..n {
                let dot = v.iter().enumerate().fold(Complex::zero(), |acc, (i, vi)| acc + vi.conj() * r[(k + i, j)]);
                for (i, vi) in v.iter().enumerate() {
                    let upd = *vi * dot * two;
                    r[(k + i, j)] -= upd;
                }
            }
        }
        for i in (k + 1)..n {
            r[(i, k)] = Complex::zero();
        }
        let rkk = r[(k, k)].norm();
        if rkk < threshold {
            return Err(Error::RankDeficient { index: k, value: rkk.to_f64_lossy() });
        }
        reflectors.push(v);
    }

    // Q = H_0 H_1 ... H_{n-1}
    let mut q = Matrix::identity(n);
    for (k, v) in reflectors.iter().enumerate().rev() {
        for j in 0..n {
            let dot = v.iter().enumerate().fold(Complex::zero(), |acc, (i, vi)| acc + vi.conj() * q[(k + i, j)]);
            if dot.is_zero() {
                continue;
            }
            for (i, vi) in v.iter().enumerate() {
                let upd = *vi * dot * two;
                q[(k + i, j)] -= upd;
            }
        }
    }
    Ok((q, r))
}

/// QR factorization `a = Q R` with `Q` unitary and `R` upper triangular with a
/// positive real diagonal.
pub fn qr_unitary<T: Scalar>(a: &Matrix<T>) -> Result<(Matrix<T>, Matrix<T>)> {
    let (mut q, mut r) = householder_qr(a)?;
    let n = q.rows();
    for j in 0..n {
        let d = r[(j, j)];
        let phase = d / d.norm();
        for i in 0..n {
            q[(i, j)] *= phase;
        }
        for l in 0..n {
            r[(j, l)] *= phase.conj();
        }
        r[(j, j)] = Complex::new(d.norm(), T::zero());
    }
    Ok((q, r))
}

/// Eigen-decomposition of a Hermitian matrix.
#[derive(Debug, Clone)]
pub struct EigenDecomposition<T> {
    /// Eigenvalues in ascending order.
    pub values: Vec<T>,
    /// Eigenvectors as columns, in the order of `values`.
    pub vectors: Matrix<T>,
}

impl<T: Scalar> EigenDecomposition<T> {
    /// Rebuilds `V f(Λ) V^dag`.
    pub fn map_values(&self, f: impl Fn(T) -> T) -> Matrix<T> {
        let n = self.values.len();
        let v = &self.vectors;
        Matrix::from_fn(n, n, |i, j| {
            (0..n).fold(Complex::zero(), |acc, k| acc + v[(i, k)] * v[(j, k)].conj() * f(self.values[k]))
        })
    }
}

/// Cyclic Jacobi eigensolver for Hermitian input. Only the Hermitian part of
/// `a` is used.
pub fn eigh<T: Scalar>(a: &Matrix<T>) -> Result<EigenDecomposition<T>> {
    let n = a.dim()?;
    let mut m = a.hermitian_part();
    let mut v = Matrix::identity(n);
    let scale = m.frobenius_norm().max(T::min_positive_value());
    let eps = T::epsilon() * scale * T::lit(1e-2);

    for _sweep in 0..100 {
        let off = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .fold(T::zero(), |acc, (i, j)| acc + m[(i, j)].norm_sqr());
        if off.sqrt() <= eps {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let h = m[(p, q)];
                let habs = h.norm();
                if habs <= eps * T::lit(1e-3) {
                    continue;
                }
                let u = h / habs;
                let app = m[(p, p)].re;
                let aqq = m[(q, q)].re;
                let tau = (aqq - app) / (T::lit(2.0) * habs);
                let t = if tau >= T::zero() {
                    T::one() / (tau + (T::one() + tau * tau).sqrt())
                } else {
                    -T::one() / (-tau + (T::one() + tau * tau).sqrt())
                };
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = t * c;
                // G = [[u c, u s], [-s, c]] on columns p, q.
                let g_pp = u * c;
                let g_pq = u * s;
                let g_qp = Complex::new(-s, T::zero());
                let g_qq = Complex::new(c, T::zero());
                for k in 0..n {
                    let mkp = m[(k, p)];
                    let mkq = m[(k, q)];
                    m[(k, p)] = mkp * g_pp + mkq * g_qp;
                    m[(k, q)] = mkp * g_pq + mkq * g_qq;
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = vkp * g_pp + vkq * g_qp;
                    v[(k, q)] = vkp * g_pq + vkq * g_qq;
                }
                for k in 0..n {
                    let mpk = m[(p, k)];
                    let mqk = m[(q, k)];
                    m[(p, k)] = g_pp.conj() * mpk + g_qp.conj() * mqk;
                    m[(q, k)] = g_pq.conj() * mpk + g_qq.conj() * mqk;
                }
                m[(p, q)] = Complex::zero();
                m[(q, p)] = Complex::zero();
                m[(p, p)] = Complex::new(m[(p, p)].re, T::zero());
                m[(q, q)] = Complex::new(m[(q, q)].re, T::zero());
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| m[(i, i)].re.partial_cmp(&m[(j, j)].re).unwrap_or(std::cmp::Ordering::Equal));
    let values: Vec<T> = order.iter().map(|&i| m[(i, i)].re).collect();
    let vectors = Matrix::from_fn(n, n, |i, j| v[(i, order[j])]);
    if values.iter().any(|x| !x.is_finite()) {
        return Err(Error::Numeric("non-finite eigenvalue".into()));
    }
    Ok(EigenDecomposition { values, vectors })
}
