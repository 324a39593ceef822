//! Density matrices.

use crate::error::{Error, Result};
use crate::matrix::{eigh, frobenius_distance};
use crate::policy::POLICY;
use crate::{CMatrix, C64};

/// Hermitian, unit-trace, positive semidefinite `D x D` matrix.
///
/// Positivity is checked when built from user input and can be rechecked with
/// [`DensityMatrix::validate`]; evolution steps skip it.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMatrix,
}

impl DensityMatrix {
    /// Validates and wraps `matrix`.
    pub fn new(matrix: CMatrix) -> Result<Self> {
        let rho = Self { matrix };
        rho.validate()?;
        Ok(rho)
    }

    pub(crate) fn from_matrix_unchecked(matrix: CMatrix) -> Self {
        Self { matrix }
    }

    /// `|psi><psi|` for a normalized vector.
    pub fn from_pure(psi: &[C64]) -> Result<Self> {
        let norm = psi.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if (norm - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("state vector norm {norm} is not 1")));
        }
        Ok(Self { matrix: CMatrix::outer(psi, psi) })
    }

    /// Computational basis projector `|k><k|`.
    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::InvalidState(format!("basis index {k} out of range for dimension {dim}")));
        }
        let mut m = CMatrix::zeros(dim, dim);
        m[(k, k)] = C64::new(1.0, 0.0);
        Ok(Self { matrix: m })
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: CMatrix::identity(dim).scale_real(1.0 / dim as f64) }
    }

    /// `a |0><0| + (1 - a) 1/D` with `a` chosen so that `Tr rho^2 = purity`.
    pub fn with_purity(dim: usize, purity: f64) -> Result<Self> {
        let d = dim as f64;
        if dim < 2 || !(1.0 / d - 1e-12..=1.0 + 1e-12).contains(&purity) {
            return Err(Error::InvalidParameter { name: "purity", value: purity, reason: "must lie in [1/D, 1]" });
        }
        let a = ((purity * d - 1.0) / (d - 1.0)).max(0.0).sqrt();
        let mut m = CMatrix::identity(dim).scale_real((1.0 - a) / d);
        m[(0, 0)] += C64::new(a, 0.0);
        Ok(Self { matrix: m })
    }

    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// `Tr rho^2`.
    pub fn purity(&self) -> f64 {
        self.overlap(self)
    }

    /// `Tr(rho sigma)`, real for Hermitian arguments.
    pub fn overlap(&self, other: &DensityMatrix) -> f64 {
        trace_product(&self.matrix, &other.matrix).re
    }

    /// Populations `<k|rho|k>`.
    pub fn populations(&self) -> Vec<f64> {
        self.matrix.diagonal().iter().map(|x| x.re).collect()
    }

    pub fn is_diagonal(&self, tol: f64) -> bool {
        let n = self.dim();
        (0..n).all(|i| (0..n).all(|j| i == j || self.matrix[(i, j)].norm() <= tol))
    }

    /// Checks Hermiticity, unit trace and positivity against the numeric policy.
    pub fn validate(&self) -> Result<()> {
        let n = self.matrix.dim()?;
        if !self.matrix.is_finite() {
            return Err(Error::InvalidState("non-finite entries".into()));
        }
        let herm = frobenius_distance(&self.matrix, &self.matrix.adjoint())?;
        if herm > POLICY.hermiticity {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {herm:e})")));
        }
        let tr = self.matrix.trace();
        if (tr.re - 1.0).abs() > POLICY.trace || tr.im.abs() > POLICY.trace {
            return Err(Error::InvalidState(format!("trace {tr} is not 1")));
        }
        if n > 0 {
            let min = eigh(&self.matrix)?.values[0];
            if min < -POLICY.positivity {
                return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
            }
        }
        Ok(())
    }
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: &CMatrix, b: &CMatrix) -> C64 {
    let n = a.rows();
    let mut acc = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..a.cols() {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn purity_constructor_hits_target() {
        let rho = DensityMatrix::with_purity(4, 0.6).unwrap();
        assert!((rho.purity() - 0.6).abs() < 1e-14);
        assert!((rho.trace() - 1.0).abs() < 1e-15);
        rho.validate().unwrap();
        assert!(DensityMatrix::with_purity(4, 0.2).is_err());
        assert!((DensityMatrix::with_purity(4, 0.25).unwrap().purity() - 0.25).abs() < 1e-14);
    }

    #[test]
    fn validation_rejects_bad_matrices() {
        let not_unit = CMatrix::identity(2);
        assert!(DensityMatrix::new(not_unit).is_err());
        let negative = CMatrix::from_real_diag(&[1.5, -0.5]);
        assert!(DensityMatrix::new(negative).is_err());
        let non_herm = CMatrix::from_real_rows(&[&[0.5, 0.3], &[0.0, 0.5]]).unwrap();
        assert!(DensityMatrix::new(non_herm).is_err());
        assert!(DensityMatrix::new(CMatrix::from_real_diag(&[0.25, 0.75])).is_ok());
    }

    #[test]
    fn pure_state_requires_normalization() {
        let s = 0.5f64.sqrt();
        let plus = [C64::new(s, 0.0), C64::new(s, 0.0)];
        let rho = DensityMatrix::from_pure(&plus).unwrap();
        assert!((rho.purity() - 1.0).abs() < 1e-15);
        assert!(DensityMatrix::from_pure(&[C64::new(1.0, 0.0), C64::new(1.0, 0.0)]).is_err());
    }
}
