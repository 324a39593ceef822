use crate::error::{Error, Result};
use crate::matrix::kron;
use crate::policy::POLICY;
use crate::{CMatrix, C64};

/// `D² x D²` matrix acting on row-stacked `vec(X)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Superoperator {
    dim: usize,
    matrix: CMatrix,
}

impl Superoperator {
    pub fn new(dim: usize, matrix: CMatrix) -> Result<Self> {
        let d2 = dim * dim;
        if d2 > POLICY.superop_cap {
            return Err(Error::SizeLimit { what: "superoperator", dim: d2, cap: POLICY.superop_cap });
        }
        if matrix.rows() != d2 || matrix.cols() != d2 {
            return Err(Error::dims(format!("{d2}x{d2}"), format!("{}x{}", matrix.rows(), matrix.cols())));
        }
        Ok(Self { dim, matrix })
    }

    /// Tabulates a linear map from its action on the matrix units `E_kl`.
    pub fn from_map(dim: usize, map: impl Fn(&CMatrix) -> CMatrix) -> Result<Self> {
        let d2 = dim * dim;
        if d2 > POLICY.superop_cap {
            return Err(Error::SizeLimit { what: "superoperator", dim: d2, cap: POLICY.superop_cap });
        }
        let mut m = CMatrix::zeros(d2, d2);
        for k in 0..dim {
            for l in 0..dim {
                let mut e = CMatrix::zeros(dim, dim);
                e[(k, l)] = C64::new(1.0, 0.0);
                let image = map(&e);
                let col = k * dim + l;
                for (row, &v) in image.as_slice().iter().enumerate() {
                    m[(row, col)] = v;
                }
            }
        }
        Ok(Self { dim, matrix: m })
    }

    /// `p 1 + (1 - p) |vec 1><vec 1| / D`.
    pub fn depolarizing(dim: usize, p: f64) -> Result<Self> {
        let v = CMatrix::identity(dim).into_vec();
        let proj = CMatrix::outer(&v, &v).scale_real((1.0 - p) / dim as f64);
        let m = &CMatrix::identity(dim * dim).scale_real(p) + &proj;
        Self::new(dim, m)
    }

    /// `U ⊗ U*`, the superoperator of `X -> U X U^dag`.
    pub fn of_unitary(u: &CMatrix) -> Result<Self> {
        let dim = u.dim()?;
        Self::new(dim, kron(u, &u.conj())?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn apply(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(Error::dims(format!("{0}x{0}", self.dim), format!("{}x{}", x.rows(), x.cols())));
        }
        CMatrix::unvectorize(&self.matrix.mul_vec(x.as_slice()), self.dim)
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    /// Composition `self ∘ other`; `other` acts first.
    pub fn after(&self, other: &Superoperator) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::dims(self.dim, other.dim));
        }
        Ok(Self { dim: self.dim, matrix: &self.matrix * &other.matrix })
    }

    /// `Û S Û^dag` with `Û = U ⊗ U*`.
    pub fn conjugate(&self, u: &CMatrix) -> Result<Self> {
        let uh = Self::of_unitary(u)?;
        if uh.dim != self.dim {
            return Err(Error::dims(self.dim, uh.dim));
        }
        let m = &(&uh.matrix * &self.matrix) * &uh.matrix.adjoint();
        Ok(Self { dim: self.dim, matrix: m })
    }

    /// `Û^dag S Û`, the motion-reversal frame.
    pub fn conjugate_inverse(&self, u: &CMatrix) -> Result<Self> {
        self.conjugate(&u.adjoint())
    }

    /// Deviation of `<vec 1| S` from `<vec 1|`; zero for trace-preserving maps.
    pub fn trace_preservation_defect(&self) -> f64 {
        let d = self.dim;
        let d2 = d * d;
        let mut acc = 0.0;
        for col in 0..d2 {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..d {
                s += self.matrix[(k * d + k, col)];
            }
            let target = if col % (d + 1) == 0 { 1.0 } else { 0.0 };
            acc += (s - C64::new(target, 0.0)).norm_sqr();
        }
        acc.sqrt()
    }
}
