use crate::error::{Error, Result};
use crate::matrix::kron;
use crate::policy::POLICY;
use crate::{CMatrix, C64};

use super::Superoperator;

/// GKLS generator `L(ρ) = -i[H, ρ] + Σ (V ρ V^dag - ½{V^dag V, ρ})` with noise
/// strength `epsilon`.
///
/// The Hamiltonian and jump operators are stored traceless: any trace on input
/// is subtracted as `(Tr M / D) 1` and the removed amounts are kept in
/// [`LindbladGenerator::removed_traces`].
#[derive(Debug, Clone, PartialEq)]
pub struct LindbladGenerator {
    dim: usize,
    hamiltonian: CMatrix,
    jump_ops: Vec<CMatrix>,
    epsilon: f64,
    removed: RemovedTraces,
    // cached Σ V^dag V
    jump_gram: CMatrix,
}

/// Scalars subtracted from the inputs to make them traceless.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RemovedTraces {
    pub hamiltonian: C64,
    pub jumps: Vec<C64>,
}

impl LindbladGenerator {
    pub fn new(hamiltonian: CMatrix, jump_ops: Vec<CMatrix>, epsilon: f64) -> Result<Self> {
        let dim = hamiltonian.dim()?;
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter { name: "epsilon", value: epsilon, reason: "must be >= 0" });
        }
        let scale = hamiltonian.frobenius_norm().max(1.0);
        if !hamiltonian.is_hermitian(POLICY.hermiticity * scale) {
            return Err(Error::Config("Lindblad Hamiltonian is not Hermitian".into()));
        }
        let (h, h_shift) = hamiltonian.traceless_part();
        let h = h.hermitian_part();
        let mut jumps = Vec::with_capacity(jump_ops.len());
        let mut shifts = Vec::with_capacity(jump_ops.len());
        let mut gram = CMatrix::zeros(dim, dim);
        for v in jump_ops {
            if v.rows() != dim || v.cols() != dim {
                return Err(Error::dims(format!("{dim}x{dim} jump operator"), format!("{}x{}", v.rows(), v.cols())));
            }
            let (v0, shift) = v.traceless_part();
            gram += &(&v0.adjoint() * &v0);
            jumps.push(v0);
            shifts.push(shift);
        }
        Ok(Self {
            dim,
            hamiltonian: h,
            jump_ops: jumps,
            epsilon,
            removed: RemovedTraces { hamiltonian: h_shift, jumps: shifts },
            jump_gram: gram,
        })
    }

    /// Generator with jump operators only.
    pub fn dissipative(dim: usize, jump_ops: Vec<CMatrix>, epsilon: f64) -> Result<Self> {
        Self::new(CMatrix::zeros(dim, dim), jump_ops, epsilon)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn hamiltonian(&self) -> &CMatrix {
        &self.hamiltonian
    }

    pub fn jump_ops(&self) -> &[CMatrix] {
        &self.jump_ops
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn removed_traces(&self) -> &RemovedTraces {
        &self.removed
    }

    /// `Σ V^dag V`.
    pub fn jump_gram(&self) -> &CMatrix {
        &self.jump_gram
    }

    /// `Σ Tr(V^dag V)`.
    pub fn dissipation_weight(&self) -> f64 {
        self.jump_gram.trace().re
    }

    /// `L(ρ)`, not scaled by epsilon.
    pub fn apply(&self, rho: &CMatrix) -> Result<CMatrix> {
        if rho.rows() != self.dim || rho.cols() != self.dim {
            return Err(Error::dims(format!("{0}x{0}", self.dim), format!("{}x{}", rho.rows(), rho.cols())));
        }
        let minus_i = C64::new(0.0, -1.0);
        let mut out = crate::matrix::commutator(&self.hamiltonian, rho).scale(minus_i);
        for v in &self.jump_ops {
            out += &(&(v * rho) * &v.adjoint());
        }
        out.axpy(C64::new(-0.5, 0.0), &crate::matrix::anticommutator(&self.jump_gram, rho));
        Ok(out)
    }

    /// Superoperator of `L` (without epsilon) on row-stacked vectors.
    pub fn superoperator(&self) -> Result<Superoperator> {
        let d = self.dim;
        let id = CMatrix::identity(d);
        let minus_i = C64::new(0.0, -1.0);
        let mut m = &kron(&self.hamiltonian, &id)? - &kron(&id, &self.hamiltonian.transpose())?;
        m = m.scale(minus_i);
        for v in &self.jump_ops {
            m += &kron(v, &v.conj())?;
        }
        m.axpy(C64::new(-0.5, 0.0), &kron(&self.jump_gram, &id)?);
        m.axpy(C64::new(-0.5, 0.0), &kron(&id, &self.jump_gram.transpose())?);
        Superoperator::new(d, m)
    }

    /// Same generator with every operator conjugated, `M -> U^dag M U`.
    pub fn conjugated(&self, u: &CMatrix) -> Result<Self> {
        u.ensure_unitary()?;
        let ud = u.adjoint();
        let h = &(&ud * &self.hamiltonian) * u;
        let jumps = self.jump_ops.iter().map(|v| &(&ud * v) * u).collect();
        Self::new(h.hermitian_part(), jumps, self.epsilon)
    }

    pub fn with_epsilon(&self, epsilon: f64) -> Result<Self> {
        if !(epsilon >= 0.0 && epsilon.is_finite()) {
            return Err(Error::InvalidParameter { name: "epsilon", value: epsilon, reason: "must be >= 0" });
        }
        Ok(Self { epsilon, ..self.clone() })
    }
}
