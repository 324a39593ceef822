//! Noise channels: Kraus form, superoperators and Lindblad generators.

mod lindblad;
mod spec;
mod superop;

pub use lindblad::{LindbladGenerator, RemovedTraces};
pub use spec::{matrix_from_json, matrix_to_json, ChannelKind, ChannelSpec, JsonMatrix, NoiseModel};
pub use superop::Superoperator;

use crate::error::{Error, Result};
use crate::matrix::{frobenius_distance, kron};
use crate::policy::POLICY;
use crate::sampling::{random_kraus_ops_with, SeedSpec};
use crate::state::DensityMatrix;
use crate::{CMatrix, C64};

/// How a channel is stored.
#[derive(Debug, Clone, PartialEq)]
pub enum ChannelForm {
    /// `ρ -> Σ A_k ρ A_k^dag`.
    Kraus(Vec<CMatrix>),
    /// `ρ -> p ρ + (1 - p) Tr(ρ) 1/D`, kept structural so large `D` stays cheap.
    Depolarizing { p: f64 },
    /// Explicit superoperator, used when Kraus sets grow too large.
    Superop(CMatrix),
}

/// A completely positive map on `D x D` matrices.
#[derive(Debug, Clone, PartialEq)]
pub struct Channel {
    dim: usize,
    form: ChannelForm,
}

impl Channel {
    /// Trace-preserving Kraus channel; fails if `||Σ A^dag A - 1||_F > 1e-8`.
    pub fn from_kraus(ops: Vec<CMatrix>) -> Result<Self> {
        let ch = Self::from_kraus_subnormalized(ops)?;
        let defect = ch.trace_preservation_defect();
        if defect > POLICY.trace_preservation {
            return Err(Error::NotTracePreserving { deviation: defect });
        }
        Ok(ch)
    }

    /// Kraus channel without the trace-preservation check.
    pub fn from_kraus_subnormalized(ops: Vec<CMatrix>) -> Result<Self> {
        let first = ops.first().ok_or_else(|| Error::Config("Kraus list is empty".into()))?;
        let dim = first.dim()?;
        for a in &ops {
            if a.rows() != dim || a.cols() != dim {
                return Err(Error::dims(format!("{dim}x{dim} Kraus operator"), format!("{}x{}", a.rows(), a.cols())));
            }
        }
        Ok(Self { dim, form: ChannelForm::Kraus(ops) })
    }

    pub fn identity(dim: usize) -> Self {
        Self { dim, form: ChannelForm::Kraus(vec![CMatrix::identity(dim)]) }
    }

    /// `ρ -> U ρ U^dag`.
    pub fn unitary(u: CMatrix) -> Result<Self> {
        u.ensure_unitary()?;
        Self::from_kraus(vec![u])
    }

    /// Depolarizing channel with strength `p ∈ [0, 1]`.
    pub fn depolarizing(dim: usize, p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter { name: "p", value: p, reason: "must lie in [0, 1]" });
        }
        if dim == 0 {
            return Err(Error::DimOutOfRange { dim, min: 1, max: usize::MAX });
        }
        Ok(Self { dim, form: ChannelForm::Depolarizing { p } })
    }

    /// Single-qubit dephasing `{sqrt(1-q) 1, sqrt(q) Z}`.
    pub fn qubit_dephasing(q: f64) -> Result<Self> {
        check_probability("q", q)?;
        Self::from_kraus(vec![
            CMatrix::identity(2).scale_real((1.0 - q).sqrt()),
            CMatrix::from_real_diag(&[1.0, -1.0]).scale_real(q.sqrt()),
        ])
    }

    /// Single-qubit amplitude damping `{diag(1, sqrt(1-g)), sqrt(g) |0><1|}`.
    pub fn qubit_amplitude_damping(gamma: f64) -> Result<Self> {
        check_probability("gamma", gamma)?;
        Self::from_kraus(vec![
            CMatrix::from_real_diag(&[1.0, (1.0 - gamma).sqrt()]),
            CMatrix::from_real_rows(&[&[0.0, gamma.sqrt()], &[0.0, 0.0]])?,
        ])
    }

    /// Independent dephasing of strength `q` on every qubit of a `2^k` system.
    pub fn dephasing(dim: usize, q: f64) -> Result<Self> {
        Self::qubit_dephasing(q)?.power_on_qubits(dim)
    }

    /// Independent amplitude damping on every qubit of a `2^k` system.
    pub fn amplitude_damping(dim: usize, gamma: f64) -> Result<Self> {
        Self::qubit_amplitude_damping(gamma)?.power_on_qubits(dim)
    }

    /// Random channel with `k` Kraus operators.
    pub fn random(dim: usize, k: usize, seed: SeedSpec) -> Result<Self> {
        Self::from_kraus(random_kraus_ops_with(dim, k, &mut seed.rng())?)
    }

    fn power_on_qubits(&self, dim: usize) -> Result<Self> {
        let qubits = qubit_count(dim)?;
        let mut ch = self.clone();
        for _ in 1..qubits {
            ch = ch.tensor(self)?;
        }
        Ok(ch)
    }

    /// `self ⊗ other`, acting on the composite space with `self` on the leading factor.
    pub fn tensor(&self, other: &Channel) -> Result<Self> {
        let a = self.materialize_kraus()?;
        let b = other.materialize_kraus()?;
        let mut ops = Vec::with_capacity(a.len() * b.len());
        for x in &a {
            for y in &b {
                ops.push(kron(x, y)?);
            }
        }
        Self::from_kraus_subnormalized(ops)
    }

    /// Wraps a superoperator as a channel.
    pub fn from_superoperator(sup: Superoperator) -> Self {
        let dim = sup.dim();
        Self { dim, form: ChannelForm::Superop(sup.into_matrix()) }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn form(&self) -> &ChannelForm {
        &self.form
    }

    pub fn kraus_ops(&self) -> Option<&[CMatrix]> {
        match &self.form {
            ChannelForm::Kraus(ops) => Some(ops),
            _ => None,
        }
    }

    /// Kraus operators, building Pauli-string ones for depolarizing channels on qubits.
    pub fn materialize_kraus(&self) -> Result<Vec<CMatrix>> {
        match &self.form {
            ChannelForm::Kraus(ops) => Ok(ops.clone()),
            ChannelForm::Depolarizing { p } => {
                let strings = pauli_strings(self.dim)?;
                let d2 = (self.dim * self.dim) as f64;
                let rest = ((1.0 - p) / d2).sqrt();
                Ok(strings
                    .into_iter()
                    .enumerate()
                    .map(|(i, s)| if i == 0 { s.scale_real((p + (1.0 - p) / d2).sqrt()) } else { s.scale_real(rest) })
                    .collect())
            }
            ChannelForm::Superop(_) => Err(Error::Config("superoperator-form channel has no stored Kraus set".into())),
        }
    }

    /// `||Σ A^dag A - 1||_F`, or the equivalent superoperator defect.
    pub fn trace_preservation_defect(&self) -> f64 {
        match &self.form {
            ChannelForm::Kraus(ops) => {
                let mut s = CMatrix::zeros(self.dim, self.dim);
                for a in ops {
                    s += &(&a.adjoint() * a);
                }
                frobenius_distance(&s, &CMatrix::identity(self.dim)).unwrap_or(f64::INFINITY)
            }
            ChannelForm::Depolarizing { .. } => 0.0,
            ChannelForm::Superop(m) => {
                Superoperator::new(self.dim, m.clone()).map_or(f64::INFINITY, |s| s.trace_preservation_defect())
            }
        }
    }

    pub fn is_trace_preserving(&self) -> bool {
        self.trace_preservation_defect() <= POLICY.trace_preservation
    }

    /// Action on an arbitrary `D x D` matrix.
    pub fn apply_matrix(&self, x: &CMatrix) -> Result<CMatrix> {
        if x.rows() != self.dim || x.cols() != self.dim {
            return Err(Error::dims(format!("{0}x{0}", self.dim), format!("{}x{}", x.rows(), x.cols())));
        }
        match &self.form {
            ChannelForm::Kraus(ops) => {
                let mut out = CMatrix::zeros(self.dim, self.dim);
                for a in ops {
                    out += &(&(a * x) * &a.adjoint());
                }
                Ok(out)
            }
            ChannelForm::Depolarizing { p } => {
                let mut out = x.scale_real(*p);
                let shift = x.trace() * ((1.0 - p) / self.dim as f64);
                for i in 0..self.dim {
                    out[(i, i)] += shift;
                }
                Ok(out)
            }
            ChannelForm::Superop(m) => CMatrix::unvectorize(&m.mul_vec(x.as_slice()), self.dim),
        }
    }

    /// `Λ(ρ)`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_matrix_unchecked(self.apply_matrix(rho.matrix())?))
    }

    /// `Λ̂ = Σ A_k ⊗ A_k*`.
    pub fn to_superoperator(&self) -> Result<Superoperator> {
        let d2 = self.dim * self.dim;
        if d2 > POLICY.superop_cap {
            return Err(Error::SizeLimit { what: "superoperator", dim: d2, cap: POLICY.superop_cap });
        }
        match &self.form {
            ChannelForm::Kraus(ops) => {
                let mut m = CMatrix::zeros(d2, d2);
                for a in ops {
                    m += &kron(a, &a.conj())?;
                }
                Superoperator::new(self.dim, m)
            }
            ChannelForm::Depolarizing { p } => Superoperator::depolarizing(self.dim, *p),
            ChannelForm::Superop(m) => Superoperator::new(self.dim, m.clone()),
        }
    }

    /// `Tr Λ̂ = Σ_k |Tr A_k|²`.
    pub fn superop_trace(&self) -> f64 {
        match &self.form {
            ChannelForm::Kraus(ops) => ops.iter().map(|a| a.trace().norm_sqr()).sum(),
            ChannelForm::Depolarizing { p } => {
                let d2 = (self.dim * self.dim) as f64;
                p * (d2 - 1.0) + 1.0
            }
            ChannelForm::Superop(m) => m.trace().re,
        }
    }

    /// The motion-reversal frame `ρ -> U^dag Λ(U ρ U^dag) U`, Kraus set `{U^dag A_k U}`.
    pub fn motion_reversal(&self, u: &CMatrix) -> Result<Self> {
        if u.rows() != self.dim || u.cols() != self.dim {
            return Err(Error::dims(format!("{0}x{0} unitary", self.dim), format!("{}x{}", u.rows(), u.cols())));
        }
        u.ensure_unitary()?;
        let form = match &self.form {
            ChannelForm::Kraus(ops) => {
                let ud = u.adjoint();
                ChannelForm::Kraus(ops.iter().map(|a| &(&ud * a) * u).collect())
            }
            ChannelForm::Depolarizing { p } => ChannelForm::Depolarizing { p: *p },
            ChannelForm::Superop(m) => {
                let sup = Superoperator::new(self.dim, m.clone())?;
                ChannelForm::Superop(sup.conjugate_inverse(u)?.into_matrix())
            }
        };
        Ok(Self { dim: self.dim, form })
    }

    /// `self ∘ other`: `other` acts first.
    ///
    /// Kraus sets multiply out while the count stays within the policy cap;
    /// beyond it the result is stored as a superoperator product.
    pub fn compose(&self, other: &Channel) -> Result<Self> {
        if self.dim != other.dim {
            return Err(Error::dims(self.dim, other.dim));
        }
        let dim = self.dim;
        match (&self.form, &other.form) {
            (ChannelForm::Depolarizing { p: a }, ChannelForm::Depolarizing { p: b }) => {
                Ok(Self { dim, form: ChannelForm::Depolarizing { p: a * b } })
            }
            (ChannelForm::Kraus(a), ChannelForm::Kraus(b)) if a.len() * b.len() <= POLICY.kraus_cap => {
                let mut ops = Vec::with_capacity(a.len() * b.len());
                for x in a {
                    for y in b {
                        ops.push(x * y);
                    }
                }
                Ok(Self { dim, form: ChannelForm::Kraus(ops) })
            }
            _ => {
                let sup = self.to_superoperator()?.after(&other.to_superoperator()?)?;
                Ok(Self::from_superoperator(sup))
            }
        }
    }
}

/// `a ∘ b`.
pub fn compose(a: &Channel, b: &Channel) -> Result<Channel> {
    a.compose(b)
}

fn check_probability(name: &'static str, v: f64) -> Result<()> {
    if (0.0..=1.0).contains(&v) {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, value: v, reason: "must lie in [0, 1]" })
    }
}

/// Number of qubits for `dim = 2^k`, `k >= 1`.
pub fn qubit_count(dim: usize) -> Result<u32> {
    if dim >= 2 && dim.is_power_of_two() {
        Ok(dim.trailing_zeros())
    } else {
        Err(Error::Config(format!("dimension {dim} is not a power of two")))
    }
}

/// All `4^k` Pauli strings on `k` qubits, identity first.
pub fn pauli_strings(dim: usize) -> Result<Vec<CMatrix>> {
    let k = qubit_count(dim)?;
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let single = [
        CMatrix::identity(2),
        CMatrix::from_rows(&[vec![zero, one], vec![one, zero]])?,
        CMatrix::from_rows(&[vec![zero, -i], vec![i, zero]])?,
        CMatrix::from_real_diag(&[1.0, -1.0]),
    ];
    let mut strings = vec![CMatrix::identity(1)];
    for _ in 0..k {
        let mut next = Vec::with_capacity(strings.len() * 4);
        for s in &strings {
            for p in &single {
                next.push(kron(s, p)?);
            }
        }
        strings = next;
    }
    Ok(strings)
}

#[cfg(test)]
mod tests;
