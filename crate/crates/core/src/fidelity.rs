//! Closed-form fidelities, depolarizing strength and decay laws.
//!
//! Rate convention: [`lindblad_rate`] already contains the noise strength `ε`,
//! so predictions are written in physical time `t`.

use serde::{Deserialize, Serialize};

use crate::channels::{Channel, ChannelForm, LindbladGenerator};
use crate::error::{Error, Result};
use crate::policy::POLICY;
use crate::state::{trace_product, DensityMatrix};
use crate::{CMatrix, C64};

/// `F̄ = (Σ|Tr A_k|² + D) / (D² + D)`.
pub fn average_gate_fidelity(ch: &Channel) -> f64 {
    let d = ch.dim() as f64;
    (ch.superop_trace() + d) / (d * d + d)
}

/// `p = (Tr Λ̂ - 1) / (D² - 1)`.
pub fn depolarizing_strength(ch: &Channel) -> f64 {
    let d = ch.dim() as f64;
    (ch.superop_trace() - 1.0) / (d * d - 1.0)
}

/// Inverse of `F = p + (1 - p)/D`.
pub fn strength_from_fidelity(fidelity: f64, dim: usize) -> f64 {
    let d = dim as f64;
    (fidelity * d - 1.0) / (d - 1.0)
}

fn clip_real(z: C64) -> Result<f64> {
    if z.im.abs() > POLICY.imag_clip {
        return Err(Error::Numeric(format!("fidelity has imaginary part {:e}", z.im)));
    }
    Ok(z.re)
}

/// `Tr[ρ₀ U^dag Λ(U ρ₀ U^dag) U]`.
pub fn exact_gate_fidelity(ch: &Channel, u: &CMatrix, rho0: &DensityMatrix) -> Result<f64> {
    let d = ch.dim();
    if u.rows() != d || u.cols() != d {
        return Err(Error::dims(format!("{d}x{d} unitary"), format!("{}x{}", u.rows(), u.cols())));
    }
    if rho0.dim() != d {
        return Err(Error::dims(format!("{d}x{d} state"), format!("{0}x{0}", rho0.dim())));
    }
    u.ensure_unitary()?;
    let rotated = &(u * rho0.matrix()) * &u.adjoint();
    let out = ch.apply_matrix(&rotated)?;
    clip_real(trace_product(&rotated, &out))
}

/// `Σ_k |<ψ|A_k|ψ>|²` for a normalized `ψ`.
pub fn pure_state_fidelity(ch: &Channel, psi: &[C64]) -> Result<f64> {
    let d = ch.dim();
    if psi.len() != d {
        return Err(Error::dims(format!("length-{d} vector"), format!("length {}", psi.len())));
    }
    match ch.form() {
        ChannelForm::Kraus(ops) => {
            let mut acc = 0.0;
            for a in ops {
                let a_psi = a.mul_vec(psi);
                let amp: C64 = psi.iter().zip(&a_psi).map(|(x, y)| x.conj() * y).sum();
                acc += amp.norm_sqr();
            }
            Ok(acc)
        }
        ChannelForm::Depolarizing { p } => Ok(p + (1.0 - p) / d as f64),
        ChannelForm::Superop(_) => {
            let rho = CMatrix::outer(psi, psi);
            clip_real(trace_product(&rho, &ch.apply_matrix(&rho)?))
        }
    }
}

/// Parameters of an exponential fidelity decay.
///
/// `strength` is `p` per step for discrete protocols and the rate `γ` for
/// continuous ones.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayModel {
    pub strength: f64,
    pub dim: usize,
    pub purity: f64,
}

impl DecayModel {
    pub fn discrete(p: f64, dim: usize, purity: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidParameter { name: "p", value: p, reason: "must lie in [0, 1]" });
        }
        Self::checked(p, dim, purity)
    }

    pub fn continuous(gamma: f64, dim: usize, purity: f64) -> Result<Self> {
        if !(gamma >= 0.0 && gamma.is_finite()) {
            return Err(Error::InvalidParameter { name: "gamma", value: gamma, reason: "must be finite and >= 0" });
        }
        Self::checked(gamma, dim, purity)
    }

    fn checked(strength: f64, dim: usize, purity: f64) -> Result<Self> {
        if dim < 2 {
            return Err(Error::DimOutOfRange { dim, min: 2, max: usize::MAX });
        }
        let floor = 1.0 / dim as f64;
        if !(purity >= floor - POLICY.trace && purity <= 1.0 + POLICY.trace) {
            return Err(Error::InvalidParameter { name: "purity", value: purity, reason: "must lie in [1/D, 1]" });
        }
        Ok(Self { strength, dim, purity })
    }

    fn mix(&self, decay: f64) -> f64 {
        decay * self.purity + (1.0 - decay) / self.dim as f64
    }
}

/// `pⁿ·purity + (1 - pⁿ)/D`.
pub fn echo_decay_prediction(model: &DecayModel, n: u32) -> f64 {
    model.mix(model.strength.powi(n as i32))
}

/// `e^{-γt}·purity + (1 - e^{-γt})/D`.
pub fn continuous_decay_prediction(model: &DecayModel, t: f64) -> f64 {
    model.mix((-model.strength * t).exp())
}

/// Decay rate of the Haar-averaged generator, `γ = ε D Σ_α Tr(V_α^dag V_α) / (D² - 1)`.
///
/// Equals `-ε Tr L̂ / (D² - 1)` for traceless `V_α`.
pub fn lindblad_rate(gen: &LindbladGenerator) -> f64 {
    let d = gen.dim() as f64;
    gen.epsilon() * d * gen.dissipation_weight() / (d * d - 1.0)
}
