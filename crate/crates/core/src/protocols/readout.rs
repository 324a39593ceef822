//! Projective readout of the initial state.

use rand::Rng;
use rand_distr::{Binomial, Distribution};

use crate::error::{Error, Result};
use crate::matrix::eigh;
use crate::protocols::Shots;
use crate::state::DensityMatrix;
use crate::CMatrix;

/// Slack allowed on simulated probabilities before they count as a bug.
pub const PROBABILITY_SLACK: f64 = 1e-9;

/// Measurement in the eigenbasis of `ρ₀`; outcome `x` scores the eigenvalue `λ_x`,
/// so the expected score is `Tr(ρ₀ ρ)`.
#[derive(Debug, Clone)]
pub(crate) struct Readout {
    /// `None` when `ρ₀` is already diagonal.
    basis: Option<CMatrix>,
    scores: Vec<f64>,
    /// Index of the single nonzero score, for pure basis states.
    pure: Option<usize>,
}

impl Readout {
    pub fn new(rho0: &DensityMatrix) -> Result<Self> {
        let (basis, scores) = if rho0.is_diagonal(0.0) {
            (None, rho0.populations())
        } else {
            let eig = eigh(rho0.matrix())?;
            (Some(eig.vectors), eig.values)
        };
        let nonzero: Vec<usize> = (0..scores.len()).filter(|&i| scores[i] != 0.0).collect();
        let pure = match nonzero.as_slice() {
            [k] if scores[*k] == 1.0 => Some(*k),
            _ => None,
        };
        Ok(Self { basis, scores, pure })
    }

    pub fn pure_index(&self) -> Option<usize> {
        self.pure
    }

    fn probability(&self, rho: &CMatrix, x: usize) -> Result<f64> {
        let p = match &self.basis {
            None => rho[(x, x)].re,
            Some(v) => {
                let col = v.column_vec(x);
                rho.sandwich(&col, &col).re
            }
        };
        if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&p) {
            return Err(Error::Numeric(format!("outcome probability {p} outside [0, 1]")));
        }
        Ok(p.clamp(0.0, 1.0))
    }

    /// Per-unitary estimate of `Tr(ρ₀ ρ)`.
    pub fn estimate<R: Rng + ?Sized>(&self, rho: &CMatrix, shots: Shots, rng: &mut R) -> Result<f64> {
        if let Some(k) = self.pure {
            return self.score_survival(self.probability(rho, k)?, shots, rng);
        }
        let probs = (0..self.scores.len()).map(|x| self.probability(rho, x)).collect::<Result<Vec<_>>>()?;
        match shots {
            Shots::Analytic => Ok(probs.iter().zip(&self.scores).map(|(p, s)| p * s).sum()),
            Shots::Count(n) => {
                let mut remaining = n;
                let mut mass = 1.0;
                let mut total = 0.0;
                for (p, s) in probs.iter().zip(&self.scores) {
                    if remaining == 0 {
                        break;
                    }
                    let q = if mass > 0.0 { (p / mass).clamp(0.0, 1.0) } else { 1.0 };
                    let k = Binomial::new(remaining, q).map_err(|e| Error::Numeric(e.to_string()))?.sample(rng);
                    total += k as f64 * s;
                    remaining -= k;
                    mass -= p;
                }
                Ok(total / n as f64)
            }
        }
    }

    /// Survival probability of a pure basis state, with optional Bernoulli shots.
    pub fn score_survival<R: Rng + ?Sized>(&self, s: f64, shots: Shots, rng: &mut R) -> Result<f64> {
        if !(-PROBABILITY_SLACK..=1.0 + PROBABILITY_SLACK).contains(&s) {
            return Err(Error::Numeric(format!("survival probability {s} outside [0, 1]")));
        }
        let s = s.clamp(0.0, 1.0);
        match shots {
            Shots::Analytic => Ok(s),
            Shots::Count(n) => {
                let k = Binomial::new(n, s).map_err(|e| Error::Numeric(e.to_string()))?.sample(rng);
                Ok(k as f64 / n as f64)
            }
        }
    }
}
