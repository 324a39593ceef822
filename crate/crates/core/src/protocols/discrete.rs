//! Discrete-time protocols: motion reversal, iterated reversal and echoes.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, Protocol, Shots};
use super::curve::{CurvePoint, DecayCurve};
use super::readout::Readout;
use crate::channels::Channel;
use crate::error::{Error, Result};
use crate::fidelity::pure_state_fidelity;
use crate::sampling::{haar_unitary_with, stream_of, SeedSpec};
use crate::stats::summarize;
use crate::CMatrix;

/// Grand mean of a single motion-reversal experiment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub f_hat: f64,
    /// Spread of the per-unitary estimates divided by `sqrt(N)`.
    pub stderr: f64,
    pub n_unitaries: usize,
    pub shots: Shots,
}

fn expect_protocol(cfg: &ExperimentConfig, want: Protocol) -> Result<()> {
    if cfg.protocol != want {
        return Err(Error::Config(format!(
            "config is for protocol `{}`, expected `{}`",
            cfg.protocol.name(),
            want.name()
        )));
    }
    cfg.validate()
}

fn rotate(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    &(u * rho) * &u.adjoint()
}

fn unrotate(u: &CMatrix, rho: &CMatrix) -> CMatrix {
    &(&u.adjoint() * rho) * u
}

struct Setup {
    dim: usize,
    channels: Vec<Channel>,
    rho0: CMatrix,
    readout: Readout,
    shots: Shots,
    seed: SeedSpec,
}

impl Setup {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let rho0 = cfg.initial_state.build(cfg.dim)?;
        let channels = cfg.build_step_channels()?;
        if channels.iter().any(|c| c.dim() != cfg.dim) {
            return Err(Error::Config("channel dimension differs from `dim`".into()));
        }
        Ok(Self {
            dim: cfg.dim,
            channels,
            readout: Readout::new(&rho0)?,
            rho0: rho0.into_matrix(),
            shots: cfg.shots,
            seed: cfg.seed_spec(),
        })
    }

    /// Channel applied at step `j >= 1`.
    fn channel(&self, j: usize) -> &Channel {
        &self.channels[(j - 1) % self.channels.len()]
    }

    fn unitaries<R: Rng + ?Sized>(&self, n: usize, rng: &mut R) -> Result<Vec<CMatrix>> {
        (0..n).map(|_| haar_unitary_with(self.dim, rng)).collect()
    }

    fn rng(&self, n: usize, trial: usize) -> rand_chacha::ChaCha8Rng {
        self.seed.with_stream(stream_of(n, trial)).rng()
    }

    /// `U_n^dag Λ(U_n ... U_1^dag Λ(U_1 ρ U_1^dag) U_1 ... U_n^dag) U_n`.
    fn iterated(&self, us: &[CMatrix]) -> Result<CMatrix> {
        let mut rho = self.rho0.clone();
        for (j, u) in us.iter().enumerate() {
            rho = unrotate(u, &self.channel(j + 1).apply_matrix(&rotate(u, &rho))?);
        }
        Ok(rho)
    }

    /// Noisy forward sequence followed by the exact inverse.
    fn echo(&self, us: &[CMatrix]) -> Result<CMatrix> {
        let mut rho = self.rho0.clone();
        for (j, u) in us.iter().enumerate() {
            rho = self.channel(j + 1).apply_matrix(&rotate(u, &rho))?;
        }
        for u in us.iter().rev() {
            rho = unrotate(u, &rho);
        }
        Ok(rho)
    }

    /// Noise after every forward and every backward gate.
    fn generalized_echo(&self, us: &[CMatrix]) -> Result<CMatrix> {
        let n = us.len();
        let mut rho = self.rho0.clone();
        for (j, u) in us.iter().enumerate() {
            rho = self.channel(j + 1).apply_matrix(&rotate(u, &rho))?;
        }
        for (k, u) in us.iter().rev().enumerate() {
            rho = self.channel(n + k + 1).apply_matrix(&unrotate(u, &rho))?;
        }
        Ok(rho)
    }

    fn sequence(&self, protocol: Protocol, us: &[CMatrix]) -> Result<CMatrix> {
        match protocol {
            Protocol::Iterated | Protocol::MotionReversal => self.iterated(us),
            Protocol::Echo => self.echo(us),
            Protocol::GeneralizedEcho => self.generalized_echo(us),
            Protocol::LindbladEcho => unreachable!("continuous protocol"),
        }
    }

    /// One destructive experiment of length `n`.
    fn single(&self, protocol: Protocol, n: usize, trial: usize) -> Result<f64> {
        let mut rng = self.rng(n, trial);
        let us = self.unitaries(n, &mut rng)?;
        let rho = self.sequence(protocol, &us)?;
        self.readout.estimate(&rho, self.shots, &mut rng)
    }

    /// All lengths `0..=n_max` from one unitary sequence.
    fn trajectory(&self, protocol: Protocol, n_max: usize, trial: usize) -> Result<Vec<f64>> {
        let mut rng = self.rng(0, trial);
        let us = self.unitaries(n_max, &mut rng)?;
        let mut out = Vec::with_capacity(n_max + 1);
        match protocol {
            Protocol::Iterated | Protocol::MotionReversal => {
                let mut rho = self.rho0.clone();
                out.push(self.readout.estimate(&rho, self.shots, &mut rng)?);
                for (j, u) in us.iter().enumerate() {
                    rho = unrotate(u, &self.channel(j + 1).apply_matrix(&rotate(u, &rho))?);
                    out.push(self.readout.estimate(&rho, self.shots, &mut rng)?);
                }
            }
            Protocol::Echo => {
                // F_n = Tr[W ρ₀ W^dag ρ_n] with W = U_n ... U_1; readout in the rotated frame.
                let mut rho = self.rho0.clone();
                let mut w = CMatrix::identity(self.dim);
                out.push(self.readout.estimate(&rho, self.shots, &mut rng)?);
                for (j, u) in us.iter().enumerate() {
                    rho = self.channel(j + 1).apply_matrix(&rotate(u, &rho))?;
                    w = u * &w;
                    out.push(self.readout.estimate(&unrotate(&w, &rho), self.shots, &mut rng)?);
                }
            }
            Protocol::GeneralizedEcho => {
                for n in 0..=n_max {
                    let rho = self.generalized_echo(&us[..n])?;
                    out.push(self.readout.estimate(&rho, self.shots, &mut rng)?);
                }
            }
            Protocol::LindbladEcho => unreachable!("continuous protocol"),
        }
        Ok(out)
    }
}

/// Fidelity curve for `n = 0..=n_max`, one point per sequence length.
fn run_curve(cfg: &ExperimentConfig, protocol: Protocol) -> Result<DecayCurve> {
    expect_protocol(cfg, protocol)?;
    let setup = Setup::new(cfg)?;
    let trials = cfg.n_unitaries;
    let n_max = cfg.n_max;
    let per_n: Vec<Vec<f64>> = if cfg.trajectory_mode {
        let rows: Vec<Vec<f64>> =
            (0..trials).into_par_iter().map(|t| setup.trajectory(protocol, n_max, t)).collect::<Result<_>>()?;
        (0..=n_max).map(|n| rows.iter().map(|r| r[n]).collect()).collect()
    } else {
        let items: Vec<(usize, usize)> = (0..=n_max).flat_map(|n| (0..trials).map(move |t| (n, t))).collect();
        let values: Vec<f64> =
            items.par_iter().map(|&(n, t)| setup.single(protocol, n, t)).collect::<Result<_>>()?;
        values.chunks(trials).map(<[f64]>::to_vec).collect()
    };
    Ok(DecayCurve::new(per_n.iter().enumerate().map(|(n, v)| CurvePoint::from_trials(n as f64, v)).collect()))
}

/// Single motion reversal `ρ_f = U^dag Λ(U ρ₀ U^dag) U` over `N` Haar unitaries.
pub fn run_motion_reversal(cfg: &ExperimentConfig) -> Result<Estimate> {
    expect_protocol(cfg, Protocol::MotionReversal)?;
    let setup = Setup::new(cfg)?;
    let values: Vec<f64> = (0..cfg.n_unitaries)
        .into_par_iter()
        .map(|t| {
            let mut rng = setup.rng(1, t);
            let u: CMatrix = haar_unitary_with(setup.dim, &mut rng)?;
            let ch = setup.channel(1);
            match setup.readout.pure_index() {
                Some(k) => {
                    let psi = u.column_vec(k);
                    let s = pure_state_fidelity(ch, &psi)?;
                    setup.readout.score_survival(s, setup.shots, &mut rng)
                }
                None => {
                    let rho = unrotate(&u, &ch.apply_matrix(&rotate(&u, &setup.rho0))?);
                    setup.readout.estimate(&rho, setup.shots, &mut rng)
                }
            }
        })
        .collect::<Result<_>>()?;
    let s = summarize(&values);
    Ok(Estimate { f_hat: s.mean, stderr: s.stderr, n_unitaries: s.count, shots: cfg.shots })
}

/// Fresh unitaries at every step, each followed by its exact inverse.
pub fn run_iterated_motion_reversal(cfg: &ExperimentConfig) -> Result<DecayCurve> {
    run_curve(cfg, Protocol::Iterated)
}

/// `n` noisy forward gates, then the ideal inverse of the whole sequence.
pub fn run_loschmidt_echo(cfg: &ExperimentConfig) -> Result<DecayCurve> {
    run_curve(cfg, Protocol::Echo)
}

/// Forward and backward sequences both noisy.
pub fn run_generalized_echo(cfg: &ExperimentConfig) -> Result<DecayCurve> {
    run_curve(cfg, Protocol::GeneralizedEcho)
}
