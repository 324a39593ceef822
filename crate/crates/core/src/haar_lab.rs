//! Numerical checks of Haar averaging: the two `U(D)` invariants, convergence
//! of the empirical twirl, concentration of the fidelity, and the equality of
//! state and unitary averages.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::channels::{Channel, Superoperator};
use crate::error::{Error, Result};
use crate::fidelity::{depolarizing_strength, pure_state_fidelity};
use crate::matrix::{frobenius_distance, kron};
use crate::sampling::{haar_unitary_with, random_state_vector_with, stream_of, SeedSpec};
use crate::stats::{loglog_slope, summarize, Num, Summary};
use crate::{CMatrix, C64};

/// Samples summed sequentially inside one parallel task.
const CHUNK: usize = 128;

/// Sample variances at or below this are roundoff.
pub const VARIANCE_FLOOR: f64 = 1e-28;

/// `Tr Λ(1)`.
pub fn invariant_one(map: &Superoperator) -> C64 {
    let d = map.dim();
    let v = CMatrix::identity(d).into_vec();
    let image = map.matrix().mul_vec(&v);
    (0..d).map(|k| image[k * d + k]).sum()
}

/// `Tr Λ̂`, the literal trace of the `D² x D²` matrix.
pub fn invariant_two(map: &Superoperator) -> C64 {
    map.trace()
}

/// Coefficients `(a, b)` of the projection of `m` onto `a 1 + b |vec 1><vec 1|/D`.
///
/// Both coordinates are fixed by the invariants: `Tr m = a D² + b` and `Tr m(1) = D (a + b)`.
pub fn invariant_projection(map: &Superoperator) -> (f64, f64) {
    let d = map.dim() as f64;
    let inv1 = invariant_one(map).re;
    let inv2 = invariant_two(map).re;
    let a = (inv2 - inv1 / d) / (d * d - 1.0);
    (a, inv1 / d - a)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TwirlReport {
    pub n_samples: usize,
    /// `||(1/n) Σ Û Λ̂ Û^dag - Λ̂_dep(p)||_F`.
    pub distance_to_depolarizing: f64,
    pub p_empirical: f64,
    pub p_analytic: f64,
    /// Largest per-sample change of either invariant under conjugation.
    pub invariant_drift: f64,
}

struct Partial {
    sum: CMatrix,
    drift: f64,
}

fn conjugated_sum(sup: &Superoperator, seed: SeedSpec, range: std::ops::Range<usize>) -> Result<Partial> {
    let d = sup.dim();
    let (ref1, ref2) = (invariant_one(sup), invariant_two(sup));
    let mut sum = CMatrix::zeros(d * d, d * d);
    let mut drift = 0.0f64;
    for i in range {
        let u: CMatrix = haar_unitary_with(d, &mut seed.with_stream(stream_of(0, i)).rng())?;
        let big = kron(&u, &u.conj())?;
        let sample = Superoperator::new(d, &(&big * sup.matrix()) * &big.adjoint())?;
        drift = drift.max((invariant_one(&sample) - ref1).norm()).max((invariant_two(&sample) - ref2).norm());
        sum += sample.matrix();
    }
    Ok(Partial { sum, drift })
}

/// Twirl reports at each checkpoint, all built from one sample sequence.
///
/// Sample `i` always uses the same unitary, and partial sums are combined in a
/// fixed order, so the output does not depend on the thread count.
pub fn twirl_convergence(ch: &Channel, checkpoints: &[usize], seed: SeedSpec) -> Result<Vec<TwirlReport>> {
    let d = ch.dim();
    if d * d > 1024 {
        return Err(Error::SizeLimit { what: "twirl superoperator", dim: d * d, cap: 1024 });
    }
    if checkpoints.is_empty() || checkpoints[0] == 0 || checkpoints.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("checkpoints must be positive and increasing".into()));
    }
    let sup = ch.to_superoperator()?;
    let p_analytic = depolarizing_strength(ch);
    let ideal = Superoperator::depolarizing(d, p_analytic)?;

    let mut ranges = Vec::new();
    let mut start = 0;
    for &cp in checkpoints {
        while start < cp {
            let end = (start + CHUNK).min(cp);
            ranges.push(start..end);
            start = end;
        }
    }
    let partials: Vec<Partial> =
        ranges.par_iter().map(|r| conjugated_sum(&sup, seed, r.clone())).collect::<Result<_>>()?;

    let mut reports = Vec::with_capacity(checkpoints.len());
    let mut total = CMatrix::zeros(d * d, d * d);
    let mut drift = 0.0f64;
    let mut next = checkpoints.iter().peekable();
    for (range, part) in ranges.iter().zip(&partials) {
        total += &part.sum;
        drift = drift.max(part.drift);
        if next.peek() == Some(&&range.end) {
            next.next();
            let n = range.end;
            let avg = Superoperator::new(d, total.scale_real(1.0 / n as f64))?;
            reports.push(TwirlReport {
                n_samples: n,
                distance_to_depolarizing: frobenius_distance(avg.matrix(), ideal.matrix())?,
                p_empirical: invariant_projection(&avg).0,
                p_analytic,
                invariant_drift: drift,
            });
        }
    }
    Ok(reports)
}

/// `(1/n) Σ Û_i Λ̂ Û_i^dag` compared with the depolarizing channel of the same `p`.
pub fn empirical_twirl(ch: &Channel, n_samples: usize, seed: SeedSpec) -> Result<TwirlReport> {
    Ok(twirl_convergence(ch, &[n_samples], seed)?.remove(0))
}

/// Channel families for the concentration study, built per dimension.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ChannelFamily {
    Identity,
    Depolarizing { p: f64 },
    /// Phase flip with probability `q` on every qubit.
    Dephasing { q: f64 },
    /// Amplitude damping on the first qubit only.
    AmplitudeDampingFirstQubit { gamma: f64 },
}

impl ChannelFamily {
    pub fn build(&self, dim: usize) -> Result<Channel> {
        match *self {
            ChannelFamily::Identity => Ok(Channel::identity(dim)),
            ChannelFamily::Depolarizing { p } => Channel::depolarizing(dim, p),
            ChannelFamily::Dephasing { q } => Channel::dephasing(dim, q),
            ChannelFamily::AmplitudeDampingFirstQubit { gamma } => {
                if !dim.is_multiple_of(2) {
                    return Err(Error::Config(format!("dimension {dim} has no qubit factor")));
                }
                Channel::qubit_amplitude_damping(gamma)?.tensor(&Channel::identity(dim / 2))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationRow {
    pub dim: usize,
    pub mean: f64,
    pub variance: f64,
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConcentrationReport {
    pub family: ChannelFamily,
    pub rows: Vec<ConcentrationRow>,
    /// Slope of `ln Var` against `ln D`; `None` if some variance is at the roundoff floor.
    pub slope: Option<f64>,
}

impl ConcentrationReport {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("dim,mean,variance,samples\n");
        for r in &self.rows {
            out.push_str(&format!("{},{},{},{}\n", r.dim, Num(r.mean), Num(r.variance), r.samples));
        }
        out
    }
}

/// Spread over Haar unitaries of the motion-reversal fidelity at `ρ₀ = |0><0|`.
///
/// Only `U|0>` enters the fidelity, so each sample draws that column directly:
/// a normalized complex Gaussian vector, the first column of a Haar unitary.
pub fn concentration_study(
    family: ChannelFamily,
    dims: &[usize],
    n_samples: usize,
    seed: SeedSpec,
) -> Result<ConcentrationReport> {
    if n_samples < 2 {
        return Err(Error::Config("concentration study needs at least 2 samples".into()));
    }
    let mut rows = Vec::with_capacity(dims.len());
    for &dim in dims {
        if dim > 128 {
            return Err(Error::DimOutOfRange { dim, min: 2, max: 128 });
        }
        let ch = family.build(dim)?;
        let dim_seed = seed.derive(dim as u64);
        let values: Vec<f64> = (0..n_samples)
            .into_par_iter()
            .map(|i| {
                let psi = random_state_vector_with(dim, &mut dim_seed.with_stream(stream_of(0, i)).rng())?;
                pure_state_fidelity(&ch, &psi)
            })
            .collect::<Result<_>>()?;
        let s = summarize(&values);
        rows.push(ConcentrationRow { dim, mean: s.mean, variance: s.variance, samples: s.count });
    }
    let slope = if rows.len() >= 2 && rows.iter().all(|r| r.variance > VARIANCE_FLOOR) {
        let x: Vec<f64> = rows.iter().map(|r| r.dim as f64).collect();
        let y: Vec<f64> = rows.iter().map(|r| r.variance).collect();
        Some(loglog_slope(&x, &y)?)
    } else {
        None
    };
    Ok(ConcentrationReport { family, rows, slope })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceReport {
    /// Average over Fubini-Study states at one fixed unitary.
    pub over_states: Summary,
    /// Average over Haar unitaries at one fixed state.
    pub over_unitaries: Summary,
}

impl EquivalenceReport {
    /// `|difference| / combined standard error`.
    pub fn z_score(&self) -> f64 {
        let diff = (self.over_states.mean - self.over_unitaries.mean).abs();
        let se = self.over_states.stderr.hypot(self.over_unitaries.stderr);
        if se == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / se
        }
    }
}

/// Exact fidelities `<ψ|U^dag Λ(U|ψ><ψ|U^dag) U|ψ>` averaged two ways.
pub fn state_vs_unitary_average(ch: &Channel, n: usize, seed: SeedSpec) -> Result<EquivalenceReport> {
    let d = ch.dim();
    if d > 64 {
        return Err(Error::DimOutOfRange { dim: d, min: 2, max: 64 });
    }
    if n < 2 {
        return Err(Error::Config("equivalence check needs at least 2 samples".into()));
    }
    let fixed_seed = seed.derive(0);
    let fixed_u: CMatrix = haar_unitary_with(d, &mut fixed_seed.with_stream(0).rng())?;
    let fixed_psi = random_state_vector_with(d, &mut fixed_seed.with_stream(1).rng())?;
    let state_seed = seed.derive(1);
    let unitary_seed = seed.derive(2);
    let over_states: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let psi = random_state_vector_with(d, &mut state_seed.with_stream(stream_of(0, i)).rng())?;
            pure_state_fidelity(ch, &fixed_u.mul_vec(&psi))
        })
        .collect::<Result<_>>()?;
    let over_unitaries: Vec<f64> = (0..n)
        .into_par_iter()
        .map(|i| {
            let u: CMatrix = haar_unitary_with(d, &mut unitary_seed.with_stream(stream_of(0, i)).rng())?;
            pure_state_fidelity(ch, &u.mul_vec(&fixed_psi))
        })
        .collect::<Result<_>>()?;
    Ok(EquivalenceReport { over_states: summarize(&over_states), over_unitaries: summarize(&over_unitaries) })
}
