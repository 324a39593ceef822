//! Seeded random unitaries, pure states and GUE Hamiltonians.
//!
//! Every draw is keyed by a [`SeedSpec`]: the master seed fixes a ChaCha8 key
//! and the stream id selects an independent keystream, so trial `i` always
//! sees the same numbers no matter how trials are scheduled.

use num_complex::Complex;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{householder_qr, Matrix, Scalar};
use crate::state::DensityMatrix;
use crate::{CMatrix, C64};

pub const MIN_DIM: usize = 2;
pub const MAX_DIM: usize = 256;

/// Master seed plus per-trial substream index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SeedSpec {
    pub master_seed: u64,
    pub stream_id: u64,
}

impl SeedSpec {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        Self { master_seed, stream_id }
    }

    pub fn with_stream(self, stream_id: u64) -> Self {
        Self { stream_id, ..self }
    }

    /// Independent key space for a named purpose; the stream id resets to 0.
    pub fn derive(self, tag: u64) -> Self {
        let mixed = splitmix64(self.master_seed ^ splitmix64(tag ^ splitmix64(self.stream_id)));
        Self { master_seed: mixed, stream_id: 0 }
    }

    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.master_seed);
        rng.set_stream(self.stream_id);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Packs a sequence length and a trial index into one stream id.
pub fn stream_of(step: usize, trial: usize) -> u64 {
    ((step as u64) << 32) | (trial as u64 & 0xFFFF_FFFF)
}

pub(crate) fn check_dim(dim: usize) -> Result<()> {
    if (MIN_DIM..=MAX_DIM).contains(&dim) {
        Ok(())
    } else {
        Err(Error::DimOutOfRange { dim, min: MIN_DIM, max: MAX_DIM })
    }
}

fn complex_normal<T: Scalar, R: Rng + ?Sized>(rng: &mut R, variance: T) -> Complex<T>
where
    StandardNormal: Distribution<T>,
{
    let sd = (variance * T::lit(0.5)).sqrt();
    let re: T = rng.sample(StandardNormal);
    let im: T = rng.sample(StandardNormal);
    Complex::new(re * sd, im * sd)
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn ginibre<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Matrix<T>
where
    StandardNormal: Distribution<T>,
{
    Matrix::from_fn(dim, dim, |_, _| complex_normal(rng, T::one()))
}

/// Haar-distributed unitary drawn from an existing generator.
///
/// Ginibre matrix, Householder QR, then `Q diag(R_jj / |R_jj|)`.
pub fn haar_unitary_with<T: Scalar, R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Matrix<T>>
where
    StandardNormal: Distribution<T>,
{
    check_dim(dim)?;
    loop {
        let g = ginibre::<T, R>(dim, rng);
        let (mut q, r) = match householder_qr(&g) {
            Ok(qr) => qr,
            // measure-zero event; draw again
            Err(Error::RankDeficient { .. }) => continue,
            Err(e) => return Err(e),
        };
        for j in 0..dim {
            let d = r[(j, j)];
            let phase = d / d.norm();
            for i in 0..dim {
                q[(i, j)] *= phase;
            }
        }
        return Ok(q);
    }
}

/// Haar-distributed unitary on `U(dim)`, `2 <= dim <= 256`.
pub fn haar_unitary<T: Scalar>(dim: usize, seed: SeedSpec) -> Result<Matrix<T>>
where
    StandardNormal: Distribution<T>,
{
    haar_unitary_with(dim, &mut seed.rng())
}

/// Normalized complex Gaussian vector: a Fubini-Study distributed pure state.
pub fn random_state_vector_with<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> Result<Vec<C64>> {
    check_dim(dim)?;
    loop {
        let v: Vec<C64> = (0..dim).map(|_| complex_normal(rng, 1.0)).collect();
        let norm = v.iter().map(C64::norm_sqr).sum::<f64>().sqrt();
        if norm > 0.0 {
            return Ok(v.into_iter().map(|x| x / norm).collect());
        }
    }
}

pub fn random_state_vector(dim: usize, seed: SeedSpec) -> Result<Vec<C64>> {
    random_state_vector_with(dim, &mut seed.rng())
}

/// `|psi><psi|` for a Fubini-Study random `psi`.
pub fn random_pure_state(dim: usize, seed: SeedSpec) -> Result<DensityMatrix> {
    DensityMatrix::from_pure(&random_state_vector(dim, seed)?)
}

/// Traceless GUE Hamiltonian.
///
/// Off-diagonal entries are complex Gaussian with `E|H_ij|^2 = scale^2 / D`,
/// diagonal entries real Gaussian with variance `2 scale^2 / D`; the trace is
/// then projected out.
pub fn gue_hamiltonian_with<R: Rng + ?Sized>(dim: usize, scale: f64, rng: &mut R) -> Result<CMatrix> {
    if dim < MIN_DIM {
        return Err(Error::DimOutOfRange { dim, min: MIN_DIM, max: usize::MAX });
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::InvalidParameter { name: "scale", value: scale, reason: "must be positive" });
    }
    let d = dim as f64;
    let mut h = CMatrix::zeros(dim, dim);
    for i in 0..dim {
        let x: f64 = rng.sample(StandardNormal);
        h[(i, i)] = C64::new(x * (2.0 * scale * scale / d).sqrt(), 0.0);
        for j in (i + 1)..dim {
            let z = complex_normal(rng, scale * scale / d);
            h[(i, j)] = z;
            h[(j, i)] = z.conj();
        }
    }
    Ok(h.traceless_part().0)
}

pub fn gue_hamiltonian(dim: usize, scale: f64, seed: SeedSpec) -> Result<CMatrix> {
    gue_hamiltonian_with(dim, scale, &mut seed.rng())
}

/// Random trace-preserving channel with `k` Kraus operators.
///
/// Ginibre candidates are right-normalized by `(sum A^dag A)^(-1/2)`.
pub fn random_kraus_ops_with<R: Rng + ?Sized>(dim: usize, k: usize, rng: &mut R) -> Result<Vec<CMatrix>> {
    if k == 0 {
        return Err(Error::InvalidParameter { name: "kraus count", value: 0.0, reason: "must be at least 1" });
    }
    let candidates: Vec<CMatrix> = (0..k).map(|_| ginibre::<f64, R>(dim, rng)).collect();
    let mut s = CMatrix::zeros(dim, dim);
    for a in &candidates {
        s += &(&a.adjoint() * a);
    }
    let inv_sqrt = crate::matrix::eigh(&s)?.map_values(|x| 1.0 / x.sqrt());
    Ok(candidates.iter().map(|a| a * &inv_sqrt).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::frobenius_distance;

    #[test]
    fn identical_seeds_reproduce_draws() {
        let s = SeedSpec::new(7, 3);
        let a: CMatrix = haar_unitary(5, s).unwrap();
        let b: CMatrix = haar_unitary(5, s).unwrap();
        assert_eq!(a, b);
        let c: CMatrix = haar_unitary(5, s.with_stream(4)).unwrap();
        assert_ne!(a, c);
        assert_ne!(s.derive(1), s.derive(2));
    }

    #[test]
    fn haar_draws_are_unitary() {
        for i in 0..20 {
            let u: CMatrix = haar_unitary(2 + i, SeedSpec::new(1, i as u64)).unwrap();
            assert!(u.unitarity_defect() <= 1e-10);
        }
        let u32m: Matrix<f32> = haar_unitary(4, SeedSpec::new(1, 0)).unwrap();
        assert!(u32m.unitarity_defect() < 1e-5);
    }

    #[test]
    fn dim_range_is_enforced() {
        assert!(matches!(haar_unitary::<f64>(1, SeedSpec::new(0, 0)), Err(Error::DimOutOfRange { .. })));
        assert!(haar_unitary::<f64>(257, SeedSpec::new(0, 0)).is_err());
        assert!(random_pure_state(1, SeedSpec::new(0, 0)).is_err());
    }

    #[test]
    fn pure_states_have_unit_trace_and_purity() {
        let rho = random_pure_state(6, SeedSpec::new(2, 9)).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        assert!((rho.purity() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gue_is_hermitian_and_traceless() {
        let h = gue_hamiltonian(5, 1.3, SeedSpec::new(4, 0)).unwrap();
        assert!(frobenius_distance(&h, &h.adjoint()).unwrap() <= 1e-12);
        assert!(h.trace().norm() <= 1e-12);
        assert!(gue_hamiltonian(5, 0.0, SeedSpec::new(4, 0)).is_err());
    }

    #[test]
    fn random_kraus_is_trace_preserving() {
        let ops = random_kraus_ops_with(3, 3, &mut SeedSpec::new(5, 0).rng()).unwrap();
        let mut s = CMatrix::zeros(3, 3);
        for a in &ops {
            s += &(&a.adjoint() * a);
        }
        assert!(frobenius_distance(&s, &CMatrix::identity(3)).unwrap() < 1e-12);
    }
}
