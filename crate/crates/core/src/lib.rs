//! Scalable noise estimation with Haar-random unitaries.
//!
//! The crate simulates motion-reversal experiments: a Haar-random unitary,
//! a noisy implementation, and its exact inverse. Averaging over the unitary
//! collapses any noise channel onto a depolarizing channel with a single
//! strength `p = (Tr Λ̂ - 1) / (D² - 1)`, so the residual population of the
//! initial state measures the noise. The modules cover:
//!
//! - [`matrix`]: dense complex matrices, generic over `f32`/`f64`.
//! - [`sampling`]: seeded Haar unitaries, random states, GUE Hamiltonians.
//! - [`channels`]: Kraus channels, superoperators and Lindblad generators.
//! - [`fidelity`]: closed-form fidelities, strengths and decay laws.
//! - [`protocols`]: Monte Carlo motion reversal, echoes, Lindblad decay, fits.
//! - [`haar_lab`]: numerical checks of twirling, invariants and concentration.

pub mod channels;
pub mod error;
pub mod fidelity;
pub mod haar_lab;
pub mod matrix;
pub mod policy;
pub mod protocols;
pub mod sampling;
pub mod state;
pub mod stats;

pub use channels::{Channel, ChannelSpec, LindbladGenerator, NoiseModel, Superoperator};
pub use error::{Error, Result};
pub use matrix::{Matrix, Scalar};
pub use policy::{NumericPolicy, POLICY};
pub use sampling::SeedSpec;
pub use state::DensityMatrix;

pub type C64 = num_complex::Complex<f64>;
pub type C32 = num_complex::Complex<f32>;

/// Double-precision complex matrix; the carrier used by channels and protocols.
pub type CMatrix = Matrix<f64>;
/// Single-precision complex matrix.
pub type CMatrix32 = Matrix<f32>;
