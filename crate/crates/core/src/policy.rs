//! Numeric tolerances used by validity checks throughout the crate.

/// Central record of the thresholds used by construction-time checks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NumericPolicy {
    /// `||U^dag U - 1||_F` bound for a matrix to count as unitary.
    pub unitarity: f64,
    /// Frobenius bound on `||A - A^dag||` for Hermitian checks.
    pub hermiticity: f64,
    /// Allowed deviation of a density matrix trace from one.
    pub trace: f64,
    /// Most negative eigenvalue tolerated in a density matrix.
    pub positivity: f64,
    /// `||sum A^dag A - 1||_F` bound for trace preservation.
    pub trace_preservation: f64,
    /// Smallest acceptable `|R_jj|` in QR.
    pub rank: f64,
    /// Default target accuracy of the matrix exponential.
    pub expm: f64,
    /// Imaginary residue of a fidelity that is clipped; larger residues are errors.
    pub imag_clip: f64,
    /// Largest dimension accepted for superoperator-sized objects.
    pub superop_cap: usize,
    /// Largest Kraus count kept before composition switches to superoperators.
    pub kraus_cap: usize,
}

impl NumericPolicy {
    pub const DEFAULT: NumericPolicy = NumericPolicy {
        unitarity: 1e-10,
        hermiticity: 1e-10,
        trace: 1e-10,
        positivity: 1e-8,
        trace_preservation: 1e-8,
        rank: 1e-13,
        expm: 1e-12,
        imag_clip: 1e-10,
        superop_cap: 4096,
        kraus_cap: 64,
    };
}

impl Default for NumericPolicy {
    fn default() -> Self {
        Self::DEFAULT
    }
}

/// Policy in force for the library.
pub const POLICY: NumericPolicy = NumericPolicy::DEFAULT;
