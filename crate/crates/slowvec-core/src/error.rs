//! Error type shared by every analysis routine in the crate.

use alloc::boxed::Box;
use core::fmt;

use crate::linalg::{CMat, C64};

/// Convenient result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Detailed payload for a Cesàro-vs-spectral projection disagreement.
///
/// Both candidate projections are attached so a caller can inspect where the
/// two constructions diverged instead of re-running the computation.
#[derive(Clone, Debug, PartialEq)]
pub struct ProjectionMismatch {
    /// Projection obtained by accelerated Cesàro averaging.
    pub cesaro: CMat,
    /// Projection obtained from the invariant-subspace construction.
    pub spectral: CMat,
    /// Spectral norm of the difference.
    pub deviation: f64,
}

/// Everything that can go wrong while building operators or running analyses.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    /// An operator or vector had dimension zero where a positive one is required.
    EmptyDimension,
    /// Two objects that must share a dimension do not.
    DimensionMismatch { expected: usize, got: usize },
    /// A matrix or vector contained a NaN or infinite entry.
    NonFiniteEntry,
    /// A scalar parameter was outside its documented range.
    InvalidParameter { name: &'static str, value: f64, requirement: &'static str },
    /// A requested eigenvalue is not on the unit circle.
    OffCircleEigenvalue { lambda: C64, modulus: f64 },
    /// Power-bound estimation saw sustained norm growth, so orbit-limit
    /// quantities would be meaningless.
    SuspectUnbounded { step: usize, norm: f64 },
    /// An eigenvalue modulus fell inside the ambiguity band around the unit
    /// circle, so the decaying/persistent classification is not trustworthy.
    AmbiguousModulus { modulus: f64, band: f64 },
    /// An eigenvalue lies strictly outside the unit disc: powers of the
    /// operator diverge and no orbit-limit analysis applies.
    SpectralRadiusAboveOne { modulus: f64 },
    /// The persistent part of the spectrum carries nilpotent coupling, which
    /// contradicts power-boundedness.
    PeripheralNotSemisimple { coupling: f64 },
    /// A vector that must be normalized (in the relevant norm) is not.
    NotNormalized { norm: f64 },
    /// The operator flattens every direction: no slow vector exists.
    NoSlowVectors,
    /// A forward-step search ran out of budget before finding a certified
    /// candidate.
    HorizonExhausted { scanned: usize, best_residual: f64 },
    /// Fewer persistent eigendirections exist than the caller requested.
    InsufficientMultiplicity { requested: usize, available: usize },
    /// A greedy decomposition step found no orbit point close enough to the
    /// hull within its scan horizon.
    StepUnattainable { step: usize, scanned: usize, best_distance: f64 },
    /// An iterative kernel (Jacobi sweep, shifted QR, hull solver, scaling
    /// loop, …) failed to reach its tolerance within its iteration cap.
    ConvergenceFailed { routine: &'static str, residual: f64 },
    /// The covering net exceeded its cardinality cap before reaching the
    /// requested radius.
    NetTooLarge { cardinality: usize, cap: usize },
    /// Cesàro and spectral constructions of the same projection disagree.
    ProjectionMismatch(Box<ProjectionMismatch>),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyDimension => write!(f, "dimension must be positive"),
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::NonFiniteEntry => write!(f, "matrix or vector contains a non-finite entry"),
            Error::InvalidParameter { name, value, requirement } => {
                write!(f, "parameter `{name}` = {value} violates: {requirement}")
            }
            Error::OffCircleEigenvalue { lambda, modulus } => write!(
                f,
                "eigenvalue {}+{}i has modulus {} but must lie on the unit circle",
                lambda.re, lambda.im, modulus
            ),
            Error::SuspectUnbounded { step, norm } => write!(
                f,
                "operator norms keep growing (|T^{step}| = {norm}); refusing orbit-limit analysis"
            ),
            Error::AmbiguousModulus { modulus, band } => write!(
                f,
                "eigenvalue modulus {modulus} falls inside the ambiguity band {band} around 1"
            ),
            Error::SpectralRadiusAboveOne { modulus } => write!(
                f,
                "eigenvalue modulus {modulus} exceeds 1; powers of the operator diverge"
            ),
            Error::PeripheralNotSemisimple { coupling } => write!(
                f,
                "persistent spectral part carries nilpotent coupling {coupling}; \
                 operator cannot be power-bounded"
            ),
            Error::NotNormalized { norm } => {
                write!(f, "vector must be normalized but has norm {norm}")
            }
            Error::NoSlowVectors => {
                write!(f, "every orbit decays to zero; no slow vector exists")
            }
            Error::HorizonExhausted { scanned, best_residual } => write!(
                f,
                "no certified candidate within {scanned} forward steps \
                 (best residual {best_residual})"
            ),
            Error::InsufficientMultiplicity { requested, available } => write!(
                f,
                "requested {requested} persistent directions but only {available} are available"
            ),
            Error::StepUnattainable { step, scanned, best_distance } => write!(
                f,
                "greedy step {step}: no orbit point within reach of the hull after \
                 {scanned} steps (best distance {best_distance})"
            ),
            Error::ConvergenceFailed { routine, residual } => {
                write!(f, "{routine} failed to converge (residual {residual})")
            }
            Error::NetTooLarge { cardinality, cap } => {
                write!(f, "covering net grew to {cardinality} points, exceeding the cap {cap}")
            }
            Error::ProjectionMismatch(m) => write!(
                f,
                "Cesàro and spectral projections disagree by {} in spectral norm",
                m.deviation
            ),
        }
    }
}

impl core::error::Error for Error {}
