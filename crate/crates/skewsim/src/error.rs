//! Error type shared across the crate.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An interval-map argument left the unit interval.
    #[error("x = {x:e} outside the domain [0, 1]")]
    DomainX { x: f64 },

    /// Intermittency parameter outside the admissible range.
    #[error("gamma out of range [0,1): got {gamma}")]
    GammaRange { gamma: f64 },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    /// A rotation rate in a planar block of the regular dynamics is zero,
    /// so the closed-form path has no bounded primitive there.
    #[error("zero rotation rate in planar block {index}")]
    ZeroRotationRate { index: usize },

    /// A matrix handed to renormalization is too far from a rotation to fix.
    #[error("degenerate rotation matrix: {reason}")]
    DegenerateRotation { reason: String },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    /// A statistic that divides by a spread hit an identically-constant input.
    #[error("zero variance in input series")]
    ZeroVariance,

    #[error("no laminar segments below threshold x_c = {x_c}")]
    NoLaminarSegments { x_c: f64 },

    /// Order statistics were too degenerate (ties, zeros) for a tail fit.
    #[error("degenerate statistic: {0}")]
    DegenerateStatistic(String),
}

pub type Result<T> = std::result::Result<T, Error>;
