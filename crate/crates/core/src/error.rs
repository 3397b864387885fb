//! Error types shared across the crate.

use thiserror::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("point ({re}, {im}) lies outside the open unit disk")]
    OutsideDisk { re: f64, im: f64 },

    #[error("point too close to the disk boundary (|z| = {radius})")]
    BoundaryProximity { radius: f64 },

    #[error("matrix violates |a|^2 - |b|^2 = 1 (residual {residual:.3e})")]
    NotUnitDeterminant { residual: f64 },

    #[error("Mobius denominator magnitude {magnitude:.3e} is numerically degenerate")]
    NumericDegeneracy { magnitude: f64 },

    #[error("energy must be positive, got {energy}")]
    NonpositiveEnergy { energy: f64 },

    #[error("energy {energy} is not in the subcritical regime E < 1/2")]
    OutOfRegime { energy: f64 },

    #[error("state energy {actual} does not match declared energy {expected}")]
    EnergyMismatch { expected: f64, actual: f64 },

    #[error("zero momentum: direction undefined")]
    ZeroMomentum,

    #[error("zero speed: geodesic curvature undefined")]
    ZeroSpeed,

    #[error("geodesic curvature must be nonnegative, got {curvature}")]
    NegativeCurvature { curvature: f64 },

    #[error("field strength must be nonnegative, got {strength}")]
    NegativeFieldStrength { strength: f64 },

    #[error("finite-difference stencil of half-width {h} exits the disk from ({re}, {im})")]
    StencilExitsDisk { re: f64, im: f64, h: f64 },

    #[error("trajectory escaped the boundary shell (|z| = {radius})")]
    EscapedDisk { radius: f64 },

    #[error("invalid time step dt = {dt}")]
    InvalidTimeStep { dt: f64 },

    #[error("invalid duration total_time = {total_time}")]
    InvalidDuration { total_time: f64 },

    #[error("sample index {index} out of stencil range for trajectory of length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("run too short: {windows} renormalization windows, need at least {needed}")]
    InsufficientData { windows: usize, needed: usize },

    #[error("no root found for the requested level values")]
    RootNotFound,

    #[error("level set is degenerate: Jacobian singular value {sigma_min:.3e} at the root")]
    DegenerateLevel { sigma_min: f64 },
}
