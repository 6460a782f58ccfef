//! Error type shared by the solver library.

use thiserror::Error;

/// Errors produced by the solver library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("polynomial degree k={0} outside supported range {1}..={2}")]
    DegreeOutOfRange(usize, usize, usize),

    #[error("basis index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("point {0:?} lies outside the computational domain")]
    PointOutsideDomain(Vec<f64>),

    #[error("non-finite sample encountered while projecting at {0:?}")]
    NonFiniteSample(Vec<f64>),

    #[error("negative Lax-Friedrichs speed bound alpha={0}")]
    NegativeAlpha(f64),

    #[error("unsupported field/flux combination: {0}")]
    UnsupportedFlux(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("zero total wave speed; cannot form a CFL time step")]
    ZeroSpeed,

    #[error("non-finite coefficients after Runge-Kutta stage {stage} at t={time}")]
    NonFiniteState { stage: usize, time: f64 },

    #[error("non-positive error value in order computation: {0}")]
    NonPositiveError(f64),

    #[error("unknown benchmark initial condition `{0}`")]
    UnknownProblem(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
