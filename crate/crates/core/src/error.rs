use thiserror::Error;

/// Errors raised by constructors, the likelihood and the solver.
///
/// Magnitudes are reported as `f64` so the enum stays independent of the
/// scalar type of the failing computation.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid dimension {0}: must be at least 1")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix has {found} entries, expected {expected}")]
    EntryCount { expected: usize, found: usize },

    #[error("non-finite entry at ({row}, {col})")]
    NonFiniteEntry { row: usize, col: usize },

    #[error("matrix is not Hermitian: defect {defect:e} at ({row}, {col})")]
    NotHermitian { defect: f64, row: usize, col: usize },

    #[error("trace is {trace}, expected 1")]
    TraceNotOne { trace: f64 },

    #[error("operator is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    NotPositive { min_eigenvalue: f64 },

    #[error("starting point is not strictly interior: minimum eigenvalue {min_eigenvalue:e}")]
    NotInterior { min_eigenvalue: f64 },

    #[error("POVM is empty")]
    EmptyPovm,

    #[error("POVM effect {index} is not positive semidefinite: minimum eigenvalue {min_eigenvalue:e}")]
    EffectNotPositive { index: usize, min_eigenvalue: f64 },

    #[error("POVM effects do not sum to the identity: entrywise deviation {deviation:e}")]
    IncompletePovm { deviation: f64 },

    #[error("dataset has {found} outcomes but the POVM has {expected} effects")]
    OutcomeCount { expected: usize, found: usize },

    #[error("frequency {index} is invalid: {value}")]
    InvalidFrequency { index: usize, value: f64 },

    #[error("frequencies sum to {sum}, expected 1")]
    FrequencySum { sum: f64 },

    #[error("total count {total} is inconsistent with frequency {index} (N f = {scaled})")]
    CountMismatch { total: u64, index: usize, scaled: f64 },

    #[error("dataset has no observations")]
    EmptyCounts,

    #[error("state vector has zero norm")]
    ZeroVector,

    #[error("state vector has norm {norm}, expected 1")]
    NotNormalized { norm: f64 },

    #[error("W state needs at least 2 qubits, got {0}")]
    TooFewQubits(usize),

    #[error("qubit count {0} outside the supported range 1..=4")]
    QubitRange(usize),

    #[error("outcome {index} has observed frequency but probability {probability:e} at or below the floor")]
    BoundaryLikelihood { index: usize, probability: f64 },

    #[error("direction is not traceless: trace {trace:e}")]
    NotTraceless { trace: f64 },

    #[error("eigendecomposition did not converge after {sweeps} sweeps")]
    EigenNoConvergence { sweeps: usize },

    #[error("matrix is ill-conditioned: condition number {condition:e}")]
    IllConditioned { condition: f64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("line search exceeded {max_backtracks} backtracks at iteration {iteration}")]
    BacktrackLimit { iteration: usize, max_backtracks: usize },

    #[error("objective became non-finite at iteration {iteration}")]
    NonFiniteObjective { iteration: usize },

    #[error("point is stationary; no ascent direction exists")]
    Stationary,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
