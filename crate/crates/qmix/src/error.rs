use thiserror::Error;

/// Errors produced by the mixture-estimation engine.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("matrix is not Hermitian (asymmetry {asymmetry:.3e} exceeds 1e-12)")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not square: {rows}x{cols}")]
    NotSquare { rows: usize, cols: usize },

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("composite dimension {dim} exceeds the configured cap {cap}")]
    DimensionCap { dim: usize, cap: usize },

    #[error("eigendecomposition did not converge for a {dim}x{dim} matrix")]
    EigenFailure { dim: usize },

    #[error("trace is {trace:.12} instead of 1")]
    NotUnitTrace { trace: f64 },

    #[error("matrix is not positive semi-definite (min eigenvalue {min_eigenvalue:.3e})")]
    NotPsd { min_eigenvalue: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("model inconsistency: {0}")]
    ModelInconsistency(String),

    #[error(
        "singular model: mean-state kernel pair ({row},{col}) carries weight \
         {magnitude:.3e} for parameter {param}"
    )]
    SingularModel {
        row: usize,
        col: usize,
        param: usize,
        magnitude: f64,
    },

    #[error(
        "irregular outcome {outcome}: probability below cutoff but information \
         weight {magnitude:.3e} is non-negligible"
    )]
    IrregularOutcome { outcome: usize, magnitude: f64 },

    #[error("zero-probability outcome {outcome} (p = {probability:.3e})")]
    ZeroProbabilityOutcome { outcome: usize, probability: f64 },

    #[error("no information: the contracted logarithmic-derivative operator vanishes")]
    NoInformation,

    #[error("rank deficiency: rank {rank}, expected {expected}; {hint}")]
    RankDeficient {
        rank: usize,
        expected: usize,
        hint: &'static str,
    },

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("outcome probabilities sum to {sum:.12}, outside [1-1e-8, 1+1e-8]")]
    ProbabilityConsistency { sum: f64 },

    #[error("prior density integrates to {integral:.6} instead of 1")]
    NotNormalized { integral: f64 },

    #[error("degenerate model: {0}")]
    DegenerateModel(String),

    #[error("unsupported: {0}")]
    Unsupported(String),
}

pub type Result<T> = std::result::Result<T, Error>;
