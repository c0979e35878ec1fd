use thiserror::Error;

/// Everything that can go wrong while building states, ensembles or reports.
///
/// Each variant names the invariant or precondition that was violated so the
/// CLI and the C ABI can surface it verbatim.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian: max |A - A^dagger| = {deviation:e} exceeds {tolerance:e}")]
    NotHermitian { deviation: f64, tolerance: f64 },

    #[error("matrix is not positive semidefinite: eigenvalue {eigenvalue:e} is below -{tolerance:e}")]
    NotPsd { eigenvalue: f64, tolerance: f64 },

    #[error("density operator must have unit trace: trace {trace} is off by more than {tolerance:e}")]
    InvalidTrace { trace: f64, tolerance: f64 },

    #[error("Hermitian eigensolver did not converge on a {dim}x{dim} matrix")]
    NoConvergence { dim: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("dimension {dim} exceeds the configured cap {cap}")]
    DimensionOverflow { dim: usize, cap: usize },

    #[error("vectors are not orthonormal: Gram matrix deviates from identity by {deviation:e} (tolerance {tolerance:e})")]
    NotOrthonormal { deviation: f64, tolerance: f64 },

    #[error("state vector must have unit norm: |v|^2 = {norm_sq}")]
    NotUnitNorm { norm_sq: f64 },

    #[error("invalid probability vector: {0}")]
    InvalidProbabilities(String),

    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("ensembles must share one probability vector: entries differ by {deviation:e}")]
    ProbabilityMismatch { deviation: f64 },

    #[error("invalid POVM: {0}")]
    InvalidPovm(String),

    #[error("states do not commute: max |[A, B]| = {norm:e} exceeds {tolerance:e}")]
    NotCommuting { norm: f64, tolerance: f64 },

    #[error("argument out of domain: {0}")]
    Domain(String),

    #[error("tau blocks must be identical across signal states: max deviation {deviation:e}")]
    TauMismatch { deviation: f64 },

    #[error("three-message protocol is degenerate: message M0 has probability 0 (alpha1 = 0, alpha2 = 1), so Bob's M0 response is undefined")]
    DegenerateProtocol,

    #[error("matrix is not column-stochastic: {0}")]
    NotStochastic(String),

    #[error("rate report invariant violated: {0}")]
    InvariantViolation(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    /// Stable machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::NotHermitian { .. } => "NotHermitian",
            Error::NotPsd { .. } => "NotPSD",
            Error::InvalidTrace { .. } => "InvalidTrace",
            Error::NoConvergence { .. } => "NoConvergence",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::DimensionOverflow { .. } => "DimensionOverflow",
            Error::NotOrthonormal { .. } => "NotOrthonormal",
            Error::NotUnitNorm { .. } => "NotUnitNorm",
            Error::InvalidProbabilities(_) => "InvalidProbabilities",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::ProbabilityMismatch { .. } => "ProbabilityMismatch",
            Error::InvalidPovm(_) => "InvalidPovm",
            Error::NotCommuting { .. } => "NotCommuting",
            Error::Domain(_) => "DomainError",
            Error::TauMismatch { .. } => "TauMismatch",
            Error::DegenerateProtocol => "DegenerateProtocol",
            Error::NotStochastic(_) => "NotStochastic",
            Error::InvariantViolation(_) => "InvariantViolation",
            Error::Parse(_) => "ParseError",
        }
    }

    /// True for errors caused by input that failed a type invariant.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            Error::NoConvergence { .. } | Error::Parse(_) | Error::InvariantViolation(_)
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
