use thiserror::Error;

/// Errors produced by the library.
///
/// Variants are grouped by the layer that raises them; the CLI maps each
/// variant onto an exit code via [`Error::is_input_error`].
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("division by zero")]
    DivisionByZero,

    #[error("gcd of two zero polynomials is undefined")]
    ZeroGcd,

    #[error("not a map: {0}")]
    NotAMap(String),

    #[error("map is not full: {0}")]
    NotFull(String),

    #[error("matrix is singular")]
    SingularMatrix,

    #[error("polynomials are not coprime: {0}")]
    NotCoprime(String),

    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    #[error("sampling failed after {attempts} attempts: {last_reason}")]
    SamplingFailure { attempts: usize, last_reason: String },

    #[error("lift is numerically zero at z = {re} + {im}i (|V| = {norm:e})")]
    NearSingular { re: f64, im: f64, norm: f64 },

    #[error("integration failed: {0}")]
    IntegrationFailure(String),

    #[error("indeterminate numerical rank (largest singular-value gap {gap:e})")]
    IndeterminateRank { gap: f64 },

    #[error("path construction failed at step {step}: {reason}")]
    PathFailure { step: usize, reason: String },

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

impl Error {
    /// Short machine-readable name of the variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::DivisionByZero => "DivisionByZero",
            Error::ZeroGcd => "ZeroGcd",
            Error::NotAMap(_) => "NotAMap",
            Error::NotFull(_) => "NotFull",
            Error::SingularMatrix => "SingularMatrix",
            Error::NotCoprime(_) => "NotCoprime",
            Error::PreconditionViolated(_) => "PreconditionViolated",
            Error::SamplingFailure { .. } => "SamplingFailure",
            Error::NearSingular { .. } => "NearSingular",
            Error::IntegrationFailure(_) => "IntegrationFailure",
            Error::IndeterminateRank { .. } => "IndeterminateRank",
            Error::PathFailure { .. } => "PathFailure",
            Error::InvalidInput(_) => "InvalidInput",
        }
    }

    /// True for errors caused by malformed or inadmissible input rather than
    /// by a failed computation.
    pub fn is_input_error(&self) -> bool {
        matches!(self, Error::InvalidInput(_) | Error::NotAMap(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
