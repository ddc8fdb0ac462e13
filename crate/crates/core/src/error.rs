use thiserror::Error;

/// Errors shared across the library. Validation problems that should be
/// collected rather than aborted on are reported through report types instead.
#[derive(Debug, Error)]
pub enum Error {
    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),
    #[error("root not representable: {0}")]
    RootNotRepresentable(String),
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("not an automorphism presentation: {0}")]
    NotAutomorphism(String),
    #[error("convergence failure: {0}")]
    ConvergenceFailure(String),
    #[error("not etale: {0}")]
    NotEtale(String),
    #[error("not etale off the origin: {0}")]
    NotEtaleOffOrigin(String),
    #[error("tail bound too weak: {0}")]
    InsufficientTail(String),
    #[error("extension is not radicial: {0}")]
    NotRadicial(String),
    #[error("inseparable map: {0}")]
    InseparableMap(String),
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("incompatible regime: {0}")]
    IncompatibleRegime(String),
    #[error("validation required: {0}")]
    ValidationRequired(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
