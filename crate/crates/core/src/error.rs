use thiserror::Error;

/// Every failure the engine can surface.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("division by a series that vanishes modulo w^{order}")]
    DivisionByZeroSeries { order: i64 },
    #[error("series has a pole at p = 0 (valuation {valuation})")]
    PoleAtZeroNome { valuation: i64 },
    #[error("only {significant} significant nome orders available, need at least {required}")]
    InsufficientTruncation { significant: i64, required: i64 },
    #[error("index out of range: {0}")]
    IndexRange(String),
    #[error("constraint violation: {0}")]
    ConstraintViolation(String),
    #[error("missing declared root: {0}")]
    MissingRoot(String),
    #[error("sampling exhausted after {attempts} attempts")]
    SamplingExhausted { attempts: usize },
    #[error("non-generic point: {0}")]
    NonGenericPoint(String),
    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),
}

impl Error {
    /// Degenerate specializations (vanishing denominators) are resampled by the
    /// harness rather than reported as verification failures.
    pub fn is_degenerate(&self) -> bool {
        matches!(self, Error::DivisionByZeroSeries { .. } | Error::NonGenericPoint(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
