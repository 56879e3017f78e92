use thiserror::Error;

/// Errors raised by the library. Each variant maps onto one CLI exit code.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("{0} is not a negative discriminant (need D < 0 and D = 0 or 1 mod 4)")]
    InvalidDiscriminant(i64),

    #[error("discriminant {0} is not fundamental")]
    NotFundamental(i64),

    #[error("form ({a}, {b}, {c}) is not primitive")]
    NotPrimitive { a: i64, b: i64, c: i64 },

    #[error("form ({a}, {b}, {c}) is not positive definite")]
    NotPositiveDefinite { a: i64, b: i64, c: i64 },

    #[error("discriminant mismatch: {0} vs {1}")]
    DiscriminantMismatch(i64, i64),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("insufficient precision: {0}")]
    Precision(String),

    #[error("argument out of range: {0}")]
    OutOfRange(String),

    #[error("no admissible (eps1, eps2) grid point: {0}")]
    Infeasible(String),

    #[error("not a subgroup: {0}")]
    NotASubgroup(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },

    #[error("curve violates the non-degeneracy hypothesis: {0}")]
    HypothesisViolated(String),

    #[error("integer overflow in {0}")]
    Overflow(&'static str),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    /// Process exit code used by the command line front end.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::HypothesisViolated(_) => 2,
            Error::ResourceLimit(_) => 3,
            Error::Parse { .. } => 4,
            _ => 1,
        }
    }
}
