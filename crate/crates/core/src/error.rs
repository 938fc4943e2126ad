use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("precondition violated: {0}")]
    PreconditionViolation(String),

    /// Zero phase response, e.g. a dark port at T = 0 or T = 1, or total loss.
    #[error("phase sensitivity undefined: {0}")]
    SensitivityUndefined(String),

    #[error("finite-difference slope unstable: h-step {coarse:.12e} vs half-step {fine:.12e}")]
    SlopeUnstable { coarse: f64, fine: f64 },

    #[error("constraint infeasible: {0}")]
    ConstraintInfeasible(String),

    #[error("bracket error: {0}")]
    Bracket(String),

    #[error("internal consistency error: {0}")]
    InternalConsistency(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}
