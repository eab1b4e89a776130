use thiserror::Error;

/// Crate-wide error type. Variants carry enough context to point at the
/// offending input; none of them wrap other error types except JSON parsing.
#[derive(Debug, Error)]
pub enum Error {
    /// Too few points, coincident points, or otherwise meaningless geometry.
    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    /// A least-squares problem with no unique solution (e.g. collinear
    /// points fed to a circle fit).
    #[error("singular fit: {0}")]
    SingularFit(String),

    /// Malformed values passed to an operation (bad probability vector,
    /// empty candidate list, ...).
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Training data that cannot produce a model (single class, too few
    /// samples).
    #[error("invalid training set: {0}")]
    InvalidTrainingSet(String),

    /// Scenario or model document failed to parse or validate. The string
    /// names the field path where possible.
    #[error("parse error: {0}")]
    Parse(String),

    /// A document violated a semantic invariant after parsing.
    #[error("invariant violation: {0}")]
    InvariantViolation(String),

    /// Global planner could not connect start and goal.
    #[error("unreachable goal: {0}")]
    UnreachableGoal(String),

    /// A pose that must lie in free space does not.
    #[error("invalid pose: {0}")]
    InvalidPose(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
