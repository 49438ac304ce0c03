use thiserror::Error;

/// Errors produced by the spectral routines.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SebaError {
    /// An input violated a documented precondition.
    #[error("invalid parameter `{name}`: {reason}")]
    Parameter { name: &'static str, reason: String },

    /// The evaluation point sits inside the guard band of a pole.
    #[error("z = {z} lies within the guard band of the pole at {pole}")]
    PoleProximity { z: f64, pole: f64 },

    /// A series could not be truncated within the configured term budget.
    #[error(
        "series truncation failed after {terms} terms: remainder bound {bound:e} exceeds {tol:e}"
    )]
    Truncation { terms: usize, bound: f64, tol: f64 },

    /// A bracketing root search did not converge.
    #[error("root search did not converge in [{lo}, {hi}] after {iterations} iterations")]
    NoConvergence { lo: f64, hi: f64, iterations: usize },

    /// The 1D coupling exceeds the z -> 0+ limit of the secular function, so
    /// the lowest eigenvalue is negative.
    #[error("coupling c = {c} exceeds the z -> 0+ limit {limit}; the ground state is negative")]
    MissingGroundState { c: f64, limit: f64 },

    /// The requested level lies outside the admissible band of the localization theorem.
    #[error("level {n} outside admissible range [{lo}, {hi}]")]
    LevelRange { n: usize, lo: usize, hi: usize },

    /// The target eigenvalue coincides numerically with a weighted pole.
    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    /// A coefficient table was not normalized.
    #[error("coefficient table is not normalized (mass {mass})")]
    Unnormalized { mass: f64 },
}

pub type Result<T> = std::result::Result<T, SebaError>;

pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> SebaError {
    SebaError::Parameter {
        name,
        reason: reason.into(),
    }
}
