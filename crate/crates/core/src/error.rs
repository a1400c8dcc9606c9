use thiserror::Error;

/// Errors raised by the simulation library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParams { field: &'static str, reason: String },

    /// The wave function is too close to a node for the guidance velocity
    /// to be evaluated reliably.
    #[error("|psi| = {modulus:e} at (y1 = {y1}, y2 = {y2}, t = {t}) is below the node threshold {threshold:e}")]
    NodeProximity {
        y1: f64,
        y2: f64,
        t: f64,
        modulus: f64,
        threshold: f64,
    },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("conditioning acceptance rate {rate:e} is below the minimum {minimum:e}")]
    ConditioningStarved { rate: f64, minimum: f64 },

    #[error("constraint `{constraint}` violated: {detail}")]
    ConstraintViolated { constraint: String, detail: String },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
