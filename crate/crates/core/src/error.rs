use thiserror::Error;

/// Errors raised anywhere in the lab.
#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed circuit: {0}")]
    MalformedCircuit(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} exceeds the desk-scale cap ({value} > {cap})")]
    CapExceeded {
        what: &'static str,
        value: usize,
        cap: usize,
    },

    #[error("enumeration budget exceeded: roughly {estimate:.3e} candidates (budget {budget:.3e})")]
    BudgetExceeded { estimate: f64, budget: f64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("distinguisher failed on trial {trial}: {source}")]
    Distinguisher {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("distinguisher `{name}` cannot handle this input: {reason}")]
    Unsupported { name: String, reason: String },

    #[error("key generation failed: {0}")]
    KeyGeneration(String),

    #[error("verification key does not match public parameters: {0}")]
    KeyMismatch(String),

    #[error("root search exceeded budget of {budget} steps")]
    SearchBudget { budget: u64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}
