use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh construction: {0}")]
    Mesh(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("operation not defined for this body: {0}")]
    Topology(String),

    #[error("state vector has length {found}, body expects {expected}")]
    StateLength { expected: usize, found: usize },

    #[error("simulation diverged at step {step}")]
    Diverged { step: u64 },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
