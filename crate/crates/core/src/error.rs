use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("collapsed wave: {0}")]
    CollapsedWave(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("memory budget exceeded: {0}")]
    MemoryBudget(String),
    #[error("invalid input: {0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
