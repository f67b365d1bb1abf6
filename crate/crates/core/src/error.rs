use thiserror::Error;

/// Errors raised across the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A scalar argument lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// The requested fidelity threshold cannot be met even by a fresh link.
    #[error("infeasible threshold: fidelity {threshold} exceeds fresh-link fidelity {fresh}")]
    InfeasibleThreshold { threshold: f64, fresh: f64 },

    /// A path specification is not realizable on a linear chain.
    #[error("invalid path specification: {0}")]
    Spec(String),

    /// An operation was applied to a chain state that does not support it.
    #[error("invalid chain state: {0}")]
    State(String),

    /// The exact oracle would need more symbolic states than allowed.
    #[error("oracle state budget exceeded: {states} states (budget {budget})")]
    BudgetExceeded { states: usize, budget: usize },

    /// Bad or missing configuration.
    #[error("config error: {0}")]
    Config(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
