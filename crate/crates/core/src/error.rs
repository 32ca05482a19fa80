use thiserror::Error;

use crate::model::Violation;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parameter error: {0}")]
    Parameter(String),

    #[error("scope error: {0}")]
    Scope(String),

    #[error("invalid model: {}", format_violations(.0))]
    InvalidModel(Vec<Violation>),

    /// The frontier dynamic program would need more than `limit` live nodes.
    #[error("capacity error: frontier of {width} nodes exceeds the limit of {limit}")]
    Capacity { width: usize, limit: usize },

    #[error("budget error: {what} needs a horizon of at least {required}, got {horizon}")]
    Budget {
        what: &'static str,
        required: u64,
        horizon: u64,
    },

    #[error("environment exhausted after {used} experiments")]
    EnvironmentExhausted { used: u64 },

    #[error("ill-posed objective: {0}")]
    IllPosedObjective(String),

    #[error("internal consistency error: {0}")]
    Internal(String),

    #[error("BIF parse error at {line}:{column}: {message}")]
    Bif {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn format_violations(v: &[Violation]) -> String {
    v.iter()
        .map(|x| x.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}
