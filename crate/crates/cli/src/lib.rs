//! Config-driven experiment runner for `ballmax`.
//!
//! A run reads one TOML file, checks the integrand hypotheses, evaluates the
//! maximality chain and the stability estimate for every listed competitor, and
//! writes `hypotheses.csv`, `chain.csv`, `stability.csv` and `summary.txt`.

pub mod config;
pub mod runner;

pub use config::ExperimentConfig;
pub use runner::{run, Outcome, RunOptions, Status};

#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("invalid config:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
    #[error("io error: {0}")]
    Io(String),
    #[error(transparent)]
    Core(#[from] ballmax::Error),
}

impl RunError {
    pub fn status(&self) -> Status {
        match self {
            RunError::Parse(_) | RunError::Invalid(_) => Status::BadConfig,
            RunError::Io(_) | RunError::Core(_) => Status::Runtime,
        }
    }
}

impl From<std::io::Error> for RunError {
    fn from(e: std::io::Error) -> Self {
        RunError::Io(e.to_string())
    }
}

impl From<csv::Error> for RunError {
    fn from(e: csv::Error) -> Self {
        RunError::Io(e.to_string())
    }
}
