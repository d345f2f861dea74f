use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A point outside the domain of a function, e.g. `s > a` or `r < 0`.
    #[error("domain error: {0}")]
    Domain(String),
    #[error("invalid argument: {0}")]
    Argument(String),
    /// Inconsistent discretization or experiment setup.
    #[error("configuration error: {0}")]
    Config(String),
    /// A required structural hypothesis failed; carries its name (`h1`, `condition`, ...).
    #[error("hypothesis `{name}` failed: {detail}")]
    Hypothesis { name: String, detail: String },
    #[error("mass mismatch between transported measures: source {source_mass}, target {target_mass}")]
    MassMismatch { source_mass: f64, target_mass: f64 },
    /// Equal-count trimming in the cell discretization exceeded its budget.
    #[error("cell trimming discarded {fraction:.4} of cells (limit {limit}); use a smaller cell size")]
    Trim { fraction: f64, limit: f64 },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
