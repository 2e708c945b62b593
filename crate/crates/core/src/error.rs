//! Error type for the workbench.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// Parameters outside the admissible regime.
    #[error("parameter error: {0}")]
    Parameter(String),
    /// A bracketing or minimum search failed.
    #[error("search error: {0}")]
    Search(String),
    /// Linear algebra or integration failure.
    #[error("numerical error: {0}")]
    Numerical(String),
    /// Newton iteration of the modulation decomposition did not converge.
    #[error("decomposition did not converge after {iterations} steps (residual {residual:e})")]
    Decomposition { iterations: usize, residual: f64 },
    /// A fit window was too small or degenerate.
    #[error("fit error: {0}")]
    Fit(String),
    /// A time evolution was stopped.
    #[error("evolution aborted at t = {t}: {reason}")]
    Aborted { t: f64, reason: String },
}

pub type Result<T> = std::result::Result<T, Error>;
