//! Error type shared across the library.

use std::fmt;

/// Errors produced by harvester models, channel construction, solvers, and
/// region sweeps.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input violated a documented precondition (negative power, invalid
    /// moment pair, empty path list, ...).
    Domain(String),
    /// The requested constraint cannot be met by any feasible strategy.
    /// `max_attainable` carries the best achievable value of the constrained
    /// quantity when it is cheap to compute.
    Infeasible {
        reason: String,
        max_attainable: Option<f64>,
    },
    /// Too few data points for the requested fit.
    InsufficientData { needed: usize, got: usize },
    /// The data admit no meaningful fit (e.g. all-zero measurements).
    Degenerate(String),
    /// An iterative solver hit its iteration cap. For curve fits the best
    /// iterate found so far is attached.
    Convergence {
        reason: String,
        iterations: usize,
        best: Option<(f64, f64, f64, f64)>, // (a, b, p_sat, residual)
    },
    /// Operation is not defined for this variant (e.g. analytic moments of a
    /// superposed waveform).
    Unsupported(String),
    /// Inconsistent array or matrix dimensions.
    DimensionMismatch(String),
    /// Malformed input file (CSV/JSON).
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::Domain(msg) => write!(f, "domain error: {msg}"),
            Error::Infeasible {
                reason,
                max_attainable,
            } => match max_attainable {
                Some(m) => write!(f, "infeasible: {reason} (max attainable {m:.6e})"),
                None => write!(f, "infeasible: {reason}"),
            },
            Error::InsufficientData { needed, got } => {
                write!(f, "insufficient data: need at least {needed} points, got {got}")
            }
            Error::Degenerate(msg) => write!(f, "degenerate data: {msg}"),
            Error::Convergence {
                reason, iterations, ..
            } => write!(f, "no convergence after {iterations} iterations: {reason}"),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::DimensionMismatch(msg) => write!(f, "dimension mismatch: {msg}"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
