use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("window [{lo}, {hi}] too small: need at least [{need_lo}, {need_hi}]")]
    WindowTooSmall { lo: i64, hi: i64, need_lo: i64, need_hi: i64 },

    #[error("site {site} outside window [{lo}, {hi}]")]
    SiteOutsideWindow { site: i64, lo: i64, hi: i64 },

    #[error("invalid parameter `{field}`: {reason}")]
    InvalidParameter { field: String, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("ill-conditioned matrix (growth factor {growth:.3e}); use extended precision")]
    IllConditioned { growth: f64 },

    #[error("series did not converge inside the window (last term magnitude {last_term:.3e})")]
    NonConvergence { last_term: f64 },

    #[error("numerical result flagged: error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}")]
    Flagged { estimate: f64, tolerance: f64 },

    #[error("singular linear system at s = {s}")]
    Singular { s: f64 },

    #[error("state space has {states} states, limit is {limit}")]
    StateSpaceTooLarge { states: usize, limit: usize },

    #[error("empty sample")]
    EmptySample,

    #[error("argument {value} outside table range [{lo}, {hi}]")]
    OutOfRange { value: f64, lo: f64, hi: f64 },

    #[error("parity violation: x = {x} and level = {level} must have equal parity")]
    Parity { x: i64, level: i64 },

    #[error("too few particles in the window: need label {needed}, have {available}")]
    NotEnoughParticles { needed: i64, available: i64 },

    #[error("malformed {what} at {path}: {reason}")]
    Malformed { what: &'static str, path: PathBuf, reason: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn invalid(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::InvalidParameter { field: field.into(), reason: reason.into() }
    }
}
