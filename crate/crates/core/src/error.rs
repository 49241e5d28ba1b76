use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("robot {robot}: thrust {requested:.6} N exceeds limit {limit:.6} N")]
    ThrustLimit {
        robot: usize,
        requested: f64,
        limit: f64,
    },

    #[error("negative penetration depth {0}")]
    NegativePenetration(f64),

    #[error("empty profile")]
    EmptyProfile,

    #[error("hop infeasible: minimum required thrust {required:.6} N exceeds limit {limit:.6} N")]
    HopInfeasible { required: f64, limit: f64 },

    #[error("hop {hop} for robot {robot} infeasible: requires {required:.6} N, limit {limit:.6} N")]
    ScheduleInfeasible {
        robot: usize,
        hop: usize,
        required: f64,
        limit: f64,
    },

    #[error("episode aborted: {0}")]
    EpisodeAborted(String),

    #[error("size mismatch: {0}")]
    SizeMismatch(String),

    #[error("planner timed out after {iterations} iterations ({states} states, {cells} cells)")]
    PlannerTimeout {
        iterations: usize,
        states: usize,
        cells: usize,
    },

    #[error("goal unreachable: {0}")]
    Unreachable(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(name: &'static str, reason: impl Into<String>) -> Error {
    Error::InvalidParameter {
        name,
        reason: reason.into(),
    }
}

/// Shorthand for parameter checks: `ensure(cond, "name", "why")?`.
pub(crate) fn ensure(cond: bool, name: &'static str, reason: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(invalid(name, reason))
    }
}
