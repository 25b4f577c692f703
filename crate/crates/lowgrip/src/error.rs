use thiserror::Error;

/// Errors shared across the crate.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty trajectory")]
    EmptyTrajectory,

    #[error("empty trace")]
    EmptyTrace,

    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    #[error("csv line {line}: {msg}")]
    Csv { line: usize, msg: String },

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("degenerate regressor: {0}")]
    DegenerateRegressor(String),

    #[error("untrained predictor for maneuver {maneuver} in {mode} mode")]
    Untrained { maneuver: u8, mode: &'static str },

    #[error("runaway rollout")]
    RunawayRollout,

    #[error("wheel buried")]
    WheelBuried,

    #[error("unstable observer: {0}")]
    UnstableObserver(String),

    #[error("non-monotone timestamps at t={0}")]
    NonMonotoneTime(f64),

    #[error("unknown maneuver: {0}")]
    UnknownManeuver(String),
}

pub type Result<T> = std::result::Result<T, Error>;
