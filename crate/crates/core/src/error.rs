use thiserror::Error;

use crate::model::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("invalid instance: {}", .0.first().map(ToString::to_string).unwrap_or_default())]
    Invalid(ValidationReport),

    #[error("robot index {index} out of range (n = {n})")]
    RobotOutOfRange { index: usize, n: usize },

    #[error("plan position {x} out of range 0..={horizon}")]
    PositionOutOfRange { x: usize, horizon: usize },

    #[error("a robot cannot be paired with itself (index {0})")]
    SameRobot(usize),

    #[error("segment query needs xi >= xj and xi + 1 <= T (xi = {xi}, xj = {xj}, T = {horizon})")]
    SegmentPrecondition {
        xi: usize,
        xj: usize,
        horizon: usize,
    },

    #[error("disturbance intensity must lie in [0, 1), got {0}")]
    Intensity(f64),

    #[error("{0}")]
    Disturbance(String),

    #[error("unknown policy {0:?} (expected rmtrack, allstop or freeflow)")]
    UnknownPolicy(String),

    #[error("allstop needs the current disturbance flags of every robot")]
    MissingObservation,

    #[error("1-margin violated at t = {t} for robots {i} and {j}; rmtrack refuses to run")]
    MarginViolation { t: usize, i: usize, j: usize },

    #[error("planning failed for robot {robot}: {reason}")]
    Planning { robot: usize, reason: String },

    #[error("{0}")]
    Roadmap(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("exhaustive enumeration limited to n * W <= {limit}, got {requested}")]
    Guard { requested: usize, limit: usize },

    #[error("trace does not match instance: {0}")]
    TraceMismatch(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}
