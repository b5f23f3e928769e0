use thiserror::Error;

/// Errors raised by the geometry, field and flow routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum AxisError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("point {point:?} is not in the open complement (distance to the wall {wall_gap})")]
    Domain { point: Vec<f64>, wall_gap: f64 },
    #[error("R_K(x) = {r} does not exceed alpha = {alpha}")]
    OutsideOffsetComplement { r: f64, alpha: f64 },
    #[error("flow step underflow at t = {time} (last certified point {point:?})")]
    Stall { time: f64, point: Vec<f64> },
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("io error: {0}")]
    Io(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, AxisError>;

impl From<std::io::Error> for AxisError {
    fn from(e: std::io::Error) -> Self {
        AxisError::Io(e.to_string())
    }
}

impl From<serde_json::Error> for AxisError {
    fn from(e: serde_json::Error) -> Self {
        AxisError::Parse(e.to_string())
    }
}
