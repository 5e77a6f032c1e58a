use thiserror::Error;

use crate::solver::LossSample;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{what}: need at least {min_h}x{min_w}, got {height}x{width}")]
    DimensionTooSmall {
        what: &'static str,
        height: usize,
        width: usize,
        min_h: usize,
        min_w: usize,
    },

    #[error("{what}: dimension mismatch, expected {expected:?}, got {actual:?}")]
    DimensionMismatch {
        what: &'static str,
        expected: (usize, usize),
        actual: (usize, usize),
    },

    #[error("degenerate force pair ({f_moving}, {f_target}) for {variant}: zero denominator")]
    DegenerateForcePair {
        f_moving: f64,
        f_target: f64,
        variant: &'static str,
    },

    #[error("invalid force pair ({f_moving}, {f_target}): forces must be finite and non-negative")]
    InvalidForce { f_moving: f64, f_target: f64 },

    #[error("invalid dimension: {0}")]
    InvalidDimension(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("non-finite loss at level {level}, iteration {iteration}")]
    NonFiniteLoss {
        level: usize,
        iteration: usize,
        trace: Vec<LossSample>,
    },

    #[error("{path}: {message}")]
    Format { path: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
