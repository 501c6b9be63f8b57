use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimensions {height}x{width} are not multiples of 8")]
    NotBlockAligned { height: usize, width: usize },

    #[error("shape mismatch: {left:?} vs {right:?}")]
    ShapeMismatch {
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("quality factor {0} outside [1, 100]")]
    QualityFactor(u32),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("non-ternary change {diff} at ({row}, {col})")]
    NonTernary { row: usize, col: usize, diff: i64 },

    #[error("rounding error {value} at ({row}, {col}) exceeds 0.5 in magnitude")]
    RoundingErrorRange { row: usize, col: usize, value: f64 },

    #[error("payload of {requested} bits exceeds capacity of {capacity} bits")]
    InfeasiblePayload { requested: f64, capacity: f64 },

    #[error("probability sum {sum} exceeds 1 at ({row}, {col})")]
    ProbabilitySum { row: usize, col: usize, sum: f64 },

    #[error("value {value} at index {index} outside [0, 1]")]
    OutOfRange { index: usize, value: f64 },

    #[error("real-valued modification maps cannot be applied to coefficients")]
    RelaxedModification,

    #[error("image {height}x{width} is smaller than window {window}")]
    WindowTooLarge {
        height: usize,
        width: usize,
        window: usize,
    },

    #[error("empty selection")]
    EmptySelection,

    #[error("too few examples: {got} per class, need at least {need}")]
    TooFewExamples { got: usize, need: usize },

    #[error("malformed PGM: {0}")]
    Pgm(String),

    #[error("malformed grid file: {0}")]
    GridFile(String),

    #[error("{0}")]
    Config(String),

    #[error("refusing to overwrite {0} (pass --force)")]
    WouldOverwrite(std::path::PathBuf),

    #[error(transparent)]
    Io(#[from] io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
