//! Error type shared by every module of the crate.

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("variable index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },
    #[error("operator has order {order}, which exceeds the requested symbol degree {requested}")]
    OrderExceeded { order: i64, requested: i64 },
    #[error("1-form is not closed: d(omega)[{i}][{j}] != 0")]
    NotClosed { i: usize, j: usize },
    #[error("matrix is not nilpotent; exact flow mode requires a nilpotent linear part")]
    NotNilpotent,
    #[error("map is not invertible")]
    NotInvertible,
    #[error("gauge function vanishes (or may vanish) on the chart")]
    ZeroGauge,
    #[error("exact polynomial division failed")]
    DivisionFailed,
    #[error("trigonometric modes of different parity cannot be mixed here")]
    ModeMix,
    #[error("bundle model mismatch")]
    ModelMismatch,
    #[error("invalid transition cocycle")]
    InvalidCocycle,
    #[error("negative truncation order")]
    NegativeOrder,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("parse error at {line}:{col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
