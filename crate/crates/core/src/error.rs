// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("the system needs at least one branch (got n = {0})")]
    EmptySystem(usize),
    #[error("invalid branch {index}: {reason}")]
    InvalidBranch { index: usize, reason: String },
    #[error("letter {letter} is out of range 1..={n}")]
    LetterOutOfRange { letter: usize, n: usize },
    #[error("word must be nonempty")]
    EmptyWord,
    #[error("invalid interval [{left}, {right}]: endpoints must satisfy 0 <= left <= right <= 1")]
    InvalidInterval { left: f64, right: f64 },
    #[error("interval has zero length")]
    ZeroLength,
    #[error("enumeration of {requested} items exceeds the cap of {cap}")]
    CapExceeded { requested: u128, cap: u64 },
    #[error("interval [{left}, {right}] lies outside the first-generation union")]
    OutsideUnion { left: f64, right: f64 },
    #[error(
        "interval [{left}, {right}] straddles a first-generation boundary that is not a grid point"
    )]
    StraddlesGap { left: f64, right: f64 },
    #[error("expansion did not reach a grid point within {0} steps")]
    StepCapReached(usize),
    #[error("tolerance must be positive and finite (got {0})")]
    InvalidTolerance(f64),
    #[error("dimension solver did not reach |residual| <= {tolerance} (best residual {residual})")]
    NotConverged { residual: f64, tolerance: f64 },
    #[error("h = {h} is not the dimension of this system (Moran residual {residual})")]
    InconsistentDimension { h: f64, residual: f64 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}
