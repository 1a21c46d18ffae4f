use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SdpError {
    #[error("block {block} does not exist")]
    UnknownBlock { block: usize },
    #[error("coefficient for block {block} is {rows}x{cols}, expected {expected}x{expected}")]
    DimensionMismatch {
        block: usize,
        rows: usize,
        cols: usize,
        expected: usize,
    },
    #[error("coefficient for block {block} is not Hermitian (deviation {deviation:.3e})")]
    NotHermitian { block: usize, deviation: f64 },
    #[error("problem has no blocks")]
    Empty,
    #[error("right-hand side of constraint {constraint} is not finite")]
    NonFinite { constraint: usize },
}
