use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Index fields are 0-based; messages print them 1-based.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix shape is degenerate: {0}")]
    DegenerateShape(String),
    #[error("negative entry {value} at row {}, column {}", .row + 1, .col + 1)]
    NegativeEntry { row: usize, col: usize, value: f64 },
    #[error("row {} sums to {}, off by {deviation:+.3e}", .row + 1, 1.0 + .deviation)]
    RowSumMismatch { row: usize, deviation: f64 },
    #[error("parameter out of range: {0}")]
    ParameterOutOfRange(String),
    #[error("alphabet mismatch: expected size {expected}, found {found}")]
    AlphabetMismatch { expected: usize, found: usize },
    #[error("symmetric channel is singular at this crossover probability")]
    SingularChannel,
    #[error("channel is not strictly positive (minimum entry is zero)")]
    NotStrictlyPositive,
    #[error("minorization violated at input {}, output {}", .input + 1, .output + 1)]
    MinorizationViolated { input: usize, output: usize },
    #[error("LP solver failure: {0}")]
    SolverFailure(String),
    #[error("row subset is rank deficient")]
    RankDeficientSubset,
    #[error("count overflows the index type")]
    Overflow,
    #[error("configuration mismatch: {0}")]
    ConfigMismatch(String),
    #[error("channel is not a permutation matrix")]
    NotPermutationMatrix,
    #[error("instance too large for exact enumeration: {0}")]
    InstanceTooLarge(String),
    #[error("scheme is incompatible with channel: {0}")]
    SchemeChannelMismatch(String),
    #[error("invalid channel file: {0}")]
    InvalidFile(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
