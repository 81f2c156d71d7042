//! Error types used by `expu_core`.

use thiserror::Error;

/// `expu_core` `Result` type.
pub type Result<T> = core::result::Result<T, Error>;

/// `expu_core` error.
#[derive(Error, Debug, Clone, PartialEq)]
pub enum Error {
    /// The channel matrix has fewer than two inputs or two outputs.
    #[error("degenerate alphabet: need at least 2 inputs and 2 outputs, got {inputs}x{outputs}")]
    DegenerateAlphabet { inputs: usize, outputs: usize },
    /// A row of the channel matrix has the wrong number of entries.
    #[error("row {row}: expected {expected} entries, found {found}")]
    NotRectangular {
        row: usize,
        expected: usize,
        found: usize,
    },
    /// A probability entry is negative.
    #[error("row {row}, column {col}: negative entry {value}")]
    NegativeEntry { row: usize, col: usize, value: f64 },
    /// A probability entry is NaN or infinite.
    #[error("row {row}, column {col}: entry is not finite")]
    NonFiniteEntry { row: usize, col: usize },
    /// A row (of a channel or of a pmf) does not sum to one.
    #[error("row {row}: entries sum to {sum}, expected 1")]
    RowSumViolation { row: usize, sum: f64 },
    /// An input or output symbol or a codeword index is out of range.
    #[error("index {index} out of range (size {size})")]
    IndexOutOfRange { index: usize, size: usize },
    /// Two sequences that must have equal length do not.
    #[error("length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    /// The input distribution has the wrong number of symbols.
    #[error("distribution has {found} entries, channel has {expected} inputs")]
    AlphabetMismatch { expected: usize, found: usize },
    /// The ρ argument lies outside the admissible interval.
    #[error("rho = {rho} outside [{lo}, {hi}]")]
    RhoOutOfRange { rho: f64, lo: f64, hi: f64 },
    /// The ρ search ceiling is below 1.
    #[error("rho_max = {0} is below 1")]
    RhoMaxTooSmall(f64),
    /// An exhaustive enumeration would exceed its size budget.
    #[error("enumeration of {needed} terms exceeds the budget of {budget}")]
    BudgetExceeded { needed: f64, budget: f64 },
    /// The codebook size 2^(n·rate) does not fit the sizing guard.
    #[error("codebook size overflow: n·rate = {0} exceeds 40")]
    SizeOverflow(f64),
    /// No block length satisfies the n₀ condition below 2^31.
    #[error("no block length below 2^31 satisfies the n0 condition")]
    NoConvergence,
    /// More codewords requested than the mother code contains.
    #[error("cannot keep {keep} codewords out of {available}")]
    KeepTooLarge { keep: usize, available: usize },
    /// A configuration or argument value is invalid.
    #[error("invalid {what}: {reason}")]
    Invalid { what: &'static str, reason: String },
    /// Malformed JSON or text input.
    #[error("parse error: {0}")]
    Parse(String),
    /// Filesystem or serialization failure.
    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn invalid(what: &'static str, reason: impl Into<String>) -> Self {
        Error::Invalid {
            what,
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}
