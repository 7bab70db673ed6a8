use thiserror::Error;

pub type Result<T> = std::result::Result<T, CodaError>;

#[derive(Debug, Error)]
pub enum CodaError {
    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        /// 1-based line number in the source file (header is line 1).
        row: usize,
        /// 1-based column number.
        column: usize,
        message: String,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),

    #[error("json: {0}")]
    Json(#[from] serde_json::Error),

    #[error("invalid shape: {0}")]
    Shape(String),

    #[error("duplicate part name `{0}`")]
    DuplicatePart(String),

    #[error("unknown part or amalgamation `{0}`")]
    UnknownName(String),

    #[error("negative value {value} in row {row} (`{label}`), part `{part}`")]
    Negative {
        row: usize,
        label: String,
        part: String,
        value: f64,
    },

    #[error("row {row} (`{label}`) has zero sum and cannot be closed")]
    ZeroRow { row: usize, label: String },

    #[error("part `{part}` has no positive values; zero replacement is undefined")]
    AllZeroColumn { part: String },

    #[error("nonpositive value in row {row}, part `{part}`; replace zeros before taking logs")]
    NonPositive { row: usize, part: String },

    #[error("invalid weights: {0}")]
    Weights(String),

    #[error("invalid logratio: {0}")]
    InvalidLogratio(String),

    #[error("part `{part}` appears in more than one group")]
    Overlap { part: String },

    #[error("duplicate logratio `{0}`")]
    DuplicateLogratio(String),

    #[error("invalid hierarchy: {0}")]
    Hierarchy(String),

    #[error("logratio `{slr}` violates the sibling rule: {reason}")]
    SiblingRule { slr: String, reason: String },

    #[error("degenerate data: {0}")]
    Degenerate(String),
}

impl CodaError {
    /// True for failures caused by data without variation rather than by
    /// malformed input.
    pub fn is_numerical(&self) -> bool {
        matches!(self, CodaError::Degenerate(_))
    }
}
