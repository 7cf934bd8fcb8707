use thiserror::Error;

/// Errors raised by the laboratory.
#[derive(Debug, Error)]
pub enum LabError {
    #[error("shape mismatch in {op}: {left_rows}x{left_cols} vs {right_rows}x{right_cols}")]
    Shape {
        op: &'static str,
        left_rows: usize,
        left_cols: usize,
        right_rows: usize,
        right_cols: usize,
    },

    #[error("ragged block grid: {0}")]
    RaggedGrid(String),

    #[error("matrix entries must be finite (found {value} at ({row}, {col}))")]
    NonFinite { row: usize, col: usize, value: String },

    #[error("degenerate basis: element {index} is linearly dependent on its predecessors")]
    DegenerateBasis { index: usize },

    #[error("empty basis")]
    EmptyBasis,

    #[error("entry ({row}, {col}) is not a member of the space (residual {residual:e})")]
    NotMember { row: usize, col: usize, residual: f64 },

    #[error("singular value decomposition did not converge (input fingerprint {fingerprint})")]
    Numerical { fingerprint: String },

    #[error("amplification level mismatch: expected {expected}, found {found}")]
    Level { expected: usize, found: usize },

    #[error("invalid index: {0}")]
    InvalidIndex(String),

    #[error("ambient space must be square, got {rows}x{cols}")]
    NonSquare { rows: usize, cols: usize },

    #[error("unsupported parameters: {0}")]
    Unsupported(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = LabError> = std::result::Result<T, E>;
