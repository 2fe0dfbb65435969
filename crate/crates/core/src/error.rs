use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("field mismatch: expected {expected}, got {found}")]
    FieldMismatch {
        expected: crate::Field,
        found: crate::Field,
    },

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not Hermitian (relative residual {residual:.3e})")]
    NotHermitian { residual: f64 },

    #[error("matrix is not a projector (residual {residual:.3e})")]
    NotProjector { residual: f64 },

    #[error("non-finite entry in input")]
    NonFinite,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("zero input: {0}")]
    Zero(&'static str),

    #[error("measurement has imaginary residue {residue:.3e}")]
    ImaginaryResidue { residue: f64 },

    #[error("invalid rank {rank} for {context} (d = {d})")]
    InvalidRank {
        rank: usize,
        d: usize,
        context: &'static str,
    },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is outside the witness class")]
    NotWitnessClass,

    #[error("malformed document: {0}")]
    Format(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
