use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is not square: {0}x{1}")]
    NotSquare(usize, usize),

    #[error("matrix is not symmetric (max deviation {0:.3e})")]
    NotSymmetric(f64),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("matrix is not positive definite (min eigenvalue {0:.6e})")]
    NotPositive(f64),

    #[error("conditioning failure in {what}: eigenvalue {min_eig:.6e} below floor (retry with a larger epsilon)")]
    Conditioning { what: &'static str, min_eig: f64 },

    #[error("not a valid covariance matrix (min eigenvalue of V + i\u{3a9} is {0:.6e})")]
    InvalidQcm(f64),

    #[error("input is not unitary (deviation {0:.3e})")]
    NotUnitary(f64),

    #[error("{0}")]
    Domain(String),

    #[error("empty mode layout: m + n must be at least 1")]
    EmptyLayout,

    #[error("mode groups {groups:?} do not partition {modes} modes")]
    BadGroups { groups: Vec<usize>, modes: usize },

    #[error("unsupported schema version {found} (this tool reads version {supported})")]
    UnsupportedSchema { found: u32, supported: u32 },

    #[error("parse error at byte {offset} (line {line}, column {column}): {message}")]
    Parse {
        offset: usize,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}
