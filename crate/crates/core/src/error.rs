use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("matrix is not Hermitian (max asymmetry {asymmetry:e})")]
    NotHermitian { asymmetry: f64 },

    #[error("vector is not a unit vector (norm {norm})")]
    NotUnitVector { norm: f64 },

    #[error("measure is not normalized (total mass {total})")]
    Unnormalized { total: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("spectral parameter must have nonzero imaginary part")]
    RealSpectralParameter,

    #[error("eigendecomposition failed to converge")]
    EigenFailure,

    #[error("malformed data: {0}")]
    Malformed(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
