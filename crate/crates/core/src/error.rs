use thiserror::Error;

/// Errors produced by the vMF geometry library.
#[derive(Debug, Error)]
pub enum Error {
    /// Concentration outside `(0, inf)`.
    #[error("concentration must be positive and finite, got {0}")]
    InvalidKappa(f64),

    /// Ambient dimension below 2.
    #[error("ambient dimension must be at least 2, got {0}")]
    InvalidDimension(usize),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("direction vector has zero norm")]
    ZeroVector,

    /// A vector that should lie on the sphere is too far from unit norm.
    #[error("vector norm {0} deviates from 1 beyond tolerance")]
    NotUnitNorm(f64),

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    /// The logarithm map is undefined for antipodal points.
    #[error("antipodal points have no unique geodesic{0}")]
    Antipodal(String),

    /// The weighted extrinsic mean of the directions vanished.
    #[error("weighted extrinsic mean is zero; Frechet mean initializer undefined")]
    ZeroExtrinsicMean,

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("target {target} out of range for {n} items")]
    TargetOutOfRange { target: usize, n: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// A numerical routine produced a non-finite value or failed to converge.
    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(self, Error::Numerical(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;
