use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by latent construction and latent math.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid shape {channels}x{height}x{width}: every dimension must be at least 1")]
    InvalidShape {
        channels: usize,
        height: usize,
        width: usize,
    },

    #[error("data length {found} does not match shape volume {expected}")]
    DataLength { expected: usize, found: usize },

    #[error("non-finite value at element {index}")]
    NonFinite { index: usize },

    #[error("shape mismatch: expected {expected}, found {found}")]
    ShapeMismatch { expected: String, found: String },

    #[error("{latents} latents but {weights} weights")]
    LengthMismatch { latents: usize, weights: usize },

    #[error("a latent set needs at least one member")]
    EmptySet,

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("invalid method: {0}")]
    InvalidMethod(String),

    #[error("interpolated direction has norm {norm:e}, at or below {threshold:e}")]
    DegenerateDirection { norm: f64, threshold: f64 },

    #[error("inputs are antipodal (angle {angle}), the rotation plane is undefined")]
    Antipodal { angle: f64 },

    #[error("interpolation parameter {0} is outside [0, 1]")]
    InvalidParameter(f64),

    #[error("invalid bias: {0}")]
    InvalidBias(String),

    #[error("region rows {rows:?} cols {cols:?} exceeds latent extent {height}x{width}")]
    RegionOutOfBounds {
        rows: std::ops::Range<usize>,
        cols: std::ops::Range<usize>,
        height: usize,
        width: usize,
    },

    #[error("invalid experiment configuration: {0}")]
    InvalidConfig(String),
}

impl Error {
    /// Stable variant name, used as the CLI error tag.
    pub fn name(&self) -> &'static str {
        match self {
            Error::InvalidShape { .. } => "InvalidShape",
            Error::DataLength { .. } => "DataLength",
            Error::NonFinite { .. } => "NonFinite",
            Error::ShapeMismatch { .. } => "ShapeMismatch",
            Error::LengthMismatch { .. } => "LengthMismatch",
            Error::EmptySet => "EmptySet",
            Error::InvalidWeights(_) => "InvalidWeights",
            Error::InvalidMethod(_) => "InvalidMethod",
            Error::DegenerateDirection { .. } => "DegenerateDirection",
            Error::Antipodal { .. } => "Antipodal",
            Error::InvalidParameter(_) => "InvalidParameter",
            Error::InvalidBias(_) => "InvalidBias",
            Error::RegionOutOfBounds { .. } => "RegionOutOfBounds",
            Error::InvalidConfig(_) => "InvalidConfig",
        }
    }
}
