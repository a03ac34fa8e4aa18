use std::path::PathBuf;

use thiserror::Error;

/// Errors produced anywhere in the crate.
///
/// [`Error::is_validation`] separates bad inputs (arguments, files, configs)
/// from failures that happen while a well-formed request is being computed.
#[derive(Debug, Error)]
pub enum Error {
    #[error("basis size binom({d}+{p}, {d}) does not fit in the integer range")]
    SizeOverflow { p: usize, d: u32 },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("need at least {needed} sample points, got {got}")]
    InsufficientSample { needed: usize, got: usize },

    #[error(
        "degenerate sample: covariance is singular along direction {direction:?} \
         (eigenvalue {eigenvalue:e})"
    )]
    DegenerateSample { direction: Vec<f64>, eigenvalue: f64 },

    #[error(
        "moment matrix of size {size} is numerically singular (pivot {pivot}); \
         use at least {size} distinct sample points or lower the degree"
    )]
    SingularMomentMatrix { size: usize, pivot: usize },

    #[error("{what} requires d >= {min}, got d = {d}")]
    OutOfHypothesis { what: &'static str, d: u32, min: u32 },

    #[error("{0} overflows the floating-point range")]
    Overflow(String),

    #[error("exponent r = {0} is not a nonnegative integer; only integer r has closed-form moments")]
    UnsupportedExponent(f64),

    #[error("rejection sampler acceptance rate {rate:e} is below 1e-4; shape too thin for its bounding box")]
    ShapeTooThin { rate: f64 },

    #[error("raster of {cells} cells exceeds the memory budget of {budget} cells")]
    MemoryBudget { cells: u128, budget: u128 },

    #[error("rasters are defined on different grids")]
    GridMismatch,

    #[error("distance to an empty raster is undefined")]
    EmptyRaster,

    #[error("{op} is only supported in dimension {supported}, got {p}")]
    UnsupportedDimension { op: &'static str, supported: usize, p: usize },

    #[error("{path}: line {line}{}: {message}", column.map(|c| format!(", column {c}")).unwrap_or_default())]
    Parse { path: PathBuf, line: u64, column: Option<usize>, message: String },

    #[error("dataset has no normal/outlier labels")]
    MissingLabels,

    #[error("malformed container: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Toml(#[from] toml::de::Error),
}

impl Error {
    /// True when the error stems from invalid user input rather than from a
    /// computation that could not complete.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::DimensionMismatch { .. }
                | Error::InvalidArgument(_)
                | Error::InsufficientSample { .. }
                | Error::OutOfHypothesis { .. }
                | Error::UnsupportedExponent(_)
                | Error::UnsupportedDimension { .. }
                | Error::GridMismatch
                | Error::Parse { .. }
                | Error::MissingLabels
                | Error::Format(_)
                | Error::Json(_)
                | Error::Toml(_)
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Format(format!("{other:?}")),
    }
}
