//! Empirical moment matrices and the Christoffel function they define.

mod affine;
mod container;
mod model;
mod moment;

pub use affine::{standardize, AffineMap};
pub use container::{FORMAT_TAG, FORMAT_VERSION};
pub use model::{
    cd_kernel_diag, christoffel, fit, ChristoffelModel, Evaluator, FitOptions, FitWarning, Solver,
    TrainingSummary,
};
pub use moment::{build_moment_matrix, factorize, orthonormal_transform, JitterPolicy, MomentMatrix, Provenance};
