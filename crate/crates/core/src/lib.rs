//! Support estimation with the empirical Christoffel function.
//!
//! A sample `X_1, …, X_n` defines the empirical moment matrix of the monomials
//! of degree at most `d`. Its inverse gives the Christoffel–Darboux kernel, and
//! the Christoffel function `Λ(x) = 1 / κ(x, x)` is large on the bulk of the
//! sample and decays polynomially away from it. The support estimate is the
//! sublevel set `{x : Λ(x) ≥ γ}`.
//!
//! ```
//! use cdsupport::christoffel::{fit, FitOptions};
//! use cdsupport::geometry::{sample_shape, ShapeSpec};
//!
//! let disk = ShapeSpec::ball(vec![0.0, 0.0], 1.0)?;
//! let sample = sample_shape(&disk, 2000, 0.0, 7)?;
//! let model = fit(&sample, 4, &FitOptions::default())?;
//! assert!(model.christoffel(&[0.0, 0.0])? > model.christoffel(&[2.0, 0.0])?);
//! # Ok::<(), cdsupport::Error>(())
//! ```
//!
//! The modules follow the pipeline:
//!
//! * [`polybasis`]: monomial enumeration and evaluation.
//! * [`christoffel`]: moment matrices, factorization and the fitted model.
//! * [`thresholding`]: degree/threshold selection and support estimates.
//! * [`oracles`]: closed forms on ball measures and executable bounds.
//! * [`geometry`]: reference shapes, samplers, rasters and set distances.
//! * [`harness`]: datasets, baselines and the experiment drivers.

// `!(x > 0.0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod christoffel;
mod error;
pub mod geometry;
pub mod harness;
pub mod linalg;
pub mod oracles;
mod points;
pub mod polybasis;
pub mod thresholding;

pub use error::{Error, Result};
pub use points::PointSet;

/// Version string embedded in reports.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/quickstart.md")]
    mod quickstart {}
    #[doc = include_str!("../../../book/src/christoffel.md")]
    mod christoffel {}
    #[doc = include_str!("../../../book/src/thresholding.md")]
    mod thresholding {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/geometry.md")]
    mod geometry {}
    #[doc = include_str!("../../../book/src/experiments.md")]
    mod experiments {}
}
