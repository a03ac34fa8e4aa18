//! Reference measures with exact moments and executable versions of the
//! bounds that control the estimator.
//!
//! The measures are `ν_r`, density `c_r (1 - ‖z‖²)^r` on the unit ball. Their
//! moments have a closed form, so their Christoffel functions are known to
//! machine precision and every bound can be checked against the true value.

mod bounds;
mod inequalities;
mod measures;

pub use bounds::{
    bound_sandwich_suite, concentration_bound, inside_lower_bound, outside_upper_bound, sup_kernel_bound,
    technical_gap, BoundReport, Relation,
};
pub use inequalities::inequality_suite;
pub use measures::{
    analytic_moment_matrix, ball_jacobi_moment, boundary_kernel_spellings, christoffel_analytic,
    gegenbauer_boundary_kernel, AnalyticChristoffel, BallJacobiMeasure,
};
