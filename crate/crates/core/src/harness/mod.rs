//! Experiment drivers: datasets, the KDE baseline, configs and reports.
//!
//! Every driver takes an [`ExperimentConfig`] and returns a [`RunReport`].
//! Seeds are folded with [`derive_seed`], so equal configs give equal
//! reports up to the wall-clock fields.

pub mod concentration;
pub mod config;
pub mod convergence;
pub mod dataset;
pub mod kde;
pub mod outlier;
pub mod report;
pub mod stats;
pub mod synthetic;

pub use concentration::{run_concentration_study, sample_ball_measure, ConcentrationReport, ConcentrationRow};
pub use config::{
    ConcentrationSettings, DegreeRule, ExperimentConfig, ExperimentKind, Generator, OutlierSettings, ThresholdRule,
    OUT_DIR_ENV,
};
pub use convergence::{run_convergence_study, ConvergenceReport, ConvergenceRow, ConvergenceSummary};
pub use dataset::{ingest_csv, ingest_labeled_csv, separable_benchmark, thyroid_surrogate, Dataset, Label};
pub use kde::{kde_score, kde_scores, Kernel, DEFAULT_BANDWIDTHS};
pub use outlier::{run_outlier_bench, run_outlier_from_config, Method, MethodSummary, OutlierReport, OutlierRow};
pub use report::{ReportBody, RunReport, REPORT_FORMAT};
pub use stats::{derive_seed, median, quantile};
pub use synthetic::{run_synthetic_support, shape_scheme_params, SyntheticOutput, SyntheticReport, SyntheticRow};
