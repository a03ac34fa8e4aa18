use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind};
use super::report::{ReportBody, RunReport};
use super::stats::{log_log_slope, median};
use super::synthetic::{run_replicate, sorted_jobs, truth_raster};
use crate::error::{invalid, Result};
use crate::geometry::GeometryReport;
use crate::thresholding::SchemeOutputs;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub n: u64,
    pub seed: u64,
    pub degree: u32,
    pub gamma: f64,
    /// `None` when the estimate is empty on the grid.
    pub geometry: Option<GeometryReport>,
    /// Scheme outputs under the theoretical degree rule.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub scheme: Option<SchemeOutputs>,
    /// The theoretical threshold was undefined and min-score was used.
    pub threshold_fallback: bool,
    /// `n ≥ n0` and the degree is in the range of the theory.
    pub applicable: bool,
    /// `d_H ≤ δ_n + cell diagonal`, reported only for applicable rows.
    pub within_delta: Option<bool>,
    pub wall_time_s: f64,
}

/// Flat CSV view of a [`ConvergenceRow`].
#[derive(Debug, Serialize)]
pub struct ConvergenceCsvRow {
    pub n: u64,
    pub seed: u64,
    pub degree: u32,
    pub gamma: f64,
    pub hausdorff: Option<f64>,
    pub boundary_hausdorff: Option<f64>,
    pub symdiff_measure: Option<f64>,
    pub delta: Option<f64>,
    pub applicable: bool,
    pub within_delta: Option<bool>,
    pub wall_time_s: f64,
}

impl ConvergenceRow {
    pub fn flat(&self) -> ConvergenceCsvRow {
        ConvergenceCsvRow {
            n: self.n,
            seed: self.seed,
            degree: self.degree,
            gamma: self.gamma,
            hausdorff: self.geometry.as_ref().map(|g| g.hausdorff),
            boundary_hausdorff: self.geometry.as_ref().map(|g| g.boundary_hausdorff),
            symdiff_measure: self.geometry.as_ref().map(|g| g.symdiff_measure),
            delta: self.scheme.as_ref().and_then(|s| s.delta),
            applicable: self.applicable,
            within_delta: self.within_delta,
            wall_time_s: self.wall_time_s,
        }
    }
}

/// Medians over seeds at one sample size, over the replicates with a
/// nonempty estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceSummary {
    pub n: u64,
    pub degree: u32,
    pub empty_estimates: usize,
    pub hausdorff: Option<f64>,
    pub boundary_hausdorff: Option<f64>,
    pub symdiff_measure: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub resolution: usize,
    pub cell_diagonal: f64,
    pub rows: Vec<ConvergenceRow>,
    pub summary: Vec<ConvergenceSummary>,
    /// Least-squares slopes of the medians against `n` on log-log axes.
    pub hausdorff_slope: Option<f64>,
    pub boundary_hausdorff_slope: Option<f64>,
    pub symdiff_slope: Option<f64>,
}

/// Runs every `(n, seed)` replicate and summarizes the three divergences by
/// their medians over seeds.
pub fn run_convergence_study(cfg: &ExperimentConfig) -> Result<RunReport> {
    if cfg.kind != ExperimentKind::Convergence {
        return Err(invalid("config kind must be convergence"));
    }
    cfg.validate()?;
    let shape = cfg.shape.as_ref().expect("validated");
    let truth = truth_raster(cfg, shape)?;
    let rows: Vec<Result<ConvergenceRow>> = sorted_jobs(cfg)
        .par_iter()
        .map(|&(n, seed)| {
            let start = Instant::now();
            let rep = run_replicate(cfg, shape, &truth, n, seed)?;
            let est = rep.estimate;
            let applicable = est.scheme.as_ref().is_some_and(|s| s.meets_n0 && !s.below_theory);
            // An empty estimate is at infinite Hausdorff distance.
            let within_delta = match (&est.scheme, applicable) {
                (Some(s), true) => s.delta.map(|d| {
                    rep.geometry.as_ref().is_some_and(|g| g.hausdorff <= d + g.cell_diagonal)
                }),
                _ => None,
            };
            Ok(ConvergenceRow {
                n,
                seed,
                degree: est.degree,
                gamma: est.gamma,
                geometry: rep.geometry,
                scheme: est.scheme,
                threshold_fallback: !est.threshold_as_configured,
                applicable,
                within_delta,
                wall_time_s: start.elapsed().as_secs_f64(),
            })
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;

    let mut summary = Vec::new();
    for chunk in rows.chunk_by(|a, b| a.n == b.n) {
        let pick = |f: fn(&GeometryReport) -> f64| {
            median(&chunk.iter().filter_map(|r| r.geometry.as_ref().map(f)).collect::<Vec<_>>())
        };
        summary.push(ConvergenceSummary {
            n: chunk[0].n,
            degree: chunk[0].degree,
            empty_estimates: chunk.iter().filter(|r| r.geometry.is_none()).count(),
            hausdorff: pick(|g| g.hausdorff),
            boundary_hausdorff: pick(|g| g.boundary_hausdorff),
            symdiff_measure: pick(|g| g.symdiff_measure),
        });
    }
    let ns: Vec<f64> = summary.iter().map(|s| s.n as f64).collect();
    let slope = |f: fn(&ConvergenceSummary) -> Option<f64>| {
        let ys: Option<Vec<f64>> = summary.iter().map(f).collect();
        log_log_slope(&ns, &ys?)
    };
    let body = ConvergenceReport {
        resolution: cfg.resolution,
        cell_diagonal: truth.cell_diagonal(),
        hausdorff_slope: slope(|s| s.hausdorff),
        boundary_hausdorff_slope: slope(|s| s.boundary_hausdorff),
        symdiff_slope: slope(|s| s.symdiff_measure),
        rows,
        summary,
    };
    Ok(RunReport::new(cfg.clone(), ReportBody::Convergence(body)))
}
