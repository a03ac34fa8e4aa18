use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{DegreeRule, ExperimentConfig, ExperimentKind, ThresholdRule};
use super::report::{ReportBody, RunReport};
use super::stats::derive_seed;
use crate::christoffel::{fit, ChristoffelModel, FitOptions};
use crate::error::{invalid, Result};
use crate::geometry::{
    compare, contour_polylines, rasterize, sample_shape, write_contours_csv, BoundingBox, GeometryReport, Raster, Ring,
    ShapeSpec,
};
use crate::points::PointSet;
use crate::thresholding::{estimate_support, min_score_threshold, practical_degree, select_scheme, SchemeOutputs, SchemeParams};

/// A fitted model with the degree and threshold the config asked for.
pub(crate) struct Estimate {
    pub model: ChristoffelModel,
    pub degree: u32,
    pub gamma: f64,
    pub scheme: Option<SchemeOutputs>,
    /// False when the theoretical threshold was requested but undefined at
    /// the selected degree, and the min-score threshold was used instead.
    pub threshold_as_configured: bool,
}

/// Scheme constants for a shape sampled with density `∝ d(x, ∂S)^decay`.
pub fn shape_scheme_params(shape: &ShapeSpec, decay: f64, eps: f64, alpha: f64) -> Result<SchemeParams> {
    let c = shape
        .density_constant(decay)
        .ok_or_else(|| invalid("density constant of this shape is not available for r > 0"))?;
    SchemeParams::new(shape.dim(), decay, c, shape.rolling_radius(), eps, alpha, shape.diameter())
}

pub(crate) fn fit_estimate(cfg: &ExperimentConfig, shape: &ShapeSpec, sample: &PointSet) -> Result<Estimate> {
    let n = sample.len() as u64;
    let (degree, scheme) = match cfg.degree {
        DegreeRule::Practical => (practical_degree(n)?, None),
        DegreeRule::Fixed { degree } => (degree, None),
        DegreeRule::Theoretical { params, eps, alpha } => {
            let params = match params {
                Some(p) => p,
                None => shape_scheme_params(shape, cfg.decay, eps, alpha)?,
            };
            let out = select_scheme(n, &params)?;
            (out.degree, Some(out))
        }
    };
    let model = fit(sample, degree, &FitOptions::default())?;
    let theory_gamma = match cfg.threshold {
        ThresholdRule::Theoretical => scheme.as_ref().and_then(|s| s.threshold),
        ThresholdRule::MinScore => None,
    };
    let (gamma, as_configured) = match (cfg.threshold, theory_gamma) {
        (ThresholdRule::Theoretical, Some(g)) => (g, true),
        (ThresholdRule::Theoretical, None) => (min_score_threshold(&model, sample)?, false),
        (ThresholdRule::MinScore, _) => (min_score_threshold(&model, sample)?, true),
    };
    Ok(Estimate { model, degree, gamma, scheme, threshold_as_configured: as_configured })
}

/// Sample, fit, threshold and rasterize one replicate.
pub(crate) struct Replicate {
    pub sample: PointSet,
    pub estimate: Estimate,
    pub raster: Raster,
    /// `None` when no cell of the estimate is occupied.
    pub geometry: Option<GeometryReport>,
}

pub(crate) fn run_replicate(cfg: &ExperimentConfig, shape: &ShapeSpec, truth: &Raster, n: u64, seed: u64) -> Result<Replicate> {
    let sample = sample_shape(shape, n as usize, cfg.decay, derive_seed(seed, &[n]))?;
    let estimate = fit_estimate(cfg, shape, &sample)?;
    let raster = estimate_support(&estimate.model, estimate.gamma)?.rasterize(truth.bbox(), truth.resolution())?;
    let geometry = if raster.is_empty() { None } else { Some(compare(truth, &raster)?) };
    Ok(Replicate { sample, estimate, raster, geometry })
}

pub(crate) fn truth_raster(cfg: &ExperimentConfig, shape: &ShapeSpec) -> Result<Raster> {
    let bbox = shape.study_box();
    rasterize(|x| shape.contains(x), &bbox, &vec![cfg.resolution; shape.dim()])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticRow {
    pub n: u64,
    pub seed: u64,
    pub degree: u32,
    pub gamma: f64,
    /// Fraction of the sample inside the estimate; 1 under the min-score rule.
    pub inside_fraction: f64,
    pub rings: usize,
    /// The three divergences are absent when the estimate raster is empty.
    pub hausdorff: Option<f64>,
    pub boundary_hausdorff: Option<f64>,
    pub symdiff_measure: Option<f64>,
    pub cell_diagonal: f64,
    pub wall_time_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticReport {
    pub box_lower: Vec<f64>,
    pub box_upper: Vec<f64>,
    pub resolution: usize,
    pub rows: Vec<SyntheticRow>,
}

/// Per-replicate plot data: the estimate raster and its contour rings.
#[derive(Debug, Clone)]
pub struct SyntheticArtifact {
    pub n: u64,
    pub seed: u64,
    pub estimate: Raster,
    pub rings: Vec<Ring>,
}

#[derive(Debug, Clone)]
pub struct SyntheticOutput {
    pub report: RunReport,
    pub artifacts: Vec<SyntheticArtifact>,
}

impl SyntheticOutput {
    /// Writes the report plus `contours_n<n>_s<seed>.csv` and the matching
    /// `estimate_…txt` raster for every replicate.
    pub fn save(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        let mut written = self.report.save(dir, "synthetic_support")?;
        for a in &self.artifacts {
            let stem = format!("n{}_s{}", a.n, a.seed);
            let contours = dir.join(format!("contours_{stem}.csv"));
            write_contours_csv(&a.rings, std::io::BufWriter::new(std::fs::File::create(&contours)?))?;
            let raster = dir.join(format!("estimate_{stem}.txt"));
            a.estimate.write_text(std::io::BufWriter::new(std::fs::File::create(&raster)?))?;
            written.extend([contours, raster]);
        }
        Ok(written)
    }
}

/// For every `n` and seed: sample the shape, fit at the configured degree,
/// threshold, rasterize the estimate on the study box and compare it with
/// the true set.
pub fn run_synthetic_support(cfg: &ExperimentConfig) -> Result<SyntheticOutput> {
    if cfg.kind != ExperimentKind::SyntheticSupport {
        return Err(invalid("config kind must be synthetic-support"));
    }
    cfg.validate()?;
    let shape = cfg.shape.as_ref().expect("validated");
    let truth = truth_raster(cfg, shape)?;
    let jobs: Vec<(u64, u64)> = sorted_jobs(cfg);
    let results: Vec<Result<(SyntheticRow, SyntheticArtifact)>> = jobs
        .par_iter()
        .map(|&(n, seed)| {
            let start = Instant::now();
            let rep = run_replicate(cfg, shape, &truth, n, seed)?;
            let scores = rep.estimate.model.scores(&rep.sample)?;
            let inside = scores.iter().filter(|&&s| s >= rep.estimate.gamma).count();
            let rings = contour_polylines(&rep.raster)?;
            let row = SyntheticRow {
                n,
                seed,
                degree: rep.estimate.degree,
                gamma: rep.estimate.gamma,
                inside_fraction: inside as f64 / scores.len() as f64,
                rings: rings.len(),
                hausdorff: rep.geometry.as_ref().map(|g| g.hausdorff),
                boundary_hausdorff: rep.geometry.as_ref().map(|g| g.boundary_hausdorff),
                symdiff_measure: rep.geometry.as_ref().map(|g| g.symdiff_measure),
                cell_diagonal: truth.cell_diagonal(),
                wall_time_s: start.elapsed().as_secs_f64(),
            };
            Ok((row, SyntheticArtifact { n, seed, estimate: rep.raster, rings }))
        })
        .collect();
    let mut rows = Vec::new();
    let mut artifacts = Vec::new();
    for r in results {
        let (row, art) = r?;
        rows.push(row);
        artifacts.push(art);
    }
    let bbox: &BoundingBox = truth.bbox();
    let body = SyntheticReport {
        box_lower: bbox.lower().to_vec(),
        box_upper: bbox.upper().to_vec(),
        resolution: cfg.resolution,
        rows,
    };
    Ok(SyntheticOutput { report: RunReport::new(cfg.clone(), ReportBody::SyntheticSupport(body)), artifacts })
}

/// `(n, seed)` pairs sorted by `n`, then by seed order.
pub(crate) fn sorted_jobs(cfg: &ExperimentConfig) -> Vec<(u64, u64)> {
    let mut ns = cfg.n_grid.clone();
    ns.sort_unstable();
    ns.dedup();
    ns.iter().flat_map(|&n| cfg.seeds.iter().map(move |&s| (n, s))).collect()
}
