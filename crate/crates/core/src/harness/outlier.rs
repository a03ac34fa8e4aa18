use std::time::Instant;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{ExperimentConfig, ExperimentKind, Generator, OutlierSettings};
use super::dataset::{ingest_labeled_csv, separable_benchmark, thyroid_surrogate, Dataset, Label};
use super::kde::{kde_scores, Kernel};
use super::report::{ReportBody, RunReport};
use super::stats::{argsort, derive_seed, median, quantile};
use crate::christoffel::{fit, FitOptions};
use crate::error::{invalid, Error, Result};
use crate::points::PointSet;

/// A scoring rule; lower scores mean more outlying.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "method", rename_all = "kebab-case")]
pub enum Method {
    Christoffel { degree: u32 },
    /// Bandwidth is a multiple of the per-axis training standard deviation.
    Kde { kernel: Kernel, bandwidth: f64 },
    /// Independent uniform scores, the null baseline.
    Random,
}

impl Method {
    pub fn name(&self) -> String {
        match self {
            Method::Christoffel { degree } => format!("christoffel-d{degree}"),
            Method::Kde { kernel: Kernel::Gaussian, bandwidth } => format!("kde-gaussian-h{bandwidth}"),
            Method::Kde { kernel: Kernel::Laplace, bandwidth } => format!("kde-laplace-h{bandwidth}"),
            Method::Random => "random".into(),
        }
    }

    /// Scores `test` after training on `train`. `seed` only affects the
    /// random baseline.
    pub fn score(&self, train: &PointSet, test: &PointSet, seed: u64) -> Result<Vec<f64>> {
        match *self {
            Method::Christoffel { degree } => fit(train, degree, &FitOptions::default())?.scores(test),
            Method::Kde { kernel, bandwidth } => {
                let scale = axis_std(train)?;
                let rescale = |x: &[f64], out: &mut [f64]| {
                    for k in 0..x.len() {
                        out[k] = x[k] / scale[k];
                    }
                };
                kde_scores(&train.map(rescale), &test.map(rescale), kernel, bandwidth)
            }
            Method::Random => {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                Ok((0..test.len()).map(|_| rng.random::<f64>()).collect())
            }
        }
    }
}

fn axis_std(x: &PointSet) -> Result<Vec<f64>> {
    let mean = x.mean().ok_or(Error::InsufficientSample { needed: 2, got: 0 })?;
    let n = x.len() as f64;
    let std: Vec<f64> = (0..x.dim())
        .map(|k| (x.iter().map(|r| (r[k] - mean[k]).powi(2)).sum::<f64>() / n).sqrt())
        .collect();
    if std.iter().any(|s| !(*s > 0.0)) {
        return Err(invalid("a training column is constant; KDE bandwidth is undefined"));
    }
    Ok(std)
}

/// Predicts the lower half of the scores as outliers and returns the
/// fraction of true outliers among the predictions.
pub fn precision_at_half(scores: &[f64], labels: &[Label]) -> f64 {
    let k = scores.len() / 2;
    if k == 0 {
        return 0.0;
    }
    let hits = argsort(scores).into_iter().take(k).filter(|&i| labels[i] == Label::Outlier).count();
    hits as f64 / k as f64
}

/// Training set of normals and a test set holding every outlier plus as
/// many held-out normals (or `test_normals` of them).
pub fn split(data: &Dataset, test_normals: Option<usize>, seed: u64) -> Result<(PointSet, Dataset)> {
    let mut normals = data.indices_of(Label::Normal)?;
    let outliers = data.indices_of(Label::Outlier)?;
    if outliers.is_empty() || normals.is_empty() {
        return Err(invalid("the dataset needs both normal and outlier rows"));
    }
    let held = test_normals.unwrap_or(outliers.len());
    if held >= normals.len() {
        return Err(Error::InsufficientSample { needed: held + 1, got: normals.len() });
    }
    normals.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let train = data.points().select(&normals[held..]);
    let mut test_idx = outliers;
    test_idx.extend_from_slice(&normals[..held]);
    test_idx.sort_unstable();
    Ok((train, data.select(&test_idx)))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierRow {
    pub method: String,
    pub seed: u64,
    pub train_size: usize,
    pub test_size: usize,
    pub precision: f64,
    pub wall_time_s: f64,
}

/// Precision over splits: median and the 10% / 90% quantiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodSummary {
    pub method: String,
    pub median: f64,
    pub q10: f64,
    pub q90: f64,
    pub min: f64,
    pub max: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutlierReport {
    pub rows: Vec<OutlierRow>,
    pub summary: Vec<MethodSummary>,
}

pub fn methods_from(settings: &OutlierSettings) -> Vec<Method> {
    let mut out: Vec<Method> = settings.degrees.iter().map(|&degree| Method::Christoffel { degree }).collect();
    for &kernel in &settings.kernels {
        for &bandwidth in &settings.bandwidths {
            out.push(Method::Kde { kernel, bandwidth });
        }
    }
    if settings.random_baseline {
        out.push(Method::Random);
    }
    out
}

/// One split per seed; every method scores the same test set.
pub fn run_outlier_bench(data: &Dataset, methods: &[Method], seeds: &[u64], test_normals: Option<usize>) -> Result<OutlierReport> {
    if data.labels().is_none() {
        return Err(Error::MissingLabels);
    }
    let splits: Vec<(u64, PointSet, Dataset)> = seeds
        .iter()
        .map(|&s| split(data, test_normals, s).map(|(tr, te)| (s, tr, te)))
        .collect::<Result<_>>()?;
    let jobs: Vec<(usize, &Method)> = (0..splits.len()).flat_map(|i| methods.iter().map(move |m| (i, m))).collect();
    let rows: Vec<OutlierRow> = jobs
        .par_iter()
        .map(|&(i, method)| {
            let (seed, train, test) = &splits[i];
            let start = Instant::now();
            let scores = method.score(train, test.points(), derive_seed(*seed, &[0x5c0e]))?;
            Ok(OutlierRow {
                method: method.name(),
                seed: *seed,
                train_size: train.len(),
                test_size: test.len(),
                precision: precision_at_half(&scores, test.labels().expect("labeled")),
                wall_time_s: start.elapsed().as_secs_f64(),
            })
        })
        .collect::<Result<_>>()?;
    let summary = methods
        .iter()
        .map(|m| {
            let name = m.name();
            let v: Vec<f64> = rows.iter().filter(|r| r.method == name).map(|r| r.precision).collect();
            MethodSummary {
                median: median(&v).expect("one row per split"),
                q10: quantile(&v, 0.1).expect("nonempty"),
                q90: quantile(&v, 0.9).expect("nonempty"),
                min: v.iter().copied().fold(f64::INFINITY, f64::min),
                max: v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                method: name,
            }
        })
        .collect();
    Ok(OutlierReport { rows, summary })
}

/// Loads the dataset named by the config and runs the benchmark.
pub fn run_outlier_from_config(cfg: &ExperimentConfig) -> Result<RunReport> {
    if cfg.kind != ExperimentKind::Outlier {
        return Err(invalid("config kind must be outlier"));
    }
    cfg.validate()?;
    let settings = cfg.outlier.as_ref().expect("validated");
    let data = match (&cfg.input, settings.generator) {
        (Some(path), _) => ingest_labeled_csv(path, settings.has_header)?,
        (None, Some(Generator::ThyroidSurrogate)) => thyroid_surrogate(cfg.seeds[0]),
        (None, Some(Generator::Separable)) => separable_benchmark(1000, 100, cfg.seeds[0]),
        (None, None) => unreachable!("validated"),
    };
    let body = run_outlier_bench(&data, &methods_from(settings), &cfg.seeds, settings.test_normals)?;
    Ok(RunReport::new(cfg.clone(), ReportBody::Outlier(body)))
}
