use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::affine::{standardize, AffineMap};
use super::moment::{build_moment_matrix, factorize, initial_jitter, JitterPolicy};
use crate::error::{invalid, Error, Result};
use crate::linalg::{LowerTriangular, QrAccumulator, UpperTriangular};
use crate::points::PointSet;
use crate::polybasis::MonomialBasis;

/// How the factor of the empirical moment matrix is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Solver {
    /// Householder QR of the `n × s` design matrix. Never forms `M`, so it
    /// tolerates roughly the square of the conditioning the normal equations do.
    #[default]
    Qr,
    /// Forms `M` and takes its Cholesky factor.
    NormalEquations,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub standardize: bool,
    pub jitter: JitterPolicy,
    pub solver: Solver,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions { standardize: true, jitter: JitterPolicy::default(), solver: Solver::Qr }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum FitWarning {
    /// Fewer samples than basis elements; the fit only succeeded through jitter.
    RankDeficient { samples: usize, basis_size: usize },
    JitterApplied { jitter: f64 },
}

/// Facts about the training sample kept with the model so that scoring-side
/// commands can pick a threshold and a study box without the raw data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainingSummary {
    /// Smallest Christoffel value over the training points.
    pub min_score: f64,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

/// Empirical Christoffel function of a fitted sample.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelModel {
    pub(crate) basis: MonomialBasis,
    pub(crate) standardizer: Option<AffineMap>,
    pub(crate) factor: LowerTriangular,
    pub(crate) sample_size: usize,
    pub(crate) jitter: f64,
    pub(crate) warnings: Vec<FitWarning>,
    pub(crate) training: Option<TrainingSummary>,
}

impl ChristoffelModel {
    pub fn dim(&self) -> usize {
        self.basis.dim()
    }

    pub fn degree(&self) -> u32 {
        self.basis.degree()
    }

    pub fn basis(&self) -> &MonomialBasis {
        &self.basis
    }

    /// `None` when the model was fitted on raw coordinates.
    pub fn standardizer(&self) -> Option<&AffineMap> {
        self.standardizer.as_ref()
    }

    /// `L` with `L Lᵀ = M + jitter·I` in standardized coordinates.
    pub fn factor(&self) -> &LowerTriangular {
        &self.factor
    }

    pub fn sample_size(&self) -> usize {
        self.sample_size
    }

    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    pub fn warnings(&self) -> &[FitWarning] {
        &self.warnings
    }

    pub fn training_summary(&self) -> Option<&TrainingSummary> {
        self.training.as_ref()
    }

    /// Reusable scratch space for repeated evaluation on one thread.
    pub fn evaluator(&self) -> Evaluator<'_> {
        Evaluator { model: self, v: vec![0.0; self.basis.len()], z: vec![0.0; self.dim()] }
    }

    /// `κ(x, x) = ‖L⁻¹ v(A x)‖²`.
    pub fn kernel_diag(&self, x: &[f64]) -> Result<f64> {
        self.evaluator().kernel_diag(x)
    }

    /// `Λ(x) = 1 / κ(x, x)`.
    pub fn christoffel(&self, x: &[f64]) -> Result<f64> {
        self.evaluator().christoffel(x)
    }

    /// Christoffel values of every point, in input order.
    pub fn scores(&self, points: &PointSet) -> Result<Vec<f64>> {
        if points.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: points.dim() });
        }
        const CHUNK: usize = 512;
        let chunks: Vec<Result<Vec<f64>>> = points
            .as_slice()
            .par_chunks(CHUNK * self.dim())
            .map(|chunk| {
                let mut ev = self.evaluator();
                chunk.chunks_exact(self.dim()).map(|x| ev.christoffel(x)).collect()
            })
            .collect();
        let mut out = Vec::with_capacity(points.len());
        for c in chunks {
            out.extend(c?);
        }
        Ok(out)
    }
}

/// Evaluates one model at many points without reallocating.
pub struct Evaluator<'a> {
    model: &'a ChristoffelModel,
    v: Vec<f64>,
    z: Vec<f64>,
}

impl Evaluator<'_> {
    pub fn kernel_diag(&mut self, x: &[f64]) -> Result<f64> {
        let m = self.model;
        if x.len() != m.dim() {
            return Err(Error::DimensionMismatch { expected: m.dim(), found: x.len() });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(invalid("query point has non-finite coordinates"));
        }
        let z: &[f64] = match &m.standardizer {
            Some(map) => {
                map.apply_into(x, &mut self.z);
                &self.z
            }
            None => x,
        };
        m.basis.eval_unchecked(z, &mut self.v);
        m.factor.forward_solve(&mut self.v);
        let k: f64 = self.v.iter().map(|t| t * t).sum();
        // Far from the data the monomials overflow; the kernel is then
        // effectively infinite.
        Ok(if k.is_nan() { f64::INFINITY } else { k })
    }

    pub fn christoffel(&mut self, x: &[f64]) -> Result<f64> {
        Ok(1.0 / self.kernel_diag(x)?)
    }
}

pub fn cd_kernel_diag(model: &ChristoffelModel, x: &[f64]) -> Result<f64> {
    model.kernel_diag(x)
}

pub fn christoffel(model: &ChristoffelModel, x: &[f64]) -> Result<f64> {
    model.christoffel(x)
}

/// Fits the empirical Christoffel function of degree `d` to `sample`.
pub fn fit(sample: &PointSet, d: u32, options: &FitOptions) -> Result<ChristoffelModel> {
    let n = sample.len();
    if n == 0 {
        return Err(Error::InsufficientSample { needed: 1, got: 0 });
    }
    if sample.as_slice().iter().any(|v| !v.is_finite()) {
        return Err(invalid("sample has non-finite coordinates"));
    }
    let basis = MonomialBasis::new(sample.dim(), d)?;
    let (standardizer, work) = if options.standardize {
        let (map, transformed) = standardize(sample)?;
        (Some(map), transformed)
    } else {
        (None, sample.clone())
    };
    let s = basis.len();
    let (factor, jitter) = match options.solver {
        Solver::NormalEquations => factorize(&build_moment_matrix(&work, &basis)?, options.jitter)?,
        Solver::Qr => qr_factor(&work, &basis, options.jitter)?,
    };
    let mut warnings = Vec::new();
    if n < s {
        warnings.push(FitWarning::RankDeficient { samples: n, basis_size: s });
    }
    if jitter > 0.0 {
        warnings.push(FitWarning::JitterApplied { jitter });
    }
    let mut model = ChristoffelModel {
        basis,
        standardizer,
        factor,
        sample_size: n,
        jitter,
        warnings,
        training: None,
    };
    let scores = model.scores(sample)?;
    let (lower, upper) = sample.bounds().expect("nonempty");
    model.training = Some(TrainingSummary {
        min_score: scores.iter().copied().fold(f64::INFINITY, f64::min),
        lower,
        upper,
    });
    Ok(model)
}

fn qr_factor(work: &PointSet, basis: &MonomialBasis, policy: JitterPolicy) -> Result<(LowerTriangular, f64)> {
    let s = basis.len();
    let n = work.len();
    let mut acc = QrAccumulator::new(s);
    let mut v = vec![0.0; s];
    for x in work.iter() {
        basis.eval_unchecked(x, &mut v);
        acc.push_row(&v);
    }
    let upper: UpperTriangular = acc.finish();
    let scale = 1.0 / (n as f64).sqrt();
    let first = match upper.to_lower(scale) {
        Ok(l) => return Ok((l, 0.0)),
        Err(pivot) => pivot,
    };
    let singular = |pivot| Error::SingularMomentMatrix { size: s, pivot };
    let JitterPolicy::Auto { max_tries } = policy else {
        return Err(singular(first));
    };
    let trace: f64 = (0..s).map(|k| upper.column_norm_sq(k)).sum::<f64>() / n as f64;
    let mut lambda = initial_jitter(trace, s);
    let mut last = first;
    for _ in 0..max_tries {
        match upper.shifted(n as f64 * lambda).to_lower(scale) {
            Ok(l) => return Ok((l, lambda)),
            Err(pivot) => last = pivot,
        }
        lambda *= 10.0;
    }
    Err(singular(last))
}
