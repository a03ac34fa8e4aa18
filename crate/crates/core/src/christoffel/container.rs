//! JSON container for fitted models.
//!
//! ```text
//! {
//!   "format": "cdsupport-christoffel-model",
//!   "version": 1,
//!   "dim": p, "degree": d, "basis_order": "graded-desc-lex",
//!   "sample_size": n, "jitter": λ,
//!   "standardizer": null | { "linear": [[..], ..], "offset": [..] },
//!   "factor": [L00, L10, L11, L20, ...],
//!   "training": null | { "min_score": .., "lower": [..], "upper": [..] }
//! }
//! ```
//!
//! `factor` is the lower-triangular factor packed row by row. Floats are
//! written with round-trip precision, so a reloaded model scores bit-identically.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::affine::AffineMap;
use super::model::{ChristoffelModel, FitWarning, TrainingSummary};
use crate::error::{Error, Result};
use crate::linalg::LowerTriangular;
use crate::polybasis::{basis_size, MonomialBasis, ORDER_TAG};

pub const FORMAT_TAG: &str = "cdsupport-christoffel-model";
pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    dim: usize,
    degree: u32,
    basis_order: String,
    sample_size: usize,
    jitter: f64,
    standardizer: Option<AffineFile>,
    factor: Vec<f64>,
    training: Option<TrainingSummary>,
}

#[derive(Debug, Serialize, Deserialize)]
struct AffineFile {
    linear: Vec<Vec<f64>>,
    offset: Vec<f64>,
}

impl ChristoffelModel {
    pub fn to_json(&self) -> String {
        let standardizer = self.standardizer.as_ref().map(|m| AffineFile {
            linear: m.linear().row_iter().map(|r| r.iter().copied().collect()).collect(),
            offset: m.offset().to_vec(),
        });
        let file = ModelFile {
            format: FORMAT_TAG.to_string(),
            version: FORMAT_VERSION,
            dim: self.dim(),
            degree: self.degree(),
            basis_order: ORDER_TAG.to_string(),
            sample_size: self.sample_size,
            jitter: self.jitter,
            standardizer,
            factor: self.factor.packed().to_vec(),
            training: self.training.clone(),
        };
        serde_json::to_string_pretty(&file).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: ModelFile = serde_json::from_str(text)?;
        if file.format != FORMAT_TAG {
            return Err(Error::Format(format!("unknown format tag {:?}", file.format)));
        }
        if file.version != FORMAT_VERSION {
            return Err(Error::Format(format!("unsupported version {}", file.version)));
        }
        if file.basis_order != ORDER_TAG {
            return Err(Error::Format(format!("unknown basis order {:?}", file.basis_order)));
        }
        if file.dim == 0 {
            return Err(Error::Format("dimension must be at least 1".into()));
        }
        if !(file.jitter >= 0.0) || file.sample_size == 0 {
            return Err(Error::Format("jitter must be nonnegative and sample size positive".into()));
        }
        let basis = MonomialBasis::new(file.dim, file.degree)?;
        let s = basis_size(file.dim, file.degree)?;
        let factor = LowerTriangular::from_packed(s, file.factor).map_err(|e| Error::Format(e.to_string()))?;
        let standardizer = match file.standardizer {
            None => None,
            Some(a) => {
                if a.linear.len() != file.dim || a.linear.iter().any(|r| r.len() != file.dim) {
                    return Err(Error::Format("standardizer shape does not match dimension".into()));
                }
                let flat: Vec<f64> = a.linear.into_iter().flatten().collect();
                let linear = DMatrix::from_row_slice(file.dim, file.dim, &flat);
                Some(AffineMap::new(linear, a.offset).map_err(|e| Error::Format(e.to_string()))?)
            }
        };
        if let Some(t) = &file.training {
            if t.lower.len() != file.dim || t.upper.len() != file.dim {
                return Err(Error::Format("training box does not match dimension".into()));
            }
        }
        let mut warnings = Vec::new();
        if file.sample_size < s {
            warnings.push(FitWarning::RankDeficient { samples: file.sample_size, basis_size: s });
        }
        if file.jitter > 0.0 {
            warnings.push(FitWarning::JitterApplied { jitter: file.jitter });
        }
        Ok(ChristoffelModel {
            basis,
            standardizer,
            factor,
            sample_size: file.sample_size,
            jitter: file.jitter,
            warnings,
            training: file.training,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_json(&fs::read_to_string(path)?)
    }
}
