use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::kde::{Kernel, DEFAULT_BANDWIDTHS};
use crate::error::{invalid, Error, Result};
use crate::geometry::ShapeSpec;
use crate::thresholding::SchemeParams;

/// Smallest ratio of the largest to the smallest size in a convergence grid.
pub const MIN_GRID_SPAN: f64 = 31.622776601683793;

/// Environment variable naming the default output directory.
pub const OUT_DIR_ENV: &str = "CDSUPPORT_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    SyntheticSupport,
    Convergence,
    Concentration,
    Outlier,
}

/// How the degree is chosen from the sample size.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "rule", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DegreeRule {
    /// `⌊2 n^{1/4}⌋`.
    #[default]
    Practical,
    Fixed { degree: u32 },
    /// The scheme of the theory. Without explicit `params` the constants are
    /// taken from the shape (`C` from the sampling density, `R`, diameter).
    Theoretical {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        params: Option<SchemeParams>,
        #[serde(default = "default_eps")]
        eps: f64,
        #[serde(default = "default_alpha")]
        alpha: f64,
    },
}

fn default_eps() -> f64 {
    0.5
}

fn default_alpha() -> f64 {
    0.1
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum ThresholdRule {
    /// Smallest Christoffel value over the sample.
    #[default]
    MinScore,
    /// `γ_n` of the scheme; needs the theoretical degree rule.
    Theoretical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConcentrationSettings {
    pub p: usize,
    #[serde(default)]
    pub r: f64,
    pub degrees: Vec<u32>,
    #[serde(default = "default_reps")]
    pub reps: usize,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    /// Grid points per axis of the cube `[-radius, radius]^p`, kept inside the ball.
    #[serde(default = "default_grid")]
    pub grid_per_axis: usize,
    #[serde(default = "default_grid_radius")]
    pub grid_radius: f64,
}

fn default_reps() -> usize {
    200
}

fn default_grid() -> usize {
    50
}

fn default_grid_radius() -> f64 {
    0.95
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Generator {
    /// Normals in the unit disk, outliers at distance 3 to 4.
    Separable,
    /// 3772 × 6 with 93 outliers.
    ThyroidSurrogate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutlierSettings {
    /// Used when no input file is given.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generator: Option<Generator>,
    #[serde(default)]
    pub has_header: bool,
    #[serde(default = "default_degrees")]
    pub degrees: Vec<u32>,
    #[serde(default = "default_kernels")]
    pub kernels: Vec<Kernel>,
    /// Multipliers of the per-axis standard deviation of the training set.
    #[serde(default = "default_bandwidths")]
    pub bandwidths: Vec<f64>,
    #[serde(default = "default_true")]
    pub random_baseline: bool,
    /// Normals held out per split; defaults to the number of outliers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub test_normals: Option<usize>,
}

fn default_degrees() -> Vec<u32> {
    (1..=6).collect()
}

fn default_kernels() -> Vec<Kernel> {
    vec![Kernel::Gaussian, Kernel::Laplace]
}

fn default_bandwidths() -> Vec<f64> {
    DEFAULT_BANDWIDTHS.to_vec()
}

fn default_true() -> bool {
    true
}

impl Default for OutlierSettings {
    fn default() -> Self {
        OutlierSettings {
            generator: None,
            has_header: false,
            degrees: default_degrees(),
            kernels: default_kernels(),
            bandwidths: default_bandwidths(),
            random_baseline: true,
            test_normals: None,
        }
    }
}

/// A complete, validated experiment description. Serialized into every report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shape: Option<ShapeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub n_grid: Vec<u64>,
    /// One replicate per seed; the outlier benchmark uses one split per seed.
    #[serde(default = "default_seeds")]
    pub seeds: Vec<u64>,
    /// Decay exponent `r` of the sampling density `∝ d(x, ∂S)^r`.
    #[serde(default)]
    pub decay: f64,
    #[serde(default)]
    pub degree: DegreeRule,
    #[serde(default)]
    pub threshold: ThresholdRule,
    #[serde(default = "default_resolution")]
    pub resolution: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_dir: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub concentration: Option<ConcentrationSettings>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub outlier: Option<OutlierSettings>,
}

fn default_seeds() -> Vec<u64> {
    vec![0]
}

fn default_resolution() -> usize {
    256
}

impl ExperimentConfig {
    /// A config of the given kind with every optional field at its default.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            shape: None,
            input: None,
            n_grid: Vec::new(),
            seeds: default_seeds(),
            decay: 0.0,
            degree: DegreeRule::default(),
            threshold: ThresholdRule::default(),
            resolution: default_resolution(),
            output_dir: None,
            concentration: None,
            outlier: None,
        }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Format(e.to_string()))
    }

    /// Overlays a TOML document on this config: every key present in the
    /// document replaces the current value, tables merge key by key.
    pub fn with_overrides(&self, text: &str) -> Result<Self> {
        let mut base = match toml::Value::try_from(self).map_err(|e| Error::Format(e.to_string()))? {
            toml::Value::Table(t) => t,
            _ => unreachable!("a struct serializes to a table"),
        };
        let over: toml::Table = toml::from_str(text)?;
        merge(&mut base, over);
        let cfg: ExperimentConfig = toml::Value::Table(base).try_into()?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Explicit directory, else the environment default, else none.
    pub fn resolved_output_dir(&self) -> Option<PathBuf> {
        self.output_dir.clone().or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
    }

    pub fn validate(&self) -> Result<()> {
        if self.seeds.is_empty() {
            return Err(invalid("at least one seed is required"));
        }
        if self.resolution < 2 {
            return Err(invalid("resolution must be at least 2"));
        }
        if !(self.decay >= 0.0 && self.decay.is_finite()) {
            return Err(invalid("decay exponent must be finite and nonnegative"));
        }
        if let DegreeRule::Theoretical { eps, alpha, .. } = self.degree {
            if !(eps > 0.0 && eps < 1.0 && alpha > 0.0 && alpha < 1.0) {
                return Err(invalid("theoretical rule needs eps and alpha in (0, 1)"));
            }
        }
        if self.threshold == ThresholdRule::Theoretical && !matches!(self.degree, DegreeRule::Theoretical { .. }) {
            return Err(invalid("the theoretical threshold needs the theoretical degree rule"));
        }
        if let Some(shape) = &self.shape {
            shape.validate()?;
        }
        if self.n_grid.contains(&0) {
            return Err(invalid("sample sizes must be positive"));
        }
        match self.kind {
            ExperimentKind::SyntheticSupport | ExperimentKind::Convergence => {
                let shape = self.shape.as_ref().ok_or_else(|| invalid("this experiment needs a shape"))?;
                if self.n_grid.is_empty() {
                    return Err(invalid("n_grid must not be empty"));
                }
                if self.kind == ExperimentKind::SyntheticSupport && shape.dim() != 2 {
                    return Err(Error::UnsupportedDimension { op: "synthetic-support", supported: 2, p: shape.dim() });
                }
                if self.kind == ExperimentKind::Convergence {
                    let lo = *self.n_grid.iter().min().unwrap() as f64;
                    let hi = *self.n_grid.iter().max().unwrap() as f64;
                    // "Two decades" to the nearest decade: 500..32000 qualifies.
                    if self.n_grid.len() < 4 || hi < MIN_GRID_SPAN * lo {
                        return Err(invalid("convergence study needs at least 4 sizes spanning about 2 decades"));
                    }
                }
            }
            ExperimentKind::Concentration => {
                let c = self.concentration.as_ref().ok_or_else(|| invalid("missing [concentration] settings"))?;
                if c.p == 0 || c.degrees.is_empty() || self.n_grid.is_empty() {
                    return Err(invalid("concentration study needs p ≥ 1, degrees and n_grid"));
                }
                if c.reps < 100 {
                    return Err(invalid(format!("concentration study needs at least 100 replicates, got {}", c.reps)));
                }
                if !(c.alpha > 0.0 && c.alpha < 1.0) {
                    return Err(invalid("alpha must lie in (0, 1)"));
                }
                if !(c.r >= 0.0 && c.r.fract() == 0.0) {
                    return Err(Error::UnsupportedExponent(c.r));
                }
                if c.grid_per_axis < 2 || !(c.grid_radius > 0.0 && c.grid_radius <= 1.0) {
                    return Err(invalid("grid needs at least 2 points per axis and a radius in (0, 1]"));
                }
            }
            ExperimentKind::Outlier => {
                let o = self.outlier.as_ref().ok_or_else(|| invalid("missing [outlier] settings"))?;
                if self.input.is_none() && o.generator.is_none() {
                    return Err(invalid("outlier benchmark needs an input file or a generator"));
                }
                if o.bandwidths.iter().any(|h| !(*h > 0.0)) {
                    return Err(invalid("bandwidth multipliers must be positive"));
                }
            }
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Table, over: toml::Table) {
    for (k, v) in over {
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o),
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
}
