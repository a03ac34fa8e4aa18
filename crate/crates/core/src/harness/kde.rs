use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::points::PointSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Kernel {
    /// `(2πh²)^{-p/2} exp(-‖u‖²/(2h²))`
    Gaussian,
    /// `(2h)^{-p} exp(-‖u‖₁/h)`
    Laplace,
}

/// Bandwidth multipliers of the per-axis standard deviation.
pub const DEFAULT_BANDWIDTHS: [f64; 5] = [0.05, 0.1, 0.2, 0.5, 1.0];

fn check(train: &PointSet, x: &[f64], h: f64) -> Result<()> {
    if !(h > 0.0) || !h.is_finite() {
        return Err(invalid(format!("bandwidth must be positive, got {h}")));
    }
    if x.len() != train.dim() {
        return Err(Error::DimensionMismatch { expected: train.dim(), found: x.len() });
    }
    if train.is_empty() {
        return Err(Error::InsufficientSample { needed: 1, got: 0 });
    }
    Ok(())
}

fn unchecked(train: &PointSet, x: &[f64], kernel: Kernel, h: f64) -> f64 {
    let p = train.dim() as i32;
    let total: f64 = match kernel {
        Kernel::Gaussian => {
            let norm = (2.0 * PI * h * h).powf(-(p as f64) / 2.0);
            train
                .iter()
                .map(|y| norm * (-x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum::<f64>() / (2.0 * h * h)).exp())
                .sum()
        }
        Kernel::Laplace => {
            let norm = (2.0 * h).powi(-p);
            train.iter().map(|y| norm * (-x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum::<f64>() / h).exp()).sum()
        }
    };
    total / train.len() as f64
}

/// Kernel density estimate `(1/n) Σ K_h(x - X_i)`.
pub fn kde_score(train: &PointSet, x: &[f64], kernel: Kernel, h: f64) -> Result<f64> {
    check(train, x, h)?;
    Ok(unchecked(train, x, kernel, h))
}

/// [`kde_score`] at every point, in order.
pub fn kde_scores(train: &PointSet, points: &PointSet, kernel: Kernel, h: f64) -> Result<Vec<f64>> {
    if let Some(x) = points.iter().next() {
        check(train, x, h)?;
    }
    Ok(points.iter().collect::<Vec<_>>().par_iter().map(|x| unchecked(train, x, kernel, h)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kernel_peaks() {
        let one = PointSet::new(1, vec![0.3]).unwrap();
        let g = kde_score(&one, &[0.3], Kernel::Gaussian, 1.0).unwrap();
        assert!((g - 0.398_942_280_401_432_7).abs() < 1e-15);
        let two = PointSet::new(2, vec![1.0, -2.0]).unwrap();
        assert_eq!(kde_score(&two, &[1.0, -2.0], Kernel::Laplace, 1.0).unwrap(), 0.25);
    }

    #[test]
    fn decays_and_integrates() {
        let train = PointSet::new(1, vec![-0.5, 0.2, 1.0]).unwrap();
        for kernel in [Kernel::Gaussian, Kernel::Laplace] {
            assert!(kde_score(&train, &[1e3], kernel, 0.5).unwrap() < 1e-300);
            // Riemann sum over a wide interval is ≈ 1.
            let step = 1e-3;
            let mass: f64 = (-20_000..20_000)
                .map(|k| kde_score(&train, &[k as f64 * step], kernel, 0.5).unwrap() * step)
                .sum();
            assert!((mass - 1.0).abs() < 1e-6, "{kernel:?}: {mass}");
        }
    }

    #[test]
    fn batch_matches_single() {
        let train = PointSet::new(2, (0..40).map(|i| (i as f64 * 0.7).sin()).collect()).unwrap();
        let q = PointSet::new(2, vec![0.0, 0.1, 0.5, -0.5]).unwrap();
        let batch = kde_scores(&train, &q, Kernel::Gaussian, 0.3).unwrap();
        for (x, b) in q.iter().zip(batch) {
            assert_eq!(kde_score(&train, x, Kernel::Gaussian, 0.3).unwrap(), b);
        }
    }

    #[test]
    fn rejects_bad_bandwidth() {
        let train = PointSet::new(1, vec![0.0]).unwrap();
        assert!(kde_score(&train, &[0.0], Kernel::Gaussian, 0.0).is_err());
        assert!(kde_score(&train, &[0.0, 1.0], Kernel::Gaussian, 1.0).is_err());
    }
}
