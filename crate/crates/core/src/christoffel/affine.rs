use nalgebra::{DMatrix, DVector};

use crate::error::{invalid, Error, Result};
use crate::linalg::symmetric_eigen;
use crate::points::PointSet;

/// `x ↦ A x + b` with a cached inverse.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    linear: DMatrix<f64>,
    offset: DVector<f64>,
    inverse: DMatrix<f64>,
}

/// Largest condition number accepted for the linear part.
const MAX_CONDITION: f64 = 1e14;

impl AffineMap {
    pub fn new(linear: DMatrix<f64>, offset: Vec<f64>) -> Result<Self> {
        let p = linear.nrows();
        if p == 0 || !linear.is_square() {
            return Err(invalid("affine map needs a nonempty square linear part"));
        }
        if offset.len() != p {
            return Err(Error::DimensionMismatch { expected: p, found: offset.len() });
        }
        if linear.iter().chain(&offset).any(|v| !v.is_finite()) {
            return Err(invalid("affine map entries must be finite"));
        }
        let sv = linear.clone().singular_values();
        let (lo, hi) = sv.iter().fold((f64::INFINITY, 0.0f64), |(lo, hi), &v| (lo.min(v), hi.max(v)));
        if !(lo > 0.0) || hi / lo > MAX_CONDITION {
            return Err(invalid(format!("affine map is not invertible (condition estimate {:e})", hi / lo)));
        }
        let inverse = linear.clone().try_inverse().ok_or_else(|| invalid("affine map is not invertible"))?;
        Ok(AffineMap { linear, offset: DVector::from_vec(offset), inverse })
    }

    pub fn identity(p: usize) -> Self {
        AffineMap {
            linear: DMatrix::identity(p, p),
            offset: DVector::zeros(p),
            inverse: DMatrix::identity(p, p),
        }
    }

    pub fn dim(&self) -> usize {
        self.offset.len()
    }

    pub fn linear(&self) -> &DMatrix<f64> {
        &self.linear
    }

    pub fn offset(&self) -> &[f64] {
        self.offset.as_slice()
    }

    pub fn inverse_linear(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    pub(crate) fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        for (i, o) in out.iter_mut().enumerate().take(self.dim()) {
            *o = self.offset[i] + x.iter().enumerate().map(|(j, v)| self.linear[(i, j)] * v).sum::<f64>();
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: x.len() });
        }
        let mut out = vec![0.0; x.len()];
        self.apply_into(x, &mut out);
        Ok(out)
    }

    pub fn apply_inverse(&self, y: &[f64]) -> Result<Vec<f64>> {
        if y.len() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: y.len() });
        }
        let shifted = DVector::from_iterator(y.len(), y.iter().zip(self.offset.iter()).map(|(a, b)| a - b));
        Ok((&self.inverse * shifted).as_slice().to_vec())
    }

    pub fn apply_all(&self, points: &PointSet) -> Result<PointSet> {
        if points.dim() != self.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: points.dim() });
        }
        Ok(points.map(|x, out| self.apply_into(x, out)))
    }
}

/// Whitens a sample: zero mean and identity covariance (with the `1/n`
/// normalization), using the symmetric inverse square root of the covariance.
pub fn standardize(sample: &PointSet) -> Result<(AffineMap, PointSet)> {
    let n = sample.len();
    if n < 2 {
        return Err(Error::InsufficientSample { needed: 2, got: n });
    }
    let p = sample.dim();
    let mean = sample.mean().expect("nonempty");
    let mut cov = DMatrix::<f64>::zeros(p, p);
    for x in sample.iter() {
        for i in 0..p {
            let di = x[i] - mean[i];
            for j in 0..=i {
                cov[(i, j)] += di * (x[j] - mean[j]);
            }
        }
    }
    for i in 0..p {
        for j in 0..=i {
            let v = cov[(i, j)] / n as f64;
            cov[(i, j)] = v;
            cov[(j, i)] = v;
        }
    }
    let (values, vectors) = symmetric_eigen(&cov);
    let top = *values.last().expect("p >= 1");
    if !(values[0] > 1e-12 * top) {
        return Err(Error::DegenerateSample {
            direction: vectors.column(0).iter().copied().collect(),
            eigenvalue: values[0],
        });
    }
    let inv_sqrt = DVector::from_iterator(p, values.iter().map(|v| 1.0 / v.sqrt()));
    let w = &vectors * DMatrix::from_diagonal(&inv_sqrt) * vectors.transpose();
    let w = (&w + w.transpose()) * 0.5;
    let offset = -(&w * DVector::from_vec(mean));
    let map = AffineMap::new(w, offset.as_slice().to_vec())?;
    let transformed = map.apply_all(sample)?;
    Ok((map, transformed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn two_points_on_a_line() {
        let (map, out) = standardize(&PointSet::new(1, vec![0.0, 2.0]).unwrap()).unwrap();
        assert!((map.linear()[(0, 0)] - 1.0).abs() < 1e-15);
        assert!((map.offset()[0] + 1.0).abs() < 1e-15);
        assert!((out.row(0)[0] + 1.0).abs() < 1e-15 && (out.row(1)[0] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn whitened_sample_maps_to_itself() {
        let raw: Vec<f64> = (0..600).map(|i| ((i * i) as f64 * 0.37).sin() * (1.0 + (i % 3) as f64)).collect();
        let (_, once) = standardize(&PointSet::new(3, raw).unwrap()).unwrap();
        let (map, _) = standardize(&once).unwrap();
        assert!(map.offset().iter().all(|v| v.abs() < 1e-10));
        assert!((map.linear() - DMatrix::identity(3, 3)).abs().max() < 1e-10);
    }

    #[test]
    fn collinear_sample_is_degenerate() {
        let pts: Vec<f64> = (0..10).flat_map(|i| [i as f64, 2.0 * i as f64 + 1.0]).collect();
        match standardize(&PointSet::new(2, pts).unwrap()) {
            Err(Error::DegenerateSample { direction, .. }) => {
                // Null direction is ±(2, -1)/√5.
                assert!((direction[0] * 1.0 + direction[1] * 2.0).abs() < 1e-9);
            }
            other => panic!("expected degenerate sample, got {other:?}"),
        }
    }

    #[test]
    fn too_few_points() {
        assert!(matches!(
            standardize(&PointSet::new(2, vec![1.0, 2.0]).unwrap()),
            Err(Error::InsufficientSample { needed: 2, got: 1 })
        ));
    }

    #[test]
    fn singular_linear_part_is_rejected() {
        let a = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 4.0]);
        assert!(AffineMap::new(a, vec![0.0, 0.0]).is_err());
    }

    proptest! {
        #[test]
        fn map_then_inverse_is_identity(a in prop::collection::vec(-2.0f64..2.0, 4),
                                        b in prop::collection::vec(-5.0f64..5.0, 2),
                                        x in prop::collection::vec(-10.0f64..10.0, 2)) {
            let mut lin = DMatrix::from_row_slice(2, 2, &a);
            lin[(0, 0)] += 3.0;
            lin[(1, 1)] += 3.0;
            let map = AffineMap::new(lin, b).unwrap();
            let back = map.apply_inverse(&map.apply(&x).unwrap()).unwrap();
            for i in 0..2 {
                prop_assert!((back[i] - x[i]).abs() < 1e-10);
            }
        }
    }
}
