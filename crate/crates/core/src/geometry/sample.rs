use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::shape::ShapeSpec;
use crate::error::{invalid, Error, Result};
use crate::points::PointSet;

const CHECK_EVERY: u64 = 100_000;
const MIN_ACCEPTANCE: f64 = 1e-4;

/// `n` i.i.d. points with density proportional to `d(x, ∂S)^r` on the shape.
///
/// Rejection sampling from the bounding box: a uniform proposal `x` is kept
/// with probability `(d(x, ∂S) / max d)^r`, so `r = 0` is exactly uniform.
/// The output depends only on `(shape, n, r, seed)`.
pub fn sample_shape(shape: &ShapeSpec, n: usize, r: f64, seed: u64) -> Result<PointSet> {
    shape.validate()?;
    if !(r.is_finite() && r >= 0.0) {
        return Err(invalid(format!("decay exponent must be finite and nonnegative, got {r}")));
    }
    let bbox = shape.bounding_box();
    let p = shape.dim();
    let scale = shape.max_inside_distance();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = PointSet::empty(p)?;
    let mut x = vec![0.0; p];
    let (mut proposed, mut accepted) = (0u64, 0u64);
    while out.len() < n {
        for (k, v) in x.iter_mut().enumerate() {
            *v = rng.random_range(bbox.lower()[k]..bbox.upper()[k]);
        }
        proposed += 1;
        let depth = shape.inside_distance(&x);
        if depth >= 0.0 && (r == 0.0 || rng.random::<f64>() < (depth / scale).min(1.0).powf(r)) {
            out.push(&x)?;
            accepted += 1;
        }
        if proposed % CHECK_EVERY == 0 {
            let rate = accepted as f64 / proposed as f64;
            if rate < MIN_ACCEPTANCE {
                return Err(Error::ShapeTooThin { rate });
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::shape::Ball;

    fn mean_norm(s: &PointSet) -> f64 {
        s.iter().map(|x| x.iter().map(|v| v * v).sum::<f64>().sqrt()).sum::<f64>() / s.len() as f64
    }

    #[test]
    fn uniform_disk_mean() {
        let n = 100_000;
        let s = sample_shape(&ShapeSpec::unit_disk(), n, 0.0, 7).unwrap();
        assert_eq!(s.len(), n);
        let tol = 3.0 * 0.5 / (n as f64).sqrt();
        for m in s.mean().unwrap() {
            assert!(m.abs() < tol, "{m}");
        }
        // E‖X‖ = 2/3 for the uniform disk.
        assert!((mean_norm(&s) - 2.0 / 3.0).abs() < 0.005);
    }

    #[test]
    fn all_points_inside() {
        for shape in [ShapeSpec::unit_disk(), ShapeSpec::planar_annulus(), ShapeSpec::four_disks(), ShapeSpec::disk_with_hole()]
        {
            for r in [0.0, 1.0, 2.5] {
                let s = sample_shape(&shape, 2000, r, 3).unwrap();
                assert!(s.iter().all(|x| shape.contains(x)));
            }
        }
    }

    #[test]
    fn decay_pulls_mass_inward() {
        let a = sample_shape(&ShapeSpec::unit_disk(), 100_000, 0.0, 1).unwrap();
        let b = sample_shape(&ShapeSpec::unit_disk(), 100_000, 2.0, 1).unwrap();
        assert!(mean_norm(&b) < mean_norm(&a));
        // With density ∝ (1-t)^2 on the disk, E‖X‖ = B(3,3)/B(2,3) = 2/5.
        assert!((mean_norm(&b) - 0.4).abs() < 0.005);
    }

    #[test]
    fn reproducible() {
        let s = ShapeSpec::planar_annulus();
        assert_eq!(sample_shape(&s, 500, 1.0, 42).unwrap(), sample_shape(&s, 500, 1.0, 42).unwrap());
        assert_ne!(sample_shape(&s, 500, 1.0, 42).unwrap(), sample_shape(&s, 500, 1.0, 43).unwrap());
    }

    #[test]
    fn thin_shape_rejected() {
        let thin = ShapeSpec::union_of_balls(vec![
            Ball { center: vec![0.0, 0.0], radius: 1e-3 },
            Ball { center: vec![100.0, 100.0], radius: 1e-3 },
        ])
        .unwrap();
        assert!(matches!(sample_shape(&thin, 10, 0.0, 0), Err(Error::ShapeTooThin { .. })));
        assert!(sample_shape(&ShapeSpec::unit_disk(), 10, -1.0, 0).is_err());
    }
}
