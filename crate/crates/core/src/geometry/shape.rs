use std::f64::consts::PI;

use libm::tgamma;
use serde::{Deserialize, Serialize};

use super::raster::BoundingBox;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ball {
    pub center: Vec<f64>,
    pub radius: f64,
}

impl Ball {
    fn dist(&self, x: &[f64]) -> f64 {
        self.center.iter().zip(x).map(|(c, v)| (v - c).powi(2)).sum::<f64>().sqrt()
    }
}

/// Reference sets with a smooth boundary and known geometric constants.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum ShapeSpec {
    Ball { center: Vec<f64>, radius: f64 },
    Annulus { center: Vec<f64>, inner: f64, outer: f64 },
    /// Pairwise disjoint closed balls.
    UnionOfBalls { balls: Vec<Ball> },
    /// A ball with pairwise disjoint balls removed from its interior.
    Difference { outer: Ball, holes: Vec<Ball> },
}

/// Volume of the unit ball of `R^p`.
pub fn unit_ball_volume(p: usize) -> f64 {
    PI.powf(p as f64 / 2.0) / tgamma(p as f64 / 2.0 + 1.0)
}

impl ShapeSpec {
    pub fn ball(center: Vec<f64>, radius: f64) -> Result<Self> {
        let s = ShapeSpec::Ball { center, radius };
        s.validate()?;
        Ok(s)
    }

    pub fn annulus(center: Vec<f64>, inner: f64, outer: f64) -> Result<Self> {
        let s = ShapeSpec::Annulus { center, inner, outer };
        s.validate()?;
        Ok(s)
    }

    pub fn union_of_balls(balls: Vec<Ball>) -> Result<Self> {
        let s = ShapeSpec::UnionOfBalls { balls };
        s.validate()?;
        Ok(s)
    }

    pub fn difference(outer: Ball, holes: Vec<Ball>) -> Result<Self> {
        let s = ShapeSpec::Difference { outer, holes };
        s.validate()?;
        Ok(s)
    }

    /// The unit disk.
    pub fn unit_disk() -> Self {
        ShapeSpec::Ball { center: vec![0.0, 0.0], radius: 1.0 }
    }

    /// Unit disk with the disk of radius 1/2 removed.
    pub fn planar_annulus() -> Self {
        ShapeSpec::Annulus { center: vec![0.0, 0.0], inner: 0.5, outer: 1.0 }
    }

    /// Four disks of radius 0.45 centered at `(±0.7, ±0.7)`.
    pub fn four_disks() -> Self {
        let balls = [(-0.7, -0.7), (0.7, -0.7), (-0.7, 0.7), (0.7, 0.7)]
            .into_iter()
            .map(|(x, y)| Ball { center: vec![x, y], radius: 0.45 })
            .collect();
        ShapeSpec::UnionOfBalls { balls }
    }

    /// Unit disk with an off-center hole of radius 0.3.
    pub fn disk_with_hole() -> Self {
        ShapeSpec::Difference {
            outer: Ball { center: vec![0.0, 0.0], radius: 1.0 },
            holes: vec![Ball { center: vec![0.3, 0.2], radius: 0.3 }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        let check_ball = |b: &Ball| -> Result<()> {
            if b.center.is_empty() || b.center.iter().any(|v| !v.is_finite()) {
                return Err(invalid("ball center must be a finite nonempty point"));
            }
            if !(b.radius > 0.0) || !b.radius.is_finite() {
                return Err(invalid("ball radius must be finite and positive"));
            }
            Ok(())
        };
        let same_dim = |balls: &[&Ball]| -> Result<()> {
            let p = balls[0].center.len();
            match balls.iter().find(|b| b.center.len() != p) {
                Some(b) => Err(Error::DimensionMismatch { expected: p, found: b.center.len() }),
                None => Ok(()),
            }
        };
        match self {
            ShapeSpec::Ball { center, radius } => check_ball(&Ball { center: center.clone(), radius: *radius }),
            ShapeSpec::Annulus { center, inner, outer } => {
                check_ball(&Ball { center: center.clone(), radius: *outer })?;
                if !(*inner > 0.0 && inner < outer) {
                    return Err(invalid("annulus needs 0 < inner < outer"));
                }
                Ok(())
            }
            ShapeSpec::UnionOfBalls { balls } => {
                if balls.is_empty() {
                    return Err(invalid("union needs at least one ball"));
                }
                balls.iter().try_for_each(check_ball)?;
                same_dim(&balls.iter().collect::<Vec<_>>())?;
                for (i, a) in balls.iter().enumerate() {
                    for b in &balls[i + 1..] {
                        if a.dist(&b.center) <= a.radius + b.radius {
                            return Err(invalid("balls of a union must be pairwise disjoint"));
                        }
                    }
                }
                Ok(())
            }
            ShapeSpec::Difference { outer, holes } => {
                check_ball(outer)?;
                holes.iter().try_for_each(check_ball)?;
                let mut all = vec![outer];
                all.extend(holes.iter());
                same_dim(&all)?;
                for (i, h) in holes.iter().enumerate() {
                    if outer.dist(&h.center) + h.radius >= outer.radius {
                        return Err(invalid("holes must lie in the interior of the outer ball"));
                    }
                    for g in &holes[i + 1..] {
                        if h.dist(&g.center) <= h.radius + g.radius {
                            return Err(invalid("holes must be pairwise disjoint"));
                        }
                    }
                }
                Ok(())
            }
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            ShapeSpec::Ball { center, .. } | ShapeSpec::Annulus { center, .. } => center.len(),
            ShapeSpec::UnionOfBalls { balls } => balls[0].center.len(),
            ShapeSpec::Difference { outer, .. } => outer.center.len(),
        }
    }

    /// Signed distance to the boundary, positive inside.
    pub fn inside_distance(&self, x: &[f64]) -> f64 {
        match self {
            ShapeSpec::Ball { center, radius } => radius - dist(center, x),
            ShapeSpec::Annulus { center, inner, outer } => {
                let t = dist(center, x);
                (t - inner).min(outer - t)
            }
            ShapeSpec::UnionOfBalls { balls } => {
                balls.iter().map(|b| b.radius - b.dist(x)).fold(f64::NEG_INFINITY, f64::max)
            }
            ShapeSpec::Difference { outer, holes } => holes
                .iter()
                .map(|h| h.dist(x) - h.radius)
                .fold(outer.radius - outer.dist(x), f64::min),
        }
    }

    /// Closed-set membership.
    pub fn contains(&self, x: &[f64]) -> bool {
        self.inside_distance(x) >= 0.0
    }

    /// An upper bound on the inside distance over the set.
    pub fn max_inside_distance(&self) -> f64 {
        match self {
            ShapeSpec::Ball { radius, .. } => *radius,
            ShapeSpec::Annulus { inner, outer, .. } => (outer - inner) / 2.0,
            ShapeSpec::UnionOfBalls { balls } => balls.iter().map(|b| b.radius).fold(0.0, f64::max),
            ShapeSpec::Difference { outer, .. } => outer.radius,
        }
    }

    pub fn bounding_box(&self) -> BoundingBox {
        let balls: Vec<Ball> = match self {
            ShapeSpec::Ball { center, radius } => vec![Ball { center: center.clone(), radius: *radius }],
            ShapeSpec::Annulus { center, outer, .. } => vec![Ball { center: center.clone(), radius: *outer }],
            ShapeSpec::UnionOfBalls { balls } => balls.clone(),
            ShapeSpec::Difference { outer, .. } => vec![outer.clone()],
        };
        let p = self.dim();
        let mut lo = vec![f64::INFINITY; p];
        let mut hi = vec![f64::NEG_INFINITY; p];
        for b in &balls {
            for k in 0..p {
                lo[k] = lo[k].min(b.center[k] - b.radius);
                hi[k] = hi[k].max(b.center[k] + b.radius);
            }
        }
        BoundingBox::new(lo, hi).expect("validated shape has a proper box")
    }

    /// The default study box: the bounding box grown by half its width.
    pub fn study_box(&self) -> BoundingBox {
        self.bounding_box().inflate(0.5)
    }

    pub fn volume(&self) -> f64 {
        let p = self.dim();
        let v = |r: f64| unit_ball_volume(p) * r.powi(p as i32);
        match self {
            ShapeSpec::Ball { radius, .. } => v(*radius),
            ShapeSpec::Annulus { inner, outer, .. } => v(*outer) - v(*inner),
            ShapeSpec::UnionOfBalls { balls } => balls.iter().map(|b| v(b.radius)).sum(),
            ShapeSpec::Difference { outer, holes } => v(outer.radius) - holes.iter().map(|h| v(h.radius)).sum::<f64>(),
        }
    }

    /// `(p-1)`-dimensional measure of the boundary.
    pub fn boundary_measure(&self) -> f64 {
        let p = self.dim();
        let a = |r: f64| p as f64 * unit_ball_volume(p) * r.powi(p as i32 - 1);
        match self {
            ShapeSpec::Ball { radius, .. } => a(*radius),
            ShapeSpec::Annulus { inner, outer, .. } => a(*inner) + a(*outer),
            ShapeSpec::UnionOfBalls { balls } => balls.iter().map(|b| a(b.radius)).sum(),
            ShapeSpec::Difference { outer, holes } => a(outer.radius) + holes.iter().map(|h| a(h.radius)).sum::<f64>(),
        }
    }

    /// First-order coefficient of the volume of the `ε`-tube around the
    /// boundary: twice the boundary measure.
    pub fn boundary_constant(&self) -> f64 {
        2.0 * self.boundary_measure()
    }

    pub fn diameter(&self) -> f64 {
        match self {
            ShapeSpec::Ball { radius, .. } => 2.0 * radius,
            ShapeSpec::Annulus { outer, .. } => 2.0 * outer,
            ShapeSpec::UnionOfBalls { balls } => {
                let mut best = 0.0f64;
                for a in balls {
                    for b in balls {
                        best = best.max(a.dist(&b.center) + a.radius + b.radius);
                    }
                }
                best
            }
            ShapeSpec::Difference { outer, .. } => 2.0 * outer.radius,
        }
    }

    /// Largest radius of a ball that rolls freely inside and outside the set.
    pub fn rolling_radius(&self) -> f64 {
        match self {
            ShapeSpec::Ball { radius, .. } => *radius,
            ShapeSpec::Annulus { inner, outer, .. } => ((outer - inner) / 2.0).min(*inner),
            ShapeSpec::UnionOfBalls { balls } => {
                let mut r = balls.iter().map(|b| b.radius).fold(f64::INFINITY, f64::min);
                for (i, a) in balls.iter().enumerate() {
                    for b in &balls[i + 1..] {
                        r = r.min((a.dist(&b.center) - a.radius - b.radius) / 2.0);
                    }
                }
                r
            }
            ShapeSpec::Difference { outer, holes } => {
                let mut r = outer.radius;
                for (i, h) in holes.iter().enumerate() {
                    r = r.min(h.radius);
                    r = r.min((outer.radius - outer.dist(&h.center) - h.radius) / 2.0);
                    for g in &holes[i + 1..] {
                        r = r.min((h.dist(&g.center) - h.radius - g.radius) / 2.0);
                    }
                }
                r
            }
        }
    }

    /// `∫_S d(x, ∂S)^r dx`, the normalizer of the boundary-decay density.
    /// `None` where no exact or quadrature formula is implemented.
    pub fn decay_normalizer(&self, r: f64) -> Option<f64> {
        if r == 0.0 {
            return Some(self.volume());
        }
        let p = self.dim();
        let sigma = p as f64 * unit_ball_volume(p);
        let ball = |rho: f64| {
            sigma * rho.powf(p as f64 + r) * tgamma(p as f64) * tgamma(r + 1.0) / tgamma(p as f64 + r + 1.0)
        };
        match self {
            ShapeSpec::Ball { radius, .. } => Some(ball(*radius)),
            ShapeSpec::UnionOfBalls { balls } => Some(balls.iter().map(|b| ball(b.radius)).sum()),
            ShapeSpec::Annulus { inner, outer, .. } => {
                let mid = (inner + outer) / 2.0;
                let f = |t: f64| (t - inner).min(outer - t).powf(r) * t.powi(p as i32 - 1);
                Some(sigma * (simpson(&f, *inner, mid, 20_000) + simpson(&f, mid, *outer, 20_000)))
            }
            ShapeSpec::Difference { .. } => None,
        }
    }

    /// The constant `C` with `w(x) ≥ C d(x, ∂S)^r` for the sampling density
    /// `w ∝ d(x, ∂S)^r`; equality holds, so `C = 1 / normalizer`.
    pub fn density_constant(&self, r: f64) -> Option<f64> {
        self.decay_normalizer(r).map(|z| 1.0 / z)
    }

    /// Center of a ball of radius [`rolling_radius`](Self::rolling_radius)
    /// that contains `x` and lies inside the set. Available for balls,
    /// annuli and unions.
    pub fn rolling_witness(&self, x: &[f64]) -> Option<Vec<f64>> {
        if !self.contains(x) {
            return None;
        }
        let big = self.rolling_radius();
        match self {
            ShapeSpec::Ball { center, .. } => Some(center.clone()),
            ShapeSpec::Annulus { center, inner, outer } => {
                let t = dist(center, x);
                let target = t.clamp(inner + big, outer - big);
                Some(center.iter().zip(x).map(|(c, v)| c + (v - c) * target / t).collect())
            }
            ShapeSpec::UnionOfBalls { balls } => {
                let b = balls.iter().find(|b| b.dist(x) <= b.radius)?;
                // Slide toward the center until the rolling ball fits.
                let t = b.dist(x);
                let room = b.radius - big;
                if t <= room {
                    Some(x.to_vec())
                } else {
                    Some(b.center.iter().zip(x).map(|(c, v)| c + (v - c) * room / t).collect())
                }
            }
            ShapeSpec::Difference { .. } => None,
        }
    }
}

fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt()
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let n = n + n % 2;
    let h = (b - a) / n as f64;
    let mut acc = f(a) + f(b);
    for k in 1..n {
        acc += f(a + k as f64 * h) * if k % 2 == 1 { 4.0 } else { 2.0 };
    }
    acc * h / 3.0
}
