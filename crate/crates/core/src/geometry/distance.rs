use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::raster::{boundary_cells, symdiff_measure, Raster};
use crate::error::{Error, Result};

/// Squared Euclidean distance from every cell center to the nearest occupied
/// cell center. Separable exact transform (lower envelope of parabolas, one
/// axis at a time).
pub fn squared_distance_transform(a: &Raster) -> Vec<f64> {
    let res = a.resolution().to_vec();
    let mut field: Vec<f64> = a.occupancy().iter().map(|&b| if b { 0.0 } else { f64::INFINITY }).collect();
    let mut stride = 1;
    for (axis, &n) in res.iter().enumerate() {
        let h = a.spacing(axis);
        let total = field.len();
        // Lines along `axis` start at cells whose `axis` index is zero.
        let starts: Vec<usize> = (0..total).filter(|c| (c / stride) % n == 0).collect();
        let lines: Vec<Vec<f64>> = starts
            .par_iter()
            .map(|&s| {
                let f: Vec<f64> = (0..n).map(|i| field[s + i * stride]).collect();
                envelope(&f, h)
            })
            .collect();
        for (s, line) in starts.iter().zip(lines) {
            for (i, v) in line.into_iter().enumerate() {
                field[s + i * stride] = v;
            }
        }
        stride *= n;
    }
    field
}

/// `d(q) = min_p h²(q-p)² + f(p)` over sample positions `0..n`.
fn envelope(f: &[f64], h: f64) -> Vec<f64> {
    let n = f.len();
    let h2 = h * h;
    let mut v = Vec::with_capacity(n);
    let mut z: Vec<f64> = Vec::with_capacity(n + 1);
    for q in 0..n {
        if !f[q].is_finite() {
            continue;
        }
        let qf = q as f64;
        loop {
            match v.last() {
                None => {
                    v.push(q);
                    z.clear();
                    z.push(f64::NEG_INFINITY);
                    break;
                }
                Some(&p) => {
                    let pf = p as f64;
                    let s = ((f[q] + h2 * qf * qf) - (f[p] + h2 * pf * pf)) / (2.0 * h2 * (qf - pf));
                    if s <= *z.last().unwrap() {
                        v.pop();
                        z.pop();
                    } else {
                        v.push(q);
                        z.push(s);
                        break;
                    }
                }
            }
        }
    }
    let mut out = vec![f64::INFINITY; n];
    if v.is_empty() {
        return out;
    }
    let mut k = 0;
    for (q, slot) in out.iter_mut().enumerate() {
        let qf = q as f64;
        while k + 1 < v.len() && z[k + 1] < qf {
            k += 1;
        }
        let p = v[k] as f64;
        *slot = h2 * (qf - p) * (qf - p) + f[v[k]];
    }
    out
}

fn directed(a: &Raster, dist_to_b: &[f64]) -> f64 {
    a.occupancy()
        .iter()
        .zip(dist_to_b)
        .filter(|(occ, _)| **occ)
        .map(|(_, d)| *d)
        .fold(0.0, f64::max)
}

/// Discrete Hausdorff distance between the occupied cell centers of two
/// rasters on the same grid. For well-resolved sets it is within one cell
/// diagonal of the continuous distance.
pub fn hausdorff_distance(a: &Raster, b: &Raster) -> Result<f64> {
    if !a.same_grid(b) {
        return Err(Error::GridMismatch);
    }
    if a.is_empty() || b.is_empty() {
        return Err(Error::EmptyRaster);
    }
    let to_b = squared_distance_transform(b);
    let to_a = squared_distance_transform(a);
    Ok(directed(a, &to_b).max(directed(b, &to_a)).sqrt())
}

/// The three set divergences between a reference raster and an estimate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeometryReport {
    pub hausdorff: f64,
    pub boundary_hausdorff: f64,
    pub symdiff_measure: f64,
    pub resolution: Vec<usize>,
    /// Discretization scale of the two distances.
    pub cell_diagonal: f64,
}

pub fn compare(truth: &Raster, estimate: &Raster) -> Result<GeometryReport> {
    let hausdorff = hausdorff_distance(truth, estimate)?;
    let boundary_hausdorff = hausdorff_distance(&boundary_cells(truth)?, &boundary_cells(estimate)?)?;
    Ok(GeometryReport {
        hausdorff,
        boundary_hausdorff,
        symdiff_measure: symdiff_measure(truth, estimate)?,
        resolution: truth.resolution().to_vec(),
        cell_diagonal: truth.cell_diagonal(),
    })
}
