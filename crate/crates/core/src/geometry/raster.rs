use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{csv_err, invalid, Error, Result};
use crate::points::PointSet;

/// Axis-aligned box `[lower, upper]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl BoundingBox {
    pub fn new(lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        if lower.is_empty() {
            return Err(invalid("box needs at least one axis"));
        }
        if lower.len() != upper.len() {
            return Err(Error::DimensionMismatch { expected: lower.len(), found: upper.len() });
        }
        for (a, b) in lower.iter().zip(&upper) {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(invalid(format!("box side [{a}, {b}] is not a finite proper interval")));
            }
        }
        Ok(BoundingBox { lower, upper })
    }

    /// Smallest box containing the points. Degenerate axes get unit width.
    pub fn around(points: &PointSet) -> Result<Self> {
        let (mut lo, mut hi) = points.bounds().ok_or(Error::InsufficientSample { needed: 1, got: 0 })?;
        for k in 0..lo.len() {
            if lo[k] == hi[k] {
                lo[k] -= 0.5;
                hi[k] += 0.5;
            }
        }
        BoundingBox::new(lo, hi)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn width(&self, axis: usize) -> f64 {
        self.upper[axis] - self.lower[axis]
    }

    pub fn volume(&self) -> f64 {
        (0..self.dim()).map(|k| self.width(k)).product()
    }

    pub fn diagonal(&self) -> f64 {
        (0..self.dim()).map(|k| self.width(k).powi(2)).sum::<f64>().sqrt()
    }

    /// Grows every side symmetrically so that each width is multiplied by `1 + fraction`.
    pub fn inflate(&self, fraction: f64) -> BoundingBox {
        let (lower, upper) = (0..self.dim())
            .map(|k| {
                let pad = self.width(k) * fraction / 2.0;
                (self.lower[k] - pad, self.upper[k] + pad)
            })
            .unzip();
        BoundingBox { lower, upper }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lower.iter().zip(&self.upper)).all(|(v, (a, b))| *a <= *v && v <= b)
    }
}

/// Largest raster accepted, in cells.
pub const DEFAULT_CELL_BUDGET: u128 = 1 << 26;

/// Occupancy of the cell centers of a regular grid. Axis 0 varies fastest
/// in the flat cell order.
#[derive(Debug, Clone, PartialEq)]
pub struct Raster {
    bbox: BoundingBox,
    resolution: Vec<usize>,
    occupied: Vec<bool>,
}

fn check_grid(bbox: &BoundingBox, resolution: &[usize]) -> Result<usize> {
    if resolution.len() != bbox.dim() {
        return Err(Error::DimensionMismatch { expected: bbox.dim(), found: resolution.len() });
    }
    if resolution.iter().any(|&r| r < 2) {
        return Err(invalid("raster resolution must be at least 2 per axis"));
    }
    let cells: u128 = resolution.iter().map(|&r| r as u128).product();
    if cells > DEFAULT_CELL_BUDGET {
        return Err(Error::MemoryBudget { cells, budget: DEFAULT_CELL_BUDGET });
    }
    Ok(cells as usize)
}

impl Raster {
    pub fn from_occupancy(bbox: BoundingBox, resolution: Vec<usize>, occupied: Vec<bool>) -> Result<Self> {
        let cells = check_grid(&bbox, &resolution)?;
        if occupied.len() != cells {
            return Err(Error::DimensionMismatch { expected: cells, found: occupied.len() });
        }
        Ok(Raster { bbox, resolution, occupied })
    }

    /// Evaluates `predicate` at every cell center.
    pub fn from_predicate(
        bbox: &BoundingBox,
        resolution: &[usize],
        predicate: impl Fn(&[f64]) -> bool + Sync,
    ) -> Result<Self> {
        Self::from_predicate_with(bbox, resolution, || (), |_, x| predicate(x))
    }

    /// As [`from_predicate`](Self::from_predicate), with per-thread scratch
    /// state created by `init`.
    pub fn from_predicate_with<S>(
        bbox: &BoundingBox,
        resolution: &[usize],
        init: impl Fn() -> S + Sync,
        predicate: impl Fn(&mut S, &[f64]) -> bool + Sync,
    ) -> Result<Self> {
        let cells = check_grid(bbox, resolution)?;
        let mut raster = Raster { bbox: bbox.clone(), resolution: resolution.to_vec(), occupied: vec![false; cells] };
        const CHUNK: usize = 1024;
        let geometry = raster.clone_grid();
        raster.occupied.par_chunks_mut(CHUNK).enumerate().for_each_init(
            || (init(), vec![0.0; bbox.dim()]),
            |(state, x), (c, chunk)| {
                for (k, slot) in chunk.iter_mut().enumerate() {
                    geometry.center_into(c * CHUNK + k, x);
                    *slot = predicate(state, x);
                }
            },
        );
        Ok(raster)
    }

    fn clone_grid(&self) -> Grid {
        Grid { bbox: self.bbox.clone(), resolution: self.resolution.clone() }
    }

    pub fn bbox(&self) -> &BoundingBox {
        &self.bbox
    }

    pub fn resolution(&self) -> &[usize] {
        &self.resolution
    }

    pub fn dim(&self) -> usize {
        self.resolution.len()
    }

    pub fn occupancy(&self) -> &[bool] {
        &self.occupied
    }

    pub fn len(&self) -> usize {
        self.occupied.len()
    }

    pub fn is_empty(&self) -> bool {
        !self.occupied.iter().any(|&b| b)
    }

    pub fn count(&self) -> usize {
        self.occupied.iter().filter(|&&b| b).count()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.bbox.width(axis) / self.resolution[axis] as f64
    }

    pub fn cell_volume(&self) -> f64 {
        self.bbox.volume() / self.len() as f64
    }

    pub fn cell_diagonal(&self) -> f64 {
        (0..self.dim()).map(|k| self.spacing(k).powi(2)).sum::<f64>().sqrt()
    }

    /// Lebesgue measure of the occupied cells.
    pub fn measure(&self) -> f64 {
        self.count() as f64 * self.cell_volume()
    }

    pub fn center(&self, cell: usize) -> Vec<f64> {
        let mut x = vec![0.0; self.dim()];
        self.clone_grid().center_into(cell, &mut x);
        x
    }

    /// Per-axis cell indices of a flat cell index.
    pub fn unravel(&self, mut cell: usize) -> Vec<usize> {
        self.resolution
            .iter()
            .map(|&r| {
                let i = cell % r;
                cell /= r;
                i
            })
            .collect()
    }

    pub fn ravel(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.resolution).rev().fold(0, |acc, (&i, &r)| acc * r + i)
    }

    pub fn same_grid(&self, other: &Raster) -> bool {
        self.bbox == other.bbox && self.resolution == other.resolution
    }

    fn require_same_grid(&self, other: &Raster) -> Result<()> {
        if self.same_grid(other) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    pub fn intersection(&self, other: &Raster) -> Result<Raster> {
        self.require_same_grid(other)?;
        let occupied = self.occupied.iter().zip(&other.occupied).map(|(a, b)| *a && *b).collect();
        Ok(Raster { bbox: self.bbox.clone(), resolution: self.resolution.clone(), occupied })
    }

    /// Centers of the occupied cells.
    pub fn occupied_centers(&self) -> PointSet {
        let mut coords = Vec::with_capacity(self.count() * self.dim());
        let grid = self.clone_grid();
        let mut x = vec![0.0; self.dim()];
        for (cell, _) in self.occupied.iter().enumerate().filter(|(_, b)| **b) {
            grid.center_into(cell, &mut x);
            coords.extend_from_slice(&x);
        }
        PointSet::new(self.dim(), coords).expect("consistent dimension")
    }

    /// One line per grid line along axis 0 (`#` occupied, `.` empty), lines
    /// ordered by the remaining axes with axis 1 varying fastest.
    pub fn write_text(&self, mut out: impl Write) -> Result<()> {
        for line in self.occupied.chunks(self.resolution[0]) {
            let s: String = line.iter().map(|&b| if b { '#' } else { '.' }).collect();
            writeln!(out, "{s}")?;
        }
        Ok(())
    }

    /// CSV of occupied cell centers with columns `x0, x1, …`.
    pub fn write_csv(&self, out: impl Write) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record((0..self.dim()).map(|k| format!("x{k}"))).map_err(csv_err)?;
        for x in self.occupied_centers().iter() {
            w.write_record(x.iter().map(|v| v.to_string())).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

struct Grid {
    bbox: BoundingBox,
    resolution: Vec<usize>,
}

impl Grid {
    fn center_into(&self, mut cell: usize, x: &mut [f64]) {
        for (k, &r) in self.resolution.iter().enumerate() {
            let i = cell % r;
            cell /= r;
            let h = self.bbox.width(k) / r as f64;
            x[k] = self.bbox.lower[k] + (i as f64 + 0.5) * h;
        }
    }
}

pub fn rasterize(
    predicate: impl Fn(&[f64]) -> bool + Sync,
    bbox: &BoundingBox,
    resolution: &[usize],
) -> Result<Raster> {
    Raster::from_predicate(bbox, resolution, predicate)
}

/// Occupied cells with at least one unoccupied axis neighbor. Cells outside
/// the box count as unoccupied, so occupied cells on the box edge are boundary.
pub fn boundary_cells(a: &Raster) -> Result<Raster> {
    if a.is_empty() {
        return Err(Error::EmptyRaster);
    }
    let res = &a.resolution;
    let mut strides = Vec::with_capacity(res.len());
    let mut s = 1;
    for &r in res {
        strides.push(s);
        s *= r;
    }
    let occupied = (0..a.len())
        .into_par_iter()
        .map(|cell| {
            if !a.occupied[cell] {
                return false;
            }
            let mut rest = cell;
            for (k, &r) in res.iter().enumerate() {
                let i = rest % r;
                rest /= r;
                if i == 0 || i == r - 1 {
                    return true;
                }
                if !a.occupied[cell - strides[k]] || !a.occupied[cell + strides[k]] {
                    return true;
                }
            }
            false
        })
        .collect();
    Ok(Raster { bbox: a.bbox.clone(), resolution: a.resolution.clone(), occupied })
}

/// Measure of the cells occupied in exactly one raster.
pub fn symdiff_measure(a: &Raster, b: &Raster) -> Result<f64> {
    a.require_same_grid(b)?;
    let n = a.occupied.iter().zip(&b.occupied).filter(|(x, y)| x != y).count();
    Ok(n as f64 * a.cell_volume())
}
