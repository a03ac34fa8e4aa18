use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::raster::Raster;
use crate::error::{csv_err, Error, Result};

/// Closed polyline. The first point is not repeated at the end.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ring {
    pub id: usize,
    pub points: Vec<[f64; 2]>,
}

// Edge between neighboring samples of the padded grid: (orientation, i, j),
// with orientation 0 joining (i, j)-(i+1, j) and 1 joining (i, j)-(i, j+1).
type EdgeKey = (u8, i64, i64);

/// Marching-squares boundary of the occupied cells of a 2-D raster.
///
/// Samples sit at cell centers and the grid is padded by one unoccupied
/// layer, so every ring is closed. Vertices are edge midpoints, which cuts
/// convex corners of the occupied set by half a cell. In a saddle
/// square the two occupied corners are taken as connected ("connect-high"),
/// which also keeps diagonal cells in one component. Collinear runs are merged.
pub fn contour_polylines(a: &Raster) -> Result<Vec<Ring>> {
    if a.dim() != 2 {
        return Err(Error::UnsupportedDimension { op: "contour_polylines", supported: 2, p: a.dim() });
    }
    let (nx, ny) = (a.resolution()[0] as i64, a.resolution()[1] as i64);
    let occ = |i: i64, j: i64| i >= 0 && j >= 0 && i < nx && j < ny && a.occupancy()[(j * nx + i) as usize];

    let mut adjacency: BTreeMap<EdgeKey, Vec<EdgeKey>> = BTreeMap::new();
    let mut link = |u: EdgeKey, v: EdgeKey| {
        adjacency.entry(u).or_default().push(v);
        adjacency.entry(v).or_default().push(u);
    };
    for j in -1..ny {
        for i in -1..nx {
            let b = [occ(i, j), occ(i + 1, j), occ(i + 1, j + 1), occ(i, j + 1)];
            let e = [(0, i, j), (1, i + 1, j), (0, i, j + 1), (1, i, j)];
            let case = b.iter().enumerate().fold(0, |acc, (k, &v)| acc | ((v as u8) << k));
            match case {
                0 | 15 => {}
                0b0101 => {
                    link(e[0], e[1]);
                    link(e[2], e[3]);
                }
                0b1010 => {
                    link(e[3], e[0]);
                    link(e[1], e[2]);
                }
                _ => {
                    let crossing: Vec<EdgeKey> = (0..4).filter(|&k| b[k] != b[(k + 1) % 4]).map(|k| e[k]).collect();
                    debug_assert_eq!(crossing.len(), 2);
                    link(crossing[0], crossing[1]);
                }
            }
        }
    }

    let (lo, hx, hy) = (a.bbox().lower(), a.spacing(0), a.spacing(1));
    let position = |(o, i, j): EdgeKey| {
        let (fi, fj) = (i as f64 + 0.5, j as f64 + 0.5);
        if o == 0 {
            [lo[0] + (fi + 0.5) * hx, lo[1] + fj * hy]
        } else {
            [lo[0] + fi * hx, lo[1] + (fj + 0.5) * hy]
        }
    };

    let mut rings = Vec::new();
    let mut visited: BTreeMap<EdgeKey, bool> = adjacency.keys().map(|&k| (k, false)).collect();
    let starts: Vec<EdgeKey> = adjacency.keys().copied().collect();
    for start in starts {
        if visited[&start] {
            continue;
        }
        let mut keys = vec![start];
        visited.insert(start, true);
        let mut prev = start;
        let mut cur = adjacency[&start][0];
        while cur != start {
            keys.push(cur);
            visited.insert(cur, true);
            let nbrs = &adjacency[&cur];
            let next = if nbrs[0] == prev { nbrs[1] } else { nbrs[0] };
            prev = cur;
            cur = next;
        }
        let points = merge_collinear(keys.into_iter().map(position).collect());
        rings.push(Ring { id: rings.len(), points });
    }
    Ok(rings)
}

fn merge_collinear(points: Vec<[f64; 2]>) -> Vec<[f64; 2]> {
    let n = points.len();
    if n < 4 {
        return points;
    }
    let keep: Vec<bool> = (0..n)
        .map(|k| {
            let (a, b, c) = (points[(k + n - 1) % n], points[k], points[(k + 1) % n]);
            let cross = (b[0] - a[0]) * (c[1] - b[1]) - (b[1] - a[1]) * (c[0] - b[0]);
            let scale = ((b[0] - a[0]).abs() + (b[1] - a[1]).abs()) * ((c[0] - b[0]).abs() + (c[1] - b[1]).abs());
            cross.abs() > 1e-9 * scale
        })
        .collect();
    points.into_iter().zip(keep).filter(|(_, k)| *k).map(|(p, _)| p).collect()
}

/// Rows `x,y,ring_id`; each ring is closed by repeating its first point.
pub fn write_contours_csv(rings: &[Ring], out: impl Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["x", "y", "ring_id"]).map_err(csv_err)?;
    for ring in rings {
        for p in ring.points.iter().chain(ring.points.first()) {
            w.write_record([p[0].to_string(), p[1].to_string(), ring.id.to_string()]).map_err(csv_err)?;
        }
    }
    w.flush()?;
    Ok(())
}
