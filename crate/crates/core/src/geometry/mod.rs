//! Reference shapes, boundary-decay samplers, rasters and the set
//! divergences used to score support estimates.
//!
//! Set comparisons run on rasters: both sets are sampled at the cell centers
//! of one grid, and every distance is reported together with the cell
//! diagonal, which bounds its discretization error for well-resolved sets.

mod contour;
mod distance;
mod raster;
mod sample;
mod shape;

pub use contour::{contour_polylines, write_contours_csv, Ring};
pub use distance::{compare, hausdorff_distance, squared_distance_transform, GeometryReport};
pub use raster::{boundary_cells, rasterize, symdiff_measure, BoundingBox, Raster, DEFAULT_CELL_BUDGET};
pub use sample::sample_shape;
pub use shape::{unit_ball_volume, Ball, ShapeSpec};
