//! Marching squares on periodic 2D grids.
//!
//! Cell `(i, j)` spans nodes `(i, j)..(i+1, j+1)` with indices wrapped, so
//! returned coordinates lie in `[0, L + h]` and may need unwrapping by the
//! caller.

use crate::error::{Error, Result};
use crate::grid::Grid;

pub type Point = [f64; 2];

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LevelSetGeometry {
    pub area: f64,
    pub perimeter: f64,
    /// `4 pi A / P^2`, 1 for a disc.
    pub isoperimetric_ratio: f64,
}

fn check_2d(grid: &Grid) {
    assert_eq!(grid.dim(), 2, "contouring needs a 2D grid");
}

/// Visits every cell with its corner positions and values, counter-clockwise.
fn for_each_cell(grid: &Grid, field: &[f64], mut f: impl FnMut([Point; 4], [f64; 4])) {
    let (n0, n1) = (grid.dims()[0], grid.dims()[1]);
    let (h0, h1) = (grid.spacing(0), grid.spacing(1));
    for i in 0..n0 {
        let ip = (i + 1) % n0;
        for j in 0..n1 {
            let jp = (j + 1) % n1;
            let (x0, y0) = (i as f64 * h0, j as f64 * h1);
            let pts = [[x0, y0], [x0 + h0, y0], [x0 + h0, y0 + h1], [x0, y0 + h1]];
            let vals = [
                field[i * n1 + j],
                field[ip * n1 + j],
                field[ip * n1 + jp],
                field[i * n1 + jp],
            ];
            f(pts, vals);
        }
    }
}

fn lerp(a: Point, b: Point, va: f64, vb: f64, iso: f64) -> Point {
    let t = (iso - va) / (vb - va);
    [a[0] + t * (b[0] - a[0]), a[1] + t * (b[1] - a[1])]
}

/// Segments of the `iso` contour, one or two per crossed cell.
pub fn iso_segments(grid: &Grid, field: &[f64], iso: f64) -> Vec<[Point; 2]> {
    check_2d(grid);
    let mut out = Vec::new();
    for_each_cell(grid, field, |pts, vals| {
        let inside = vals.map(|v| v > iso);
        // crossing on edge k (corner k -> corner k+1)
        let mut cross: [Option<Point>; 4] = [None; 4];
        for k in 0..4 {
            let l = (k + 1) % 4;
            if inside[k] != inside[l] {
                cross[k] = Some(lerp(pts[k], pts[l], vals[k], vals[l], iso));
            }
        }
        let found: Vec<Point> = cross.iter().flatten().copied().collect();
        match found.len() {
            2 => out.push([found[0], found[1]]),
            4 => {
                // saddle: separate the corners that differ from the centre
                let centre_inside = vals.iter().sum::<f64>() / 4.0 > iso;
                for k in 0..4 {
                    if inside[k] != centre_inside {
                        let prev = cross[(k + 3) % 4].unwrap();
                        let next = cross[k].unwrap();
                        out.push([prev, next]);
                    }
                }
            }
            _ => {}
        }
    });
    out
}

/// Area of `{field > iso}` with linear interpolation along cell edges.
pub fn region_area(grid: &Grid, field: &[f64], iso: f64) -> f64 {
    check_2d(grid);
    let mut area = 0.0;
    for_each_cell(grid, field, |pts, vals| {
        let mut poly: Vec<Point> = Vec::with_capacity(8);
        for k in 0..4 {
            let l = (k + 1) % 4;
            if vals[k] > iso {
                poly.push(pts[k]);
            }
            if (vals[k] > iso) != (vals[l] > iso) {
                poly.push(lerp(pts[k], pts[l], vals[k], vals[l], iso));
            }
        }
        let n = poly.len();
        let mut twice = 0.0;
        for a in 0..n {
            let b = (a + 1) % n;
            twice += poly[a][0] * poly[b][1] - poly[b][0] * poly[a][1];
        }
        area += 0.5 * twice.abs();
    });
    area
}

/// Area, perimeter and isoperimetric ratio of `{field > iso}`.
pub fn level_set_geometry(grid: &Grid, field: &[f64], iso: f64) -> Result<LevelSetGeometry> {
    let area = region_area(grid, field, iso);
    let perimeter: f64 = iso_segments(grid, field, iso)
        .iter()
        .map(|[a, b]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt())
        .sum();
    if area <= 0.0 || perimeter <= 0.0 {
        return Err(Error::EmptyLevelSet);
    }
    Ok(LevelSetGeometry {
        area,
        perimeter,
        isoperimetric_ratio: 4.0 * std::f64::consts::PI * area / (perimeter * perimeter),
    })
}

/// Symmetric Hausdorff distance between two point sets, with periodic
/// displacements.
pub fn hausdorff(grid: &Grid, a: &[Point], b: &[Point]) -> f64 {
    let one_sided = |from: &[Point], to: &[Point]| {
        from.iter()
            .map(|p| {
                to.iter()
                    .map(|q| {
                        let dx = grid.wrap(0, p[0] - q[0]);
                        let dy = grid.wrap(1, p[1] - q[1]);
                        dx * dx + dy * dy
                    })
                    .fold(f64::INFINITY, f64::min)
            })
            .fold(0.0, f64::max)
            .sqrt()
    };
    one_sided(a, b).max(one_sided(b, a))
}

/// Endpoints of all iso segments, as a point cloud.
pub fn iso_points(grid: &Grid, field: &[f64], iso: f64) -> Vec<Point> {
    iso_segments(grid, field, iso)
        .into_iter()
        .flatten()
        .collect()
}
