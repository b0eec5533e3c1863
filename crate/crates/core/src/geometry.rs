//! Signed distance functions on the periodic box, negative inside.

use serde::{Deserialize, Serialize};

use crate::grid::Grid;

/// A body described by its signed distance. Coordinates beyond the grid
/// dimension are ignored; displacements are taken to the nearest periodic
/// image.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Shape {
    /// Disc in 2D, ball in 3D, interval in 1D.
    Ball { center: Vec<f64>, radius: f64 },
    /// Axis-aligned box with half-widths per axis.
    Box { center: Vec<f64>, half: Vec<f64> },
    /// Cylinder of radius `radius` around the line through `center` along
    /// `axis`; `half_length` caps it (omit for an infinite, periodic tube).
    Tube {
        center: Vec<f64>,
        axis: usize,
        radius: f64,
        #[serde(default)]
        half_length: Option<f64>,
    },
    /// Slab `|x_axis - center| <= half`.
    Slab { axis: usize, center: f64, half: f64 },
}

impl Shape {
    pub fn ball(center: &[f64], radius: f64) -> Self {
        Self::Ball {
            center: center.to_vec(),
            radius,
        }
    }

    fn offset(grid: &Grid, center: &[f64], p: [f64; 3]) -> [f64; 3] {
        let mut d = [0.0; 3];
        for axis in 0..grid.dim() {
            let c = center.get(axis).copied().unwrap_or(0.0);
            d[axis] = grid.wrap(axis, p[axis] - c);
        }
        d
    }

    pub fn distance(&self, grid: &Grid, p: [f64; 3]) -> f64 {
        let dim = grid.dim();
        match self {
            Shape::Ball { center, radius } => {
                let d = Self::offset(grid, center, p);
                d[..dim].iter().map(|v| v * v).sum::<f64>().sqrt() - radius
            }
            Shape::Box { center, half } => {
                let d = Self::offset(grid, center, p);
                let q: Vec<f64> = (0..dim)
                    .map(|a| d[a].abs() - half.get(a).copied().unwrap_or(f64::INFINITY))
                    .collect();
                let outside = q.iter().map(|v| v.max(0.0).powi(2)).sum::<f64>().sqrt();
                let inside = q.iter().copied().fold(f64::NEG_INFINITY, f64::max).min(0.0);
                outside + inside
            }
            Shape::Tube {
                center,
                axis,
                radius,
                half_length,
            } => {
                let d = Self::offset(grid, center, p);
                let radial = (0..dim)
                    .filter(|a| a != axis)
                    .map(|a| d[a] * d[a])
                    .sum::<f64>()
                    .sqrt()
                    - radius;
                match half_length {
                    None => radial,
                    Some(h) => {
                        let along = d[*axis].abs() - h;
                        let outside = (radial.max(0.0).powi(2) + along.max(0.0).powi(2)).sqrt();
                        outside + radial.max(along).min(0.0)
                    }
                }
            }
            Shape::Slab { axis, center, half } => {
                grid.wrap(*axis, p[*axis] - center).abs() - half
            }
        }
    }

    /// Signed distance sampled at every node.
    pub fn sample(&self, grid: &Grid) -> Vec<f64> {
        grid.sample(|p| self.distance(grid, p))
    }

    /// Exact measure (area/volume) when the shape does not wrap onto itself.
    pub fn measure(&self, grid: &Grid) -> Option<f64> {
        use std::f64::consts::PI;
        let dim = grid.dim();
        Some(match self {
            Shape::Ball { radius, .. } => match dim {
                1 => 2.0 * radius,
                2 => PI * radius * radius,
                _ => 4.0 / 3.0 * PI * radius.powi(3),
            },
            Shape::Box { half, .. } => half[..dim].iter().map(|h| 2.0 * h).product(),
            Shape::Tube {
                axis,
                radius,
                half_length,
                ..
            } => {
                let length = half_length.map(|h| 2.0 * h).unwrap_or(grid.lengths()[*axis]);
                match dim {
                    2 => 2.0 * radius * length,
                    3 => PI * radius * radius * length,
                    _ => return None,
                }
            }
            Shape::Slab { axis, half, .. } => {
                let other: f64 = (0..dim).filter(|a| a != axis).map(|a| grid.lengths()[a]).product();
                2.0 * half * other
            }
        })
    }
}

/// Union of shapes: pointwise minimum of their distances.
pub fn union_distance(grid: &Grid, shapes: &[Shape]) -> Vec<f64> {
    let mut out = vec![f64::INFINITY; grid.len()];
    for s in shapes {
        for (o, d) in out.iter_mut().zip(s.sample(grid)) {
            *o = o.min(d);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ball_distance_wraps() {
        let g = Grid::uniform(2, 16, 1.0).unwrap();
        let b = Shape::ball(&[0.05, 0.5], 0.1);
        assert!((b.distance(&g, [0.95, 0.5, 0.0]) - 0.0).abs() < 1e-12);
        assert!((b.distance(&g, [0.05, 0.5, 0.0]) + 0.1).abs() < 1e-12);
    }

    #[test]
    fn box_distance_inside_and_outside() {
        let g = Grid::uniform(2, 16, 1.0).unwrap();
        let b = Shape::Box {
            center: vec![0.5, 0.5],
            half: vec![0.2, 0.1],
        };
        assert!((b.distance(&g, [0.5, 0.5, 0.0]) + 0.1).abs() < 1e-12);
        assert!((b.distance(&g, [0.8, 0.5, 0.0]) - 0.1).abs() < 1e-12);
        let corner = b.distance(&g, [0.8, 0.7, 0.0]);
        assert!((corner - (0.02f64).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn capped_tube() {
        let g = Grid::uniform(3, 8, 1.0).unwrap();
        let t = Shape::Tube {
            center: vec![0.5, 0.5, 0.5],
            axis: 0,
            radius: 0.1,
            half_length: Some(0.3),
        };
        assert!((t.distance(&g, [0.5, 0.5, 0.5]) + 0.1).abs() < 1e-12);
        assert!((t.distance(&g, [0.9, 0.5, 0.5]) - 0.1).abs() < 1e-12);
        assert!((t.distance(&g, [0.5, 0.7, 0.5]) - 0.1).abs() < 1e-12);
    }
}
