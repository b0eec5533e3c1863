//! Initial phase fields.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::geometry::{union_distance, Shape};
use crate::grid::Grid;
use crate::physics::optimal_profile;

/// Per cell, `L` independent uniforms divided by their sum, then pulled
/// towards `1/L` by `amplitude` (1 keeps the raw normalized draw). The
/// partition holds exactly at every node.
pub fn noise(grid: &Grid, phases: usize, seed: u64, amplitude: f64) -> Result<Vec<Vec<f64>>> {
    if phases == 0 {
        return Err(Error::Validation("noise needs at least one phase".into()));
    }
    if !(0.0..=1.0).contains(&amplitude) {
        return Err(Error::Validation(format!("noise amplitude {amplitude} not in [0, 1]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mean = 1.0 / phases as f64;
    let mut out = vec![vec![0.0; grid.len()]; phases];
    let mut draws = vec![0.0; phases];
    for i in 0..grid.len() {
        for d in draws.iter_mut() {
            // open interval keeps the sum away from zero
            *d = rng.gen_range(f64::EPSILON..1.0);
        }
        let total: f64 = draws.iter().sum();
        for (k, d) in draws.iter().enumerate() {
            out[k][i] = mean + amplitude * (d / total - mean);
        }
    }
    Ok(out)
}

/// `q(dist / eps)` for each body (a union of shapes), followed by the
/// remainder phase `1 - sum`.
///
/// Bodies that both lie deeper than `3 eps` inside at a common node are
/// rejected as overlapping.
pub fn shapes(grid: &Grid, eps: f64, bodies: &[Vec<Shape>]) -> Result<Vec<Vec<f64>>> {
    let dists: Vec<Vec<f64>> = bodies.iter().map(|b| union_distance(grid, b)).collect();
    for i in 0..dists.len() {
        for j in i + 1..dists.len() {
            let clash = dists[i]
                .iter()
                .zip(&dists[j])
                .any(|(a, b)| *a < -3.0 * eps && *b < -3.0 * eps);
            if clash {
                return Err(Error::OverlappingShapes(i, j));
            }
        }
    }
    let mut phases: Vec<Vec<f64>> = dists
        .iter()
        .map(|d| d.iter().map(|&r| optimal_profile(r / eps)).collect())
        .collect();
    let remainder = (0..grid.len())
        .map(|i| 1.0 - phases.iter().map(|p| p[i]).sum::<f64>())
        .collect();
    phases.push(remainder);
    Ok(phases)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn noise_is_deterministic_and_partitioned() {
        let g = Grid::uniform(2, 16, 1.0).unwrap();
        let a = noise(&g, 3, 7, 1.0).unwrap();
        let b = noise(&g, 3, 7, 1.0).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, noise(&g, 3, 8, 1.0).unwrap());
        for i in 0..g.len() {
            let s: f64 = a.iter().map(|p| p[i]).sum();
            assert!((s - 1.0).abs() < 1e-14);
            assert!(a.iter().all(|p| p[i] > 0.0 && p[i] < 1.0));
        }
        let damped = noise(&g, 3, 7, 0.25).unwrap();
        assert!(damped[0].iter().all(|v| (v - 1.0 / 3.0).abs() <= 0.25));
    }

    #[test]
    fn overlapping_bodies_are_rejected() {
        let g = Grid::uniform(2, 32, 1.0).unwrap();
        let eps = 1.0 / 32.0;
        let a = vec![Shape::ball(&[0.4, 0.5], 0.2)];
        let b = vec![Shape::ball(&[0.6, 0.5], 0.2)];
        assert_eq!(shapes(&g, eps, &[a.clone(), b]).unwrap_err(), Error::OverlappingShapes(0, 1));
        let c = vec![Shape::ball(&[0.9, 0.5], 0.05)];
        let ok = shapes(&g, eps, &[a, c]).unwrap();
        assert_eq!(ok.len(), 3);
    }
}
