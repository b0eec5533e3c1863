//! Energies, conservation monitors and shape measurements.

use std::fmt::Write as _;

use crate::contour;
use crate::error::{Error, Result};
use crate::geometry::Shape;
use crate::grid::Grid;
use crate::physics::{self, optimal_profile};
use crate::scheme::PhaseSystem;
use crate::spectral::SpectralField;

/// `int eps/2 |grad u|^2 + W(u)/eps`, gradient term through Parseval.
pub fn phase_energy(grid: &Grid, u: &mut SpectralField, eps: f64) -> f64 {
    let n = grid.len() as f64;
    let spec = u.spectrum(grid);
    let weights = grid.parseval_weight();
    let mut grad2 = 0.0;
    for (i, c) in spec.iter().enumerate() {
        let k2: f64 = (0..grid.dim()).map(|a| grid.derivative_symbol(a)[i].powi(2)).sum();
        grad2 += weights[i] * k2 * c.norm_sqr();
    }
    // sum_x |f|^2 = (1/N) sum_k |f_k|^2, then times the cell volume
    let gradient = grad2 / n * grid.cell_volume();
    let well = grid.integrate(&u.real().iter().map(|&v| physics::w(v)).collect::<Vec<_>>());
    0.5 * eps * gradient + well / eps
}

/// `1/2 sum_k sigma_k int (eps/2 |grad u_k|^2 + W(u_k)/eps)`.
pub fn cahn_hilliard_energy(grid: &Grid, system: &mut PhaseSystem, eps: f64) -> f64 {
    let sigma = system.sigma.clone();
    system
        .u
        .iter_mut()
        .zip(sigma)
        .map(|(u, s)| 0.5 * s * phase_energy(grid, u, eps))
        .sum()
}

/// Energy of a set of fields with explicit tensions.
pub fn energy_of_fields(grid: &Grid, fields: &[Vec<f64>], sigma: &[f64], eps: f64) -> f64 {
    fields
        .iter()
        .zip(sigma)
        .map(|(u, s)| 0.5 * s * phase_energy(grid, &mut SpectralField::new(u.clone()), eps))
        .sum()
}

pub fn overshoot(u: &[f64]) -> (f64, f64) {
    u.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)))
}

/// `max |u - q(dist/eps)|`.
pub fn profile_error(u: &[f64], dist: &[f64], eps: f64) -> f64 {
    u.iter()
        .zip(dist)
        .map(|(&v, &d)| (v - optimal_profile(d / eps)).abs())
        .fold(0.0, f64::max)
}

/// Periodic centroid of a non-negative density, by circular means.
pub fn periodic_centroid(grid: &Grid, u: &[f64]) -> Vec<f64> {
    (0..grid.dim())
        .map(|axis| {
            let l = grid.lengths()[axis];
            let (mut s, mut c) = (0.0, 0.0);
            for (i, &v) in u.iter().enumerate() {
                let a = 2.0 * std::f64::consts::PI * grid.point(i)[axis] / l;
                let w = v.max(0.0);
                s += w * a.sin();
                c += w * a.cos();
            }
            (s.atan2(c) * l / (2.0 * std::f64::consts::PI)).rem_euclid(l)
        })
        .collect()
}

/// Ball of the same measure as `int u`, centred at the centroid of `u`.
pub fn equivalent_ball(grid: &Grid, u: &[f64]) -> Shape {
    use std::f64::consts::PI;
    let mass = grid.integrate(u);
    let radius = match grid.dim() {
        1 => 0.5 * mass,
        2 => (mass / PI).sqrt(),
        _ => (3.0 * mass / (4.0 * PI)).cbrt(),
    };
    Shape::ball(&periodic_centroid(grid, u), radius)
}

pub use contour::{level_set_geometry, LevelSetGeometry};

/// Width of the `q in [0.05, 0.95]` transition layer, `2 ln(19) eps`.
pub fn interface_width(eps: f64) -> f64 {
    2.0 * 19f64.ln() * eps
}

/// Cells across the interface must be at least `min_cells`.
pub fn check_resolution(grid: &Grid, eps: f64, min_cells: f64) -> Result<()> {
    let cells = interface_width(eps) / grid.min_spacing();
    if cells < min_cells {
        return Err(Error::InsufficientResolution(format!(
            "interface spans {cells:.2} cells at eps = {eps}, need {min_cells}"
        )));
    }
    Ok(())
}

/// Least-squares slope of `log(metric)` against `log(eps)`.
pub fn fit_slope(eps: &[f64], metric: &[f64]) -> Result<f64> {
    if eps.len() != metric.len() || eps.len() < 3 {
        return Err(Error::InsufficientResolution(format!(
            "{} samples, a slope fit needs at least 3",
            eps.len().min(metric.len())
        )));
    }
    if eps.iter().chain(metric).any(|v| !(v.is_finite() && *v > 0.0)) {
        return Err(Error::Validation("slope fit needs positive finite samples".into()));
    }
    let x: Vec<f64> = eps.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = metric.iter().map(|v| v.ln()).collect();
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    Ok(sxy / sxx)
}

/// One diagnostics sample.
#[derive(Clone, Debug, PartialEq)]
pub struct DiagnosticsReport {
    pub step: u64,
    pub time: f64,
    pub energy: f64,
    pub partition_residual: f64,
    pub mass: Vec<f64>,
    pub min_u: Vec<f64>,
    pub max_u: Vec<f64>,
    pub profile_error: Option<f64>,
    pub contact_angle: Option<f64>,
    pub isoperimetric_ratio: Option<f64>,
}

impl DiagnosticsReport {
    /// Energy, masses, extrema and partition residual of `system`.
    pub fn basic(grid: &Grid, system: &mut PhaseSystem, eps: f64, time: f64) -> Self {
        let energy = cahn_hilliard_energy(grid, system, eps);
        let (min_u, max_u) = system.u.iter().map(|u| overshoot(u.real())).unzip();
        Self {
            step: system.step_index,
            time,
            energy,
            partition_residual: if system.phase_count() > 1 {
                system.partition_residual()
            } else {
                0.0
            },
            mass: system.masses(),
            min_u,
            max_u,
            profile_error: None,
            contact_angle: None,
            isoperimetric_ratio: None,
        }
    }

    /// Column names for `phases` phases, in output order.
    pub fn csv_header(phases: usize) -> String {
        let mut cols = vec!["step".to_string(), "time".into(), "energy".into(), "partition_residual".into()];
        for prefix in ["mass", "min", "max"] {
            cols.extend((1..=phases).map(|k| format!("{prefix}_{k}")));
        }
        cols.extend(["profile_error", "contact_angle", "isoperimetric_ratio"].map(String::from));
        cols.join(",")
    }

    /// Values in header order; floats use Rust's shortest round-trip form,
    /// absent optional entries are empty.
    pub fn csv_row(&self) -> String {
        let mut row = format!("{},{:e},{:e},{:e}", self.step, self.time, self.energy, self.partition_residual);
        for v in self.mass.iter().chain(&self.min_u).chain(&self.max_u) {
            let _ = write!(row, ",{v:e}");
        }
        for v in [self.profile_error, self.contact_angle, self.isoperimetric_ratio] {
            row.push(',');
            if let Some(v) = v {
                let _ = write!(row, "{v:e}");
            }
        }
        row
    }
}
