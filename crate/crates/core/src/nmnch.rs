//! Multiphase Cahn-Hilliard with the additional `N = 1/sqrt(M)` mobility in
//! the metric.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{Grid, Spectrum};
use crate::physics::{MobilitySpec, Model};
use crate::scheme::{PhaseSystem, SchemeParams, Stepper};
use crate::spectral::{self, SpectralField};
use crate::splitting::{HalfStep, Splitting};

/// Spectrum of `N div(M grad(N w))`, evaluated as
/// `sqrt(M) Lap p + 2 grad sqrt(M) . grad p` with `p = N w`.
pub fn nmn_transport_spectrum(
    grid: &Grid,
    mobility: &MobilitySpec,
    u: &[f64],
    w: &[f64],
) -> (Spectrum, bool) {
    let mut clamped = false;
    let sqrt_m: Vec<f64> = u
        .iter()
        .map(|&v| {
            clamped |= MobilitySpec::clamp(v).1;
            mobility.sqrt_mobility(v)
        })
        .collect();
    let p: Vec<f64> = w.iter().zip(&sqrt_m).map(|(w, s)| w / s).collect();
    let p_hat = grid.forward(&p);
    let s_hat = grid.forward(&sqrt_m);
    let mut out = grid.inverse(spectral::multiply(&p_hat, grid.laplacian_symbol()));
    for (o, s) in out.iter_mut().zip(&sqrt_m) {
        *o *= s;
    }
    for axis in 0..grid.dim() {
        let dp = grid.inverse(spectral::derivative_spectrum(grid, &p_hat, axis));
        let ds = grid.inverse(spectral::derivative_spectrum(grid, &s_hat, axis));
        for ((o, a), b) in out.iter_mut().zip(&dp).zip(&ds) {
            *o += 2.0 * a * b;
        }
    }
    (grid.forward(&out), clamped)
}

/// `N(u) div(M(u) grad(N(u) w))` as a real field.
pub fn nmn_transport(grid: &Grid, mobility: &MobilitySpec, u: &[f64], w: &[f64]) -> Vec<f64> {
    grid.inverse(nmn_transport_spectrum(grid, mobility, u, w).0)
}

#[derive(Debug)]
pub struct NmnchSolver {
    core: Splitting,
    mobility: MobilitySpec,
}

impl NmnchSolver {
    pub fn new(grid: Arc<Grid>, params: SchemeParams, sigma: &[f64], nu: &[f64]) -> Result<Self> {
        let core = Splitting::new(grid, params, Model::Nmnch, sigma, nu, true)?;
        Ok(Self {
            mobility: params.mobility(Model::Nmnch),
            core,
        })
    }

    pub fn for_system(grid: Arc<Grid>, params: SchemeParams, system: &PhaseSystem) -> Result<Self> {
        Self::new(grid, params, &system.sigma, &system.nu)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.core.grid
    }

    pub fn mobility(&self) -> &MobilitySpec {
        &self.mobility
    }

    fn h_spectrum(&self, k: usize, system: &mut PhaseSystem) -> Spectrum {
        let grid = &self.core.grid;
        let nu = self.core.nu[k];
        if nu == 0.0 {
            return vec![Complex64::new(0.0, 0.0); grid.spec_len()];
        }
        let mut w = self.core.driving_potential(k, system);
        let (t, clamped) = nmn_transport_spectrum(grid, &self.mobility, system.u[k].real(), w.real());
        system.mobility_clamped |= clamped;
        let w_hat = w.spectrum(grid);
        t.iter()
            .zip(w_hat)
            .zip(&self.core.metric)
            .map(|((t, w), a)| (t - w * a) * nu)
            .collect()
    }

    /// `H_k = nu_k (N div(M grad(N w)) - (m Lap - beta) w)` with
    /// `w = sigma_k mu_k + lambda`.
    pub fn h_term(&self, k: usize, system: &mut PhaseSystem) -> SpectralField {
        let h = self.h_spectrum(k, system);
        SpectralField::from_spectrum(&self.core.grid, h)
    }

    fn b1(&self, k: usize, system: &mut PhaseSystem) -> Spectrum {
        let h = self.h_spectrum(k, system);
        let dt = self.core.params.dt;
        system.u[k]
            .spectrum(&self.core.grid)
            .iter()
            .zip(&h)
            .map(|(u, h)| u + h * dt)
            .collect()
    }

    /// `(B1_k, B2_k)` for phase `k`, as real fields.
    pub fn b_terms(&self, k: usize, system: &mut PhaseSystem) -> (SpectralField, SpectralField) {
        let grid = &self.core.grid;
        let b1 = self.b1(k, system);
        let b2 = self.core.b2(system.u[k].real());
        (SpectralField::from_spectrum(grid, b1), SpectralField::from_spectrum(grid, b2))
    }

    pub fn half_step(&self, system: &mut PhaseSystem) -> HalfStep {
        self.core.half_step(system, &mut |k, s| self.b1(k, s))
    }

    pub fn lagrange(&self, defect: &[Complex64]) -> Result<Spectrum> {
        self.core.multiplier(defect)
    }

    pub fn defect(&self, half: &HalfStep) -> Spectrum {
        self.core.defect(&half.u)
    }

    pub fn correct(&self, system: &mut PhaseSystem, half: HalfStep, lambda: Spectrum) {
        self.core.finish(system, half, lambda)
    }
}

impl Stepper for NmnchSolver {
    fn step(&self, system: &mut PhaseSystem) -> Result<()> {
        self.core.check_system(system)?;
        self.core.advance(system, |k, s| self.b1(k, s))
    }

    fn params(&self) -> &SchemeParams {
        &self.core.params
    }

    fn model(&self) -> Model {
        Model::Nmnch
    }
}
