//! Multiphase Cahn-Hilliard with degenerate mobility in the transport term.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::Result;
use crate::grid::{Grid, Spectrum};
use crate::physics::{MobilitySpec, Model};
use crate::scheme::{PhaseSystem, SchemeParams, Stepper};
use crate::spectral::{self, SpectralField};
use crate::splitting::{HalfStep, Splitting};

/// Spectrum of `div((M(u) - m) grad w)`; the flag reports mobility clamping.
pub fn mch_transport(
    grid: &Grid,
    mobility: &MobilitySpec,
    m: f64,
    u: &[f64],
    w: &mut SpectralField,
) -> (Spectrum, bool) {
    let mut clamped = false;
    let factor: Vec<f64> = u
        .iter()
        .map(|&v| {
            clamped |= MobilitySpec::clamp(v).1;
            mobility.mobility(v) - m
        })
        .collect();
    let w_hat = w.spectrum(grid);
    let fluxes: Vec<Spectrum> = (0..grid.dim())
        .map(|axis| {
            let mut d = grid.inverse(spectral::derivative_spectrum(grid, w_hat, axis));
            for (v, f) in d.iter_mut().zip(&factor) {
                *v *= f;
            }
            grid.forward(&d)
        })
        .collect();
    let refs: Vec<&[Complex64]> = fluxes.iter().map(|f| f.as_slice()).collect();
    (spectral::divergence_spectrum(grid, &refs), clamped)
}

#[derive(Debug)]
pub struct MchSolver {
    core: Splitting,
    mobility: MobilitySpec,
}

impl MchSolver {
    pub fn new(grid: Arc<Grid>, params: SchemeParams, sigma: &[f64], nu: &[f64]) -> Result<Self> {
        let core = Splitting::new(grid, params, Model::Mch, sigma, nu, true)?;
        Ok(Self {
            mobility: params.mobility(Model::Mch),
            core,
        })
    }

    pub fn for_system(grid: Arc<Grid>, params: SchemeParams, system: &PhaseSystem) -> Result<Self> {
        Self::new(grid, params, &system.sigma, &system.nu)
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.core.grid
    }

    /// Spectrum of `B1_k = u_k + dt nu_k div((M(u_k) - m) grad(sigma_k mu_k + lambda))`.
    fn b1(&self, k: usize, system: &mut PhaseSystem) -> Spectrum {
        let grid = &self.core.grid;
        let mut w = self.core.driving_potential(k, system);
        let (div, clamped) = mch_transport(grid, &self.mobility, self.core.params.m, system.u[k].real(), &mut w);
        system.mobility_clamped |= clamped;
        let scale = self.core.params.dt * self.core.nu[k];
        system.u[k]
            .spectrum(grid)
            .iter()
            .zip(&div)
            .map(|(u, d)| u + d * scale)
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

    /// Multiplier spectrum for the partition defect `1 - sum_k u_k`.
    pub fn lagrange(&self, defect: &[Complex64]) -> Result<Spectrum> {
        self.core.multiplier(defect)
    }

    pub fn defect(&self, half: &HalfStep) -> Spectrum {
        self.core.defect(&half.u)
    }

    /// Applies the correction and stores the new state in `system`.
    pub fn correct(&self, system: &mut PhaseSystem, half: HalfStep, lambda: Spectrum) {
        self.core.finish(system, half, lambda)
    }
}

impl Stepper for MchSolver {
    fn step(&self, system: &mut PhaseSystem) -> Result<()> {
        self.core.check_system(system)?;
        self.core.advance(system, |k, s| self.b1(k, s))
    }

    fn params(&self) -> &SchemeParams {
        &self.core.params
    }

    fn model(&self) -> Model {
        Model::Mch
    }
}
