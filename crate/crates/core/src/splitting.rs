//! Machinery common to both multiphase schemes.
//!
//! With `A` the implicit metric symbol (`m Lap` for MCH, `m Lap - beta` for
//! NMNCH) and `L_k = (I + dt sigma_k nu_k A (Lap - alpha/eps^2))^{-1}`, each
//! phase is advanced by
//!
//! ```text
//! u_k^{n+1/2}  = L_k [ B1_k + dt sigma_k nu_k A B2_k ]
//! mu_k^{n+1/2} = L_k [ (-Lap + alpha/eps^2) B1_k + B2_k ]
//! ```
//!
//! then corrected with the multiplier
//! `lambda = (1/dt) [sum_k nu_k L_k A]^{-1} (1 - sum_k u_k^{n+1/2})`.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, Spectrum};
use crate::physics::{self, Model};
use crate::scheme::{PhaseSystem, SchemeParams};
use crate::spectral::{self, SpectralField};

/// Tolerance on the mean of the partition defect for MCH.
pub const DEFECT_MEAN_TOLERANCE: f64 = 1e-9;

/// Per-phase intermediate state `(u^{n+1/2}, mu^{n+1/2})`, spectral.
#[derive(Clone, Debug)]
pub struct HalfStep {
    pub u: Vec<Spectrum>,
    pub mu: Vec<Spectrum>,
}

#[derive(Debug)]
pub(crate) struct Splitting {
    pub grid: Arc<Grid>,
    pub params: SchemeParams,
    pub model: Model,
    pub sigma: Vec<f64>,
    pub nu: Vec<f64>,
    pub operators: Vec<Vec<f64>>,
    pub metric: Vec<f64>,
    /// `1 / (dt sum_k nu_k L_k A)`, absent for a single phase.
    pub lambda_inverse: Option<Vec<f64>>,
}

impl Splitting {
    pub fn new(
        grid: Arc<Grid>,
        params: SchemeParams,
        model: Model,
        sigma: &[f64],
        nu: &[f64],
        with_multiplier: bool,
    ) -> Result<Self> {
        params.validate(model)?;
        if sigma.len() != nu.len() || sigma.is_empty() {
            return Err(Error::Validation(format!(
                "{} tensions for {} mobilities",
                sigma.len(),
                nu.len()
            )));
        }
        let operators = sigma
            .iter()
            .zip(nu)
            .map(|(&s, &n)| spectral::phase_operator_symbol(&grid, &params, model, s, n))
            .collect();
        let metric: Vec<f64> = spectral::metric_symbol(&grid, &params, model)
            .into_iter()
            .map(|a| match model {
                Model::Mch => params.m * a,
                Model::Nmnch => a,
            })
            .collect();
        let lambda_inverse = if with_multiplier && sigma.len() > 1 {
            let phases: Vec<(f64, f64)> = sigma.iter().copied().zip(nu.iter().copied()).collect();
            let scale = match model {
                Model::Mch => 1.0 / (params.dt * params.m),
                Model::Nmnch => 1.0 / params.dt,
            };
            Some(
                spectral::lambda_inverse_symbol(&grid, &params, &phases, model)?
                    .into_iter()
                    .map(|v| v * scale)
                    .collect(),
            )
        } else {
            None
        };
        Ok(Self {
            grid,
            params,
            model,
            sigma: sigma.to_vec(),
            nu: nu.to_vec(),
            operators,
            metric,
            lambda_inverse,
        })
    }

    pub fn check_system(&self, system: &PhaseSystem) -> Result<()> {
        if system.sigma != self.sigma || system.nu != self.nu {
            return Err(Error::Validation(
                "system coefficients differ from the solver's".into(),
            ));
        }
        Ok(())
    }

    /// `B2 = (W'(u) - alpha u) / eps^2`, spectral.
    pub fn b2(&self, u: &[f64]) -> Spectrum {
        let inv_eps2 = 1.0 / (self.params.eps * self.params.eps);
        let alpha = self.params.alpha;
        let b2: Vec<f64> = u
            .iter()
            .map(|&v| (physics::wp(v) - alpha * v) * inv_eps2)
            .collect();
        self.grid.forward(&b2)
    }

    /// Decoupled implicit solve for phase `k`.
    pub fn solve_phase(&self, k: usize, b1: &[Complex64], b2: &[Complex64]) -> (Spectrum, Spectrum) {
        let p = &self.params;
        let coupling = p.dt * self.sigma[k] * self.nu[k];
        let shift = p.alpha / (p.eps * p.eps);
        let lap = self.grid.laplacian_symbol();
        let ops = &self.operators[k];
        let n = b1.len();
        let mut u = Vec::with_capacity(n);
        let mut mu = Vec::with_capacity(n);
        for i in 0..n {
            let l = ops[i];
            u.push(l * (b1[i] + b2[i] * (coupling * self.metric[i])));
            mu.push(l * (b1[i] * (shift - lap[i]) + b2[i]));
        }
        (u, mu)
    }

    /// Spectrum of `1 - sum_k u_k`.
    pub fn defect(&self, u: &[Spectrum]) -> Spectrum {
        let mut d = vec![Complex64::new(0.0, 0.0); self.grid.spec_len()];
        d[0] = Complex64::new(self.grid.len() as f64, 0.0);
        for uk in u {
            for (a, b) in d.iter_mut().zip(uk) {
                *a -= b;
            }
        }
        d
    }

    /// Multiplier spectrum solving the partition constraint for `defect`.
    pub fn multiplier(&self, defect: &[Complex64]) -> Result<Spectrum> {
        let Some(inv) = &self.lambda_inverse else {
            return Ok(vec![Complex64::new(0.0, 0.0); self.grid.spec_len()]);
        };
        if self.model == Model::Mch {
            let mean = defect[0].re / self.grid.len() as f64;
            if mean.abs() > DEFECT_MEAN_TOLERANCE {
                return Err(Error::UnbalancedDefect { mean });
            }
        }
        Ok(spectral::multiply(defect, inv))
    }

    /// Applies the multiplier correction to phase `k`.
    pub fn correct_phase(
        &self,
        k: usize,
        u_half: &mut Spectrum,
        mu_half: &mut Spectrum,
        lambda: &[Complex64],
    ) {
        let p = &self.params;
        let shift = p.alpha / (p.eps * p.eps);
        let lap = self.grid.laplacian_symbol();
        let ops = &self.operators[k];
        let scale = p.dt * self.nu[k];
        for i in 0..lambda.len() {
            let du = lambda[i] * (scale * ops[i] * self.metric[i]);
            u_half[i] += du;
            mu_half[i] += du * (shift - lap[i]);
        }
    }

    /// Half step, multiplier and correction, given the explicit `B1` of every
    /// mobile phase.
    pub fn advance(
        &self,
        system: &mut PhaseSystem,
        mut b1: impl FnMut(usize, &mut PhaseSystem) -> Spectrum,
    ) -> Result<()> {
        let half = self.half_step(system, &mut b1);
        let lambda = self.multiplier(&self.defect(&half.u))?;
        self.finish(system, half, lambda);
        Ok(())
    }

    pub fn half_step(
        &self,
        system: &mut PhaseSystem,
        b1: &mut impl FnMut(usize, &mut PhaseSystem) -> Spectrum,
    ) -> HalfStep {
        let l = system.phase_count();
        let mut u = Vec::with_capacity(l);
        let mut mu = Vec::with_capacity(l);
        for k in 0..l {
            if self.nu[k] == 0.0 {
                u.push(system.u[k].spectrum(&self.grid).clone());
                mu.push(system.mu[k].spectrum(&self.grid).clone());
                continue;
            }
            let b1k = b1(k, system);
            let b2k = self.b2(system.u[k].real());
            let (uk, muk) = self.solve_phase(k, &b1k, &b2k);
            u.push(uk);
            mu.push(muk);
        }
        HalfStep { u, mu }
    }

    pub fn finish(&self, system: &mut PhaseSystem, half: HalfStep, lambda: Spectrum) {
        let grid = &self.grid;
        for (k, (mut uk, mut muk)) in half.u.into_iter().zip(half.mu).enumerate() {
            // frozen phases are left bit-for-bit untouched
            if self.nu[k] == 0.0 {
                continue;
            }
            self.correct_phase(k, &mut uk, &mut muk, &lambda);
            system.u[k] = SpectralField::from_spectrum(grid, uk);
            system.mu[k] = SpectralField::from_spectrum(grid, muk);
        }
        if self.lambda_inverse.is_some() {
            system.lambda = SpectralField::from_spectrum(grid, lambda);
        }
        system.step_index += 1;
    }

    /// `sigma_k mu_k + lambda`, with its spectrum.
    pub fn driving_potential(&self, k: usize, system: &mut PhaseSystem) -> SpectralField {
        let grid = &self.grid;
        let sigma = self.sigma[k];
        let real: Vec<f64> = system.mu[k]
            .real()
            .iter()
            .zip(system.lambda.real())
            .map(|(m, l)| sigma * m + l)
            .collect();
        let mu_hat = system.mu[k].spectrum(grid);
        let spec: Spectrum = mu_hat.iter().map(|c| c * sigma).collect();
        let lam = system.lambda.spectrum(grid);
        let spec = spec.iter().zip(lam).map(|(a, b)| a + b).collect();
        SpectralField::from_parts(real, Some(spec))
    }
}
