//! Two-phase reference schemes acting on a single order parameter.
//!
//! These follow the one-phase recurrences directly (no phase loop, no
//! multiplier) and are used to cross-check the multiphase solvers.

use crate::grid::Grid;
use crate::physics::{self, Model};
use crate::scheme::{chemical_potential, SchemeParams};
use crate::spectral::{self, SpectralField};

#[derive(Clone, Debug)]
pub struct BiphasicState {
    pub u: Vec<f64>,
    pub mu: Vec<f64>,
}

impl BiphasicState {
    pub fn new(grid: &Grid, u: Vec<f64>, eps: f64) -> Self {
        let mut f = SpectralField::new(u);
        let mu = chemical_potential(grid, &mut f, eps).into_real();
        Self { u: f.into_real(), mu }
    }
}

/// One step of the biphasic scheme
/// `(u' - u)/dt = A mu' + [explicit transport of mu] - A mu`,
/// `mu' = (W'(u) - alpha u)/eps^2 + alpha u'/eps^2 - Lap u'`,
/// with `A = m Lap` (MCH) or `A = m Lap - beta` (NMNCH).
pub fn biphasic_step(grid: &Grid, params: &SchemeParams, model: Model, state: &BiphasicState) -> BiphasicState {
    let p = params;
    let mobility = p.mobility(model);
    let inv_eps2 = 1.0 / (p.eps * p.eps);
    let mut mu = SpectralField::new(state.mu.clone());

    // explicit transport minus the implicit part evaluated at mu^n
    let transport = match model {
        Model::Mch => {
            let mut flux = spectral::gradient(grid, &mut mu);
            for c in flux.iter_mut() {
                let scaled: Vec<f64> = c
                    .real()
                    .iter()
                    .zip(&state.u)
                    .map(|(g, &u)| (mobility.mobility(u) - p.m) * g)
                    .collect();
                *c = SpectralField::new(scaled);
            }
            spectral::divergence(grid, &mut flux).into_real()
        }
        Model::Nmnch => {
            // sqrt(M) Lap p + 2 grad sqrt(M) . grad p - (m Lap - beta) mu, p = N mu
            let mut root = SpectralField::new(state.u.iter().map(|&u| mobility.sqrt_mobility(u)).collect());
            let mut pf = SpectralField::new(
                state.u.iter().zip(&state.mu).map(|(&u, m)| mobility.metric(u) * m).collect(),
            );
            let lap_p = spectral::laplacian(grid, &mut pf);
            let grad_p = spectral::gradient(grid, &mut pf);
            let grad_root = spectral::gradient(grid, &mut root);
            let lap_mu = spectral::laplacian(grid, &mut mu);
            (0..grid.len())
                .map(|i| {
                    let cross: f64 = grad_p.iter().zip(&grad_root).map(|(a, b)| a.real()[i] * b.real()[i]).sum();
                    root.real()[i] * lap_p.real()[i] + 2.0 * cross - (p.m * lap_mu.real()[i] - p.beta * state.mu[i])
                })
                .collect()
        }
    };

    let b1: Vec<f64> = state.u.iter().zip(&transport).map(|(u, t)| u + p.dt * t).collect();
    let b2: Vec<f64> = state
        .u
        .iter()
        .map(|&u| (physics::wp(u) - p.alpha * u) * inv_eps2)
        .collect();

    let lap = grid.laplacian_symbol();
    let a: Vec<f64> = lap
        .iter()
        .map(|&s| match model {
            Model::Mch => p.m * s,
            Model::Nmnch => p.m * s - p.beta,
        })
        .collect();
    let b1_hat = grid.forward(&b1);
    let b2_hat = grid.forward(&b2);
    let u_hat: Vec<_> = (0..lap.len())
        .map(|i| {
            let denom = 1.0 + p.dt * a[i] * (lap[i] - p.alpha * inv_eps2);
            (b1_hat[i] + b2_hat[i] * (p.dt * a[i])) / denom
        })
        .collect();
    // mu' = B2 + (alpha/eps^2 - Lap) u'
    let mu_hat: Vec<_> = (0..lap.len())
        .map(|i| b2_hat[i] + u_hat[i] * (p.alpha * inv_eps2 - lap[i]))
        .collect();
    BiphasicState {
        u: grid.inverse(u_hat),
        mu: grid.inverse(mu_hat),
    }
}
