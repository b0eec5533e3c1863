//! Fields with a cached spectrum, differential operators and the inverse
//! solve operators of both schemes, all applied as pointwise multipliers.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Grid, Spectrum};
use crate::physics::Model;
use crate::scheme::SchemeParams;

/// A real field on a [`Grid`] with a lazily computed spectrum.
///
/// The real values are always valid. The spectrum is computed on first use
/// and dropped whenever the real values are mutated.
#[derive(Clone, Debug, Default)]
pub struct SpectralField {
    real: Vec<f64>,
    spec: Option<Spectrum>,
}

impl SpectralField {
    pub fn new(real: Vec<f64>) -> Self {
        Self { real, spec: None }
    }

    pub fn constant(grid: &Grid, value: f64) -> Self {
        Self::new(vec![value; grid.len()])
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Builds the field from its spectrum and keeps the spectrum cached.
    pub fn from_spectrum(grid: &Grid, spec: Spectrum) -> Self {
        let real = grid.inverse(spec.clone());
        Self {
            real,
            spec: Some(spec),
        }
    }

    /// Reassembles a field from stored parts (checkpoints).
    pub fn from_parts(real: Vec<f64>, spec: Option<Spectrum>) -> Self {
        Self { real, spec }
    }

    pub fn real(&self) -> &[f64] {
        &self.real
    }

    /// Mutable access to the values; invalidates the cached spectrum.
    pub fn real_mut(&mut self) -> &mut [f64] {
        self.spec = None;
        &mut self.real
    }

    pub fn into_real(self) -> Vec<f64> {
        self.real
    }

    pub fn spectrum(&mut self, grid: &Grid) -> &Spectrum {
        self.spec.get_or_insert_with(|| grid.forward(&self.real))
    }

    pub fn cached_spectrum(&self) -> Option<&Spectrum> {
        self.spec.as_ref()
    }

    pub fn is_synchronized(&self) -> bool {
        self.spec.is_some()
    }

    pub fn len(&self) -> usize {
        self.real.len()
    }

    pub fn is_empty(&self) -> bool {
        self.real.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.real.iter().sum::<f64>() / self.real.len() as f64
    }
}

/// Laplacian symbol `-4 pi^2 |xi|^2` per stored mode.
pub fn laplacian_symbol(grid: &Grid) -> Vec<f64> {
    grid.laplacian_symbol().to_vec()
}

/// Multiplies a spectrum by a real symbol.
pub fn multiply(spec: &[Complex64], symbol: &[f64]) -> Spectrum {
    spec.iter().zip(symbol).map(|(c, &s)| c * s).collect()
}

/// Spectrum of the `axis` derivative: multiply by `2 pi i xi_axis`.
pub fn derivative_spectrum(grid: &Grid, spec: &[Complex64], axis: usize) -> Spectrum {
    spec.iter()
        .zip(grid.derivative_symbol(axis))
        .map(|(c, &k)| Complex64::new(-c.im * k, c.re * k))
        .collect()
}

/// Applies a real symbol to a field.
pub fn apply_symbol(grid: &Grid, f: &mut SpectralField, symbol: &[f64]) -> SpectralField {
    let spec = multiply(f.spectrum(grid), symbol);
    SpectralField::from_spectrum(grid, spec)
}

pub fn laplacian(grid: &Grid, f: &mut SpectralField) -> SpectralField {
    apply_symbol(grid, f, grid.laplacian_symbol())
}

/// Spectral gradient, one real field per axis.
pub fn gradient(grid: &Grid, f: &mut SpectralField) -> Vec<SpectralField> {
    let spec = f.spectrum(grid);
    (0..grid.dim())
        .map(|axis| SpectralField::from_spectrum(grid, derivative_spectrum(grid, spec, axis)))
        .collect()
}

/// Spectrum of `div v` from the spectra of the components.
pub fn divergence_spectrum(grid: &Grid, components: &[&[Complex64]]) -> Spectrum {
    let mut out = vec![Complex64::new(0.0, 0.0); grid.spec_len()];
    for (axis, comp) in components.iter().enumerate() {
        for ((o, c), &k) in out.iter_mut().zip(comp.iter()).zip(grid.derivative_symbol(axis)) {
            *o += Complex64::new(-c.im * k, c.re * k);
        }
    }
    out
}

/// Spectral divergence of a vector field given by its components.
pub fn divergence(grid: &Grid, v: &mut [SpectralField]) -> SpectralField {
    assert_eq!(v.len(), grid.dim(), "one component per axis");
    let specs: Vec<Spectrum> = v.iter_mut().map(|c| c.spectrum(grid).clone()).collect();
    let refs: Vec<&[Complex64]> = specs.iter().map(|s| s.as_slice()).collect();
    SpectralField::from_spectrum(grid, divergence_spectrum(grid, &refs))
}

/// Symbol of `L_M = (I + dt m sigma_nu Lap (Lap - alpha/eps^2))^{-1}`.
pub fn lm_symbol(grid: &Grid, dt: f64, m: f64, sigma_nu: f64, alpha: f64, eps: f64) -> Vec<f64> {
    let shift = alpha / (eps * eps);
    grid.laplacian_symbol()
        .iter()
        .map(|&s| 1.0 / (1.0 + dt * m * sigma_nu * s * (s - shift)))
        .collect()
}

/// Symbol of `L_NMN = (I + dt nu_sigma (m Lap - beta)(Lap - alpha/eps^2))^{-1}`.
pub fn lnmn_symbol(
    grid: &Grid,
    dt: f64,
    nu_sigma: f64,
    m: f64,
    beta: f64,
    alpha: f64,
    eps: f64,
) -> Vec<f64> {
    let shift = alpha / (eps * eps);
    grid.laplacian_symbol()
        .iter()
        .map(|&s| 1.0 / (1.0 + dt * nu_sigma * (m * s - beta) * (s - shift)))
        .collect()
}

pub fn apply_lm(
    grid: &Grid,
    f: &mut SpectralField,
    dt: f64,
    m: f64,
    sigma_nu: f64,
    alpha: f64,
    eps: f64,
) -> SpectralField {
    apply_symbol(grid, f, &lm_symbol(grid, dt, m, sigma_nu, alpha, eps))
}

#[allow(clippy::too_many_arguments)]
pub fn apply_lnmn(
    grid: &Grid,
    f: &mut SpectralField,
    dt: f64,
    nu_sigma: f64,
    m: f64,
    beta: f64,
    alpha: f64,
    eps: f64,
) -> SpectralField {
    apply_symbol(grid, f, &lnmn_symbol(grid, dt, nu_sigma, m, beta, alpha, eps))
}

/// Symbol of the implicit metric operator acting on the multiplier:
/// `Lap` for MCH, `m Lap - beta` for NMNCH.
pub fn metric_symbol(grid: &Grid, params: &SchemeParams, model: Model) -> Vec<f64> {
    grid.laplacian_symbol()
        .iter()
        .map(|&s| match model {
            Model::Mch => s,
            Model::Nmnch => params.m * s - params.beta,
        })
        .collect()
}

/// Per-phase implicit operator symbol (`L_{M_k}` or `L_{NMN,k}`).
pub fn phase_operator_symbol(
    grid: &Grid,
    params: &SchemeParams,
    model: Model,
    sigma: f64,
    nu: f64,
) -> Vec<f64> {
    match model {
        Model::Mch => lm_symbol(grid, params.dt, params.m, sigma * nu, params.alpha, params.eps),
        Model::Nmnch => lnmn_symbol(
            grid,
            params.dt,
            nu * sigma,
            params.m,
            params.beta,
            params.alpha,
            params.eps,
        ),
    }
}

/// Reciprocal of `sum_k nu_k L_k A` with `A` the metric symbol of the model,
/// one `(sigma_k, nu_k)` pair per phase.
///
/// For MCH the zero mode of the sum vanishes; its reciprocal is set to 0,
/// which pins `mean(lambda) = 0`.
pub fn lambda_inverse_symbol(
    grid: &Grid,
    params: &SchemeParams,
    phases: &[(f64, f64)],
    model: Model,
) -> Result<Vec<f64>> {
    if phases.iter().all(|&(_, nu)| nu == 0.0) {
        return Err(Error::AllMobilitiesZero);
    }
    let metric = metric_symbol(grid, params, model);
    let mut sum = vec![0.0; grid.spec_len()];
    for &(sigma, nu) in phases {
        if nu == 0.0 {
            continue;
        }
        let l = phase_operator_symbol(grid, params, model, sigma, nu);
        for ((acc, lk), a) in sum.iter_mut().zip(&l).zip(&metric) {
            *acc += nu * lk * a;
        }
    }
    Ok(sum
        .into_iter()
        .map(|v| if v == 0.0 { 0.0 } else { 1.0 / v })
        .collect())
}
