//! Scheme parameters and the multiphase state shared by both solvers.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::physics::{self, MobilitySpec, Model};
use crate::spectral::SpectralField;

/// Numerical parameters of the semi-implicit schemes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SchemeParams {
    /// Interface width.
    pub eps: f64,
    /// Time step.
    pub dt: f64,
    /// Energy-splitting stabilizer.
    pub alpha: f64,
    /// Metric-splitting stabilizer (coefficient of the implicit Laplacian).
    pub m: f64,
    /// NMNCH zeroth-order metric stabilizer.
    pub beta: f64,
    /// NMNCH mobility smoothing, `M = 2W + gamma eps^2`.
    pub gamma: f64,
}

impl SchemeParams {
    /// MCH defaults: `dt = eps^4`, `alpha = 2`, `m = max M` of the normalized
    /// mobility (2.25).
    pub fn mch(eps: f64) -> Self {
        let m = MobilitySpec::new(Model::Mch, 1.0, eps).max_on_unit_interval();
        Self {
            eps,
            dt: eps.powi(4),
            alpha: 2.0,
            m,
            beta: 2.0 / (eps * eps),
            gamma: 1.0,
        }
    }

    /// NMNCH defaults: `dt = eps^4`, `alpha = 2`, `m = 1`, `beta = 2/eps^2`,
    /// `gamma = 1`.
    pub fn nmnch(eps: f64) -> Self {
        Self {
            eps,
            dt: eps.powi(4),
            alpha: 2.0,
            m: 1.0,
            beta: 2.0 / (eps * eps),
            gamma: 1.0,
        }
    }

    pub fn for_model(model: Model, eps: f64) -> Self {
        match model {
            Model::Mch => Self::mch(eps),
            Model::Nmnch => Self::nmnch(eps),
        }
    }

    pub fn with_dt(mut self, dt: f64) -> Self {
        self.dt = dt;
        self
    }

    pub fn mobility(&self, model: Model) -> MobilitySpec {
        MobilitySpec::new(model, self.gamma, self.eps)
    }

    pub fn validate(&self, model: Model) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(Error::InvalidParams(format!("{name} = {v} must be positive")))
            }
        };
        positive("eps", self.eps)?;
        positive("dt", self.dt)?;
        positive("m", self.m)?;
        if !(self.alpha.is_finite() && self.alpha >= 0.0) {
            return Err(Error::InvalidParams(format!("alpha = {} must be >= 0", self.alpha)));
        }
        if model == Model::Nmnch {
            positive("beta", self.beta)?;
            positive("gamma", self.gamma)?;
        }
        Ok(())
    }

    /// Conditions under which the splitting is expected to decrease the
    /// energy: `alpha >= max |W''|` and, for MCH, `m >= max M` on `[0,1]`.
    pub fn stability_warnings(&self, model: Model) -> Vec<String> {
        let mut out = Vec::new();
        // max |W''| on [0,1] is 1, attained at the pure phases
        if self.alpha < 1.0 {
            out.push(format!("alpha = {} < max|W''| = 1", self.alpha));
        }
        if model == Model::Mch {
            let max_m = self.mobility(model).max_on_unit_interval();
            if self.m < max_m {
                out.push(format!("m = {} < max M = {max_m}", self.m));
            }
        }
        out
    }
}

/// `mu = W'(u)/eps^2 - Lap u`.
pub fn chemical_potential(grid: &Grid, u: &mut SpectralField, eps: f64) -> SpectralField {
    let inv_eps2 = 1.0 / (eps * eps);
    let lap = crate::spectral::laplacian(grid, u);
    let mu = u
        .real()
        .iter()
        .zip(lap.real())
        .map(|(&v, &l)| physics::wp(v) * inv_eps2 - l)
        .collect();
    SpectralField::new(mu)
}

/// L phase fields, their chemical potentials and the partition multiplier.
#[derive(Clone, Debug)]
pub struct PhaseSystem {
    pub u: Vec<SpectralField>,
    pub mu: Vec<SpectralField>,
    pub lambda: SpectralField,
    pub sigma: Vec<f64>,
    pub nu: Vec<f64>,
    pub step_index: u64,
    /// Set once a mobility argument left `[-0.5, 1.5]` and was clamped.
    pub mobility_clamped: bool,
}

impl PhaseSystem {
    /// Builds a system with consistent `mu^0` and `lambda^0 = 0`.
    pub fn new(
        grid: &Grid,
        phases: Vec<Vec<f64>>,
        sigma: Vec<f64>,
        nu: Vec<f64>,
        eps: f64,
    ) -> Result<Self> {
        let l = phases.len();
        if l == 0 {
            return Err(Error::Validation("at least one phase is required".into()));
        }
        if sigma.len() != l || nu.len() != l {
            return Err(Error::Validation(format!(
                "{l} phases but {} tensions and {} mobilities",
                sigma.len(),
                nu.len()
            )));
        }
        if nu.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Validation(format!("mobilities must be >= 0: {nu:?}")));
        }
        if sigma.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Validation(format!("tensions must be >= 0: {sigma:?}")));
        }
        if phases.iter().any(|p| p.len() != grid.len()) {
            return Err(Error::Validation("phase field size does not match grid".into()));
        }
        let mut u: Vec<SpectralField> = phases.into_iter().map(SpectralField::new).collect();
        let mu = u
            .iter_mut()
            .map(|uk| chemical_potential(grid, uk, eps))
            .collect();
        Ok(Self {
            u,
            mu,
            lambda: SpectralField::zeros(grid),
            sigma,
            nu,
            step_index: 0,
            mobility_clamped: false,
        })
    }

    pub fn phase_count(&self) -> usize {
        self.u.len()
    }

    /// `max_x |sum_k u_k - 1|`.
    pub fn partition_residual(&self) -> f64 {
        let n = self.u[0].len();
        (0..n)
            .map(|i| (self.u.iter().map(|uk| uk.real()[i]).sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Per-phase means.
    pub fn masses(&self) -> Vec<f64> {
        self.u.iter().map(|uk| uk.mean()).collect()
    }

    pub fn is_finite(&self) -> bool {
        self.u
            .iter()
            .chain(&self.mu)
            .all(|f| f.real().iter().all(|v| v.is_finite()))
    }

    pub fn max_abs_u(&self) -> f64 {
        self.u
            .iter()
            .flat_map(|f| f.real().iter())
            .fold(0.0, |m, v| m.max(v.abs()))
    }
}

/// One time step of a multiphase scheme.
pub trait Stepper {
    fn step(&self, system: &mut PhaseSystem) -> Result<()>;

    fn params(&self) -> &SchemeParams;

    fn model(&self) -> Model;
}
