use std::sync::Arc;

use crate::error::Result;
use crate::grid::Grid;
use crate::mch::MchSolver;
use crate::nmnch::NmnchSolver;
use crate::physics::Model;
use crate::scheme::{PhaseSystem, SchemeParams, Stepper};

/// Either multiphase scheme, selected at run time.
#[derive(Debug)]
pub enum Solver {
    Mch(MchSolver),
    Nmnch(NmnchSolver),
}

impl Solver {
    pub fn new(model: Model, grid: Arc<Grid>, params: SchemeParams, sigma: &[f64], nu: &[f64]) -> Result<Self> {
        Ok(match model {
            Model::Mch => Self::Mch(MchSolver::new(grid, params, sigma, nu)?),
            Model::Nmnch => Self::Nmnch(NmnchSolver::new(grid, params, sigma, nu)?),
        })
    }

    pub fn for_system(model: Model, grid: Arc<Grid>, params: SchemeParams, system: &PhaseSystem) -> Result<Self> {
        Self::new(model, grid, params, &system.sigma, &system.nu)
    }
}

impl Stepper for Solver {
    fn step(&self, system: &mut PhaseSystem) -> Result<()> {
        match self {
            Self::Mch(s) => s.step(system),
            Self::Nmnch(s) => s.step(system),
        }
    }

    fn params(&self) -> &SchemeParams {
        match self {
            Self::Mch(s) => s.params(),
            Self::Nmnch(s) => s.params(),
        }
    }

    fn model(&self) -> Model {
        match self {
            Self::Mch(_) => Model::Mch,
            Self::Nmnch(_) => Model::Nmnch,
        }
    }
}
