//! Browser bindings: a multiphase coarsening run that can be painted on, and
//! a droplet relaxing on a flat support.

use std::sync::Arc;

use spectral_ch::geometry::Shape;
use spectral_ch::physics;
use spectral_ch::wetting::{self, SolidSupport, SupportKind, WettingConfig, WettingSolver};
use spectral_ch::{initial, Grid, Model, PhaseSystem, SchemeParams, Solver, Stepper};
use wasm_bindgen::prelude::*;

const PHASE_COLOURS: [[f64; 3]; 4] = [
    [230.0, 97.0, 60.0],
    [60.0, 130.0, 200.0],
    [245.0, 245.0, 240.0],
    [90.0, 170.0, 90.0],
];

fn err(e: spectral_ch::Error) -> JsError {
    JsError::new(&e.to_string())
}

fn model_of(name: &str) -> Result<Model, JsError> {
    match name {
        "mch" => Ok(Model::Mch),
        "nmnch" => Ok(Model::Nmnch),
        other => Err(JsError::new(&format!("unknown model {other}"))),
    }
}

/// RGBA image, vertical axis up, mixing the phase colours by their values.
fn rgba(grid: &Grid, phases: &[&[f64]]) -> Vec<u8> {
    let (nx, ny) = (grid.dims()[0], grid.dims()[1]);
    let mut out = Vec::with_capacity(nx * ny * 4);
    for row in 0..ny {
        let y = ny - 1 - row;
        for x in 0..nx {
            let i = x * ny + y;
            let mut c = [0.0; 3];
            for (k, u) in phases.iter().enumerate() {
                let w = u[i].clamp(0.0, 1.0);
                for ch in 0..3 {
                    c[ch] += w * PHASE_COLOURS[k % PHASE_COLOURS.len()][ch];
                }
            }
            out.extend(c.iter().map(|v| v.round().clamp(0.0, 255.0) as u8));
            out.push(255);
        }
    }
    out
}

#[wasm_bindgen]
pub struct CoarseningDemo {
    grid: Arc<Grid>,
    eps: f64,
    solver: Solver,
    system: PhaseSystem,
}

#[wasm_bindgen]
impl CoarseningDemo {
    /// `n` points per side of the unit square, `phases` in 2 to 4, noise
    /// initial data from `seed`.
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, phases: usize, model: &str, seed: u64) -> Result<CoarseningDemo, JsError> {
        if !(2..=4).contains(&phases) {
            return Err(JsError::new("phases must be 2 to 4"));
        }
        let model = model_of(model)?;
        let grid = Arc::new(Grid::uniform(2, n, 1.0).map_err(err)?);
        let eps = 2.0 / n as f64;
        let fields = initial::noise(&grid, phases, seed, 0.2).map_err(err)?;
        let system = PhaseSystem::new(&grid, fields, vec![1.0; phases], vec![1.0; phases], eps).map_err(err)?;
        let params = SchemeParams::for_model(model, eps).with_dt(eps.powi(4) * 4.0);
        let solver = Solver::for_system(model, grid.clone(), params, &system).map_err(err)?;
        Ok(Self {
            grid,
            eps,
            solver,
            system,
        })
    }

    pub fn step(&mut self, count: usize) -> Result<(), JsError> {
        for _ in 0..count {
            self.solver.step(&mut self.system).map_err(err)?;
        }
        if !self.system.is_finite() {
            return Err(JsError::new("the run diverged"));
        }
        Ok(())
    }

    /// Drops a disc of phase `phase` (from 0) centred at `(x, y)` in
    /// `[0, 1]^2`, scaling the other phases so the partition still holds.
    pub fn add_disc(&mut self, phase: usize, x: f64, y: f64, radius: f64) -> Result<(), JsError> {
        let l = self.system.phase_count();
        if phase >= l {
            return Err(JsError::new("no such phase"));
        }
        let disc = Shape::ball(&[x, y], radius).sample(&self.grid);
        let mut fields: Vec<Vec<f64>> = self.system.u.iter().map(|u| u.real().to_vec()).collect();
        for i in 0..self.grid.len() {
            let q = physics::optimal_profile(disc[i] / self.eps);
            let old = fields[phase][i];
            let new = old.max(q);
            let rest = 1.0 - old;
            for (k, f) in fields.iter_mut().enumerate() {
                f[i] = if k == phase {
                    new
                } else if rest.abs() > 1e-12 {
                    f[i] * (1.0 - new) / rest
                } else {
                    (1.0 - new) / (l - 1) as f64
                };
            }
        }
        let step = self.system.step_index;
        self.system = PhaseSystem::new(&self.grid, fields, self.system.sigma.clone(), self.system.nu.clone(), self.eps)
            .map_err(err)?;
        self.system.step_index = step;
        Ok(())
    }

    pub fn steps_taken(&self) -> u64 {
        self.system.step_index
    }

    pub fn size(&self) -> usize {
        self.grid.dims()[0]
    }

    pub fn energy(&mut self) -> f64 {
        spectral_ch::diagnostics::cahn_hilliard_energy(&self.grid, &mut self.system, self.eps)
    }

    pub fn masses(&self) -> Vec<f64> {
        self.system.masses()
    }

    pub fn rgba(&self) -> Vec<u8> {
        let phases: Vec<&[f64]> = self.system.u.iter().map(|u| u.real()).collect();
        rgba(&self.grid, &phases)
    }
}

#[wasm_bindgen]
pub struct WettingDemo {
    grid: Arc<Grid>,
    eps: f64,
    support: Arc<SolidSupport>,
    solver: WettingSolver,
    system: PhaseSystem,
    young: f64,
}

#[wasm_bindgen]
impl WettingDemo {
    /// Half-disc droplet on a flat support with `sigma_LV = sigma_SV = 1`.
    #[wasm_bindgen(constructor)]
    pub fn new(n: usize, sigma_ls: f64) -> Result<WettingDemo, JsError> {
        let grid = Arc::new(Grid::uniform(2, n, 1.0).map_err(err)?);
        let eps = 1.0 / n as f64;
        let support = Arc::new(SolidSupport::build(SupportKind::Flat { height: 0.25 }, &grid, eps).map_err(err)?);
        let mut config = WettingConfig::new(1.0, 1.0, sigma_ls, Model::Mch);
        config.stabilized = false;
        let young = config.young_angle().map_err(err)?;
        let params = SchemeParams::mch(eps).with_dt(4e-6 * (128.0 / n as f64).powi(4));
        let solver = WettingSolver::new(grid.clone(), params, config, support.clone()).map_err(err)?;
        let u_l = wetting::droplet_on_support(&grid, &support, &Shape::ball(&[0.5, 0.25], 0.2), eps);
        let system = solver.initial_system(u_l).map_err(err)?;
        Ok(Self {
            grid,
            eps,
            support,
            solver,
            system,
            young,
        })
    }

    pub fn step(&mut self, count: usize) -> Result<(), JsError> {
        for _ in 0..count {
            self.solver.step(&mut self.system).map_err(err)?;
        }
        Ok(())
    }

    pub fn steps_taken(&self) -> u64 {
        self.system.step_index
    }

    pub fn size(&self) -> usize {
        self.grid.dims()[0]
    }

    /// Measured contact angle in degrees, NaN without a contact line.
    pub fn angle_degrees(&self) -> f64 {
        wetting::measure_contact_angle(&self.grid, self.system.u[0].real(), &self.support, self.eps)
            .map(f64::to_degrees)
            .unwrap_or(f64::NAN)
    }

    pub fn young_degrees(&self) -> f64 {
        self.young.to_degrees()
    }

    pub fn rgba(&self) -> Vec<u8> {
        let u_l = self.system.u[0].real();
        let u_v: Vec<f64> = u_l.iter().zip(&self.support.u_s).map(|(l, s)| 1.0 - l - s).collect();
        rgba(&self.grid, &[&self.support.u_s, u_l, &u_v])
    }
}
