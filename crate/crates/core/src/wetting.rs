//! Liquid droplets on a frozen solid support.
//!
//! The vertical direction is the last grid axis. The solid occupies the
//! periodic band between `bottom` and the surface height `h(x)`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::contour;
use crate::error::{Error, Result};
use crate::geometry::Shape;
use crate::grid::{Grid, Spectrum};
use crate::mch::mch_transport;
use crate::nmnch::nmn_transport_spectrum;
use crate::physics::{self, optimal_profile, MobilitySpec, Model};
use crate::scheme::{PhaseSystem, SchemeParams, Stepper};
use crate::spectral::{self, SpectralField};
use crate::solver::Solver;
use crate::splitting::Splitting;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SupportKind {
    Flat {
        height: f64,
    },
    /// `h(x) = height + amplitude sin(2 pi x_1 / wavelength)`.
    Oscillatory {
        height: f64,
        amplitude: f64,
        wavelength: f64,
    },
    /// Gaussian-smoothed uniform noise rescaled to `max |h - height| = amplitude`.
    Rough {
        height: f64,
        amplitude: f64,
        correlation: f64,
        seed: u64,
    },
}

impl SupportKind {
    pub fn mean_height(&self) -> f64 {
        match self {
            Self::Flat { height }
            | Self::Oscillatory { height, .. }
            | Self::Rough { height, .. } => *height,
        }
    }

    fn amplitude(&self) -> f64 {
        match self {
            Self::Flat { .. } => 0.0,
            Self::Oscillatory { amplitude, .. } | Self::Rough { amplitude, .. } => amplitude.abs(),
        }
    }
}

/// Frozen solid phase `u_S = q(dist / eps)`.
#[derive(Clone, Debug)]
pub struct SolidSupport {
    pub kind: SupportKind,
    pub bottom: f64,
    /// Surface height per column (horizontal nodes in row-major order).
    pub heights: Vec<f64>,
    pub dist: Vec<f64>,
    pub u_s: Vec<f64>,
    pub eps: f64,
}

fn horizontal_grid(grid: &Grid) -> Result<Grid> {
    let d = grid.dim();
    Grid::new(&grid.dims()[..d - 1], &grid.lengths()[..d - 1])
}

fn rough_heights(grid: &Grid, height: f64, amplitude: f64, correlation: f64, seed: u64) -> Result<Vec<f64>> {
    let hg = horizontal_grid(grid)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..hg.len()).map(|_| rng.gen_range(-1.0..1.0)).collect();
    let mut spec = hg.forward(&noise);
    let lap = hg.laplacian_symbol();
    // exp(-|2 pi xi|^2 l^2 / 2) with |2 pi xi|^2 = -lap
    for (c, s) in spec.iter_mut().zip(lap) {
        *c *= (0.5 * s * correlation * correlation).exp();
    }
    spec[0] = Complex64::new(0.0, 0.0);
    let smooth = hg.inverse(spec);
    let peak = smooth.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return Ok(vec![height; hg.len()]);
    }
    Ok(smooth.iter().map(|v| height + amplitude * v / peak).collect())
}

impl SolidSupport {
    pub fn build(kind: SupportKind, grid: &Grid, eps: f64) -> Result<Self> {
        Self::build_with_bottom(kind, grid, eps, 0.0)
    }

    pub fn build_with_bottom(kind: SupportKind, grid: &Grid, eps: f64, bottom: f64) -> Result<Self> {
        let d = grid.dim();
        if d < 2 {
            return Err(Error::Validation("a support needs at least two dimensions".into()));
        }
        let vertical = grid.lengths()[d - 1];
        let amplitude = kind.amplitude();
        if amplitude >= vertical / 4.0 {
            return Err(Error::GeometryTooLarge(format!(
                "amplitude {amplitude} must stay below a quarter of the box height {vertical}"
            )));
        }
        let n_last = grid.dims()[d - 1];
        let columns = grid.len() / n_last;
        let heights = match &kind {
            SupportKind::Flat { height } => vec![*height; columns],
            SupportKind::Oscillatory {
                height,
                amplitude,
                wavelength,
            } => (0..columns)
                .map(|c| {
                    let x = grid.point(c * n_last)[0];
                    height + amplitude * (2.0 * PI * x / wavelength).sin()
                })
                .collect(),
            SupportKind::Rough {
                height,
                amplitude,
                correlation,
                seed,
            } => rough_heights(grid, *height, *amplitude, *correlation, *seed)?,
        };
        let h_min = heights.iter().copied().fold(f64::INFINITY, f64::min);
        let h_max = heights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        if h_min - bottom < 4.0 * eps {
            return Err(Error::GeometryTooLarge(format!(
                "solid thinner than 4 eps (surface {h_min}, bottom {bottom})"
            )));
        }
        let room = vertical - (h_max - bottom);
        if room < 16.0 * eps {
            return Err(Error::GeometryTooLarge(format!(
                "only {room} of vertical room left above the support, need 16 eps"
            )));
        }
        let centre = 0.5 * (bottom + kind.mean_height());
        let dist: Vec<f64> = (0..grid.len())
            .map(|i| {
                let y = grid.point(i)[d - 1];
                let y = centre + grid.wrap(d - 1, y - centre);
                let h = heights[i / n_last];
                (y - h).max(bottom - y)
            })
            .collect();
        let u_s = dist.iter().map(|&r| optimal_profile(r / eps)).collect();
        Ok(Self {
            kind,
            bottom,
            heights,
            dist,
            u_s,
            eps,
        })
    }

    /// Surface height at horizontal coordinate `x` (2D grids), linearly
    /// interpolated and periodic.
    pub fn height_at(&self, grid: &Grid, x: f64) -> f64 {
        let n = self.heights.len();
        let h = grid.spacing(0);
        let s = (x / h).rem_euclid(n as f64);
        let i = s.floor() as usize % n;
        let t = s - s.floor();
        self.heights[i] * (1.0 - t) + self.heights[(i + 1) % n] * t
    }

    /// Order-independent checksum of `u_S`, to detect accidental mutation.
    pub fn checksum(&self) -> u64 {
        self.u_s
            .iter()
            .fold(0xcbf2_9ce4_8422_2325u64, |h, v| (h ^ v.to_bits()).wrapping_mul(0x100_0000_01b3))
    }
}

/// `R = -[Lap u_S + (W'(u_L) + W'(1 - u_L - u_S)) / eps^2]` given `Lap u_S`.
fn penalization_with_laplacian(u_l: &[f64], u_s: &[f64], lap_us: &[f64], eps: f64) -> Vec<f64> {
    let inv_eps2 = 1.0 / (eps * eps);
    u_l.iter()
        .zip(u_s)
        .zip(lap_us)
        .map(|((&l, &s), &lap)| -(lap + (physics::wp(l) + physics::wp(1.0 - l - s)) * inv_eps2))
        .collect()
}

/// Penalization `R_{u_S}(u_L)`; `Lap u_S` is spectral.
pub fn penalization_r(grid: &Grid, u_l: &[f64], u_s: &[f64], eps: f64) -> Vec<f64> {
    let lap = spectral::laplacian(grid, &mut SpectralField::new(u_s.to_vec()));
    penalization_with_laplacian(u_l, u_s, lap.real(), eps)
}

/// Damping factor `sqrt(2W(u)) / sqrt(2W(u) + eps)`.
#[inline]
pub fn stabilization_factor(u: f64, eps: f64) -> f64 {
    let two_w = 2.0 * physics::w(u);
    two_w.sqrt() / (two_w + eps).sqrt()
}

/// Penalization localized at the liquid boundary.
pub fn penalization_r_tilde(grid: &Grid, u_l: &[f64], u_s: &[f64], eps: f64) -> Vec<f64> {
    let mut r = penalization_r(grid, u_l, u_s, eps);
    for (v, &l) in r.iter_mut().zip(u_l) {
        *v *= stabilization_factor(l, eps);
    }
    r
}

fn default_penalty_scale() -> f64 {
    0.5
}

fn default_true() -> bool {
    true
}

fn default_nu() -> f64 {
    1.0
}

/// Tensions and options of a single-phase wetting run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WettingConfig {
    pub sigma_lv: f64,
    pub sigma_sv: f64,
    pub sigma_ls: f64,
    pub model: Model,
    /// Use the boundary-localized penalization.
    #[serde(default = "default_true")]
    pub stabilized: bool,
    /// Multiplier of `sigma_V R` in the driving potential; 1/2 makes the
    /// evolution the gradient flow of the three-phase energy with the solid
    /// frozen.
    #[serde(default = "default_penalty_scale")]
    pub penalty_scale: f64,
    #[serde(default = "default_nu")]
    pub nu: f64,
}

impl WettingConfig {
    pub fn new(sigma_lv: f64, sigma_sv: f64, sigma_ls: f64, model: Model) -> Self {
        Self {
            sigma_lv,
            sigma_sv,
            sigma_ls,
            model,
            stabilized: true,
            penalty_scale: default_penalty_scale(),
            nu: default_nu(),
        }
    }

    /// Per-phase `(sigma_L, sigma_S, sigma_V)`.
    pub fn per_phase(&self) -> Result<(f64, f64, f64)> {
        physics::decompose_tensions(self.sigma_lv, self.sigma_sv, self.sigma_ls)
    }

    pub fn young_angle(&self) -> Result<f64> {
        physics::young_angle(self.sigma_sv, self.sigma_ls, self.sigma_lv)
    }

    /// `(sigma_12, sigma_13, sigma_23)` for phases ordered (solid, liquid, vapor).
    pub fn pairwise_slv(&self) -> [f64; 3] {
        [self.sigma_ls, self.sigma_sv, self.sigma_lv]
    }
}

/// Liquid phase `q(d_drop / eps) (1 - u_S)`: the droplet masked by the solid.
/// The product keeps the field smooth at the contact points, where clipping
/// the distance would leave a kink with an `O(1/eps^2)` chemical potential.
pub fn droplet_on_support(grid: &Grid, support: &SolidSupport, droplet: &Shape, eps: f64) -> Vec<f64> {
    droplet
        .sample(grid)
        .iter()
        .zip(&support.u_s)
        .map(|(&d, &s)| optimal_profile(d / eps) * (1.0 - s))
        .collect()
}

/// Single-phase evolution of the liquid with the solid entering through
/// the explicit penalization. State is a one-phase [`PhaseSystem`].
#[derive(Debug)]
pub struct WettingSolver {
    core: Splitting,
    mobility: MobilitySpec,
    support: Arc<SolidSupport>,
    lap_us: Vec<f64>,
    config: WettingConfig,
    /// Coefficient of the penalization in the driving potential.
    r_coeff: f64,
}

impl WettingSolver {
    pub fn new(
        grid: Arc<Grid>,
        params: SchemeParams,
        config: WettingConfig,
        support: Arc<SolidSupport>,
    ) -> Result<Self> {
        let (_, _, sigma_v) = config.per_phase()?;
        let sigma = 0.5 * config.sigma_lv;
        let core = Splitting::new(grid.clone(), params, config.model, &[sigma], &[config.nu], false)?;
        let lap_us = spectral::laplacian(&grid, &mut SpectralField::new(support.u_s.clone())).into_real();
        Ok(Self {
            mobility: params.mobility(config.model),
            r_coeff: config.penalty_scale * sigma_v,
            core,
            support,
            lap_us,
            config,
        })
    }

    /// Coefficient of `mu_L` in the driving potential, `sigma_LV / 2`.
    pub fn sigma(&self) -> f64 {
        self.core.sigma[0]
    }

    pub fn support(&self) -> &Arc<SolidSupport> {
        &self.support
    }

    pub fn config(&self) -> &WettingConfig {
        &self.config
    }

    pub fn initial_system(&self, u_l: Vec<f64>) -> Result<PhaseSystem> {
        PhaseSystem::new(
            &self.core.grid,
            vec![u_l],
            vec![self.sigma()],
            vec![self.config.nu],
            self.core.params.eps,
        )
    }

    /// The penalization field as used by the step (`R` or `R~`).
    pub fn penalization(&self, u_l: &[f64]) -> Vec<f64> {
        let eps = self.core.params.eps;
        let mut r = penalization_with_laplacian(u_l, &self.support.u_s, &self.lap_us, eps);
        if self.config.stabilized {
            for (v, &l) in r.iter_mut().zip(u_l) {
                *v *= stabilization_factor(l, eps);
            }
        }
        r
    }

    fn b1(&self, system: &mut PhaseSystem) -> Spectrum {
        let grid = &self.core.grid;
        let p = &self.core.params;
        let sigma = self.sigma();
        let nu = self.config.nu;
        let rho = self.penalization(system.u[0].real());
        let w_real: Vec<f64> = system.mu[0]
            .real()
            .iter()
            .zip(&rho)
            .map(|(m, r)| sigma * m + self.r_coeff * r)
            .collect();
        let mu_hat = system.mu[0].spectrum(grid).clone();
        let mut w = SpectralField::new(w_real);
        let u = system.u[0].real().to_vec();
        // full transport of the driving potential
        let (transport, clamped) = match self.config.model {
            Model::Nmnch => nmn_transport_spectrum(grid, &self.mobility, &u, w.real()),
            Model::Mch => {
                let (mut t, clamped) = mch_transport(grid, &self.mobility, p.m, &u, &mut w);
                let w_hat = w.spectrum(grid);
                for ((t, w), s) in t.iter_mut().zip(w_hat).zip(grid.laplacian_symbol()) {
                    *t += w * (p.m * s);
                }
                (t, clamped)
            }
        };
        system.mobility_clamped |= clamped;
        let u_hat = system.u[0].spectrum(grid);
        (0..u_hat.len())
            .map(|i| {
                let implicit_part = mu_hat[i] * (sigma * self.core.metric[i]);
                u_hat[i] + (transport[i] - implicit_part) * (p.dt * nu)
            })
            .collect()
    }
}

impl Stepper for WettingSolver {
    fn step(&self, system: &mut PhaseSystem) -> Result<()> {
        self.core.check_system(system)?;
        self.core.advance(system, |_, s| self.b1(s))
    }

    fn params(&self) -> &SchemeParams {
        &self.core.params
    }

    fn model(&self) -> Model {
        self.config.model
    }
}

/// Three-phase (solid, liquid, vapor) system for the same configuration.
pub fn three_phase_system(
    grid: &Grid,
    support: &SolidSupport,
    u_l: Vec<f64>,
    config: &WettingConfig,
    eps: f64,
) -> Result<PhaseSystem> {
    let sigma = physics::per_phase_tensions3(config.pairwise_slv())?.to_vec();
    let u_v: Vec<f64> = u_l
        .iter()
        .zip(&support.u_s)
        .map(|(l, s)| 1.0 - l - s)
        .collect();
    PhaseSystem::new(
        grid,
        vec![support.u_s.clone(), u_l, u_v],
        sigma,
        vec![0.0, config.nu, config.nu],
        eps,
    )
}

/// Multiphase solver of `model` for a (solid, liquid, vapor) system with a
/// frozen solid. NMNCH works too; MCH conserves the liquid mass
/// exactly and is what the equilibrium checks use.
pub fn three_phase_solver(
    model: Model,
    grid: Arc<Grid>,
    params: SchemeParams,
    system: &PhaseSystem,
) -> Result<Solver> {
    if system.phase_count() != 3 || system.nu[0] != 0.0 {
        return Err(Error::Validation(
            "three-phase wetting needs phases (solid, liquid, vapor) with a frozen solid".into(),
        ));
    }
    Solver::for_system(model, grid, params, system)
}

/// Algebraic circle fit followed by geometric refinement.
/// Returns `(cx, cy, r)`.
pub fn fit_circle(points: &[[f64; 2]]) -> Option<(f64, f64, f64)> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let my = points.iter().map(|p| p[1]).sum::<f64>() / n;
    // Kasa: minimize sum (x^2 + y^2 + D x + E y + F)^2 in centred coordinates
    let (mut sxx, mut sxy, mut syy, mut sxz, mut syz) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for p in points {
        let (x, y) = (p[0] - mx, p[1] - my);
        let z = x * x + y * y;
        sxx += x * x;
        sxy += x * y;
        syy += y * y;
        sxz += x * z;
        syz += y * z;
    }
    let det = sxx * syy - sxy * sxy;
    if det.abs() < 1e-300 {
        return None;
    }
    let a = 0.5 * (sxz * syy - syz * sxy) / det;
    let b = 0.5 * (syz * sxx - sxz * sxy) / det;
    let (mut cx, mut cy) = (a + mx, b + my);
    let mut r = points
        .iter()
        .map(|p| ((p[0] - cx).powi(2) + (p[1] - cy).powi(2)).sqrt())
        .sum::<f64>()
        / n;
    // Gauss-Newton on the geometric residuals |p - c| - r
    for _ in 0..50 {
        let mut jtj = [[0.0; 3]; 3];
        let mut jtr = [0.0; 3];
        for p in points {
            let (dx, dy) = (p[0] - cx, p[1] - cy);
            let d = (dx * dx + dy * dy).sqrt().max(1e-300);
            let res = d - r;
            let jac = [-dx / d, -dy / d, -1.0];
            for i in 0..3 {
                jtr[i] += jac[i] * res;
                for j in 0..3 {
                    jtj[i][j] += jac[i] * jac[j];
                }
            }
        }
        let step = solve3(jtj, jtr)?;
        cx -= step[0];
        cy -= step[1];
        r -= step[2];
        if step.iter().map(|s| s.abs()).fold(0.0, f64::max) < 1e-14 * r.abs().max(1.0) {
            break;
        }
    }
    (r.is_finite() && r > 0.0).then_some((cx, cy, r))
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3]) -> Option<[f64; 3]> {
    let det = |m: [[f64; 3]; 3]| {
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    };
    let d = det(a);
    if d.abs() < 1e-300 {
        return None;
    }
    let mut out = [0.0; 3];
    for (k, o) in out.iter_mut().enumerate() {
        let mut m = a;
        for i in 0..3 {
            m[i][k] = b[i];
        }
        *o = det(m) / d;
    }
    Some(out)
}

/// Contact angle of a 2D droplet, in radians, measured inside the liquid.
///
/// The `u_L = 1/2` contour away from the support (at least `3 eps` above
/// the surface) is fitted by a circle; the angle is taken between the
/// circle and the support surface at their intersections and averaged over
/// both contact points.
pub fn measure_contact_angle(grid: &Grid, u_l: &[f64], support: &SolidSupport, eps: f64) -> Result<f64> {
    if grid.dim() != 2 {
        return Err(Error::Validation("contact angles are measured on 2D grids".into()));
    }
    let lx = grid.lengths()[0];
    let points = contour::iso_points(grid, u_l, 0.5);
    let height = |p: &[f64; 2]| {
        let h = support.height_at(grid, p[0]);
        grid.wrap(1, p[1] - h)
    };
    // the contour has to reach down to the surface somewhere
    let lowest = points.iter().map(height).filter(|h| *h > -eps).fold(f64::INFINITY, f64::min);
    if !(lowest < 3.0 * eps) {
        return Err(Error::NoContactLine);
    }
    let cap: Vec<[f64; 2]> = points.iter().filter(|p| height(p) >= 3.0 * eps).copied().collect();
    if cap.len() < 8 {
        return Err(Error::NoContactLine);
    }
    // unwrap x around the circular mean of the cap
    let (s, c) = cap.iter().fold((0.0, 0.0), |(s, c), p| {
        let a = 2.0 * PI * p[0] / lx;
        (s + a.sin(), c + a.cos())
    });
    let x_ref = s.atan2(c) * lx / (2.0 * PI);
    let cap: Vec<[f64; 2]> = cap
        .iter()
        .map(|p| {
            let h = support.height_at(grid, p[0]);
            [x_ref + grid.wrap(0, p[0] - x_ref), h + height(p)]
        })
        .collect();
    let span = cap.iter().map(|p| p[0]).fold(f64::NEG_INFINITY, f64::max)
        - cap.iter().map(|p| p[0]).fold(f64::INFINITY, f64::min);
    if span > 0.9 * lx {
        return Err(Error::NoContactLine);
    }
    let (cx, cy, r) = fit_circle(&cap).ok_or(Error::NoContactLine)?;
    if r > 0.5 * lx {
        return Err(Error::NoContactLine);
    }

    // intersections of the circle with the surface y = h(x)
    let g = |x: f64| (x - cx).powi(2) + (support.height_at(grid, x) - cy).powi(2) - r * r;
    let samples = 4000;
    let (a, b) = (cx - r - 2.0 * eps, cx + r + 2.0 * eps);
    let dx = (b - a) / samples as f64;
    let mut roots = Vec::new();
    let mut prev = g(a);
    for i in 1..=samples {
        let x = a + i as f64 * dx;
        let cur = g(x);
        if prev.signum() != cur.signum() {
            let (mut lo, mut hi) = (x - dx, x);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if g(mid).signum() == g(lo).signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            roots.push(0.5 * (lo + hi));
        }
        prev = cur;
    }
    if roots.len() < 2 {
        return Err(Error::NoContactLine);
    }
    let contacts = [roots[0], roots[roots.len() - 1]];
    let fd = 1e-3 * grid.spacing(0);
    let mut total = 0.0;
    for &x in &contacts {
        let y = support.height_at(grid, x);
        let slope = (support.height_at(grid, x + fd) - support.height_at(grid, x - fd)) / (2.0 * fd);
        let ns = [-slope, 1.0];
        let ns_norm = (ns[0] * ns[0] + ns[1] * ns[1]).sqrt();
        let nl = [(x - cx) / r, (y - cy) / r];
        let cos = (nl[0] * ns[0] + nl[1] * ns[1]) / ns_norm;
        total += cos.clamp(-1.0, 1.0).acos();
    }
    Ok(total / contacts.len() as f64)
}
