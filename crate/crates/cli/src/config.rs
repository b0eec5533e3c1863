//! Run configuration, read from TOML.
//!
//! The grammar is documented in `docs/config.md`. Unknown keys and
//! duplicate keys are rejected; every numerical parameter has a default.

use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use spectral_ch::geometry::Shape;
use spectral_ch::physics::{self, Model};
use spectral_ch::wetting::{SupportKind, WettingConfig};
use spectral_ch::{Error, Grid, Result, SchemeParams};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RunModel {
    Mch,
    Nmnch,
    /// Liquid phase on a frozen support.
    Wetting,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub model: RunModel,
    #[serde(default)]
    pub seed: u64,
    pub grid: GridSpec,
    #[serde(default)]
    pub params: ParamSpec,
    #[serde(default)]
    pub phases: PhaseSpec,
    pub initial: InitialSpec,
    #[serde(default)]
    pub support: Option<SupportKind>,
    #[serde(default)]
    pub wetting: Option<WettingSpec>,
    pub schedule: Schedule,
    #[serde(default)]
    pub output: OutputSpec,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub dims: Vec<usize>,
    /// Box lengths, 1 per axis when omitted.
    #[serde(default)]
    pub lengths: Option<Vec<f64>>,
}

/// Scheme parameters; omitted entries take the model defaults
/// (`eps` = cell size, `dt = eps^4`, `alpha = 2`, ...).
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamSpec {
    pub eps: Option<f64>,
    pub dt: Option<f64>,
    pub alpha: Option<f64>,
    pub m: Option<f64>,
    pub beta: Option<f64>,
    pub gamma: Option<f64>,
}

/// Phase count, tensions and mobilities of a multiphase run.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhaseSpec {
    pub count: Option<usize>,
    /// Per-phase `sigma_k`.
    pub sigma: Option<Vec<f64>>,
    /// Pairwise tensions: `[s12]` for two phases, `[s12, s13, s23]` for three.
    pub pairwise: Option<Vec<f64>>,
    pub nu: Option<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum InitialSpec {
    /// Uniform noise normalized to the partition, seeded by `seed`.
    Noise {
        #[serde(default = "one")]
        amplitude: f64,
    },
    /// One list of shapes per phase; the last phase is the remainder.
    Shapes { bodies: Vec<Vec<Shape>> },
    /// Liquid body on the support (wetting runs).
    Droplet { shape: Shape },
    /// Raw field files, one per phase or one per phase but the last.
    Raw { paths: Vec<PathBuf> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WettingSpec {
    pub sigma_lv: f64,
    pub sigma_sv: f64,
    pub sigma_ls: f64,
    #[serde(default = "nmnch")]
    pub model: Model,
    #[serde(default = "yes")]
    pub stabilized: bool,
    #[serde(default = "half")]
    pub penalty_scale: f64,
    #[serde(default = "one")]
    pub nu: f64,
    /// Evolve (solid, liquid, vapor) with the multiphase solver instead of
    /// the liquid alone.
    #[serde(default)]
    pub three_phase: bool,
}

impl WettingSpec {
    pub fn to_config(&self) -> WettingConfig {
        let mut c = WettingConfig::new(self.sigma_lv, self.sigma_sv, self.sigma_ls, self.model);
        c.stabilized = self.stabilized;
        c.penalty_scale = self.penalty_scale;
        c.nu = self.nu;
        c
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Schedule {
    pub steps: u64,
    #[serde(default = "one_u64")]
    pub diagnostics_every: u64,
    /// 0 writes a snapshot of the final state only.
    #[serde(default)]
    pub snapshot_every: u64,
    /// 0 writes the final checkpoint only.
    #[serde(default)]
    pub checkpoint_every: u64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SnapshotFormat {
    Png,
    Raw,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default = "default_dir")]
    pub dir: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<SnapshotFormat>,
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            dir: default_dir(),
            formats: default_formats(),
        }
    }
}

fn one() -> f64 {
    1.0
}
fn half() -> f64 {
    0.5
}
fn one_u64() -> u64 {
    1
}
fn yes() -> bool {
    true
}
fn nmnch() -> Model {
    Model::Nmnch
}
fn default_dir() -> PathBuf {
    PathBuf::from("output")
}
fn default_formats() -> Vec<SnapshotFormat> {
    vec![SnapshotFormat::Png]
}

/// What gets stepped, after defaults and validation.
#[derive(Clone, Debug, PartialEq)]
pub enum Setup {
    Multiphase {
        model: Model,
        sigma: Vec<f64>,
        nu: Vec<f64>,
    },
    Wetting {
        config: WettingConfig,
        support: SupportKind,
        three_phase: bool,
    },
}

impl Setup {
    pub fn model(&self) -> Model {
        match self {
            Setup::Multiphase { model, .. } => *model,
            Setup::Wetting { config, .. } => config.model,
        }
    }
}

#[derive(Debug)]
pub struct Resolved {
    pub grid: Grid,
    pub params: SchemeParams,
    pub setup: Setup,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

impl RunConfig {
    /// Parses and validates. Parse errors carry the line of the offending key.
    pub fn parse(text: &str) -> Result<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| Error::Parse {
            line: e.span().map(|s| line_of(text, s.start)),
            message: e.message().to_string(),
        })?;
        config.resolve()?;
        Ok(config)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hash of everything that determines the trajectory: the step count and
    /// the output location are excluded so runs can be extended or moved.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.schedule.steps = 0;
        c.output = OutputSpec::default();
        let json = serde_json::to_string(&c).expect("config serializes");
        format!("{:x}", Sha256::digest(json.as_bytes()))
    }

    pub fn build_grid(&self) -> Result<Grid> {
        let dims = &self.grid.dims;
        if dims.is_empty() || dims.len() > 3 {
            return Err(Error::Validation(format!("grid.dims has {} entries, need 1 to 3", dims.len())));
        }
        let lengths = self.grid.lengths.clone().unwrap_or_else(|| vec![1.0; dims.len()]);
        Grid::new(dims, &lengths)
    }

    fn phase_count(&self) -> Option<usize> {
        let p = &self.phases;
        p.count
            .or(p.sigma.as_ref().map(Vec::len))
            .or(p.nu.as_ref().map(Vec::len))
            .or(match &self.initial {
                InitialSpec::Shapes { bodies } => Some(bodies.len() + 1),
                InitialSpec::Raw { paths } if self.model != RunModel::Wetting => Some(paths.len()),
                _ => None,
            })
            .or(match p.pairwise.as_ref().map(Vec::len) {
                Some(1) => Some(2),
                Some(3) => Some(3),
                _ => None,
            })
    }

    fn resolve_params(&self, model: Model, grid: &Grid) -> Result<SchemeParams> {
        let h = (0..grid.dim()).map(|a| grid.spacing(a)).fold(0.0, f64::max);
        let eps = self.params.eps.unwrap_or(h);
        let box_min = grid.lengths().iter().copied().fold(f64::INFINITY, f64::min);
        if !(eps >= h * (1.0 - 1e-12)) {
            return Err(Error::Validation(format!("eps = {eps} is below the cell size {h}")));
        }
        if eps > box_min / 16.0 {
            return Err(Error::Validation(format!(
                "eps = {eps} exceeds box/16 = {}",
                box_min / 16.0
            )));
        }
        let mut p = SchemeParams::for_model(model, eps);
        let q = &self.params;
        p.dt = q.dt.unwrap_or(p.dt);
        p.alpha = q.alpha.unwrap_or(p.alpha);
        p.m = q.m.unwrap_or(p.m);
        p.beta = q.beta.unwrap_or(p.beta);
        p.gamma = q.gamma.unwrap_or(p.gamma);
        p.validate(model)?;
        Ok(p)
    }

    fn resolve_phases(&self, model: Model) -> Result<Setup> {
        let p = &self.phases;
        let l = self
            .phase_count()
            .ok_or_else(|| Error::Validation("phases.count is required for this initial condition".into()))?;
        if l < 2 {
            return Err(Error::Validation(format!("a multiphase run needs at least 2 phases, got {l}")));
        }
        let sigma = match (&p.sigma, &p.pairwise) {
            (Some(_), Some(_)) => {
                return Err(Error::Validation("give phases.sigma or phases.pairwise, not both".into()))
            }
            (Some(s), None) => s.clone(),
            (None, Some(pw)) => match (l, pw.as_slice()) {
                (2, [s12]) => vec![0.5 * s12; 2],
                (3, [s12, s13, s23]) => physics::per_phase_tensions3([*s12, *s13, *s23])?.to_vec(),
                _ => {
                    return Err(Error::Validation(format!(
                        "phases.pairwise needs 1 entry for 2 phases or 3 for 3 phases, got {} for {l}",
                        pw.len()
                    )))
                }
            },
            (None, None) => vec![1.0; l],
        };
        let nu = p.nu.clone().unwrap_or_else(|| vec![1.0; l]);
        if sigma.len() != l || nu.len() != l {
            return Err(Error::Validation(format!(
                "{l} phases but {} tensions and {} mobilities",
                sigma.len(),
                nu.len()
            )));
        }
        physics::TensionSet::from_per_phase(sigma.clone())?;
        if nu.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Validation(format!("mobilities must be >= 0: {nu:?}")));
        }
        if nu.iter().all(|v| *v == 0.0) {
            return Err(Error::AllMobilitiesZero);
        }
        match &self.initial {
            InitialSpec::Droplet { .. } => {
                return Err(Error::Validation("a droplet initial condition needs model = \"wetting\"".into()))
            }
            InitialSpec::Raw { paths } if paths.len() != l && paths.len() + 1 != l => {
                return Err(Error::Validation(format!("{} raw files for {l} phases", paths.len())))
            }
            InitialSpec::Shapes { bodies } if bodies.len() + 1 != l => {
                return Err(Error::Validation(format!(
                    "{} shape bodies for {l} phases (the last phase is the remainder)",
                    bodies.len()
                )))
            }
            _ => {}
        }
        if self.support.is_some() || self.wetting.is_some() {
            return Err(Error::Validation("support and wetting sections need model = \"wetting\"".into()));
        }
        Ok(Setup::Multiphase { model, sigma, nu })
    }

    fn resolve_wetting(&self, grid: &Grid) -> Result<Setup> {
        let spec = self
            .wetting
            .as_ref()
            .ok_or_else(|| Error::Validation("model = \"wetting\" needs a [wetting] section".into()))?;
        let support = self
            .support
            .clone()
            .ok_or_else(|| Error::Validation("model = \"wetting\" needs a [support] section".into()))?;
        if grid.dim() < 2 {
            return Err(Error::Validation("wetting runs need at least two dimensions".into()));
        }
        let config = spec.to_config();
        config.per_phase()?;
        if !(spec.penalty_scale.is_finite() && spec.penalty_scale >= 0.0) {
            return Err(Error::Validation(format!("penalty_scale = {} must be >= 0", spec.penalty_scale)));
        }
        if !(spec.nu.is_finite() && spec.nu > 0.0) {
            return Err(Error::Validation(format!("wetting.nu = {} must be positive", spec.nu)));
        }
        if self.phases != PhaseSpec::default() {
            return Err(Error::Validation("wetting runs derive their phases from [wetting]".into()));
        }
        match &self.initial {
            InitialSpec::Droplet { .. } => {}
            InitialSpec::Raw { paths } if paths.len() == 1 => {}
            _ => {
                return Err(Error::Validation(
                    "wetting runs start from a droplet or a single raw liquid field".into(),
                ))
            }
        }
        Ok(Setup::Wetting {
            config,
            support,
            three_phase: spec.three_phase,
        })
    }

    /// Applies defaults and checks every invariant.
    pub fn resolve(&self) -> Result<Resolved> {
        let grid = self.build_grid()?;
        let setup = match self.model {
            RunModel::Mch => self.resolve_phases(Model::Mch)?,
            RunModel::Nmnch => self.resolve_phases(Model::Nmnch)?,
            RunModel::Wetting => self.resolve_wetting(&grid)?,
        };
        let params = self.resolve_params(setup.model(), &grid)?;
        if let InitialSpec::Noise { amplitude } = &self.initial {
            if !(0.0..=1.0).contains(amplitude) {
                return Err(Error::Validation(format!("noise amplitude {amplitude} outside [0, 1]")));
            }
        }
        if self.schedule.diagnostics_every == 0 {
            return Err(Error::Validation("schedule.diagnostics_every must be >= 1".into()));
        }
        if self.output.formats.is_empty() {
            return Err(Error::Validation("output.formats is empty".into()));
        }
        Ok(Resolved { grid, params, setup })
    }
}
