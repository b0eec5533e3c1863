//! Run orchestration: initial condition, stepping, outputs, checkpoints.

use std::fs::{self, File, OpenOptions};
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::sync::Arc;

use spectral_ch::diagnostics::{self, DiagnosticsReport};
use spectral_ch::physics;
use spectral_ch::wetting::{self, SolidSupport, WettingSolver};
use spectral_ch::{initial, Error, Grid, PhaseSystem, SchemeParams, Solver, Stepper};

use crate::checkpoint::Checkpoint;
use crate::config::{InitialSpec, RunConfig, Setup, SnapshotFormat};
use crate::export;
use crate::rawfield::RawField;
use crate::CliError;

/// Largest admissible `|u|` before a run is declared divergent.
pub const DIVERGENCE_BOUND: f64 = 10.0;

pub const CSV_NAME: &str = "diagnostics.csv";
pub const CHECKPOINT_NAME: &str = "checkpoint.bin";
pub const SNAPSHOT_DIR: &str = "snapshots";

/// Command-line overrides applied on top of a config.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub output_dir: Option<PathBuf>,
    pub steps: Option<u64>,
}

impl Overrides {
    pub fn apply(&self, config: &mut RunConfig) {
        if let Some(s) = self.seed {
            config.seed = s;
        }
        if let Some(d) = &self.output_dir {
            config.output.dir = d.clone();
        }
        if let Some(n) = self.steps {
            config.schedule.steps = n;
        }
    }
}

enum Engine {
    Multiphase(Solver),
    Wetting(WettingSolver),
}

/// A configured run owning its state.
pub struct Run {
    pub config: RunConfig,
    pub grid: Arc<Grid>,
    pub params: SchemeParams,
    pub setup: Setup,
    pub system: PhaseSystem,
    support: Option<Arc<SolidSupport>>,
    engine: Engine,
    hash: String,
}

fn read_raw(path: &Path, grid: &Grid) -> Result<Vec<f64>, CliError> {
    let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
    let f = RawField::decode(&bytes)?;
    if f.dims != grid.dims() {
        return Err(CliError::Raw(format!(
            "{}: dims {:?} differ from the grid's {:?}",
            path.display(),
            f.dims,
            grid.dims()
        )));
    }
    Ok(f.values)
}

fn multiphase_fields(config: &RunConfig, grid: &Grid, eps: f64, phases: usize) -> Result<Vec<Vec<f64>>, CliError> {
    Ok(match &config.initial {
        InitialSpec::Noise { amplitude } => initial::noise(grid, phases, config.seed, *amplitude)?,
        InitialSpec::Shapes { bodies } => initial::shapes(grid, eps, bodies)?,
        InitialSpec::Raw { paths } => {
            let mut fields = paths.iter().map(|p| read_raw(p, grid)).collect::<Result<Vec<_>, _>>()?;
            if fields.len() + 1 == phases {
                let rest = (0..grid.len()).map(|i| 1.0 - fields.iter().map(|f| f[i]).sum::<f64>()).collect();
                fields.push(rest);
            }
            fields
        }
        InitialSpec::Droplet { .. } => unreachable!("rejected by validation"),
    })
}

impl Run {
    /// Validates `config` and builds the initial state.
    pub fn new(config: RunConfig) -> Result<Self, CliError> {
        let resolved = config.resolve()?;
        let grid = Arc::new(resolved.grid);
        let params = resolved.params;
        let eps = params.eps;
        let (system, support, engine) = match &resolved.setup {
            Setup::Multiphase { model, sigma, nu } => {
                let fields = multiphase_fields(&config, &grid, eps, sigma.len())?;
                let system = PhaseSystem::new(&grid, fields, sigma.clone(), nu.clone(), eps)?;
                let solver = Solver::new(*model, grid.clone(), params, sigma, nu)?;
                (system, None, Engine::Multiphase(solver))
            }
            Setup::Wetting {
                config: wc,
                support,
                three_phase,
            } => {
                let support = Arc::new(SolidSupport::build(support.clone(), &grid, eps)?);
                let u_l = match &config.initial {
                    InitialSpec::Droplet { shape } => wetting::droplet_on_support(&grid, &support, shape, eps),
                    InitialSpec::Raw { paths } => read_raw(&paths[0], &grid)?,
                    _ => unreachable!("rejected by validation"),
                };
                if *three_phase {
                    let system = wetting::three_phase_system(&grid, &support, u_l, wc, eps)?;
                    let solver = wetting::three_phase_solver(wc.model, grid.clone(), params, &system)?;
                    (system, Some(support), Engine::Multiphase(solver))
                } else {
                    let solver = WettingSolver::new(grid.clone(), params, wc.clone(), support.clone())?;
                    let system = solver.initial_system(u_l)?;
                    (system, Some(support), Engine::Wetting(solver))
                }
            }
        };
        let hash = config.hash();
        Ok(Self {
            config,
            grid,
            params,
            setup: resolved.setup,
            system,
            support,
            engine,
            hash,
        })
    }

    pub fn hash(&self) -> &str {
        &self.hash
    }

    pub fn time(&self) -> f64 {
        self.system.step_index as f64 * self.params.dt
    }

    pub fn out_dir(&self) -> &Path {
        &self.config.output.dir
    }

    /// Advances one step and checks for divergence.
    pub fn step(&mut self) -> Result<(), CliError> {
        match &self.engine {
            Engine::Multiphase(s) => s.step(&mut self.system)?,
            Engine::Wetting(s) => s.step(&mut self.system)?,
        }
        let step = self.system.step_index;
        if !self.system.is_finite() {
            return Err(Error::DivergenceDetected {
                step,
                reason: "non-finite values".into(),
            }
            .into());
        }
        let m = self.system.max_abs_u();
        if m > DIVERGENCE_BOUND {
            return Err(Error::DivergenceDetected {
                step,
                reason: format!("max |u| = {m:e} > {DIVERGENCE_BOUND}"),
            }
            .into());
        }
        Ok(())
    }

    /// Phases shown in snapshots and diagnostics: the system's phases, or
    /// (solid, liquid, vapor) for a single-phase wetting run.
    pub fn display_phases(&self) -> Vec<Vec<f64>> {
        match (&self.engine, &self.support) {
            (Engine::Wetting(_), Some(s)) => {
                let u_l = self.system.u[0].real();
                let u_v = u_l.iter().zip(&s.u_s).map(|(l, s)| 1.0 - l - s).collect();
                vec![s.u_s.clone(), u_l.to_vec(), u_v]
            }
            _ => self.system.u.iter().map(|u| u.real().to_vec()).collect(),
        }
    }

    fn display_sigma(&self) -> Vec<f64> {
        match (&self.engine, &self.setup) {
            (Engine::Wetting(_), Setup::Wetting { config, .. }) => {
                let (l, s, v) = config.per_phase().expect("validated tensions");
                vec![s, l, v]
            }
            _ => self.system.sigma.clone(),
        }
    }

    /// Diagnostics of the current state.
    pub fn report(&self) -> DiagnosticsReport {
        let grid = &self.grid;
        let eps = self.params.eps;
        let phases = self.display_phases();
        let (min_u, max_u) = phases.iter().map(|u| diagnostics::overshoot(u)).unzip();
        let partition_residual = if phases.len() > 1 {
            (0..grid.len())
                .map(|i| (phases.iter().map(|u| u[i]).sum::<f64>() - 1.0).abs())
                .fold(0.0, f64::max)
        } else {
            0.0
        };
        let two_d = grid.dim() == 2;
        let (contact_angle, isoperimetric_ratio) = match &self.support {
            Some(s) => {
                let angle = two_d
                    .then(|| wetting::measure_contact_angle(grid, &phases[1], s, eps).ok())
                    .flatten();
                (angle, None)
            }
            None => {
                let ratio = two_d
                    .then(|| diagnostics::level_set_geometry(grid, &phases[0], 0.5).ok())
                    .flatten()
                    .map(|g| g.isoperimetric_ratio);
                (None, ratio)
            }
        };
        DiagnosticsReport {
            step: self.system.step_index,
            time: self.time(),
            energy: diagnostics::energy_of_fields(grid, &phases, &self.display_sigma(), eps),
            partition_residual,
            mass: phases.iter().map(|u| grid.mean(u)).collect(),
            min_u,
            max_u,
            profile_error: None,
            contact_angle,
            isoperimetric_ratio,
        }
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint::new(&self.system, self.time(), &self.hash, self.config.seed, &self.grid)
    }

    /// Replaces the state with a checkpoint of the same configuration.
    pub fn restore(&mut self, ckpt: Checkpoint) -> Result<(), CliError> {
        if ckpt.meta.config_hash != self.hash {
            return Err(CliError::Checkpoint(format!(
                "written by a different configuration ({} vs {})",
                ckpt.meta.config_hash, self.hash
            )));
        }
        if ckpt.system.phase_count() != self.system.phase_count() {
            return Err(CliError::Checkpoint("phase count differs".into()));
        }
        self.system = ckpt.system;
        Ok(())
    }

    /// Writes the composite snapshot of the current state in every
    /// configured format.
    pub fn write_snapshot(&self, dir: &Path) -> Result<(), CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        let phases = self.display_phases();
        let refs: Vec<&[f64]> = phases.iter().map(Vec::as_slice).collect();
        let stem = dir.join(format!("step_{:08}", self.system.step_index));
        for fmt in &self.config.output.formats {
            let path = stem.with_extension(match fmt {
                SnapshotFormat::Png => "png",
                SnapshotFormat::Raw => "raw",
                SnapshotFormat::Csv => "csv",
            });
            let file = File::create(&path).map_err(|e| CliError::io(&path, e))?;
            let mut w = BufWriter::new(file);
            match fmt {
                SnapshotFormat::Png => export::composite_png(&self.grid, &refs, &mut w)?,
                SnapshotFormat::Raw => {
                    let f = RawField::new(self.grid.dims(), self.grid.lengths(), export::composite(&refs))?;
                    f.write_to(&mut w).map_err(|e| CliError::io(&path, e))?
                }
                SnapshotFormat::Csv => w
                    .write_all(export::field_csv(self.grid.dims(), &export::composite(&refs)).as_bytes())
                    .map_err(|e| CliError::io(&path, e))?,
            }
            w.flush().map_err(|e| CliError::io(&path, e))?;
        }
        Ok(())
    }
}

/// Keeps the header and the rows up to `step`.
fn truncate_csv(path: &Path, step: u64) -> Result<(), CliError> {
    let file = File::open(path).map_err(|e| CliError::io(path, e))?;
    let mut kept = String::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| CliError::io(path, e))?;
        let keep = i == 0
            || line
                .split(',')
                .next()
                .and_then(|s| s.parse::<u64>().ok())
                .is_some_and(|s| s <= step);
        if keep {
            kept.push_str(&line);
            kept.push('\n');
        }
    }
    fs::write(path, kept).map_err(|e| CliError::io(path, e))
}

/// Summary of a finished run.
#[derive(Clone, Debug)]
pub struct Outcome {
    pub steps: u64,
    pub report: DiagnosticsReport,
    pub output_dir: PathBuf,
}

/// Runs `config` to `schedule.steps`, writing diagnostics, snapshots and
/// checkpoints. With `resume`, continues from the checkpoint in the output
/// directory. On divergence the last checkpoint on disk is left untouched.
pub fn run(config: RunConfig, resume: bool) -> Result<Outcome, CliError> {
    let mut run = Run::new(config)?;
    let out = run.out_dir().to_path_buf();
    fs::create_dir_all(&out).map_err(|e| CliError::io(&out, e))?;
    let csv_path = out.join(CSV_NAME);
    let ckpt_path = out.join(CHECKPOINT_NAME);
    let snap_dir = out.join(SNAPSHOT_DIR);
    let sched = run.config.schedule.clone();
    let phases = run.display_phases().len();

    if resume {
        let ckpt = Checkpoint::load(&ckpt_path, &run.grid)?;
        run.restore(ckpt)?;
        if csv_path.exists() {
            truncate_csv(&csv_path, run.system.step_index)?;
        } else {
            fs::write(&csv_path, DiagnosticsReport::csv_header(phases) + "\n")
                .map_err(|e| CliError::io(&csv_path, e))?;
        }
    } else {
        let config_path = out.join("config.toml");
        fs::write(&config_path, run.config.to_toml()).map_err(|e| CliError::io(&config_path, e))?;
        fs::write(&csv_path, DiagnosticsReport::csv_header(phases) + "\n")
            .map_err(|e| CliError::io(&csv_path, e))?;
        if sched.snapshot_every > 0 {
            run.write_snapshot(&snap_dir)?;
        }
    }

    let mut csv = BufWriter::new(
        OpenOptions::new()
            .append(true)
            .open(&csv_path)
            .map_err(|e| CliError::io(&csv_path, e))?,
    );
    while run.system.step_index < sched.steps {
        if let Err(e) = run.step() {
            csv.flush().map_err(|e| CliError::io(&csv_path, e))?;
            return Err(e);
        }
        let step = run.system.step_index;
        if step % sched.diagnostics_every == 0 {
            writeln!(csv, "{}", run.report().csv_row()).map_err(|e| CliError::io(&csv_path, e))?;
        }
        if sched.snapshot_every > 0 && step % sched.snapshot_every == 0 {
            run.write_snapshot(&snap_dir)?;
        }
        if sched.checkpoint_every > 0 && step % sched.checkpoint_every == 0 {
            csv.flush().map_err(|e| CliError::io(&csv_path, e))?;
            run.checkpoint().save(&ckpt_path)?;
        }
    }
    csv.flush().map_err(|e| CliError::io(&csv_path, e))?;
    if sched.snapshot_every == 0 || run.system.step_index % sched.snapshot_every != 0 {
        run.write_snapshot(&snap_dir)?;
    }
    run.checkpoint().save(&ckpt_path)?;
    Ok(Outcome {
        steps: run.system.step_index,
        report: run.report(),
        output_dir: out,
    })
}

/// Loads the run state saved in the config's output directory.
pub fn load_state(config: RunConfig) -> Result<Run, CliError> {
    let mut run = Run::new(config)?;
    let path = run.out_dir().join(CHECKPOINT_NAME);
    let ckpt = Checkpoint::load(&path, &run.grid)?;
    run.restore(ckpt)?;
    Ok(run)
}

/// Per-phase tensions and Young angle for a wetting setup, for reporting.
pub fn young_angle(setup: &Setup) -> Option<f64> {
    match setup {
        Setup::Wetting { config, .. } => {
            physics::young_angle(config.sigma_sv, config.sigma_ls, config.sigma_lv).ok()
        }
        _ => None,
    }
}
