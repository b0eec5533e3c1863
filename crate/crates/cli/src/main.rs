use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand, ValueEnum};
use spectral_ch::diagnostics::{self, DiagnosticsReport};

use spectral_ch_cli::config::RunConfig;
use spectral_ch_cli::export;
use spectral_ch_cli::rawfield::RawField;
use spectral_ch_cli::runner::{self, Overrides};

#[derive(Parser)]
#[command(name = "sch", version, about = "Multiphase Cahn-Hilliard runs with spectral splitting schemes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Run configuration (TOML).
    #[arg(long)]
    config: PathBuf,
    /// Overrides the seed of the configuration.
    #[arg(long)]
    seed: Option<u64>,
    /// Overrides output.dir of the configuration.
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run a configuration to its final step.
    Run {
        #[command(flatten)]
        common: Common,
        /// Continue from the checkpoint in the output directory.
        #[arg(long)]
        resume: bool,
        /// Overrides schedule.steps.
        #[arg(long)]
        steps_override: Option<u64>,
    },
    /// Run one configuration per value of a parameter and tabulate the
    /// final diagnostics.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        param: SweepParam,
        /// Comma-separated values.
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<f64>,
        /// With `--param eps`, sets the points per axis to this many cells
        /// per eps (rounded up to even).
        #[arg(long)]
        cells_per_eps: Option<f64>,
        /// Final time; the step count becomes `ceil(time / dt)` per run.
        #[arg(long)]
        time: Option<f64>,
        #[arg(long)]
        steps_override: Option<u64>,
    },
    /// Print the diagnostics of the saved state.
    Diag {
        #[command(flatten)]
        common: Common,
    },
    /// Write a field of the saved state to a file.
    Export {
        #[command(flatten)]
        common: Common,
        /// `composite`, `u<k>` or `mu<k>` with k counted from 1.
        #[arg(long, default_value = "composite")]
        field: String,
        #[arg(long, value_enum, default_value = "raw")]
        format: ExportFormat,
        /// Destination file.
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepParam {
    Eps,
    Dt,
    Alpha,
    M,
    Beta,
    Gamma,
    Seed,
}

#[derive(Clone, Copy, ValueEnum)]
enum ExportFormat {
    Raw,
    Csv,
    Png,
}

fn load(common: &Common, steps: Option<u64>) -> Result<RunConfig> {
    let text = fs::read_to_string(&common.config).with_context(|| format!("reading {}", common.config.display()))?;
    let mut config = RunConfig::parse(&text).with_context(|| format!("in {}", common.config.display()))?;
    Overrides {
        seed: common.seed,
        output_dir: common.output_dir.clone(),
        steps,
    }
    .apply(&mut config);
    Ok(config)
}

fn print_report(report: &DiagnosticsReport) {
    let l = report.mass.len();
    println!("{}", DiagnosticsReport::csv_header(l));
    println!("{}", report.csv_row());
}

fn cmd_run(common: &Common, resume: bool, steps: Option<u64>) -> Result<()> {
    let config = load(common, steps)?;
    let outcome = runner::run(config, resume)?;
    eprintln!("{} steps, output in {}", outcome.steps, outcome.output_dir.display());
    print_report(&outcome.report);
    Ok(())
}

fn set_param(config: &mut RunConfig, param: SweepParam, v: f64) {
    let p = &mut config.params;
    match param {
        SweepParam::Eps => p.eps = Some(v),
        SweepParam::Dt => p.dt = Some(v),
        SweepParam::Alpha => p.alpha = Some(v),
        SweepParam::M => p.m = Some(v),
        SweepParam::Beta => p.beta = Some(v),
        SweepParam::Gamma => p.gamma = Some(v),
        SweepParam::Seed => config.seed = v as u64,
    }
}

fn cmd_sweep(
    common: &Common,
    param: SweepParam,
    values: &[f64],
    cells_per_eps: Option<f64>,
    time: Option<f64>,
    steps: Option<u64>,
) -> Result<()> {
    let base = load(common, steps)?;
    let root = base.output.dir.clone();
    fs::create_dir_all(&root).with_context(|| format!("creating {}", root.display()))?;
    let name = param.to_possible_value().unwrap().get_name().to_string();
    let mut rows = Vec::new();
    for &v in values {
        let mut config = base.clone();
        set_param(&mut config, param, v);
        if let (SweepParam::Eps, Some(c)) = (param, cells_per_eps) {
            let lengths = config.build_grid()?.lengths().to_vec();
            config.grid.dims = lengths.iter().map(|l| 2 * ((c * l / v / 2.0).ceil() as usize)).collect();
        }
        if let Some(t) = time {
            let dt = config.resolve()?.params.dt;
            config.schedule.steps = (t / dt - 1e-9).ceil() as u64;
        }
        config.output.dir = root.join(format!("{name}_{v}"));
        eprintln!("{name} = {v}: {} steps", config.schedule.steps);
        let outcome = runner::run(config, false).with_context(|| format!("{name} = {v}"))?;
        rows.push((v, outcome.report));
    }

    let path = root.join("sweep.csv");
    let mut w = BufWriter::new(File::create(&path).with_context(|| format!("creating {}", path.display()))?);
    let l = rows[0].1.mass.len();
    writeln!(w, "value,overshoot,{}", DiagnosticsReport::csv_header(l))?;
    let mut fit = Vec::new();
    for (v, r) in &rows {
        let over = r.min_u.iter().map(|m| (-m).max(0.0)).fold(0.0, f64::max);
        writeln!(w, "{v},{over:e},{}", r.csv_row())?;
        println!("{name} = {v}: |min u| = {over:e}, energy = {:e}", r.energy);
        fit.push((*v, over));
    }
    w.flush()?;
    if rows.len() >= 2 && fit.iter().all(|&(v, o)| v > 0.0 && o > 0.0) {
        let (xs, ys): (Vec<f64>, Vec<f64>) = fit.into_iter().unzip();
        println!("log-log slope of |min u| against {name}: {:.3}", diagnostics::fit_slope(&xs, &ys)?);
    }
    Ok(())
}

fn cmd_diag(common: &Common) -> Result<()> {
    let run = runner::load_state(load(common, None)?)?;
    print_report(&run.report());
    if let Some(theta) = runner::young_angle(&run.setup) {
        println!("young_angle_deg = {:.4}", theta.to_degrees());
    }
    Ok(())
}

fn cmd_export(common: &Common, field: &str, format: ExportFormat, out: &Path) -> Result<()> {
    let run = runner::load_state(load(common, None)?)?;
    let phases = run.display_phases();
    let refs: Vec<&[f64]> = phases.iter().map(Vec::as_slice).collect();
    let pick = |prefix: &str, from: &dyn Fn(usize) -> Vec<f64>, count: usize| -> Result<Vec<f64>> {
        let k: usize = field[prefix.len()..].parse().with_context(|| format!("bad field {field}"))?;
        if k == 0 || k > count {
            bail!("{field}: phases are numbered 1 to {count}");
        }
        Ok(from(k - 1))
    };
    let values = if field == "composite" {
        export::composite(&refs)
    } else if field.starts_with("mu") {
        pick("mu", &|k| run.system.mu[k].real().to_vec(), run.system.mu.len())?
    } else if field.starts_with('u') {
        pick("u", &|k| phases[k].clone(), phases.len())?
    } else {
        bail!("unknown field {field}; use composite, u<k> or mu<k>");
    };
    let grid = &run.grid;
    let mut w = BufWriter::new(File::create(out).with_context(|| format!("creating {}", out.display()))?);
    match format {
        ExportFormat::Raw => RawField::new(grid.dims(), grid.lengths(), values)?.write_to(&mut w)?,
        ExportFormat::Csv => w.write_all(export::field_csv(grid.dims(), &values).as_bytes())?,
        ExportFormat::Png => {
            let (lo, hi) = if field == "composite" {
                (0.0, (phases.len() - 1) as f64)
            } else {
                values.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
            };
            let (wd, ht, rgb) = export::raster(grid, &values, lo, hi);
            export::write_png(&mut w, wd, ht, &rgb)?
        }
    }
    w.flush()?;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Run {
            common,
            resume,
            steps_override,
        } => cmd_run(common, *resume, *steps_override),
        Command::Sweep {
            common,
            param,
            values,
            cells_per_eps,
            time,
            steps_override,
        } => cmd_sweep(common, *param, values, *cells_per_eps, *time, *steps_override),
        Command::Diag { common } => cmd_diag(common),
        Command::Export {
            common,
            field,
            format,
            out,
        } => cmd_export(common, field, *format, out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            let diverged = e
                .downcast_ref::<spectral_ch_cli::CliError>()
                .is_some_and(|c| c.is_divergence());
            ExitCode::from(if diverged { 3 } else { 1 })
        }
    }
}
