use std::fs;
use std::path::Path;
use std::process::Command;

use spectral_ch_cli::checkpoint::Checkpoint;
use spectral_ch_cli::config::RunConfig;
use spectral_ch_cli::rawfield::RawField;
use spectral_ch_cli::runner::{self, Run, CHECKPOINT_NAME, CSV_NAME};

const NOISE: &str = r#"
model = "mch"
seed = 11

[grid]
dims = [64, 64]

[params]
eps = 0.03125

[phases]
count = 3

[initial]
kind = "noise"
amplitude = 0.2

[schedule]
steps = 50
diagnostics_every = 5
"#;

fn config(text: &str, dir: &Path) -> RunConfig {
    let mut c = RunConfig::parse(text).unwrap();
    c.output.dir = dir.to_path_buf();
    c
}

fn csv_rows(dir: &Path) -> Vec<Vec<String>> {
    fs::read_to_string(dir.join(CSV_NAME))
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(String::from).collect())
        .collect()
}

#[test]
fn noise_run_writes_expected_rows_and_energy_decreases() {
    let tmp = tempfile::tempdir().unwrap();
    let out = runner::run(config(NOISE, tmp.path()), false).unwrap();
    assert_eq!(out.steps, 50);
    let rows = csv_rows(tmp.path());
    assert_eq!(rows[0][..4], ["step", "time", "energy", "partition_residual"]);
    assert_eq!(rows[0].len(), 4 + 3 * 3 + 3);
    assert_eq!(rows.len(), 1 + 10);
    let steps: Vec<u64> = rows[1..].iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(steps, (1..=10).map(|k| 5 * k).collect::<Vec<_>>());
    let energy: Vec<f64> = rows[1..].iter().map(|r| r[2].parse().unwrap()).collect();
    for w in energy.windows(2) {
        assert!(w[1] <= w[0] + 1e-10, "energy rose: {w:?}");
    }
    for r in &rows[1..] {
        assert!(r[3].parse::<f64>().unwrap() < 1e-12);
    }
    assert!(tmp.path().join("snapshots/step_00000050.png").exists());
    assert!(tmp.path().join(CHECKPOINT_NAME).exists());
}

#[test]
fn resume_is_bit_exact() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut full = config(NOISE, a.path());
    full.schedule.checkpoint_every = 10;
    runner::run(full.clone(), false).unwrap();

    let mut half = full.clone();
    half.output.dir = b.path().to_path_buf();
    half.schedule.steps = 30;
    runner::run(half.clone(), false).unwrap();
    half.schedule.steps = 50;
    runner::run(half, true).unwrap();

    let read = |p: &Path| fs::read(p.join(CHECKPOINT_NAME)).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
    assert_eq!(
        fs::read_to_string(a.path().join(CSV_NAME)).unwrap(),
        fs::read_to_string(b.path().join(CSV_NAME)).unwrap()
    );
}

#[test]
fn resume_rejects_other_physics() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(NOISE, tmp.path());
    c.schedule.steps = 5;
    runner::run(c.clone(), false).unwrap();
    c.seed += 1;
    assert!(runner::run(c, true).is_err());
}

#[test]
fn runs_are_deterministic_per_seed() {
    let dirs: Vec<_> = (0..3).map(|_| tempfile::tempdir().unwrap()).collect();
    for (d, seed) in dirs.iter().zip([4, 4, 5]) {
        let mut c = config(NOISE, d.path());
        c.seed = seed;
        c.schedule.steps = 10;
        runner::run(c, false).unwrap();
    }
    let csv = |i: usize| fs::read_to_string(dirs[i].path().join(CSV_NAME)).unwrap();
    assert_eq!(csv(0), csv(1));
    assert_ne!(csv(0), csv(2));
}

#[test]
fn raw_fields_roundtrip_through_files_and_initial_data() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(NOISE, tmp.path());
    c.schedule.steps = 0;
    let run = Run::new(c).unwrap();
    let phases = run.display_phases();

    let mut paths = Vec::new();
    for (k, u) in phases.iter().take(2).enumerate() {
        let f = RawField::new(run.grid.dims(), run.grid.lengths(), u.clone()).unwrap();
        let p = tmp.path().join(format!("u{k}.raw"));
        f.write_to(fs::File::create(&p).unwrap()).unwrap();
        let back = RawField::read_from(fs::File::open(&p).unwrap()).unwrap();
        assert_eq!(back, f);
        paths.push(p);
    }

    let text = NOISE.replace(
        "kind = \"noise\"\namplitude = 0.2",
        &format!("kind = \"raw\"\npaths = {:?}", paths),
    );
    let from_raw = Run::new(config(&text, tmp.path())).unwrap().display_phases();
    assert_eq!(from_raw[0], phases[0]);
    assert_eq!(from_raw[1], phases[1]);
    for i in 0..from_raw[2].len() {
        assert!((from_raw[2][i] - phases[2][i]).abs() < 1e-15);
    }
}

#[test]
fn checkpoint_restores_the_state() {
    let tmp = tempfile::tempdir().unwrap();
    let mut c = config(NOISE, tmp.path());
    c.schedule.steps = 7;
    runner::run(c.clone(), false).unwrap();
    let run = runner::load_state(c).unwrap();
    assert_eq!(run.system.step_index, 7);
    let ck = Checkpoint::load(&tmp.path().join(CHECKPOINT_NAME), &run.grid).unwrap();
    assert_eq!(ck.meta.seed, 11);
    assert_eq!(ck.meta.config_hash, run.hash());
    assert!((ck.meta.time - 7.0 * run.params.dt).abs() < 1e-20);
}

#[test]
fn wetting_run_reaches_the_young_angle() {
    let text = r#"
model = "wetting"

[grid]
dims = [128, 128]

[params]
dt = 4e-6

[support]
kind = "flat"
height = 0.25

[wetting]
sigma_lv = 1.0
sigma_sv = 1.0
sigma_ls = 1.7
model = "mch"
stabilized = false

[initial]
kind = "droplet"
shape = { kind = "ball", center = [0.5, 0.25], radius = 0.2 }

[schedule]
steps = 3000
diagnostics_every = 100
"#;
    let tmp = tempfile::tempdir().unwrap();
    let c = config(text, tmp.path());
    let young = runner::young_angle(&c.resolve().unwrap().setup).unwrap();
    assert!((young.to_degrees() - 134.43).abs() < 0.01);
    let out = runner::run(c, false).unwrap();
    let theta = out.report.contact_angle.unwrap();
    assert!(
        (theta - young).abs().to_degrees() < 5.0,
        "angle {} vs {}",
        theta.to_degrees(),
        young.to_degrees()
    );
    let rows = csv_rows(tmp.path());
    let m0: f64 = rows[1][5].parse().unwrap();
    let m1: f64 = rows.last().unwrap()[5].parse().unwrap();
    assert!((m1 - m0).abs() < 1e-10, "liquid mass {m0} -> {m1}");
}

fn sch(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_sch")).args(args).output().unwrap()
}

#[test]
fn binary_exit_codes() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("div.toml");
    fs::write(
        &cfg,
        r#"
model = "mch"
[grid]
dims = [32, 32]
[params]
eps = 0.0625
dt = 1e-3
alpha = 0.0
[phases]
count = 3
[initial]
kind = "noise"
[schedule]
steps = 200
checkpoint_every = 1
"#,
    )
    .unwrap();
    let out_dir = tmp.path().join("out");
    let o = sch(&["run", "--config", cfg.to_str().unwrap(), "--output-dir", out_dir.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    // the last good state survives the divergence
    let c = {
        let mut c = RunConfig::parse(&fs::read_to_string(&cfg).unwrap()).unwrap();
        c.output.dir = out_dir.clone();
        c
    };
    let run = runner::load_state(c).unwrap();
    assert!(run.system.is_finite());
    assert!(run.system.step_index >= 1);

    fs::write(&cfg, "model = \"mch\"\n[grid]\ndims = [32, 32]\nbogus = 1\n").unwrap();
    let o = sch(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 4"));
}

#[test]
fn binary_run_diag_export() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("noise.toml");
    fs::write(&cfg, NOISE).unwrap();
    let dir = tmp.path().join("run");
    let (c, d) = (cfg.to_str().unwrap(), dir.to_str().unwrap());
    let o = sch(&["run", "--config", c, "--output-dir", d, "--steps-override", "4", "--seed", "2"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));

    let o = sch(&["diag", "--config", c, "--output-dir", d, "--seed", "2"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.lines().nth(1).unwrap().starts_with("4,"));

    let raw = tmp.path().join("c.raw");
    let o = sch(&["export", "--config", c, "--output-dir", d, "--seed", "2", "--out", raw.to_str().unwrap()]);
    assert!(o.status.success());
    let f = RawField::decode(&fs::read(&raw).unwrap()).unwrap();
    assert_eq!(f.dims, vec![64, 64]);
    assert!(f.values.iter().all(|v| (-0.5..2.5).contains(v)));

    let png = tmp.path().join("u2.png");
    let o = sch(&[
        "export", "--config", c, "--output-dir", d, "--seed", "2", "--field", "u2", "--format", "png", "--out",
        png.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    assert_eq!(&fs::read(&png).unwrap()[1..4], b"PNG");
}
