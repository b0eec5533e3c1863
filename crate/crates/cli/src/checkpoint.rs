//! Checkpoints: the full state of a run, restorable bit for bit.
//!
//! File layout: magic `SCHCKPT1`, a little-endian `u64` byte count, that many
//! bytes of JSON metadata, then every field as little-endian `f64`. Each
//! field is stored as its real values followed, when the solver had cached
//! it, by its spectrum (interleaved re/im). Keeping the spectra makes a
//! resumed run take exactly the same floating-point path as an
//! uninterrupted one.

use std::fs;
use std::io::Write;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use spectral_ch::{Grid, PhaseSystem, SpectralField};

use crate::CliError;

const MAGIC: &[u8; 8] = b"SCHCKPT1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Meta {
    pub step: u64,
    pub time: f64,
    pub config_hash: String,
    pub seed: u64,
    pub dims: Vec<usize>,
    pub sigma: Vec<f64>,
    pub nu: Vec<f64>,
    pub mobility_clamped: bool,
    /// Per stored field, in order u_1..u_L, mu_1..mu_L, lambda: whether its
    /// spectrum follows the real values.
    pub has_spectrum: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub meta: Meta,
    pub system: PhaseSystem,
}

fn fields(system: &PhaseSystem) -> impl Iterator<Item = &SpectralField> {
    system.u.iter().chain(&system.mu).chain(std::iter::once(&system.lambda))
}

impl Checkpoint {
    pub fn new(system: &PhaseSystem, time: f64, config_hash: &str, seed: u64, grid: &Grid) -> Self {
        let has_spectrum = fields(system).map(|f| f.cached_spectrum().is_some()).collect();
        Self {
            meta: Meta {
                step: system.step_index,
                time,
                config_hash: config_hash.to_string(),
                seed,
                dims: grid.dims().to_vec(),
                sigma: system.sigma.clone(),
                nu: system.nu.clone(),
                mobility_clamped: system.mobility_clamped,
                has_spectrum,
            },
            system: system.clone(),
        }
    }

    pub fn encode(&self) -> Vec<u8> {
        let meta = serde_json::to_vec(&self.meta).expect("metadata serializes");
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&(meta.len() as u64).to_le_bytes());
        out.extend_from_slice(&meta);
        for f in fields(&self.system) {
            for v in f.real() {
                out.extend_from_slice(&v.to_le_bytes());
            }
            if let Some(spec) = f.cached_spectrum() {
                for c in spec {
                    out.extend_from_slice(&c.re.to_le_bytes());
                    out.extend_from_slice(&c.im.to_le_bytes());
                }
            }
        }
        out
    }

    pub fn decode(bytes: &[u8], grid: &Grid) -> Result<Self, CliError> {
        let bad = |m: &str| CliError::Checkpoint(m.to_string());
        if bytes.len() < 16 || &bytes[..8] != MAGIC {
            return Err(bad("not a checkpoint"));
        }
        let len = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        let meta_end = 16usize.checked_add(len).filter(|e| *e <= bytes.len()).ok_or_else(|| bad("truncated metadata"))?;
        let meta: Meta = serde_json::from_slice(&bytes[16..meta_end]).map_err(|e| bad(&e.to_string()))?;
        if meta.dims != grid.dims() {
            return Err(bad(&format!("grid {:?} differs from the run's {:?}", meta.dims, grid.dims())));
        }
        let l = meta.sigma.len();
        if meta.nu.len() != l || meta.has_spectrum.len() != 2 * l + 1 {
            return Err(bad("inconsistent phase count"));
        }
        let (n, ns) = (grid.len(), grid.spec_len());
        let mut values = bytes[meta_end..]
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
        let expected: usize = meta.has_spectrum.iter().map(|s| n + if *s { 2 * ns } else { 0 }).sum();
        if bytes.len() - meta_end != 8 * expected {
            return Err(bad("field data has the wrong length"));
        }
        let mut read = |with_spec: bool| {
            let real: Vec<f64> = values.by_ref().take(n).collect();
            let spec = with_spec.then(|| {
                (0..ns)
                    .map(|_| Complex64::new(values.next().unwrap(), values.next().unwrap()))
                    .collect()
            });
            SpectralField::from_parts(real, spec)
        };
        let mut all: Vec<SpectralField> = meta.has_spectrum.iter().map(|&s| read(s)).collect();
        let lambda = all.pop().unwrap();
        let mu = all.split_off(l);
        let system = PhaseSystem {
            u: all,
            mu,
            lambda,
            sigma: meta.sigma.clone(),
            nu: meta.nu.clone(),
            step_index: meta.step,
            mobility_clamped: meta.mobility_clamped,
        };
        Ok(Self { meta, system })
    }

    /// Writes through a temporary file and a rename, so an interrupted write
    /// never replaces the previous checkpoint with a partial one.
    pub fn save(&self, path: &Path) -> Result<(), CliError> {
        let tmp = path.with_extension("tmp");
        let io = |e| CliError::io(&tmp, e);
        let mut f = fs::File::create(&tmp).map_err(io)?;
        f.write_all(&self.encode()).map_err(io)?;
        f.sync_all().map_err(io)?;
        fs::rename(&tmp, path).map_err(|e| CliError::io(path, e))
    }

    pub fn load(path: &Path, grid: &Grid) -> Result<Self, CliError> {
        let bytes = fs::read(path).map_err(|e| CliError::io(path, e))?;
        Self::decode(&bytes, grid)
    }
}
