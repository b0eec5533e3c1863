//! Raw binary fields.
//!
//! Layout, all little-endian:
//!
//! | offset | size | content                                  |
//! |--------|------|------------------------------------------|
//! | 0      | 8    | magic `SCHFLD01`                         |
//! | 8      | 4    | `u32` format version, 1                  |
//! | 12     | 4    | `u32` number of axes `d` (1 to 3)        |
//! | 16     | 24   | `u64` points per axis, unused axes are 1 |
//! | 40     | 24   | `f64` box length per axis, unused are 0  |
//! | 64     |      | `f64` values, row-major (last axis fastest) |

use std::io::{Read, Write};

use crate::CliError;

pub const MAGIC: &[u8; 8] = b"SCHFLD01";
pub const VERSION: u32 = 1;
pub const HEADER_LEN: usize = 64;

#[derive(Clone, Debug, PartialEq)]
pub struct RawField {
    pub dims: Vec<usize>,
    pub lengths: Vec<f64>,
    pub values: Vec<f64>,
}

impl RawField {
    pub fn new(dims: &[usize], lengths: &[f64], values: Vec<f64>) -> Result<Self, CliError> {
        let field = Self {
            dims: dims.to_vec(),
            lengths: lengths.to_vec(),
            values,
        };
        field.check()?;
        Ok(field)
    }

    fn check(&self) -> Result<(), CliError> {
        let d = self.dims.len();
        if !(1..=3).contains(&d) || self.lengths.len() != d {
            return Err(CliError::Raw(format!(
                "{d} axes with {} lengths",
                self.lengths.len()
            )));
        }
        let n: usize = self.dims.iter().product();
        if n != self.values.len() {
            return Err(CliError::Raw(format!(
                "dims {:?} hold {n} values, got {}",
                self.dims,
                self.values.len()
            )));
        }
        Ok(())
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(HEADER_LEN + 8 * self.values.len());
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&(self.dims.len() as u32).to_le_bytes());
        for a in 0..3 {
            let n = self.dims.get(a).copied().unwrap_or(1) as u64;
            out.extend_from_slice(&n.to_le_bytes());
        }
        for a in 0..3 {
            let l = self.lengths.get(a).copied().unwrap_or(0.0);
            out.extend_from_slice(&l.to_le_bytes());
        }
        debug_assert_eq!(out.len(), HEADER_LEN);
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self, CliError> {
        if bytes.len() < HEADER_LEN {
            return Err(CliError::Raw(format!("{} bytes, shorter than the header", bytes.len())));
        }
        if &bytes[..8] != MAGIC {
            return Err(CliError::Raw("bad magic".into()));
        }
        let u32_at = |o: usize| u32::from_le_bytes(bytes[o..o + 4].try_into().unwrap());
        let u64_at = |o: usize| u64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let f64_at = |o: usize| f64::from_le_bytes(bytes[o..o + 8].try_into().unwrap());
        let version = u32_at(8);
        if version != VERSION {
            return Err(CliError::Raw(format!("unsupported version {version}")));
        }
        let d = u32_at(12) as usize;
        if !(1..=3).contains(&d) {
            return Err(CliError::Raw(format!("{d} axes")));
        }
        let dims: Vec<usize> = (0..d).map(|a| u64_at(16 + 8 * a) as usize).collect();
        let lengths: Vec<f64> = (0..d).map(|a| f64_at(40 + 8 * a)).collect();
        let n = dims
            .iter()
            .try_fold(1usize, |acc, &x| acc.checked_mul(x))
            .ok_or_else(|| CliError::Raw("dims overflow".into()))?;
        let payload = &bytes[HEADER_LEN..];
        if payload.len() != 8 * n {
            return Err(CliError::Raw(format!(
                "payload of {} bytes, expected {}",
                payload.len(),
                8 * n
            )));
        }
        let values = payload
            .chunks_exact(8)
            .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
            .collect();
        Self::new(&dims, &lengths, values)
    }

    pub fn write_to(&self, mut w: impl Write) -> std::io::Result<()> {
        w.write_all(&self.encode())
    }

    pub fn read_from(mut r: impl Read) -> Result<Self, CliError> {
        let mut bytes = Vec::new();
        r.read_to_end(&mut bytes).map_err(|e| CliError::Raw(e.to_string()))?;
        Self::decode(&bytes)
    }
}
