//! Periodic box, Fourier frequencies and the multi-dimensional transform.
//!
//! Real fields are stored row-major with the last axis contiguous. Spectra use
//! the half-complex layout of a real-to-complex transform: the last axis keeps
//! `N/2 + 1` modes, every other axis keeps all `N` modes in FFT order.
//!
//! Normalization: forward is unnormalized, inverse divides by the node count.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use realfft::{ComplexToReal, RealFftPlanner, RealToComplex};
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

pub type Spectrum = Vec<Complex64>;

/// Periodic box `[0, L_1) x ... x [0, L_d)` sampled on `N_1 x ... x N_d` nodes.
pub struct Grid {
    dims: Vec<usize>,
    lengths: Vec<f64>,
    freq: Vec<Vec<f64>>,
    spec_dims: Vec<usize>,
    laplacian: Vec<f64>,
    derivative: Vec<Vec<f64>>,
    parseval_weight: Vec<f64>,
    r2c: Arc<dyn RealToComplex<f64>>,
    c2r: Arc<dyn ComplexToReal<f64>>,
    forward_axes: Vec<Arc<dyn Fft<f64>>>,
    inverse_axes: Vec<Arc<dyn Fft<f64>>>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid")
            .field("dims", &self.dims)
            .field("lengths", &self.lengths)
            .finish()
    }
}

/// Signed integer frequency index of FFT slot `j` on an axis of `n` nodes,
/// in `[-n/2, n/2 - 1]`.
pub fn mode_index(j: usize, n: usize) -> i64 {
    if j < n / 2 {
        j as i64
    } else {
        j as i64 - n as i64
    }
}

impl Grid {
    pub fn new(dims: &[usize], lengths: &[f64]) -> Result<Self> {
        let d = dims.len();
        if !(1..=3).contains(&d) {
            return Err(Error::InvalidGrid(format!("dimension {d} not in 1..=3")));
        }
        if lengths.len() != d {
            return Err(Error::InvalidGrid(format!(
                "{} lengths for {d} axes",
                lengths.len()
            )));
        }
        for (&n, &l) in dims.iter().zip(lengths) {
            if n < 4 || n % 2 != 0 {
                return Err(Error::InvalidGrid(format!(
                    "node count {n} must be even and >= 4"
                )));
            }
            if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidGrid(format!("box length {l} must be positive")));
            }
        }

        let freq: Vec<Vec<f64>> = dims
            .iter()
            .zip(lengths)
            .map(|(&n, &l)| (0..n).map(|j| mode_index(j, n) as f64 / l).collect())
            .collect();

        let mut spec_dims = dims.to_vec();
        spec_dims[d - 1] = dims[d - 1] / 2 + 1;
        let spec_len: usize = spec_dims.iter().product();

        // Per-axis mode data in the half-complex layout. The last axis runs
        // over 0..=N/2, where N/2 is the Nyquist slot.
        let axis_xi = |axis: usize, j: usize| -> (f64, bool) {
            let n = dims[axis];
            let k = if axis == d - 1 { j as i64 } else { mode_index(j, n) };
            let nyquist = k.unsigned_abs() as usize == n / 2;
            (k as f64 / lengths[axis], nyquist)
        };

        let mut laplacian = vec![0.0; spec_len];
        let mut derivative = vec![vec![0.0; spec_len]; d];
        let mut parseval_weight = vec![0.0; spec_len];
        let n_last = dims[d - 1];
        for (flat, lap) in laplacian.iter_mut().enumerate() {
            let idx = unflatten(flat, &spec_dims);
            let mut xi2 = 0.0;
            for axis in 0..d {
                let (xi, nyquist) = axis_xi(axis, idx[axis]);
                xi2 += xi * xi;
                derivative[axis][flat] = if nyquist { 0.0 } else { 2.0 * PI * xi };
            }
            *lap = -4.0 * PI * PI * xi2;
            let j = idx[d - 1];
            parseval_weight[flat] = if j == 0 || j == n_last / 2 { 1.0 } else { 2.0 };
        }

        let mut real_planner = RealFftPlanner::<f64>::new();
        let r2c = real_planner.plan_fft_forward(n_last);
        let c2r = real_planner.plan_fft_inverse(n_last);
        let mut planner = FftPlanner::<f64>::new();
        let forward_axes = dims[..d - 1]
            .iter()
            .map(|&n| planner.plan_fft_forward(n))
            .collect();
        let inverse_axes = dims[..d - 1]
            .iter()
            .map(|&n| planner.plan_fft_inverse(n))
            .collect();

        Ok(Self {
            dims: dims.to_vec(),
            lengths: lengths.to_vec(),
            freq,
            spec_dims,
            laplacian,
            derivative,
            parseval_weight,
            r2c,
            c2r,
            forward_axes,
            inverse_axes,
        })
    }

    /// Square/cubic box of side `length` with `n` nodes per axis.
    pub fn uniform(dim: usize, n: usize, length: f64) -> Result<Self> {
        Self::new(&vec![n; dim], &vec![length; dim])
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn lengths(&self) -> &[f64] {
        &self.lengths
    }

    /// Frequencies `k_i / L_i` of axis `axis` in FFT order.
    pub fn freq(&self, axis: usize) -> &[f64] {
        &self.freq[axis]
    }

    pub fn len(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spec_dims(&self) -> &[usize] {
        &self.spec_dims
    }

    pub fn spec_len(&self) -> usize {
        self.laplacian.len()
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        self.lengths[axis] / self.dims[axis] as f64
    }

    pub fn min_spacing(&self) -> f64 {
        (0..self.dim())
            .map(|a| self.spacing(a))
            .fold(f64::INFINITY, f64::min)
    }

    pub fn cell_volume(&self) -> f64 {
        (0..self.dim()).map(|a| self.spacing(a)).product()
    }

    pub fn volume(&self) -> f64 {
        self.lengths.iter().product()
    }

    /// Laplacian symbol `-4 pi^2 |xi|^2` over the spectral layout.
    pub fn laplacian_symbol(&self) -> &[f64] {
        &self.laplacian
    }

    /// Real factor `2 pi xi_axis` of the derivative symbol `2 pi i xi_axis`,
    /// zero on the Nyquist slot.
    pub fn derivative_symbol(&self, axis: usize) -> &[f64] {
        &self.derivative[axis]
    }

    /// Multiplicity of each stored mode in the full spectrum (1 or 2).
    pub fn parseval_weight(&self) -> &[f64] {
        &self.parseval_weight
    }

    pub fn mean(&self, field: &[f64]) -> f64 {
        field.iter().sum::<f64>() / field.len() as f64
    }

    pub fn integrate(&self, field: &[f64]) -> f64 {
        field.iter().sum::<f64>() * self.cell_volume()
    }

    /// Multi-index of a flat real-space index.
    pub fn index(&self, flat: usize) -> [usize; 3] {
        unflatten(flat, &self.dims)
    }

    pub fn flat(&self, idx: &[usize]) -> usize {
        idx.iter()
            .zip(&self.dims)
            .fold(0, |acc, (&i, &n)| acc * n + i)
    }

    /// Node coordinates of a flat index (unused axes are 0).
    pub fn point(&self, flat: usize) -> [f64; 3] {
        let idx = self.index(flat);
        let mut p = [0.0; 3];
        for a in 0..self.dim() {
            p[a] = idx[a] as f64 * self.spacing(a);
        }
        p
    }

    /// Evaluates `f` at every node.
    pub fn sample(&self, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        (0..self.len()).map(|i| f(self.point(i))).collect()
    }

    /// Minimum-image displacement along `axis`.
    pub fn wrap(&self, axis: usize, dx: f64) -> f64 {
        let l = self.lengths[axis];
        dx - l * (dx / l).round()
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, real: &[f64]) -> Spectrum {
        assert_eq!(real.len(), self.len(), "field size does not match grid");
        let d = self.dim();
        let n_last = self.dims[d - 1];
        let h_last = self.spec_dims[d - 1];
        let rows = self.len() / n_last;
        let mut out = vec![Complex64::new(0.0, 0.0); self.spec_len()];
        let mut row = self.r2c.make_input_vec();
        let mut scratch = self.r2c.make_scratch_vec();
        for r in 0..rows {
            row.copy_from_slice(&real[r * n_last..(r + 1) * n_last]);
            self.r2c
                .process_with_scratch(&mut row, &mut out[r * h_last..(r + 1) * h_last], &mut scratch)
                .expect("r2c transform sizes are fixed at plan time");
        }
        for axis in 0..d - 1 {
            self.axis_transform(&mut out, axis, &self.forward_axes[axis]);
        }
        out
    }

    /// Inverse transform, divided by the node count.
    pub fn inverse(&self, mut spec: Spectrum) -> Vec<f64> {
        assert_eq!(spec.len(), self.spec_len(), "spectrum size does not match grid");
        let d = self.dim();
        for axis in 0..d - 1 {
            self.axis_transform(&mut spec, axis, &self.inverse_axes[axis]);
        }
        let n_last = self.dims[d - 1];
        let h_last = self.spec_dims[d - 1];
        let rows = self.len() / n_last;

        // The DC and Nyquist slots of each row must be real for a real field;
        // any imaginary residue there is roundoff and is discarded.
        let mut out = vec![0.0; self.len()];
        let mut scratch = self.c2r.make_scratch_vec();
        for r in 0..rows {
            let row = &mut spec[r * h_last..(r + 1) * h_last];
            row[0].im = 0.0;
            row[h_last - 1].im = 0.0;
            self.c2r
                .process_with_scratch(row, &mut out[r * n_last..(r + 1) * n_last], &mut scratch)
                .expect("c2r transform sizes are fixed at plan time");
        }
        let scale = 1.0 / self.len() as f64;
        out.iter_mut().for_each(|v| *v *= scale);
        out
    }

    fn axis_transform(&self, data: &mut [Complex64], axis: usize, fft: &Arc<dyn Fft<f64>>) {
        let shape = &self.spec_dims;
        let n = shape[axis];
        let stride: usize = shape[axis + 1..].iter().product();
        let outer: usize = shape[..axis].iter().product();
        let block = n * stride;
        let mut buf = vec![Complex64::new(0.0, 0.0); block];
        let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
        for o in 0..outer {
            let base = o * block;
            for k in 0..n {
                for i in 0..stride {
                    buf[i * n + k] = data[base + k * stride + i];
                }
            }
            fft.process_with_scratch(&mut buf, &mut scratch);
            for k in 0..n {
                for i in 0..stride {
                    data[base + k * stride + i] = buf[i * n + k];
                }
            }
        }
    }
}

fn unflatten(mut flat: usize, dims: &[usize]) -> [usize; 3] {
    let mut idx = [0usize; 3];
    for a in (0..dims.len()).rev() {
        idx[a] = flat % dims[a];
        flat /= dims[a];
    }
    idx
}
