//! Field output: composite field, CSV text and colormapped PNG.

use std::io::Write;

use spectral_ch::Grid;

use crate::CliError;

/// `sum_k (k - 1) u_k` with phases numbered from 1, so the first phase maps to 0.
pub fn composite(phases: &[&[f64]]) -> Vec<f64> {
    let n = phases.first().map_or(0, |p| p.len());
    let mut out = vec![0.0; n];
    for (k, u) in phases.iter().enumerate().skip(1) {
        for (o, v) in out.iter_mut().zip(u.iter()) {
            *o += k as f64 * v;
        }
    }
    out
}

/// One line per row of the last axis. In 3D the blocks of constant first
/// index are separated by a blank line. Values use the shortest text that
/// reads back to the same `f64`.
pub fn field_csv(dims: &[usize], values: &[f64]) -> String {
    let last = *dims.last().unwrap_or(&values.len());
    let block = if dims.len() == 3 { dims[1] * dims[2] } else { usize::MAX };
    let mut out = String::with_capacity(values.len() * 12);
    for (r, row) in values.chunks(last.max(1)).enumerate() {
        if r > 0 && block != usize::MAX && (r * last).is_multiple_of(block) {
            out.push('\n');
        }
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

const PALETTE: [[f64; 3]; 5] = [
    [68.0, 1.0, 84.0],
    [59.0, 82.0, 139.0],
    [33.0, 145.0, 140.0],
    [94.0, 201.0, 98.0],
    [253.0, 231.0, 37.0],
];

/// Maps `t in [0, 1]` (clamped) to an 8-bit RGB colour.
pub fn colormap(t: f64) -> [u8; 3] {
    let t = if t.is_finite() { t.clamp(0.0, 1.0) } else { 0.0 };
    let x = t * (PALETTE.len() - 1) as f64;
    let i = (x.floor() as usize).min(PALETTE.len() - 2);
    let f = x - i as f64;
    let mut c = [0u8; 3];
    for ch in 0..3 {
        c[ch] = (PALETTE[i][ch] + f * (PALETTE[i + 1][ch] - PALETTE[i][ch])).round() as u8;
    }
    c
}

/// A 2D view of a field: the whole field in 2D, the plane through the middle
/// of axis 1 in 3D, and a band of repeated rows in 1D. The vertical axis
/// (the last one) points up.
type Sampler<'a> = Box<dyn Fn(usize, usize) -> f64 + 'a>;

pub fn raster(grid: &Grid, values: &[f64], lo: f64, hi: f64) -> (u32, u32, Vec<u8>) {
    let dims = grid.dims();
    let (w, h, at): (usize, usize, Sampler) = match dims.len() {
        1 => (dims[0], 16, Box::new(|x, _| values[x])),
        2 => (dims[0], dims[1], Box::new(|x, y| values[x * dims[1] + y])),
        _ => {
            let j = dims[1] / 2;
            (dims[0], dims[2], Box::new(move |x, y| values[(x * dims[1] + j) * dims[2] + y]))
        }
    };
    let span = if hi > lo { hi - lo } else { 1.0 };
    let mut rgb = Vec::with_capacity(w * h * 3);
    for row in 0..h {
        let y = h - 1 - row;
        for x in 0..w {
            rgb.extend_from_slice(&colormap((at(x, y) - lo) / span));
        }
    }
    (w as u32, h as u32, rgb)
}

pub fn write_png(out: impl Write, width: u32, height: u32, rgb: &[u8]) -> Result<(), CliError> {
    let mut enc = png::Encoder::new(out, width, height);
    enc.set_color(png::ColorType::Rgb);
    enc.set_depth(png::BitDepth::Eight);
    let mut writer = enc.write_header().map_err(|e| CliError::Export(e.to_string()))?;
    writer.write_image_data(rgb).map_err(|e| CliError::Export(e.to_string()))?;
    writer.finish().map_err(|e| CliError::Export(e.to_string()))
}

/// PNG of the composite of `phases`, scaled to `[0, L - 1]`.
pub fn composite_png(grid: &Grid, phases: &[&[f64]], out: impl Write) -> Result<(), CliError> {
    let c = composite(phases);
    let top = (phases.len().max(2) - 1) as f64;
    let (w, h, rgb) = raster(grid, &c, 0.0, top);
    write_png(out, w, h, &rgb)
}
