use super::DensioError;
use crate::crystal::DensityField;
use std::fs;
use std::path::{Path, PathBuf};

/// Column sums of a density resampled onto an n×n×n cube; `values[i + n·j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub n: usize,
    pub values: Vec<f64>,
}

impl Projection {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i + self.n * j]
    }
}

/// Periodic trilinear interpolation at fractional coordinates `f`.
fn trilinear(field: &DensityField, f: [f64; 3]) -> f64 {
    let grid = field.grid();
    let dims = grid.dims();
    let mut lo = [0usize; 3];
    let mut hi = [0usize; 3];
    let mut t = [0.0; 3];
    for a in 0..3 {
        let x = f[a] * dims[a] as f64;
        let fl = x.floor();
        t[a] = x - fl;
        lo[a] = (fl as i64).rem_euclid(dims[a] as i64) as usize;
        hi[a] = (lo[a] + 1) % dims[a];
    }
    let v = field.values();
    let mut acc = 0.0;
    for corner in 0..8 {
        let mut w = 1.0;
        let mut idx = [0usize; 3];
        for a in 0..3 {
            if corner >> a & 1 == 1 {
                w *= t[a];
                idx[a] = hi[a];
            } else {
                w *= 1.0 - t[a];
                idx[a] = lo[a];
            }
        }
        acc += w * v[grid.index(idx)];
    }
    acc
}

/// Resamples onto an n³ cube (n = largest grid dimension) and sums along
/// the third axis.
pub fn project_density(field: &DensityField) -> Projection {
    let n = field.grid().dims().into_iter().max().unwrap_or(1);
    let inv = 1.0 / n as f64;
    let mut values = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            values[i + n * j] = (0..n)
                .map(|k| trilinear(field, [i as f64 * inv, j as f64 * inv, k as f64 * inv]))
                .sum();
        }
    }
    Projection { n, values }
}

/// Writes `<stem>.csv` (row j holds values for i = 0..n) and a min-max
/// normalized 8-bit grayscale `<stem>.png`. Returns both paths.
pub fn write_projection(p: &Projection, stem: &Path) -> Result<(PathBuf, PathBuf), DensioError> {
    let csv_path = stem.with_extension("csv");
    let png_path = stem.with_extension("png");
    let mut text = String::new();
    for j in 0..p.n {
        let row: Vec<String> = (0..p.n).map(|i| format!("{:.16e}", p.at(i, j))).collect();
        text.push_str(&row.join(","));
        text.push('\n');
    }
    fs::write(&csv_path, text)?;
    let lo = p.values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = p.values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let span = hi - lo;
    let pixels: Vec<u8> = p
        .values
        .iter()
        .map(|&v| if span > 0.0 { ((v - lo) / span * 255.0).round() as u8 } else { 0 })
        .collect();
    let img = image::GrayImage::from_raw(p.n as u32, p.n as u32, pixels).expect("pixel buffer matches size");
    img.save(&png_path).map_err(|e| DensioError::Image(e.to_string()))?;
    Ok((csv_path, png_path))
}
