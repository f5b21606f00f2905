use super::{put_header_geometry, read_header_geometry, Cursor, DensioError};
use crate::crystal::{fft_forward, fft_inverse, gvectors_within, within_cutoff, Cell, DensityField, Grid, Spectrum};
use num_complex::Complex64;
use std::collections::HashMap;
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 4] = b"RHO1";
const RECORD_BYTES: usize = 28;
/// Largest |ρ(G) − conj ρ(−G)| accepted on read, relative to max|ρ(G)|.
pub const HERMITIAN_TOLERANCE: f64 = 1e-10;
/// Coefficients are rounded to 2^(⌊log2 max|c|⌋ − QUANTUM_BITS), so that
/// re-encoding a decoded file reproduces it byte for byte.
const QUANTUM_BITS: i32 = 44;

#[derive(Debug, Clone, PartialEq)]
pub struct ReciprocalHeader {
    pub dims: [usize; 3],
    pub cell: Cell,
    pub ecutrho: f64,
    pub count: usize,
}

fn quantum(max_abs: f64) -> f64 {
    if max_abs > 0.0 {
        2f64.powi(max_abs.log2().floor() as i32 - QUANTUM_BITS)
    } else {
        1.0
    }
}

/// FFT of `field` restricted to the cutoff sphere, Hermitian-symmetrized
/// and quantized.
pub fn encode_reciprocal(field: &DensityField, ecutrho: f64) -> Result<Vec<u8>, DensioError> {
    if !(ecutrho > 0.0 && ecutrho.is_finite()) {
        return Err(DensioError::Codec(format!("invalid ecutrho {ecutrho}")));
    }
    let grid = field.grid();
    let gvecs = gvectors_within(grid.cell(), ecutrho);
    if let Some(g) = gvecs.iter().find(|g| !grid.holds(g.miller)) {
        return Err(DensioError::Codec(format!("grid {:?} cannot hold Miller index {:?}", grid.dims(), g.miller)));
    }
    let spec = fft_forward(field);
    let neg = |m: [i32; 3]| [-m[0], -m[1], -m[2]];
    let coeffs: Vec<Complex64> = gvecs
        .iter()
        .map(|g| 0.5 * (spec.get(g.miller) + spec.get(neg(g.miller)).conj()))
        .collect();
    let max_abs = coeffs.iter().map(|c| c.re.abs().max(c.im.abs())).fold(0.0, f64::max);
    let q = quantum(max_abs);
    let mut out = Vec::with_capacity(4 + 12 + 72 + 16 + RECORD_BYTES * gvecs.len());
    put_header_geometry(&mut out, MAGIC, grid.dims(), grid.cell());
    out.extend_from_slice(&ecutrho.to_le_bytes());
    out.extend_from_slice(&(gvecs.len() as u64).to_le_bytes());
    for (g, c) in gvecs.iter().zip(&coeffs) {
        let im = if g.miller == [0, 0, 0] { 0.0 } else { c.im };
        for m in g.miller {
            out.extend_from_slice(&m.to_le_bytes());
        }
        // Adding 0.0 turns −0 into +0.
        out.extend_from_slice(&((c.re / q).round() * q + 0.0).to_le_bytes());
        out.extend_from_slice(&((im / q).round() * q + 0.0).to_le_bytes());
    }
    Ok(out)
}

/// Parses and validates a `RHO1` buffer into its header and a Miller-keyed
/// coefficient list.
fn parse(bytes: &[u8]) -> Result<(ReciprocalHeader, Vec<([i32; 3], Complex64)>), DensioError> {
    let mut c = Cursor::new(bytes);
    let (dims, cell) = read_header_geometry(&mut c, MAGIC)?;
    let ecutrho = c.f64()?;
    if !(ecutrho > 0.0 && ecutrho.is_finite()) {
        return Err(DensioError::Parse(format!("invalid ecutrho {ecutrho}")));
    }
    let count = c.u64()? as usize;
    if count.checked_mul(RECORD_BYTES) != Some(c.remaining()) {
        return Err(DensioError::Parse(format!(
            "header declares {count} records but {} bytes follow",
            c.remaining()
        )));
    }
    let mut records = Vec::with_capacity(count);
    let mut index = HashMap::with_capacity(count);
    for i in 0..count {
        let m = [c.i32()?, c.i32()?, c.i32()?];
        let v = Complex64::new(c.f64()?, c.f64()?);
        if !(v.re.is_finite() && v.im.is_finite()) {
            return Err(DensioError::Parse(format!("non-finite coefficient at {m:?}")));
        }
        let kin = 0.5 * cell.gvector(m).norm_squared();
        if m != [0, 0, 0] && !within_cutoff(kin, ecutrho) {
            return Err(DensioError::Corrupt(format!("{m:?} lies outside the cutoff sphere")));
        }
        if index.insert(m, i).is_some() {
            return Err(DensioError::Corrupt(format!("duplicate record {m:?}")));
        }
        records.push((m, v));
    }
    c.finish()?;
    match index.get(&[0, 0, 0]) {
        Some(&i) if records[i].1.im == 0.0 => {}
        Some(_) => return Err(DensioError::Corrupt("(0,0,0) record has nonzero imaginary part".into())),
        None => return Err(DensioError::Corrupt("missing (0,0,0) record".into())),
    }
    let scale = records.iter().map(|(_, v)| v.norm()).fold(0.0, f64::max);
    for (m, v) in &records {
        let partner = index
            .get(&[-m[0], -m[1], -m[2]])
            .ok_or_else(|| DensioError::Corrupt(format!("{m:?} has no -G partner")))?;
        let w = records[*partner].1;
        if (v - w.conj()).norm() > HERMITIAN_TOLERANCE * scale {
            return Err(DensioError::Corrupt(format!("Hermitian symmetry violated at {m:?}")));
        }
    }
    let header = ReciprocalHeader {
        dims,
        cell,
        ecutrho,
        count,
    };
    Ok((header, records))
}

/// Inverse FFT of the stored coefficients onto `grid`; modes outside the
/// file are zero.
pub fn decode_reciprocal(bytes: &[u8], grid: &Grid) -> Result<DensityField, DensioError> {
    let (header, records) = parse(bytes)?;
    let same_cell = header
        .cell
        .rows()
        .iter()
        .flatten()
        .zip(grid.cell().rows().iter().flatten())
        .all(|(a, b)| (a - b).abs() <= 1e-12 * a.abs().max(1.0));
    if !same_cell {
        return Err(DensioError::Codec("file cell differs from target grid cell".into()));
    }
    let mut spec = Spectrum::zeros(grid.clone());
    for (m, v) in records {
        if !grid.holds(m) {
            return Err(DensioError::Codec(format!("grid {:?} cannot hold Miller index {m:?}", grid.dims())));
        }
        spec.set(m, v);
    }
    Ok(fft_inverse(&spec))
}

pub fn write_reciprocal(field: &DensityField, ecutrho: f64, path: &Path) -> Result<(), DensioError> {
    fs::write(path, encode_reciprocal(field, ecutrho)?)?;
    Ok(())
}

pub fn read_reciprocal(path: &Path, grid: &Grid) -> Result<DensityField, DensioError> {
    decode_reciprocal(&fs::read(path)?, grid)
}

/// Reads onto the grid recorded in the file header.
pub fn read_reciprocal_native(path: &Path) -> Result<(ReciprocalHeader, DensityField), DensioError> {
    let bytes = fs::read(path)?;
    let (header, _) = parse(&bytes)?;
    let grid = Grid::new(header.cell.clone(), header.dims).map_err(|e| DensioError::Parse(e.to_string()))?;
    let field = decode_reciprocal(&bytes, &grid)?;
    Ok((header, field))
}
