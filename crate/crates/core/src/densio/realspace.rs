use super::{put_header_geometry, read_header_geometry, Cursor, DensioError};
use crate::crystal::{DensityField, Grid};
use std::fs;
use std::path::Path;

const MAGIC: &[u8; 4] = b"RHR1";

pub fn encode_realspace(field: &DensityField) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(4 + 12 + 72 + 8 * grid.len());
    put_header_geometry(&mut out, MAGIC, grid.dims(), grid.cell());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

pub fn decode_realspace(bytes: &[u8]) -> Result<DensityField, DensioError> {
    let mut c = Cursor::new(bytes);
    let (dims, cell) = read_header_geometry(&mut c, MAGIC)?;
    let grid = Grid::new(cell, dims).map_err(|e| DensioError::Parse(e.to_string()))?;
    if c.remaining() != 8 * grid.len() {
        return Err(DensioError::Parse(format!(
            "expected {} values, found {} bytes",
            grid.len(),
            c.remaining()
        )));
    }
    let values = (0..grid.len()).map(|_| c.f64()).collect::<Result<Vec<_>, _>>()?;
    c.finish()?;
    DensityField::new(grid, values).map_err(|e| DensioError::Parse(e.to_string()))
}

pub fn write_realspace(field: &DensityField, path: &Path) -> Result<(), DensioError> {
    fs::write(path, encode_realspace(field))?;
    Ok(())
}

pub fn read_realspace(path: &Path) -> Result<DensityField, DensioError> {
    decode_realspace(&fs::read(path)?)
}
