//! Binary density codecs and 2-D projections.
//!
//! Both formats are little-endian. `RHO1` stores reciprocal coefficients in
//! the `fft_forward` convention, ρ(G) = (1/J)Σ_r ρ(r)e^{-iG·r}, for every G in
//! the ½|G|² ≤ ecutrho sphere (both G and −G). `RHR1` stores real-space
//! values in the canonical grid layout.

mod projection;
mod realspace;
mod reciprocal;

pub use projection::{project_density, write_projection, Projection};
pub use realspace::{decode_realspace, encode_realspace, read_realspace, write_realspace};
pub use reciprocal::{
    decode_reciprocal, encode_reciprocal, read_reciprocal, read_reciprocal_native, write_reciprocal, ReciprocalHeader,
    HERMITIAN_TOLERANCE,
};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum DensioError {
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse: {0}")]
    Parse(String),
    #[error("corrupt density: {0}")]
    Corrupt(String),
    #[error("codec: {0}")]
    Codec(String),
    #[error("image: {0}")]
    Image(String),
}

/// Strict little-endian reader over a byte buffer.
pub(crate) struct Cursor<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Self {
        Cursor { buf, pos: 0 }
    }

    pub(crate) fn take(&mut self, n: usize) -> Result<&'a [u8], DensioError> {
        let end = self.pos.checked_add(n).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| DensioError::Parse(format!("truncated at byte {}", self.pos)))?;
        let out = &self.buf[self.pos..end];
        self.pos = end;
        Ok(out)
    }

    pub(crate) fn u32(&mut self) -> Result<u32, DensioError> {
        Ok(u32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn i32(&mut self) -> Result<i32, DensioError> {
        Ok(i32::from_le_bytes(self.take(4)?.try_into().unwrap()))
    }

    pub(crate) fn u64(&mut self) -> Result<u64, DensioError> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn f64(&mut self) -> Result<f64, DensioError> {
        Ok(f64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }

    pub(crate) fn remaining(&self) -> usize {
        self.buf.len() - self.pos
    }

    pub(crate) fn finish(&self) -> Result<(), DensioError> {
        match self.remaining() {
            0 => Ok(()),
            n => Err(DensioError::Parse(format!("{n} trailing bytes"))),
        }
    }
}

pub(crate) fn read_header_geometry(c: &mut Cursor, magic: &[u8; 4]) -> Result<([usize; 3], crate::crystal::Cell), DensioError> {
    if c.take(4)? != magic {
        return Err(DensioError::Parse(format!("bad magic, expected {}", String::from_utf8_lossy(magic))));
    }
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = c.u32()? as usize;
        if *d == 0 {
            return Err(DensioError::Parse("zero grid dimension".into()));
        }
    }
    let mut rows = [[0.0; 3]; 3];
    for row in &mut rows {
        for v in row.iter_mut() {
            *v = c.f64()?;
        }
    }
    let cell = crate::crystal::Cell::from_rows(rows).map_err(|e| DensioError::Parse(format!("cell: {e}")))?;
    Ok((dims, cell))
}

pub(crate) fn put_header_geometry(out: &mut Vec<u8>, magic: &[u8; 4], dims: [usize; 3], cell: &crate::crystal::Cell) {
    out.extend_from_slice(magic);
    for d in dims {
        out.extend_from_slice(&(d as u32).to_le_bytes());
    }
    for row in cell.rows() {
        for v in row {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
}
