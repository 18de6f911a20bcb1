//! Binary checkpoints: `"NLES"`, version `u32`, dim `u32`, n `u32`, time `f64`,
//! field count `u32`, then one block of little-endian `(re, im)` `f64` pairs per
//! component in storage order.

use std::io::{Read, Write};

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use num_complex::Complex64;

use super::{Grid, SpectralField, VectorField};
use crate::error::{Error, Result};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"NLES";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct Checkpoint {
    pub time: f64,
    pub fields: Vec<SpectralField>,
}

impl Checkpoint {
    pub fn from_vector(time: f64, v: &VectorField) -> Self {
        Checkpoint {
            time,
            fields: v.components().to_vec(),
        }
    }

    pub fn into_vector(self) -> Result<VectorField> {
        VectorField::new(self.fields)
    }
}

fn io_err(e: std::io::Error) -> Error {
    Error::Checkpoint(e.to_string())
}

pub fn write_checkpoint<W: Write>(mut w: W, checkpoint: &Checkpoint) -> Result<()> {
    let grid = checkpoint
        .fields
        .first()
        .map(|f| f.grid())
        .ok_or_else(|| Error::Checkpoint("no fields to write".into()))?;
    w.write_all(CHECKPOINT_MAGIC).map_err(io_err)?;
    w.write_u32::<LittleEndian>(CHECKPOINT_VERSION).map_err(io_err)?;
    w.write_u32::<LittleEndian>(grid.dim() as u32).map_err(io_err)?;
    w.write_u32::<LittleEndian>(grid.n() as u32).map_err(io_err)?;
    w.write_f64::<LittleEndian>(checkpoint.time).map_err(io_err)?;
    w.write_u32::<LittleEndian>(checkpoint.fields.len() as u32)
        .map_err(io_err)?;
    for field in &checkpoint.fields {
        if field.grid() != grid {
            return Err(Error::GridMismatch(grid, field.grid()));
        }
        for c in field.coeffs() {
            w.write_f64::<LittleEndian>(c.re).map_err(io_err)?;
            w.write_f64::<LittleEndian>(c.im).map_err(io_err)?;
        }
    }
    w.flush().map_err(io_err)
}

pub fn read_checkpoint<R: Read>(mut r: R) -> Result<Checkpoint> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic).map_err(io_err)?;
    if &magic != CHECKPOINT_MAGIC {
        return Err(Error::Checkpoint(format!("bad magic {magic:?}")));
    }
    let version = r.read_u32::<LittleEndian>().map_err(io_err)?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::Checkpoint(format!("unsupported version {version}")));
    }
    let dim = r.read_u32::<LittleEndian>().map_err(io_err)? as usize;
    let n = r.read_u32::<LittleEndian>().map_err(io_err)? as usize;
    let grid = Grid::new(dim, n)?;
    let time = r.read_f64::<LittleEndian>().map_err(io_err)?;
    let count = r.read_u32::<LittleEndian>().map_err(io_err)? as usize;
    let mut fields = Vec::with_capacity(count);
    for _ in 0..count {
        let mut coeffs = Vec::with_capacity(grid.spectral_len());
        for _ in 0..grid.spectral_len() {
            let re = r.read_f64::<LittleEndian>().map_err(io_err)?;
            let im = r.read_f64::<LittleEndian>().map_err(io_err)?;
            coeffs.push(Complex64::new(re, im));
        }
        fields.push(SpectralField::from_coeffs(grid, coeffs)?);
    }
    Ok(Checkpoint { time, fields })
}
