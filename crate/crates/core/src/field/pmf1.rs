//! PMF1 binary field files.
//!
//! Layout: magic `PMF1`, little-endian `u32` x5 (Nt, Nx, Nx, Nx, components),
//! `f64` L, `f64` T, then the samples as little-endian `f64`. Samples run
//! t-major; inside a slice each component is a contiguous block with x
//! fastest, then y, then z.

use std::io::{Read, Write};
use std::path::Path;

use super::grid::Grid;
use super::history::SpaceTimeField;
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"PMF1";

pub fn write<W: Write>(field: &SpaceTimeField, mut w: W) -> Result<()> {
    let g = field.grid();
    w.write_all(MAGIC)?;
    for v in [g.nt, g.nx, g.nx, g.nx, field.components()] {
        let v = u32::try_from(v).map_err(|_| Error::Format(format!("dimension {v} exceeds u32")))?;
        w.write_all(&v.to_le_bytes())?;
    }
    w.write_all(&g.l.to_le_bytes())?;
    w.write_all(&g.t.to_le_bytes())?;
    let mut buf = Vec::with_capacity(field.values().len() * 8);
    for v in field.values() {
        buf.extend_from_slice(&v.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn read<R: Read>(mut r: R) -> Result<SpaceTimeField> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::Format("missing PMF1 magic".into()));
    }
    let mut dims = [0usize; 5];
    for d in dims.iter_mut() {
        let mut b = [0u8; 4];
        r.read_exact(&mut b)?;
        *d = u32::from_le_bytes(b) as usize;
    }
    if dims[1] != dims[2] || dims[1] != dims[3] {
        return Err(Error::Format(format!("non-cubic grid {:?}", &dims[1..4])));
    }
    let mut b8 = [0u8; 8];
    r.read_exact(&mut b8)?;
    let l = f64::from_le_bytes(b8);
    r.read_exact(&mut b8)?;
    let t = f64::from_le_bytes(b8);
    let grid = Grid::new(l, dims[1], t, dims[0])?;
    let count = grid.nt * grid.points() * dims[4];
    let mut raw = vec![0u8; count * 8];
    r.read_exact(&mut raw)?;
    let mut extra = [0u8; 1];
    if r.read(&mut extra)? != 0 {
        return Err(Error::Format("trailing bytes after samples".into()));
    }
    let values = raw
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().expect("8 bytes")))
        .collect();
    SpaceTimeField::from_values(grid, dims[4], values)
}

pub fn save(field: &SpaceTimeField, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write(field, std::io::BufWriter::new(f))
}

pub fn load(path: &Path) -> Result<SpaceTimeField> {
    let f = std::fs::File::open(path)?;
    read(std::io::BufReader::new(f))
}
