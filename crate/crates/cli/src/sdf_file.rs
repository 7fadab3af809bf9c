//! Binary container for baked SDF grids.
//!
//! Layout, little-endian: magic `SDFG`, `u32` version, origin as three `f64`,
//! resolution `f64`, dims as three `u32`, then `nx·ny·nz` `f32` values with x
//! varying fastest.

use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};
use contact_grasp_core::sdf::SdfGrid;
use contact_grasp_core::Vec3;

pub const MAGIC: &[u8; 4] = b"SDFG";
pub const VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum SdfFileError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error("not an SDF grid file (bad magic)")]
    BadMagic,
    #[error("unsupported SDF grid version {0}")]
    Version(u32),
    #[error("invalid grid: {0}")]
    Grid(#[from] contact_grasp_core::Error),
}

pub fn write_grid<W: Write>(grid: &SdfGrid, mut w: W) -> io::Result<()> {
    w.write_all(MAGIC)?;
    w.write_u32::<LittleEndian>(VERSION)?;
    for v in grid.origin().iter() {
        w.write_f64::<LittleEndian>(*v)?;
    }
    w.write_f64::<LittleEndian>(grid.resolution())?;
    for d in grid.dims() {
        let d = u32::try_from(d)
            .map_err(|_| io::Error::new(io::ErrorKind::InvalidInput, "grid too large"))?;
        w.write_u32::<LittleEndian>(d)?;
    }
    for v in grid.values() {
        w.write_f32::<LittleEndian>(*v)?;
    }
    w.flush()
}

pub fn read_grid<R: Read>(mut r: R) -> Result<SdfGrid, SdfFileError> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(SdfFileError::BadMagic);
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != VERSION {
        return Err(SdfFileError::Version(version));
    }
    let mut origin = Vec3::zeros();
    for a in 0..3 {
        origin[a] = r.read_f64::<LittleEndian>()?;
    }
    let resolution = r.read_f64::<LittleEndian>()?;
    let mut dims = [0usize; 3];
    for d in &mut dims {
        *d = r.read_u32::<LittleEndian>()? as usize;
    }
    let count = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
    let count =
        count.ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "grid dims overflow"))?;
    let mut values = vec![0f32; count];
    r.read_f32_into::<LittleEndian>(&mut values)?;
    Ok(SdfGrid::new(origin, resolution, dims, values)?)
}

pub fn write_grid_file(grid: &SdfGrid, path: &Path) -> io::Result<()> {
    write_grid(grid, BufWriter::new(File::create(path)?))
}

pub fn read_grid_file(path: &Path) -> Result<SdfGrid, SdfFileError> {
    read_grid(BufReader::new(File::open(path)?))
}
