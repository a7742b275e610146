//! Field persistence: flat binary payload plus a JSON sidecar.
//!
//! Layout of the `.field` file, all little-endian:
//! 8-byte magic `PSFIELD1`, then `u32` dim, points-per-axis, rank, component
//! count, then `f64` box length, then `ncomp × nodes` `f64` values in
//! component-major order. The sidecar `<path>.json` repeats the header in
//! readable form.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::field::FieldVariant;
use crate::grid::Grid;
use crate::real::Real;

const MAGIC: &[u8; 8] = b"PSFIELD1";

/// Sidecar metadata.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FieldMeta {
    pub dim: usize,
    pub points_per_axis: usize,
    pub box_length: f64,
    pub rank: u32,
    pub ncomp: usize,
}

fn io_err(path: &Path, source: std::io::Error) -> Error {
    Error::Io {
        path: path.display().to_string(),
        source,
    }
}

/// Write a field and its sidecar (`<path>.json`).
pub fn write_field<T: Real>(path: &Path, field: &FieldVariant<T>) -> Result<()> {
    let grid = *field.grid();
    let rank = field.rank();
    let data = field.data();
    let ncomp = grid.dim().pow(rank);

    let mut buf = Vec::with_capacity(8 + 4 * 4 + 8 + data.len() * 8);
    buf.extend_from_slice(MAGIC);
    buf.extend_from_slice(&(grid.dim() as u32).to_le_bytes());
    buf.extend_from_slice(&(grid.points_per_axis() as u32).to_le_bytes());
    buf.extend_from_slice(&rank.to_le_bytes());
    buf.extend_from_slice(&(ncomp as u32).to_le_bytes());
    buf.extend_from_slice(&grid.box_length().to_le_bytes());
    for &v in data {
        buf.extend_from_slice(&v.as_f64().to_le_bytes());
    }
    let mut f = fs::File::create(path).map_err(|e| io_err(path, e))?;
    f.write_all(&buf).map_err(|e| io_err(path, e))?;

    let meta = FieldMeta {
        dim: grid.dim(),
        points_per_axis: grid.points_per_axis(),
        box_length: grid.box_length(),
        rank,
        ncomp,
    };
    let sidecar = sidecar_path(path);
    fs::write(&sidecar, serde_json::to_string_pretty(&meta)?)
        .map_err(|e| io_err(&sidecar, e))?;
    Ok(())
}

/// `<path>.json`.
pub fn sidecar_path(path: &Path) -> std::path::PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    std::path::PathBuf::from(s)
}

/// Read a field written by [`write_field`].
pub fn read_field<T: Real>(path: &Path) -> Result<FieldVariant<T>> {
    let mut f = fs::File::open(path).map_err(|e| io_err(path, e))?;
    let mut buf = Vec::new();
    f.read_to_end(&mut buf).map_err(|e| io_err(path, e))?;
    let fail = |reason: &str| Error::FieldFormat {
        path: path.display().to_string(),
        reason: reason.to_string(),
    };
    if buf.len() < 8 + 16 + 8 || &buf[..8] != MAGIC {
        return Err(fail("missing or short header"));
    }
    let u32_at = |off: usize| u32::from_le_bytes(buf[off..off + 4].try_into().unwrap());
    let dim = u32_at(8) as usize;
    let n = u32_at(12) as usize;
    let rank = u32_at(16);
    let ncomp = u32_at(20) as usize;
    let box_length = f64::from_le_bytes(buf[24..32].try_into().unwrap());
    let grid = Grid::new(dim, n, box_length)?;
    if ncomp != dim.pow(rank) {
        return Err(fail("component count does not match rank"));
    }
    let nodes = grid.node_count();
    let expect = 32 + ncomp * nodes * 8;
    if buf.len() != expect {
        return Err(fail("payload size does not match header"));
    }
    let mut data = Vec::with_capacity(ncomp * nodes);
    for chunk in buf[32..].chunks_exact(8) {
        let v = f64::from_le_bytes(chunk.try_into().unwrap());
        if !v.is_finite() {
            return Err(fail("non-finite value in payload"));
        }
        data.push(T::of(v));
    }
    FieldVariant::from_rank(&grid, rank, data)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{Field, VectorField};

    #[test]
    fn roundtrip_vector_field() {
        let dir = std::env::temp_dir().join(format!("psio-{}", std::process::id()));
        fs::create_dir_all(&dir).unwrap();
        let g = Grid::new(2, 8, 2.5).unwrap();
        let v = VectorField::<f64>::from_fn(&g, |x| vec![x[0] - 1.0, x[1] * 3.0]);
        let path = dir.join("v.field");
        write_field(&path, &FieldVariant::Vector(v.clone())).unwrap();
        assert!(sidecar_path(&path).exists());
        let back = read_field::<f64>(&path).unwrap();
        match back {
            FieldVariant::Vector(w) => {
                assert_eq!(w.grid(), v.grid());
                assert_eq!(w.data(), v.data());
            }
            _ => panic!("wrong rank"),
        }
        fs::remove_dir_all(&dir).ok();
    }
}
