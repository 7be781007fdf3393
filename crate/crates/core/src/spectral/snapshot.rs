//! Binary field snapshots.
//!
//! Layout: a 16-byte header (`b"LPTF"`, `u8` version = 1, `u8` d, `u16`
//! reserved, `u32` n, `u32` reserved) followed by `n^d` little-endian `f64`
//! values in row-major order.

use std::fs;
use std::io::{Read, Write};
use std::path::Path;

use super::field::PhysicalField;
use super::grid::TorusGrid;
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 4] = b"LPTF";
pub const VERSION: u8 = 1;
const HEADER_LEN: usize = 16;

/// Serialises a field into the snapshot byte layout.
pub fn encode(field: &PhysicalField) -> Vec<u8> {
    let grid = field.grid();
    let mut out = Vec::with_capacity(HEADER_LEN + 8 * grid.len());
    out.extend_from_slice(MAGIC);
    out.push(VERSION);
    out.push(grid.dim() as u8);
    out.extend_from_slice(&0u16.to_le_bytes());
    out.extend_from_slice(&(grid.n() as u32).to_le_bytes());
    out.extend_from_slice(&0u32.to_le_bytes());
    for v in field.values() {
        out.extend_from_slice(&v.to_le_bytes());
    }
    out
}

/// Parses the snapshot byte layout.
pub fn decode(bytes: &[u8]) -> Result<PhysicalField> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::Format(format!(
            "snapshot has {} bytes, shorter than the header",
            bytes.len()
        )));
    }
    if &bytes[..4] != MAGIC {
        return Err(Error::Format("bad snapshot magic".into()));
    }
    if bytes[4] != VERSION {
        return Err(Error::Format(format!("unsupported snapshot version {}", bytes[4])));
    }
    let dim = bytes[5] as usize;
    let n = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let grid = TorusGrid::new(dim, n)?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() != 8 * grid.len() {
        return Err(Error::Format(format!(
            "snapshot payload has {} bytes, expected {}",
            payload.len(),
            8 * grid.len()
        )));
    }
    let values = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    PhysicalField::new(grid, values)
}

pub fn write(path: impl AsRef<Path>, field: &PhysicalField) -> Result<()> {
    let path = path.as_ref();
    let mut file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&encode(field)).map_err(|e| Error::io(path, e))
}

pub fn read(path: impl AsRef<Path>) -> Result<PhysicalField> {
    let path = path.as_ref();
    let mut bytes = Vec::new();
    fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let grid = TorusGrid::new(2, 8).unwrap();
        let bytes = encode(&PhysicalField::from_fn(grid, |x| x[0] - x[1]));
        assert_eq!(&bytes[..4], b"LPTF");
        assert_eq!(bytes[4], 1);
        assert_eq!(bytes[5], 2);
        assert_eq!(u32::from_le_bytes(bytes[8..12].try_into().unwrap()), 8);
        assert_eq!(bytes.len(), 16 + 64 * 8);
    }

    #[test]
    fn round_trip_is_bitwise() {
        let grid = TorusGrid::new(1, 16).unwrap();
        let f = PhysicalField::from_fn(grid, |x| (3.0 * x[0]).sin() / 7.0);
        assert_eq!(decode(&encode(&f)).unwrap(), f);
    }

    #[test]
    fn rejects_truncation_and_magic() {
        let grid = TorusGrid::new(1, 8).unwrap();
        let mut bytes = encode(&PhysicalField::zeros(grid));
        assert!(decode(&bytes[..bytes.len() - 1]).is_err());
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::Format(_))));
    }
}
