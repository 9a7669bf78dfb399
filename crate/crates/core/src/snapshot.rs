//! `CQNLS1` binary snapshots.
//!
//! Layout (all little-endian):
//!
//! ```text
//! offset  size  content
//! 0       6     magic "CQNLS1"
//! 6       8     Nx  (u64)
//! 14      8     Ny  (u64)
//! 22      8     Lx  (f64)
//! 30      8     Ly  (f64)
//! 38      8     t   (f64)
//! 46      16*N  (re, im) f64 pairs, row-major with x fastest
//! ```

use std::io::{Read, Write};
use std::path::Path;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{Field, Grid2D};

pub const MAGIC: &[u8; 6] = b"CQNLS1";
pub const HEADER_LEN: usize = 46;

pub fn encode(field: &Field, t: f64) -> Vec<u8> {
    let g = field.grid;
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * g.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&(g.nx as u64).to_le_bytes());
    out.extend_from_slice(&(g.ny as u64).to_le_bytes());
    out.extend_from_slice(&g.lx.to_le_bytes());
    out.extend_from_slice(&g.ly.to_le_bytes());
    out.extend_from_slice(&t.to_le_bytes());
    for v in &field.values {
        out.extend_from_slice(&v.re.to_le_bytes());
        out.extend_from_slice(&v.im.to_le_bytes());
    }
    out
}

fn read_u64(bytes: &[u8], offset: usize) -> u64 {
    u64::from_le_bytes(bytes[offset..offset + 8].try_into().expect("8 bytes"))
}

fn read_f64(bytes: &[u8], offset: usize) -> f64 {
    f64::from_le_bytes(bytes[offset..offset + 8].try_into().expect("8 bytes"))
}

/// Parses a snapshot, returning the field and its time stamp.
pub fn decode(bytes: &[u8]) -> Result<(Field, f64)> {
    let bad = |offset: usize, reason: &str| Error::Snapshot {
        offset: offset as u64,
        reason: reason.to_string(),
    };
    if bytes.len() < HEADER_LEN {
        return Err(bad(bytes.len(), "truncated header"));
    }
    if &bytes[..6] != MAGIC {
        return Err(bad(0, "bad magic"));
    }
    let nx = read_u64(bytes, 6) as usize;
    let ny = read_u64(bytes, 14) as usize;
    let grid = Grid2D::new(read_f64(bytes, 22), read_f64(bytes, 30), nx, ny)
        .map_err(|e| bad(6, &e.to_string()))?;
    let t = read_f64(bytes, 38);
    let expected = HEADER_LEN + 16 * grid.len();
    if bytes.len() != expected {
        return Err(bad(
            bytes.len().min(expected),
            &format!("payload length {} != {}", bytes.len(), expected),
        ));
    }
    let values = bytes[HEADER_LEN..]
        .chunks_exact(16)
        .map(|c| Complex64::new(read_f64(c, 0), read_f64(c, 8)))
        .collect();
    Ok((Field { grid, values }, t))
}

pub fn write(path: &Path, field: &Field, t: f64) -> Result<()> {
    let mut file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    file.write_all(&encode(field, t))
        .map_err(|e| Error::io(path, e))
}

pub fn read(path: &Path) -> Result<(Field, f64)> {
    let mut bytes = Vec::new();
    std::fs::File::open(path)
        .and_then(|mut f| f.read_to_end(&mut bytes))
        .map_err(|e| Error::io(path, e))?;
    decode(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_layout() {
        let g = Grid2D::new(1.5, 2.0, 8, 16).unwrap();
        let f = Field::from_fn(g, |x, y| Complex64::new(x, y));
        let bytes = encode(&f, 0.25);
        assert_eq!(bytes.len(), HEADER_LEN + 16 * 128);
        assert_eq!(&bytes[..6], b"CQNLS1");
        assert_eq!(bytes[6], 8);
        assert_eq!(bytes[14], 16);
        assert_eq!(&bytes[38..46], &0.25f64.to_le_bytes());
        // second sample is (x_1, y_0)
        let re = f64::from_le_bytes(bytes[62..70].try_into().unwrap());
        assert_eq!(re, g.x(1));
        let (back, t) = decode(&bytes).unwrap();
        assert_eq!(back, f);
        assert_eq!(t, 0.25);
    }

    #[test]
    fn rejects_corruption() {
        let g = Grid2D::new(1.0, 1.0, 8, 8).unwrap();
        let mut bytes = encode(&Field::zeros(g), 0.0);
        assert!(matches!(decode(&bytes[..20]), Err(Error::Snapshot { .. })));
        bytes.pop();
        assert!(matches!(decode(&bytes), Err(Error::Snapshot { .. })));
        bytes[0] = b'X';
        assert!(matches!(decode(&bytes), Err(Error::Snapshot { offset: 0, .. })));
    }
}
