//! Sentence embedding output file: `"EMB1" | u32 version=1 | u32 count |
//! u32 dim | f32 values, row-major`, little-endian.

use std::fs;
use std::path::Path;

use crate::error::{Error, Result};

pub const EMB_MAGIC: [u8; 4] = *b"EMB1";
pub const EMB_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingFile {
    pub dim: usize,
    /// Row-major, `count * dim` values.
    pub values: Vec<f32>,
}

impl EmbeddingFile {
    pub fn from_rows<R: AsRef<[f64]>>(dim: usize, rows: &[R]) -> Result<Self> {
        let mut values = Vec::with_capacity(rows.len() * dim);
        for r in rows {
            let r = r.as_ref();
            if r.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: r.len(),
                });
            }
            values.extend(r.iter().map(|&x| x as f32));
        }
        Ok(Self { dim, values })
    }

    pub fn count(&self) -> usize {
        self.values.len().checked_div(self.dim).unwrap_or(0)
    }

    pub fn row(&self, i: usize) -> &[f32] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(16 + self.values.len() * 4);
        out.extend_from_slice(&EMB_MAGIC);
        out.extend_from_slice(&EMB_VERSION.to_le_bytes());
        out.extend_from_slice(&(self.count() as u32).to_le_bytes());
        out.extend_from_slice(&(self.dim as u32).to_le_bytes());
        for v in &self.values {
            out.extend_from_slice(&v.to_le_bytes());
        }
        out
    }

    pub fn decode(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < 16 {
            return Err(Error::Truncated { what: "EMB header" });
        }
        let magic: [u8; 4] = bytes[..4].try_into().unwrap();
        if magic != EMB_MAGIC {
            return Err(Error::BadMagic {
                expected: EMB_MAGIC,
                found: magic,
            });
        }
        let word = |i: usize| u32::from_le_bytes(bytes[i..i + 4].try_into().unwrap()) as usize;
        let version = word(4) as u32;
        if version != EMB_VERSION {
            return Err(Error::UnsupportedVersion(version));
        }
        let (count, dim) = (word(8), word(12));
        let expected = 16 + count * dim * 4;
        if bytes.len() < expected {
            return Err(Error::Truncated { what: "EMB values" });
        }
        if bytes.len() > expected {
            return Err(Error::Mismatch("trailing bytes after EMB values".into()));
        }
        let values = bytes[16..]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()))
            .collect();
        Ok(Self { dim, values })
    }

    pub fn write(&self, path: impl AsRef<Path>) -> Result<()> {
        fs::write(path, self.encode())?;
        Ok(())
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        Self::decode(&fs::read(path)?)
    }
}
