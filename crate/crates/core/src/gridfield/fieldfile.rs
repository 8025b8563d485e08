//! Binary field files.
//!
//! Layout (all integers and floats little-endian):
//!
//! | offset | size | content                                   |
//! |--------|------|-------------------------------------------|
//! | 0      | 8    | magic `SCLREGF1`                          |
//! | 8      | 1    | kind: 0 = real, 1 = complex               |
//! | 9      | 8    | height (u64)                              |
//! | 17     | 8    | width (u64)                               |
//! | 25     | ...  | row-major f64 values; complex as re, im   |
//!
//! The payload must have exactly `height * width * (1 + kind) * 8` bytes.

use std::fs;
use std::path::Path;

use num_complex::Complex64;

use super::{ImageGrid, SpectralField};
use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"SCLREGF1";
const HEADER_LEN: usize = 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Real = 0,
    Complex = 1,
}

impl FieldKind {
    fn name(self) -> &'static str {
        match self {
            FieldKind::Real => "real",
            FieldKind::Complex => "complex",
        }
    }
}

/// Either kind of field, as read from disk.
#[derive(Debug, Clone, PartialEq)]
pub enum Field {
    Real(ImageGrid),
    Complex(SpectralField),
}

impl Field {
    pub fn kind(&self) -> FieldKind {
        match self {
            Field::Real(_) => FieldKind::Real,
            Field::Complex(_) => FieldKind::Complex,
        }
    }
}

impl From<ImageGrid> for Field {
    fn from(g: ImageGrid) -> Self {
        Field::Real(g)
    }
}

impl From<SpectralField> for Field {
    fn from(s: SpectralField) -> Self {
        Field::Complex(s)
    }
}

pub fn encode_field(field: &Field) -> Vec<u8> {
    let (kind, h, w) = match field {
        Field::Real(g) => (FieldKind::Real, g.height(), g.width()),
        Field::Complex(s) => (FieldKind::Complex, s.height(), s.width()),
    };
    let per = if kind == FieldKind::Real { 8 } else { 16 };
    let mut out = Vec::with_capacity(HEADER_LEN + h * w * per);
    out.extend_from_slice(MAGIC);
    out.push(kind as u8);
    out.extend_from_slice(&(h as u64).to_le_bytes());
    out.extend_from_slice(&(w as u64).to_le_bytes());
    match field {
        Field::Real(g) => {
            for v in g.data() {
                out.extend_from_slice(&v.to_le_bytes());
            }
        }
        Field::Complex(s) => {
            for v in s.data() {
                out.extend_from_slice(&v.re.to_le_bytes());
                out.extend_from_slice(&v.im.to_le_bytes());
            }
        }
    }
    out
}

pub fn decode_field(bytes: &[u8]) -> Result<Field> {
    if bytes.len() < HEADER_LEN {
        return Err(Error::format(bytes.len(), "truncated header"));
    }
    if &bytes[..8] != MAGIC {
        return Err(Error::format(0, "bad magic"));
    }
    let kind = match bytes[8] {
        0 => FieldKind::Real,
        1 => FieldKind::Complex,
        k => return Err(Error::format(8, format!("unknown kind byte {k}"))),
    };
    let read_u64 = |at: usize| u64::from_le_bytes(bytes[at..at + 8].try_into().unwrap());
    let (h, w) = (read_u64(9), read_u64(17));
    if h == 0 || w == 0 {
        return Err(Error::format(9, "zero dimension"));
    }
    let per: u64 = if kind == FieldKind::Real { 8 } else { 16 };
    let expected = h
        .checked_mul(w)
        .and_then(|n| n.checked_mul(per))
        .ok_or_else(|| Error::format(9, "dimensions overflow"))?;
    let payload = &bytes[HEADER_LEN..];
    if payload.len() as u64 != expected {
        return Err(Error::format(
            bytes.len(),
            format!("payload is {} bytes, expected {expected}", payload.len()),
        ));
    }
    let (h, w) = (h as usize, w as usize);
    let floats = payload
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()));
    let field = match kind {
        FieldKind::Real => Field::Real(ImageGrid::new(h, w, floats.collect())?),
        FieldKind::Complex => {
            let values: Vec<f64> = floats.collect();
            let data = values
                .chunks_exact(2)
                .map(|p| Complex64::new(p[0], p[1]))
                .collect();
            Field::Complex(SpectralField::new(h, w, data)?)
        }
    };
    Ok(field)
}

pub fn save_field(field: impl Into<Field>, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    fs::write(path, encode_field(&field.into())).map_err(|e| Error::io(path, e))
}

pub fn load_field(path: impl AsRef<Path>) -> Result<Field> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_field(&bytes)
}

pub fn load_image_field(path: impl AsRef<Path>) -> Result<ImageGrid> {
    match load_field(path)? {
        Field::Real(g) => Ok(g),
        other => Err(Error::KindMismatch {
            expected: FieldKind::Real.name(),
            found: other.kind().name(),
        }),
    }
}

pub fn load_spectral_field(path: impl AsRef<Path>) -> Result<SpectralField> {
    match load_field(path)? {
        Field::Complex(s) => Ok(s),
        other => Err(Error::KindMismatch {
            expected: FieldKind::Complex.name(),
            found: other.kind().name(),
        }),
    }
}
