//! Portable graymap IO. Reads P2 and P5 with 8- or 16-bit samples, writes P5.

use std::fs;
use std::path::Path;

use super::ImageGrid;
use crate::error::{Error, Result};

/// Reads a PGM file, scaling intensities to `[0, 1]` by the declared maxval.
pub fn load_pgm(path: impl AsRef<Path>) -> Result<ImageGrid> {
    let path = path.as_ref();
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_pgm(&bytes)
}

struct Cursor<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn skip_whitespace_and_comments(&mut self) {
        while let Some(&b) = self.bytes.get(self.pos) {
            if b == b'#' {
                while let Some(&c) = self.bytes.get(self.pos) {
                    self.pos += 1;
                    if c == b'\n' || c == b'\r' {
                        break;
                    }
                }
            } else if b.is_ascii_whitespace() {
                self.pos += 1;
            } else {
                break;
            }
        }
    }

    fn read_uint(&mut self, what: &str) -> Result<u64> {
        self.skip_whitespace_and_comments();
        let start = self.pos;
        while self.bytes.get(self.pos).is_some_and(u8::is_ascii_digit) {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(Error::format(start, format!("expected {what}")));
        }
        std::str::from_utf8(&self.bytes[start..self.pos])
            .ok()
            .and_then(|s| s.parse().ok())
            .ok_or_else(|| Error::format(start, format!("{what} out of range")))
    }
}

/// Parses an in-memory PGM (P2 or P5).
pub fn parse_pgm(bytes: &[u8]) -> Result<ImageGrid> {
    let binary = match bytes.get(..2) {
        Some(b"P5") => true,
        Some(b"P2") => false,
        _ => return Err(Error::format(0, "missing P2/P5 magic")),
    };
    let mut cur = Cursor { bytes, pos: 2 };
    let width_at = cur.pos;
    let width = cur.read_uint("width")? as usize;
    let height = cur.read_uint("height")? as usize;
    if width == 0 || height == 0 {
        return Err(Error::format(width_at, "zero image dimension"));
    }
    let maxval_at = cur.pos;
    let maxval = cur.read_uint("maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(Error::format(maxval_at, format!("unsupported maxval {maxval}")));
    }
    let count = width
        .checked_mul(height)
        .ok_or_else(|| Error::format(width_at, "image dimensions overflow"))?;
    let scale = maxval as f64;
    let mut data = Vec::with_capacity(count);

    if binary {
        match bytes.get(cur.pos) {
            Some(b) if b.is_ascii_whitespace() => cur.pos += 1,
            _ => return Err(Error::format(cur.pos, "expected whitespace after maxval")),
        }
        let sample_bytes = if maxval > 255 { 2 } else { 1 };
        let needed = count * sample_bytes;
        let payload = &bytes[cur.pos..];
        if payload.len() < needed {
            return Err(Error::format(
                bytes.len(),
                format!("truncated payload: {} of {needed} bytes", payload.len()),
            ));
        }
        for (i, chunk) in payload[..needed].chunks_exact(sample_bytes).enumerate() {
            let v = if sample_bytes == 2 {
                u16::from_be_bytes([chunk[0], chunk[1]]) as u64
            } else {
                chunk[0] as u64
            };
            if v > maxval {
                return Err(Error::format(cur.pos + i * sample_bytes, "sample exceeds maxval"));
            }
            data.push(v as f64 / scale);
        }
    } else {
        for _ in 0..count {
            let at = cur.pos;
            let v = match cur.read_uint("sample") {
                Ok(v) => v,
                Err(_) if at >= bytes.len() || cur.pos >= bytes.len() => {
                    return Err(Error::format(
                        bytes.len(),
                        format!("truncated payload: {} of {count} samples", data.len()),
                    ))
                }
                Err(e) => return Err(e),
            };
            if v > maxval {
                return Err(Error::format(at, "sample exceeds maxval"));
            }
            data.push(v as f64 / scale);
        }
    }
    ImageGrid::new(height, width, data)
}

/// Fraction of pixels strictly outside `[lo, hi]`.
pub fn clipped_fraction(grid: &ImageGrid, lo: f64, hi: f64) -> f64 {
    let clipped = grid.data().iter().filter(|&&v| v < lo || v > hi).count();
    clipped as f64 / grid.len() as f64
}

/// Writes an 8-bit binary PGM after clamping to `[lo, hi]` and mapping that
/// range affinely onto `0..=255` (floor). Returns the clipped fraction.
pub fn save_pgm(grid: &ImageGrid, path: impl AsRef<Path>, lo: f64, hi: f64) -> Result<f64> {
    if !(lo < hi) {
        return Err(Error::Argument(format!("clip range [{lo}, {hi}] is empty")));
    }
    let path = path.as_ref();
    let mut out = format!("P5\n{} {}\n255\n", grid.width(), grid.height()).into_bytes();
    out.extend(grid.data().iter().map(|&v| quantize(v, lo, hi)));
    fs::write(path, out).map_err(|e| Error::io(path, e))?;
    Ok(clipped_fraction(grid, lo, hi))
}

fn quantize(v: f64, lo: f64, hi: f64) -> u8 {
    let t = (v.clamp(lo, hi) - lo) / (hi - lo);
    (t * 255.0).floor().clamp(0.0, 255.0) as u8
}
