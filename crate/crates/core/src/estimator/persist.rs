//! On-disk statistics: a directory holding
//!
//! - `header.txt`: `scalereg-statistics 1`, then `height H`, `width W`,
//!   `n_pairs N`, one per line;
//! - `aa.field`: real field file with `Σ |â_i|²`;
//! - `ab.field`: complex field file with `Σ conj(â_i) b̂_i`.

use std::fs;
use std::path::Path;

use super::SufficientStatistics;
use crate::error::{Error, Result};
use crate::gridfield::{load_image_field, load_spectral_field, save_field};

const HEADER_MAGIC: &str = "scalereg-statistics 1";

pub fn save_statistics(stats: &SufficientStatistics, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let header = format!(
        "{HEADER_MAGIC}\nheight {}\nwidth {}\nn_pairs {}\n",
        stats.height(),
        stats.width(),
        stats.n_pairs()
    );
    let header_path = dir.join("header.txt");
    fs::write(&header_path, header).map_err(|e| Error::io(header_path, e))?;
    save_field(stats.aa().clone(), dir.join("aa.field"))?;
    save_field(stats.ab().clone(), dir.join("ab.field"))
}

pub fn load_statistics(dir: impl AsRef<Path>) -> Result<SufficientStatistics> {
    let dir = dir.as_ref();
    let header_path = dir.join("header.txt");
    let text = fs::read_to_string(&header_path).map_err(|e| Error::io(&header_path, e))?;
    let mut lines = text.lines();
    if lines.next().map(str::trim) != Some(HEADER_MAGIC) {
        return Err(Error::format(0, "statistics header has wrong magic line"));
    }
    let mut offset = HEADER_MAGIC.len() + 1;
    let mut field = |name: &str, line: Option<&str>| -> Result<usize> {
        let line = line.ok_or_else(|| Error::format(offset, format!("missing {name}")))?;
        let value = line
            .strip_prefix(name)
            .map(str::trim)
            .and_then(|v| v.parse().ok())
            .ok_or_else(|| Error::format(offset, format!("expected `{name} <integer>`")))?;
        offset += line.len() + 1;
        Ok(value)
    };
    let height = field("height", lines.next())?;
    let width = field("width", lines.next())?;
    let n_pairs = field("n_pairs", lines.next())?;

    let aa = load_image_field(dir.join("aa.field"))?;
    let ab = load_spectral_field(dir.join("ab.field"))?;
    if aa.dims() != (height, width) || ab.dims() != (height, width) {
        return Err(Error::format(
            0,
            format!("header declares {height}x{width} but fields disagree"),
        ));
    }
    SufficientStatistics::from_parts(aa, ab, n_pairs)
}
