//! Real and complex 2D fields on a periodic grid.
//!
//! Both field types store their values row-major. Kernels use the FFT origin
//! convention: index `(0, 0)` is the kernel center and negative offsets wrap to
//! the end of each axis.

mod fieldfile;
mod pgm;

pub use fieldfile::{
    decode_field, encode_field, load_field, load_image_field, load_spectral_field, save_field, Field,
    FieldKind,
};
pub use pgm::{clipped_fraction, load_pgm, parse_pgm, save_pgm};

use num_complex::Complex64;

use crate::error::{check_dims, Error, Result};

/// Real-valued 2D field: an image or a spatial kernel.
#[derive(Debug, Clone, PartialEq)]
pub struct ImageGrid {
    height: usize,
    width: usize,
    data: Vec<f64>,
}

impl ImageGrid {
    /// Builds a grid from row-major data. Rejects empty dimensions, length
    /// mismatches and non-finite values.
    pub fn new(height: usize, width: usize, data: Vec<f64>) -> Result<Self> {
        check_shape(height, width, data.len())?;
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(ImageGrid {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0, "grid dimensions must be positive");
        ImageGrid {
            height,
            width,
            data: vec![0.0; height * width],
        }
    }

    pub fn from_fn(height: usize, width: usize, mut f: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut data = Vec::with_capacity(height * width);
        for row in 0..height {
            for col in 0..width {
                data.push(f(row, col));
            }
        }
        Self::new(height, width, data)
    }

    /// Unit impulse at the kernel origin.
    pub fn delta(height: usize, width: usize) -> Self {
        let mut grid = Self::zeros(height, width);
        grid.data[0] = 1.0;
        grid
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.width + col]
    }

    /// Value at a signed offset from the origin, wrapping periodically.
    pub fn get_wrapped(&self, row: isize, col: isize) -> f64 {
        let r = row.rem_euclid(self.height as isize) as usize;
        let c = col.rem_euclid(self.width as isize) as usize;
        self.get(r, c)
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }

    pub fn mean(&self) -> f64 {
        self.sum() / self.data.len() as f64
    }

    /// Population variance (divides by the pixel count).
    pub fn variance(&self) -> f64 {
        let mean = self.mean();
        self.data.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / self.data.len() as f64
    }

    pub fn min(&self) -> f64 {
        self.data.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max(&self) -> f64 {
        self.data.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn squared_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum()
    }

    /// Largest absolute elementwise difference.
    pub fn max_abs_diff(&self, other: &ImageGrid) -> Result<f64> {
        check_dims(self.dims(), other.dims())?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Elementwise combination of two equally sized grids.
    pub fn zip_map(&self, other: &ImageGrid, f: impl Fn(f64, f64) -> f64) -> Result<ImageGrid> {
        check_dims(self.dims(), other.dims())?;
        let data = self.data.iter().zip(&other.data).map(|(&a, &b)| f(a, b)).collect();
        ImageGrid::new(self.height, self.width, data)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<ImageGrid> {
        ImageGrid::new(self.height, self.width, self.data.iter().map(|&v| f(v)).collect())
    }
}

/// Complex 2D field on the DFT frequency grid.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    height: usize,
    width: usize,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn new(height: usize, width: usize, data: Vec<Complex64>) -> Result<Self> {
        check_shape(height, width, data.len())?;
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        Ok(SpectralField {
            height,
            width,
            data,
        })
    }

    pub fn zeros(height: usize, width: usize) -> Self {
        assert!(height > 0 && width > 0, "grid dimensions must be positive");
        SpectralField {
            height,
            width,
            data: vec![Complex64::new(0.0, 0.0); height * width],
        }
    }

    /// Lifts a real field onto the complex grid with zero imaginary parts.
    pub fn from_real(grid: &ImageGrid) -> Self {
        SpectralField {
            height: grid.height,
            width: grid.width,
            data: grid.data.iter().map(|&v| Complex64::new(v, 0.0)).collect(),
        }
    }

    /// Crate-internal constructor for buffers already known to be finite.
    pub(crate) fn from_raw(height: usize, width: usize, data: Vec<Complex64>) -> Self {
        debug_assert_eq!(data.len(), height * width);
        SpectralField {
            height,
            width,
            data,
        }
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn data(&self) -> &[Complex64] {
        &self.data
    }

    pub fn into_data(self) -> Vec<Complex64> {
        self.data
    }

    pub fn get(&self, row: usize, col: usize) -> Complex64 {
        self.data[row * self.width + col]
    }

    pub fn max_norm(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.norm()))
    }

    pub fn squared_norm(&self) -> f64 {
        self.data.iter().map(|v| v.norm_sqr()).sum()
    }

    /// Largest `|F(-i,-j) - conj(F(i,j))|` relative to the largest magnitude
    /// in the field. Zero for an all-zero field.
    pub fn hermitian_deviation(&self) -> f64 {
        let scale = self.max_norm();
        if scale == 0.0 {
            return 0.0;
        }
        let (h, w) = self.dims();
        let mut worst: f64 = 0.0;
        for row in 0..h {
            let mirror_row = (h - row) % h;
            for col in 0..w {
                let mirror_col = (w - col) % w;
                let a = self.data[row * w + col];
                let b = self.data[mirror_row * w + mirror_col];
                worst = worst.max((b - a.conj()).norm());
            }
        }
        worst / scale
    }

    pub fn is_hermitian(&self, tolerance: f64) -> bool {
        self.hermitian_deviation() <= tolerance
    }

    /// Largest absolute elementwise difference.
    pub fn max_abs_diff(&self, other: &SpectralField) -> Result<f64> {
        check_dims(self.dims(), other.dims())?;
        Ok(self
            .data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm())))
    }
}

fn check_shape(height: usize, width: usize, len: usize) -> Result<()> {
    if height == 0 || width == 0 {
        return Err(Error::Argument(format!(
            "grid dimensions must be positive, got {height}x{width}"
        )));
    }
    let expected = height.checked_mul(width).ok_or_else(|| {
        Error::Argument(format!("grid dimensions {height}x{width} overflow"))
    })?;
    if expected != len {
        return Err(Error::Argument(format!(
            "data length {len} does not match {height}x{width}"
        )));
    }
    Ok(())
}

/// Extracts the `h`x`w` window centered on the kernel origin.
///
/// Crop position `(r, c)` reads the source at signed offset
/// `(r - h/2, c - w/2)` wrapped periodically, so the origin lands at
/// `(h/2, w/2)` of the crop. Cropping to full size is the half-period
/// circular shift used for display.
pub fn center_crop(grid: &ImageGrid, h: usize, w: usize) -> Result<ImageGrid> {
    if h == 0 || h > grid.height || w == 0 || w > grid.width {
        return Err(Error::Argument(format!(
            "crop {h}x{w} outside 1..={}x1..={}",
            grid.height, grid.width
        )));
    }
    let (half_h, half_w) = ((h / 2) as isize, (w / 2) as isize);
    ImageGrid::from_fn(h, w, |r, c| {
        grid.get_wrapped(r as isize - half_h, c as isize - half_w)
    })
}

/// Places a small centered kernel into a `height`x`width` grid using the
/// origin convention of [`center_crop`] (inverse of cropping).
pub fn embed_centered(kernel: &ImageGrid, height: usize, width: usize) -> Result<ImageGrid> {
    if kernel.height > height || kernel.width > width {
        return Err(Error::Argument(format!(
            "kernel {}x{} does not fit in {height}x{width}",
            kernel.height, kernel.width
        )));
    }
    let mut data = vec![0.0; height * width];
    let (half_h, half_w) = ((kernel.height / 2) as isize, (kernel.width / 2) as isize);
    for r in 0..kernel.height {
        for c in 0..kernel.width {
            let row = (r as isize - half_h).rem_euclid(height as isize) as usize;
            let col = (c as isize - half_w).rem_euclid(width as isize) as usize;
            data[row * width + col] = kernel.get(r, c);
        }
    }
    ImageGrid::new(height, width, data)
}
