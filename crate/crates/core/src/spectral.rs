//! 2D discrete Fourier transforms and the identities between the spatial and
//! spectral forms of the objective.
//!
//! The forward transform is unnormalized and the inverse carries `1/(H*W)`,
//! so Parseval reads `<u, v> = c_N * <û, v̂>` with `c_N = 1/(H*W)`.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{check_dims, Error, Result};
use crate::gridfield::{ImageGrid, SpectralField};

/// Relative Hermitian deviation above which an inverse transform refuses its input.
pub const HERMITIAN_TOLERANCE: f64 = 1e-9;

/// Precomputed row and column transforms for one grid size.
#[derive(Clone)]
pub struct DftPlan {
    height: usize,
    width: usize,
    row_forward: Arc<dyn Fft<f64>>,
    row_inverse: Arc<dyn Fft<f64>>,
    col_forward: Arc<dyn Fft<f64>>,
    col_inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for DftPlan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DftPlan")
            .field("height", &self.height)
            .field("width", &self.width)
            .finish()
    }
}

impl DftPlan {
    pub fn new(height: usize, width: usize) -> Result<Self> {
        if height == 0 || width == 0 {
            return Err(Error::Argument(format!(
                "plan dimensions must be positive, got {height}x{width}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(DftPlan {
            height,
            width,
            row_forward: planner.plan_fft_forward(width),
            row_inverse: planner.plan_fft_inverse(width),
            col_forward: planner.plan_fft_forward(height),
            col_inverse: planner.plan_fft_inverse(height),
        })
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.height, self.width)
    }

    /// The constant `c_N` in `<u, v>_spatial = c_N * <û, v̂>_spectral`.
    pub fn normalization(&self) -> f64 {
        1.0 / (self.height * self.width) as f64
    }

    pub fn dft2(&self, grid: &ImageGrid) -> Result<SpectralField> {
        check_dims(self.dims(), grid.dims())?;
        let mut buf: Vec<Complex64> = grid.data().iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut buf, true);
        Ok(SpectralField::from_raw(self.height, self.width, buf))
    }

    /// Forward transform of an arbitrary complex field.
    pub fn dft2_complex(&self, field: &SpectralField) -> Result<SpectralField> {
        check_dims(self.dims(), field.dims())?;
        let mut buf = field.data().to_vec();
        self.transform(&mut buf, true);
        Ok(SpectralField::from_raw(self.height, self.width, buf))
    }

    /// Inverse transform back to a real field. The input must be Hermitian to
    /// within [`HERMITIAN_TOLERANCE`]; anything else means the spectrum does
    /// not belong to a real signal.
    pub fn idft2(&self, field: &SpectralField) -> Result<ImageGrid> {
        check_dims(self.dims(), field.dims())?;
        let deviation = field.hermitian_deviation();
        if deviation > HERMITIAN_TOLERANCE {
            return Err(Error::Symmetry { deviation });
        }
        let buf = self.inverse_raw(field);
        let scale = buf.iter().fold(0.0f64, |m, v| m.max(v.norm()));
        let residue = buf.iter().fold(0.0f64, |m, v| m.max(v.im.abs()));
        if scale > 0.0 && residue / scale > HERMITIAN_TOLERANCE {
            return Err(Error::Symmetry {
                deviation: residue / scale,
            });
        }
        ImageGrid::new(self.height, self.width, buf.into_iter().map(|v| v.re).collect())
    }

    /// Normalized inverse transform without the symmetry check.
    pub fn idft2_complex(&self, field: &SpectralField) -> Result<SpectralField> {
        check_dims(self.dims(), field.dims())?;
        Ok(SpectralField::from_raw(self.height, self.width, self.inverse_raw(field)))
    }

    fn inverse_raw(&self, field: &SpectralField) -> Vec<Complex64> {
        let mut buf = field.data().to_vec();
        self.transform(&mut buf, false);
        let norm = self.normalization();
        buf.iter_mut().for_each(|v| *v *= norm);
        buf
    }

    /// Circular convolution via the DFT product.
    pub fn circ_convolve(&self, image: &ImageGrid, kernel: &ImageGrid) -> Result<ImageGrid> {
        check_dims(image.dims(), kernel.dims())?;
        let a = self.dft2(image)?;
        let k = self.dft2(kernel)?;
        self.apply_spectrum(&a, &k)
    }

    /// Inverse transform of `a ⊙ k`, both given as spectra of real fields.
    pub fn apply_spectrum(&self, a: &SpectralField, k: &SpectralField) -> Result<ImageGrid> {
        check_dims(a.dims(), k.dims())?;
        let product: Vec<Complex64> = a.data().iter().zip(k.data()).map(|(x, y)| x * y).collect();
        self.idft2(&SpectralField::from_raw(self.height, self.width, product))
    }

    fn transform(&self, buf: &mut [Complex64], forward: bool) {
        let (h, w) = (self.height, self.width);
        let (rows, cols) = if forward {
            (&self.row_forward, &self.col_forward)
        } else {
            (&self.row_inverse, &self.col_inverse)
        };
        let scratch_len = rows
            .get_inplace_scratch_len()
            .max(cols.get_inplace_scratch_len());
        let mut scratch = vec![Complex64::new(0.0, 0.0); scratch_len];
        if w > 1 {
            rows.process_with_scratch(buf, &mut scratch);
        }
        if h > 1 {
            let mut transposed = vec![Complex64::new(0.0, 0.0); h * w];
            transpose(buf, &mut transposed, h, w);
            cols.process_with_scratch(&mut transposed, &mut scratch);
            transpose(&transposed, buf, w, h);
        }
    }
}

fn transpose(src: &[Complex64], dst: &mut [Complex64], rows: usize, cols: usize) {
    for r in 0..rows {
        for c in 0..cols {
            dst[c * rows + r] = src[r * cols + c];
        }
    }
}

/// Circular convolution of two equally sized real fields.
pub fn circ_convolve(image: &ImageGrid, kernel: &ImageGrid) -> Result<ImageGrid> {
    check_dims(image.dims(), kernel.dims())?;
    DftPlan::new(image.height(), image.width())?.circ_convolve(image, kernel)
}

/// Discrete Dirichlet energy of a spectral field: the sum over all bins of
/// squared forward differences along both axes, with periodic wrap.
pub fn spectral_gradient_energy(field: &SpectralField) -> f64 {
    let (h, w) = field.dims();
    let data = field.data();
    let mut energy = 0.0;
    for row in 0..h {
        let down = ((row + 1) % h) * w;
        for col in 0..w {
            let here = data[row * w + col];
            energy += (data[down + col] - here).norm_sqr();
            energy += (data[row * w + (col + 1) % w] - here).norm_sqr();
        }
    }
    energy
}

/// Spatial weights `w(x) = 4 sin²(π x₀/H) + 4 sin²(π x₁/W)`.
///
/// For a real kernel `u` with unnormalized spectrum `û`,
/// `spectral_gradient_energy(û) = H*W * Σ w(x) u(x)²`. Near the origin
/// `w(x) ≈ (2π)² (x₀²/H² + x₁²/W²)`, growing with distance from the kernel
/// center and peaking at the half period.
pub fn gradient_energy_weights(height: usize, width: usize) -> ImageGrid {
    let axis = |n: usize| -> Vec<f64> {
        (0..n)
            .map(|i| {
                let s = (PI * i as f64 / n as f64).sin();
                4.0 * s * s
            })
            .collect()
    };
    let (wr, wc) = (axis(height), axis(width));
    ImageGrid::from_fn(height, width, |r, c| wr[r] + wc[c]).expect("weights are finite")
}
