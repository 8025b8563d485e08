//! Synthetic ground truth: zero-sum test kernels, smooth random textures and
//! SNR-calibrated Gaussian noise.
//!
//! All randomness comes from [`ChaCha8Rng`] seeded with a `u64`, with normal
//! deviates drawn through `rand_distr::StandardNormal`. Both algorithms are
//! fixed, so every generated field is bit-reproducible across platforms.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{check_dims, Error, Result};
use crate::gridfield::{ImageGrid, SpectralField};
use crate::spectral::DftPlan;

/// The RNG used everywhere in this crate.
pub type SynthRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> SynthRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Geometry of a zero-sum kernel: a positive disk around the origin and a
/// negative annulus around it, measured with periodic (wrapped) offsets.
///
/// A pixel at offset `d` from the origin is positive when `d <= positive_radius`
/// and negative when `negative_inner < d <= negative_outer`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroSumKernelSpec {
    pub height: usize,
    pub width: usize,
    pub positive_radius: f64,
    pub negative_inner: f64,
    pub negative_outer: f64,
}

impl ZeroSumKernelSpec {
    /// Kernel supported in the 11x11 window around the origin.
    pub fn compact(height: usize, width: usize) -> Self {
        ZeroSumKernelSpec {
            height,
            width,
            positive_radius: 2.0,
            negative_inner: 2.5,
            negative_outer: 5.0,
        }
    }

    /// Disk of 861 pixels inside an annulus of 9748 pixels, so the positive
    /// value is 9748/861. Needs at least a 119x119 grid.
    pub fn wide(height: usize, width: usize) -> Self {
        ZeroSumKernelSpec {
            height,
            width,
            positive_radius: 272.5f64.sqrt(),
            negative_inner: 325.5f64.sqrt(),
            negative_outer: 3433.5f64.sqrt(),
        }
    }

    fn validate(&self) -> Result<()> {
        if self.height == 0 || self.width == 0 {
            return Err(Error::Geometry("grid dimensions must be positive".into()));
        }
        let radii = [self.positive_radius, self.negative_inner, self.negative_outer];
        if radii.iter().any(|r| !r.is_finite() || *r < 0.0) {
            return Err(Error::Geometry(format!("radii must be finite and >= 0: {radii:?}")));
        }
        if self.negative_inner < self.positive_radius {
            return Err(Error::Geometry(format!(
                "annulus inner radius {} overlaps disk radius {}",
                self.negative_inner, self.positive_radius
            )));
        }
        Ok(())
    }

    /// Sign of the kernel at `(row, col)`: +1, -1 or 0.
    fn region(&self, row: usize, col: usize) -> i8 {
        let dr = wrapped_offset(row, self.height);
        let dc = wrapped_offset(col, self.width);
        let d2 = dr * dr + dc * dc;
        if d2 <= self.positive_radius * self.positive_radius {
            1
        } else if d2 > self.negative_inner * self.negative_inner
            && d2 <= self.negative_outer * self.negative_outer
        {
            -1
        } else {
            0
        }
    }

    /// Pixel counts `(positive, negative)`.
    pub fn counts(&self) -> Result<(usize, usize)> {
        self.validate()?;
        let (mut pos, mut neg) = (0, 0);
        for row in 0..self.height {
            for col in 0..self.width {
                match self.region(row, col) {
                    1 => pos += 1,
                    -1 => neg += 1,
                    _ => {}
                }
            }
        }
        if pos == 0 || neg == 0 {
            return Err(Error::Geometry(format!(
                "empty region: {pos} positive, {neg} negative pixels"
            )));
        }
        Ok((pos, neg))
    }

    /// Value shared by the positive pixels, `#negative / #positive`.
    pub fn positive_value(&self) -> Result<f64> {
        let (pos, neg) = self.counts()?;
        Ok(neg as f64 / pos as f64)
    }
}

fn wrapped_offset(index: usize, n: usize) -> f64 {
    if index <= n / 2 {
        index as f64
    } else {
        index as f64 - n as f64
    }
}

/// Kernel with `-1` on the annulus, `#neg/#pos` on the disk and `0` elsewhere.
pub fn make_zero_sum_kernel(spec: &ZeroSumKernelSpec) -> Result<ImageGrid> {
    let p = spec.positive_value()?;
    ImageGrid::from_fn(spec.height, spec.width, |r, c| match spec.region(r, c) {
        1 => p,
        -1 => -1.0,
        _ => 0.0,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseSpec {
    pub snr_db: f64,
    pub seed: u64,
}

/// Noise standard deviation giving the requested SNR, where signal power is
/// the per-pixel variance of the clean image. An infinite SNR gives zero
/// noise for any image.
pub fn snr_to_sigma(clean: &ImageGrid, snr_db: f64) -> Result<f64> {
    if snr_db.is_nan() {
        return Err(Error::Argument("SNR is NaN".into()));
    }
    if snr_db == f64::INFINITY {
        return Ok(0.0);
    }
    let power = clean.variance();
    if !(power > 0.0) {
        return Err(Error::DegenerateSignal);
    }
    Ok((power / 10f64.powf(snr_db / 10.0)).sqrt())
}

/// `clean + N(0, σ²)` per pixel with σ from [`snr_to_sigma`].
pub fn add_noise(clean: &ImageGrid, spec: &NoiseSpec) -> Result<ImageGrid> {
    let sigma = snr_to_sigma(clean, spec.snr_db)?;
    Ok(add_gaussian(clean, sigma, spec.seed))
}

fn add_gaussian(clean: &ImageGrid, sigma: f64, seed: u64) -> ImageGrid {
    let mut rng = rng_from_seed(seed);
    let data = clean
        .data()
        .iter()
        .map(|&v| {
            let z: f64 = StandardNormal.sample(&mut rng);
            v + sigma * z
        })
        .collect();
    ImageGrid::new(clean.height(), clean.width(), data).expect("noise is finite")
}

/// One generated training pair with its noiseless output.
#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticPair {
    pub input: ImageGrid,
    pub clean: ImageGrid,
    pub output: ImageGrid,
    pub sigma: f64,
}

/// Outputs `β_i = α_i ⊛ kernel + noise_i`, where image `i` uses noise seed
/// `spec.seed + i` (wrapping).
pub fn make_dataset(
    inputs: &[ImageGrid],
    kernel: &ImageGrid,
    spec: &NoiseSpec,
) -> Result<Vec<(ImageGrid, ImageGrid)>> {
    Ok(make_dataset_detailed(inputs, kernel, spec)?
        .into_iter()
        .map(|p| (p.input, p.output))
        .collect())
}

/// As [`make_dataset`], keeping the clean outputs and noise levels.
pub fn make_dataset_detailed(
    inputs: &[ImageGrid],
    kernel: &ImageGrid,
    spec: &NoiseSpec,
) -> Result<Vec<SyntheticPair>> {
    let Some(first) = inputs.first() else {
        return Ok(Vec::new());
    };
    let plan = DftPlan::new(first.height(), first.width())?;
    check_dims(plan.dims(), kernel.dims())?;
    let k = plan.dft2(kernel)?;
    inputs
        .iter()
        .enumerate()
        .map(|(i, input)| {
            check_dims(plan.dims(), input.dims())?;
            let clean = plan.apply_spectrum(&plan.dft2(input)?, &k)?;
            let sigma = snr_to_sigma(&clean, spec.snr_db)?;
            let output = add_gaussian(&clean, sigma, spec.seed.wrapping_add(i as u64));
            Ok(SyntheticPair {
                input: input.clone(),
                clean,
                output,
                sigma,
            })
        })
        .collect()
}

/// Gaussian random field with correlation length `correlation_length`
/// (pixels), normalized to zero mean and unit variance.
///
/// White noise is filtered by `1 / (1 + ℓ² κ²)` with `κ²` the symbol of the
/// discrete Laplacian, which decays only polynomially, so no frequency bin
/// other than DC is suppressed to zero. The DC bin vanishes through the
/// zero-mean normalization.
pub fn make_texture(height: usize, width: usize, seed: u64, correlation_length: f64) -> Result<ImageGrid> {
    if !(correlation_length > 0.0 && correlation_length.is_finite()) {
        return Err(Error::Argument(format!(
            "correlation length must be positive, got {correlation_length}"
        )));
    }
    let plan = DftPlan::new(height, width)?;
    let white = add_gaussian(&ImageGrid::zeros(height, width), 1.0, seed);
    let spectrum = plan.dft2(&white)?;
    let symbol = |i: usize, n: usize| {
        let s = (std::f64::consts::PI * i as f64 / n as f64).sin();
        4.0 * s * s
    };
    let l2 = correlation_length * correlation_length;
    let mut data: Vec<Complex64> = spectrum.into_data();
    for row in 0..height {
        for col in 0..width {
            let kappa2 = symbol(row, height) + symbol(col, width);
            data[row * width + col] /= 1.0 + l2 * kappa2;
        }
    }
    let field = plan.idft2(&SpectralField::new(height, width, data)?)?;
    let mean = field.mean();
    let sd = field.variance().sqrt();
    field.map(|v| (v - mean) / sd)
}
