//! Experiment sweeps over SNR, λ and training-set size.
//!
//! For every SNR the image pool is convolved with the generator kernel and
//! corrupted once. For every `(train_size, repetition)` a train/test split is
//! drawn, statistics are accumulated over the training pairs and one kernel is
//! fitted per λ. Each fit is scored on the held-out pairs against both the
//! noisy and the noiseless outputs.

mod config;
mod csv;
mod metrics;

pub use config::{geometric_lambda_grid, ExperimentConfig};
pub use csv::{emit_csv, write_csv, CSV_COLUMNS};
pub use metrics::{mse, noise_floor, paired_t_test, student_t_two_sided, PairedTTest};

use std::fs;
use std::path::Path;

use rand::seq::index::sample;

use crate::error::{Error, Result};
use crate::estimator::{KernelEstimate, KernelSolver, SufficientStatistics};
use crate::gridfield::{load_pgm, ImageGrid, SpectralField};
use crate::spectral::DftPlan;
use crate::synthlab::{make_texture, make_zero_sum_kernel, rng_from_seed, snr_to_sigma, NoiseSpec};

/// One fitted kernel scored on its test split.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentRecord {
    pub snr_db: f64,
    pub lambda: f64,
    pub train_size: usize,
    pub repetition: usize,
    /// Mean per-pixel squared error against the noisy test outputs.
    pub test_mse: f64,
    pub log10_mse: f64,
    /// Same, against the noiseless test outputs.
    pub test_mse_clean: f64,
    /// Mean noise variance of the test outputs.
    pub noise_floor: f64,
    pub train_image_ids: Vec<usize>,
    pub solver_iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    /// Set when the solver diverged; the error columns are then NaN.
    pub failed: bool,
    /// Fraction of kernel pixels outside twice the generator's min/max.
    pub clipped_fraction: f64,
}

/// Seed for one stream, derived from the base seed and a path of indices
/// with the SplitMix64 finalizer.
pub fn derive_seed(base: u64, path: &[u64]) -> u64 {
    let mix = |mut z: u64| {
        z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    };
    path.iter().fold(mix(base), |acc, &p| mix(acc ^ mix(p)))
}

const STREAM_TEXTURE: u64 = 1;
const STREAM_NOISE: u64 = 2;
const STREAM_SPLIT: u64 = 3;

/// The inputs of an experiment: image pool, generator kernel, and per-SNR
/// noisy outputs.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub plan: DftPlan,
    pub kernel: ImageGrid,
    pub inputs: Vec<ImageGrid>,
    pub input_spectra: Vec<SpectralField>,
    pub clean_outputs: Vec<ImageGrid>,
    pub snr_levels: Vec<SnrLevel>,
}

#[derive(Debug, Clone)]
pub struct SnrLevel {
    pub snr_db: f64,
    pub outputs: Vec<ImageGrid>,
    pub output_spectra: Vec<SpectralField>,
    pub sigmas: Vec<f64>,
}

impl ExperimentData {
    pub fn generate(config: &ExperimentConfig) -> Result<Self> {
        config.validate()?;
        let (h, w) = (config.image_height, config.image_width);
        let plan = DftPlan::new(h, w)?;
        let inputs = match &config.input_dir {
            Some(dir) => load_image_pool(dir, config.n_images, (h, w))?,
            None => (0..config.n_images)
                .map(|i| {
                    let seed = derive_seed(config.base_seed, &[STREAM_TEXTURE, i as u64]);
                    make_texture(h, w, seed, config.texture_correlation_length)
                })
                .collect::<Result<_>>()?,
        };
        let kernel = make_zero_sum_kernel(&config.kernel_spec)?;
        let kernel_spectrum = plan.dft2(&kernel)?;
        let input_spectra: Vec<_> = inputs.iter().map(|a| plan.dft2(a)).collect::<Result<_>>()?;
        let clean_outputs: Vec<_> = input_spectra
            .iter()
            .map(|a| plan.apply_spectrum(a, &kernel_spectrum))
            .collect::<Result<_>>()?;

        let mut snr_levels = Vec::with_capacity(config.snr_db_list.len());
        for (s, &snr_db) in config.snr_db_list.iter().enumerate() {
            let spec = NoiseSpec {
                snr_db,
                seed: derive_seed(config.base_seed, &[STREAM_NOISE, s as u64]),
            };
            let mut outputs = Vec::with_capacity(inputs.len());
            let mut sigmas = Vec::with_capacity(inputs.len());
            for (i, clean) in clean_outputs.iter().enumerate() {
                let noise = NoiseSpec {
                    seed: spec.seed.wrapping_add(i as u64),
                    ..spec
                };
                sigmas.push(snr_to_sigma(clean, snr_db)?);
                outputs.push(crate::synthlab::add_noise(clean, &noise)?);
            }
            let output_spectra = outputs.iter().map(|b| plan.dft2(b)).collect::<Result<_>>()?;
            snr_levels.push(SnrLevel {
                snr_db,
                outputs,
                output_spectra,
                sigmas,
            });
        }
        Ok(ExperimentData {
            plan,
            kernel,
            inputs,
            input_spectra,
            clean_outputs,
            snr_levels,
        })
    }

    /// Mean MSE of `kernel` on the given pairs of one SNR level, against the
    /// noisy and the clean outputs.
    pub fn evaluate(&self, level: usize, kernel_spectrum: &SpectralField, ids: &[usize]) -> Result<(f64, f64)> {
        let snr = &self.snr_levels[level];
        let (mut noisy, mut clean) = (0.0, 0.0);
        for &j in ids {
            let predicted = self.plan.apply_spectrum(&self.input_spectra[j], kernel_spectrum)?;
            noisy += mse(&predicted, &snr.outputs[j])?;
            clean += mse(&predicted, &self.clean_outputs[j])?;
        }
        let n = ids.len() as f64;
        Ok((noisy / n, clean / n))
    }

    /// Statistics of the given training pairs at one SNR level.
    pub fn statistics(&self, level: usize, ids: &[usize]) -> Result<SufficientStatistics> {
        let (h, w) = self.plan.dims();
        let mut stats = SufficientStatistics::empty(h, w);
        for &i in ids {
            stats.accumulate_spectra(&self.input_spectra[i], &self.snr_levels[level].output_spectra[i])?;
        }
        Ok(stats)
    }
}

/// Loads the first `count` PGM files (sorted by name) from `dir`.
fn load_image_pool(dir: &Path, count: usize, dims: (usize, usize)) -> Result<Vec<ImageGrid>> {
    let mut paths: Vec<_> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")))
        .collect();
    paths.sort();
    if paths.len() < count {
        return Err(Error::Argument(format!(
            "{} holds {} PGM files, need {count}",
            dir.display(),
            paths.len()
        )));
    }
    paths
        .iter()
        .take(count)
        .map(|p| {
            let img = load_pgm(p)?;
            if img.dims() != dims {
                return Err(Error::Argument(format!(
                    "{} is {}x{}, expected {}x{}",
                    p.display(),
                    img.height(),
                    img.width(),
                    dims.0,
                    dims.1
                )));
            }
            Ok(img)
        })
        .collect()
}

/// Train image ids for one `(train_size, repetition)` cell, sorted.
pub fn draw_split(config: &ExperimentConfig, size_index: usize, repetition: usize) -> Vec<usize> {
    let train_size = config.train_sizes[size_index];
    let seed = derive_seed(
        config.base_seed,
        &[STREAM_SPLIT, size_index as u64, repetition as u64],
    );
    let mut ids = sample(&mut rng_from_seed(seed), config.n_images, train_size).into_vec();
    ids.sort_unstable();
    ids
}

/// Runs the full sweep. Records are ordered by SNR, train size, repetition
/// and λ, in configuration order.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ExperimentRecord>> {
    let data = ExperimentData::generate(config)?;
    run_on_data(config, &data)
}

pub fn run_on_data(config: &ExperimentConfig, data: &ExperimentData) -> Result<Vec<ExperimentRecord>> {
    let solver = KernelSolver::with_plan(data.plan.clone(), config.solver)?;
    let (clip_lo, clip_hi) = (2.0 * data.kernel.min(), 2.0 * data.kernel.max());
    let mut records = Vec::new();
    for (level, snr) in data.snr_levels.iter().enumerate() {
        for (size_index, &train_size) in config.train_sizes.iter().enumerate() {
            for repetition in 0..config.repetitions {
                let train = draw_split(config, size_index, repetition);
                let test: Vec<usize> = (0..config.n_images).filter(|i| !train.contains(i)).collect();
                let stats = data.statistics(level, &train)?;
                let floor = test.iter().map(|&j| snr.sigmas[j].powi(2)).sum::<f64>() / test.len() as f64;
                for &lambda in &config.lambda_list {
                    let base = ExperimentRecord {
                        snr_db: snr.snr_db,
                        lambda,
                        train_size,
                        repetition,
                        test_mse: f64::NAN,
                        log10_mse: f64::NAN,
                        test_mse_clean: f64::NAN,
                        noise_floor: floor,
                        train_image_ids: train.clone(),
                        solver_iterations: 0,
                        final_residual: f64::NAN,
                        converged: false,
                        failed: true,
                        clipped_fraction: f64::NAN,
                    };
                    let record = match solver.regularized(&stats, lambda) {
                        Ok(fit) => score(data, level, &test, &fit, (clip_lo, clip_hi), base)?,
                        Err(Error::Divergence { .. }) => base,
                        Err(e) => return Err(e),
                    };
                    records.push(record);
                }
            }
        }
    }
    Ok(records)
}

fn score(
    data: &ExperimentData,
    level: usize,
    test: &[usize],
    fit: &KernelEstimate,
    (clip_lo, clip_hi): (f64, f64),
    base: ExperimentRecord,
) -> Result<ExperimentRecord> {
    let (test_mse, test_mse_clean) = data.evaluate(level, &fit.spectrum, test)?;
    Ok(ExperimentRecord {
        test_mse,
        log10_mse: test_mse.log10(),
        test_mse_clean,
        solver_iterations: fit.iterations,
        final_residual: fit.final_residual,
        converged: fit.converged,
        failed: false,
        clipped_fraction: crate::gridfield::clipped_fraction(&fit.kernel, clip_lo, clip_hi),
        ..base
    })
}

/// Aggregate of one `(snr, train_size)` sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSummary {
    pub snr_db: f64,
    pub train_size: usize,
    /// `(λ, mean test MSE over repetitions)` in configuration order.
    pub mean_mse: Vec<(f64, f64)>,
    /// Positive λ with the lowest mean test MSE.
    pub best_lambda: Option<f64>,
    pub unregularized_mse: Option<f64>,
    pub best_mse: Option<f64>,
    /// Paired t-test of per-repetition log10 MSE, λ = 0 minus best λ.
    pub t_test: Option<PairedTTest>,
}

impl SweepSummary {
    /// `mse(λ = 0) / mse(best λ)`.
    pub fn improvement(&self) -> Option<f64> {
        Some(self.unregularized_mse? / self.best_mse?)
    }
}

/// Groups records by `(snr, train_size)`, in first-seen order.
pub fn summarize(records: &[ExperimentRecord]) -> Result<Vec<SweepSummary>> {
    let mut keys: Vec<(f64, usize)> = Vec::new();
    for r in records {
        if !keys.iter().any(|k| k.0.to_bits() == r.snr_db.to_bits() && k.1 == r.train_size) {
            keys.push((r.snr_db, r.train_size));
        }
    }
    keys.into_iter()
        .map(|(snr_db, train_size)| {
            let group: Vec<&ExperimentRecord> = records
                .iter()
                .filter(|r| r.snr_db.to_bits() == snr_db.to_bits() && r.train_size == train_size)
                .collect();
            summarize_group(snr_db, train_size, &group)
        })
        .collect()
}

fn summarize_group(snr_db: f64, train_size: usize, group: &[&ExperimentRecord]) -> Result<SweepSummary> {
    let mut lambdas: Vec<f64> = Vec::new();
    for r in group {
        if !lambdas.iter().any(|l| l.to_bits() == r.lambda.to_bits()) {
            lambdas.push(r.lambda);
        }
    }
    let per_lambda = |lambda: f64| -> Vec<&ExperimentRecord> {
        let mut v: Vec<_> = group
            .iter()
            .copied()
            .filter(|r| r.lambda.to_bits() == lambda.to_bits())
            .collect();
        v.sort_by_key(|r| r.repetition);
        v
    };
    let mean_mse: Vec<(f64, f64)> = lambdas
        .iter()
        .map(|&l| {
            let rows = per_lambda(l);
            let mean = rows.iter().map(|r| r.test_mse).sum::<f64>() / rows.len() as f64;
            (l, mean)
        })
        .collect();
    let best = mean_mse
        .iter()
        .filter(|(l, m)| *l > 0.0 && m.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .copied();
    let unregularized = mean_mse.iter().find(|(l, _)| *l == 0.0).map(|p| p.1);
    let t_test = match (best, unregularized) {
        (Some((best_lambda, _)), Some(_)) => {
            let zero = per_lambda(0.0);
            let reg = per_lambda(best_lambda);
            let a: Vec<f64> = zero.iter().map(|r| r.log10_mse).collect();
            let b: Vec<f64> = reg.iter().map(|r| r.log10_mse).collect();
            if a.len() >= 2 && a.len() == b.len() && a.iter().chain(&b).all(|v| v.is_finite()) {
                Some(paired_t_test(&a, &b)?)
            } else {
                None
            }
        }
        _ => None,
    };
    Ok(SweepSummary {
        snr_db,
        train_size,
        mean_mse,
        best_lambda: best.map(|b| b.0),
        unregularized_mse: unregularized,
        best_mse: best.map(|b| b.1),
        t_test,
    })
}
