use super::solver::laplacian_coefficient;
use crate::error::{check_dims, Error, Result};
use crate::gridfield::{ImageGrid, SpectralField};
use crate::spectral::{gradient_energy_weights, spectral_gradient_energy, DftPlan};

/// Spectra `(â_i, b̂_i)` of a list of training pairs.
pub type PairSpectra = Vec<(SpectralField, SpectralField)>;

pub fn pair_spectra(plan: &DftPlan, pairs: &[(ImageGrid, ImageGrid)]) -> Result<PairSpectra> {
    pairs
        .iter()
        .map(|(a, b)| Ok((plan.dft2(a)?, plan.dft2(b)?)))
        .collect()
}

/// `(1/N) Σ ‖α_i ⊛ u − β_i‖² + (λ/4π²) Σ_x w(x) u(x)²`, with `w` from
/// [`gradient_energy_weights`].
pub fn objective_spatial(
    plan: &DftPlan,
    kernel: &ImageGrid,
    pairs: &[(ImageGrid, ImageGrid)],
    lambda: f64,
) -> Result<f64> {
    if pairs.is_empty() {
        return Err(Error::Argument("objective needs at least one pair".into()));
    }
    check_dims(plan.dims(), kernel.dims())?;
    let mut data_term = 0.0;
    for (input, output) in pairs {
        let predicted = plan.circ_convolve(input, kernel)?;
        check_dims(predicted.dims(), output.dims())?;
        data_term += predicted
            .data()
            .iter()
            .zip(output.data())
            .map(|(p, o)| (p - o) * (p - o))
            .sum::<f64>();
    }
    let (h, w) = plan.dims();
    let weights = gradient_energy_weights(h, w);
    let penalty: f64 = kernel
        .data()
        .iter()
        .zip(weights.data())
        .map(|(u, wt)| wt * u * u)
        .sum();
    Ok(data_term / pairs.len() as f64 + laplacian_coefficient(lambda) * penalty)
}

/// `c_N [ (1/N) Σ ‖â_i û − b̂_i‖² + (λ/4π²) ‖∇û‖² ]`, equal to
/// [`objective_spatial`] for `û` the spectrum of the kernel.
pub fn objective_spectral(
    plan: &DftPlan,
    u_hat: &SpectralField,
    spectra: &[(SpectralField, SpectralField)],
    lambda: f64,
) -> Result<f64> {
    if spectra.is_empty() {
        return Err(Error::Argument("objective needs at least one pair".into()));
    }
    check_dims(plan.dims(), u_hat.dims())?;
    let mut data_term = 0.0;
    for (a, b) in spectra {
        check_dims(plan.dims(), a.dims())?;
        check_dims(plan.dims(), b.dims())?;
        data_term += a
            .data()
            .iter()
            .zip(u_hat.data())
            .zip(b.data())
            .map(|((x, u), y)| (x * u - y).norm_sqr())
            .sum::<f64>();
    }
    let penalty = spectral_gradient_energy(u_hat);
    Ok(plan.normalization()
        * (data_term / spectra.len() as f64 + laplacian_coefficient(lambda) * penalty))
}
