//! Kernel estimation from sufficient statistics.
//!
//! For pairs `(α_i, β_i)` with spectra `(â_i, b̂_i)` the only inputs any solver
//! needs are `aa = Σ |â_i|²` and `ab = Σ conj(â_i) b̂_i`. Their size is the
//! grid size regardless of how many pairs were accumulated.
//!
//! The regularized solve relaxes the optimality system
//!
//! ```text
//! aa ⊙ û − ab − (λ/4π²) Δû = 0
//! ```
//!
//! where `Δ` is the periodic 5-point Laplacian on the frequency grid. There is
//! no `1/N` on the data term, so the penalty-to-data ratio of a fit is
//! effectively `λ/N`.

mod objective;
mod persist;
mod solver;

pub use objective::{objective_spatial, objective_spectral, pair_spectra, PairSpectra};
pub use persist::{load_statistics, save_statistics};
pub use solver::{
    jacobi_denominators, jacobi_step, laplacian_coefficient, solve_closed_form, solve_regularized,
    JacobiTrace, KernelEstimate, KernelSolver, SolverOptions,
};

use num_complex::Complex64;

use crate::error::{check_dims, Error, Result};
use crate::gridfield::{ImageGrid, SpectralField};
use crate::spectral::DftPlan;

/// Tolerance on the Hermitian symmetry of `ab` accepted from external sources.
const STATS_HERMITIAN_TOLERANCE: f64 = 1e-9;

/// The pair `(aa, ab)` with grid dimensions and pair count.
#[derive(Debug, Clone, PartialEq)]
pub struct SufficientStatistics {
    aa: ImageGrid,
    ab: SpectralField,
    n_pairs: usize,
}

impl SufficientStatistics {
    pub fn empty(height: usize, width: usize) -> Self {
        SufficientStatistics {
            aa: ImageGrid::zeros(height, width),
            ab: SpectralField::zeros(height, width),
            n_pairs: 0,
        }
    }

    /// Rebuilds statistics from stored parts, checking `aa >= 0` and the
    /// Hermitian symmetry of `ab`.
    pub fn from_parts(aa: ImageGrid, ab: SpectralField, n_pairs: usize) -> Result<Self> {
        check_dims(aa.dims(), ab.dims())?;
        if let Some(index) = aa.data().iter().position(|&v| v < 0.0) {
            return Err(Error::Argument(format!("aa is negative at index {index}")));
        }
        let deviation = ab.hermitian_deviation();
        if deviation > STATS_HERMITIAN_TOLERANCE {
            return Err(Error::Symmetry { deviation });
        }
        Ok(SufficientStatistics { aa, ab, n_pairs })
    }

    /// Statistics of a set of pairs, accumulated in order.
    pub fn from_pairs<'a>(
        plan: &DftPlan,
        pairs: impl IntoIterator<Item = (&'a ImageGrid, &'a ImageGrid)>,
    ) -> Result<Self> {
        let (h, w) = plan.dims();
        let mut stats = Self::empty(h, w);
        for (input, output) in pairs {
            stats.accumulate(plan, input, output)?;
        }
        Ok(stats)
    }

    pub fn dims(&self) -> (usize, usize) {
        self.aa.dims()
    }

    pub fn height(&self) -> usize {
        self.aa.height()
    }

    pub fn width(&self) -> usize {
        self.aa.width()
    }

    /// `Σ |â_i|²` on the frequency grid.
    pub fn aa(&self) -> &ImageGrid {
        &self.aa
    }

    /// `Σ conj(â_i) b̂_i` on the frequency grid.
    pub fn ab(&self) -> &SpectralField {
        &self.ab
    }

    pub fn n_pairs(&self) -> usize {
        self.n_pairs
    }

    /// Adds one training pair.
    pub fn accumulate(&mut self, plan: &DftPlan, input: &ImageGrid, output: &ImageGrid) -> Result<()> {
        check_dims(self.dims(), input.dims())?;
        check_dims(self.dims(), output.dims())?;
        let a = plan.dft2(input)?;
        let b = plan.dft2(output)?;
        self.accumulate_spectra(&a, &b)
    }

    /// Adds one pair given by its spectra.
    pub fn accumulate_spectra(&mut self, a: &SpectralField, b: &SpectralField) -> Result<()> {
        check_dims(self.dims(), a.dims())?;
        check_dims(self.dims(), b.dims())?;
        let (h, w) = a.dims();
        let aa = self
            .aa
            .data()
            .iter()
            .zip(a.data())
            .map(|(acc, x)| acc + x.norm_sqr())
            .collect();
        let ab = self
            .ab
            .data()
            .iter()
            .zip(a.data().iter().zip(b.data()))
            .map(|(acc, (x, y))| acc + x.conj() * y)
            .collect();
        self.aa = ImageGrid::new(h, w, aa)?;
        self.ab = SpectralField::new(h, w, ab)?;
        self.n_pairs += 1;
        Ok(())
    }

    /// Elementwise sum of two statistics over the same grid.
    pub fn merge(&self, other: &SufficientStatistics) -> Result<SufficientStatistics> {
        check_dims(self.dims(), other.dims())?;
        let aa = self.aa.zip_map(&other.aa, |x, y| x + y)?;
        let ab: Vec<Complex64> = self
            .ab
            .data()
            .iter()
            .zip(other.ab.data())
            .map(|(x, y)| x + y)
            .collect();
        let (h, w) = self.dims();
        Ok(SufficientStatistics {
            aa,
            ab: SpectralField::new(h, w, ab)?,
            n_pairs: self.n_pairs + other.n_pairs,
        })
    }

    /// Largest relative elementwise difference to another set of statistics.
    pub fn max_relative_diff(&self, other: &SufficientStatistics) -> Result<f64> {
        let aa = self.aa.max_abs_diff(&other.aa)? / self.aa.max_abs().max(f64::MIN_POSITIVE);
        let ab = self.ab.max_abs_diff(&other.ab)? / self.ab.max_norm().max(f64::MIN_POSITIVE);
        Ok(aa.max(ab))
    }
}
