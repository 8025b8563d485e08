use std::f64::consts::PI;

use num_complex::Complex64;

use super::SufficientStatistics;
use crate::error::{check_dims, Error, Result};
use crate::gridfield::{ImageGrid, SpectralField};
use crate::spectral::DftPlan;

/// Stopping and guard settings for the kernel solvers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative sup-norm change per sweep at which relaxation stops.
    pub tolerance: f64,
    pub max_iterations: usize,
    /// Ridge for `λ = 0` fits whose `aa` vanishes somewhere. `None` means
    /// `1e-12 * max(aa)`.
    pub epsilon_ridge: Option<f64>,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: 1e-10,
            max_iterations: 100_000,
            epsilon_ridge: None,
        }
    }
}

impl SolverOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.tolerance > 0.0) {
            return Err(Error::Argument(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::Argument("max_iterations must be at least 1".into()));
        }
        if let Some(eps) = self.epsilon_ridge {
            if !(eps >= 0.0 && eps.is_finite()) {
                return Err(Error::Argument(format!("epsilon_ridge must be >= 0, got {eps}")));
            }
        }
        Ok(())
    }

    /// The ridge actually used for the given statistics: `ε` when some bin
    /// of `aa` is at or below `ε`, otherwise 0.
    pub fn ridge_for(&self, stats: &SufficientStatistics) -> f64 {
        let eps = self
            .epsilon_ridge
            .unwrap_or_else(|| 1e-12 * stats.aa().max())
            .max(f64::MIN_POSITIVE);
        if stats.aa().min() <= eps {
            eps
        } else {
            0.0
        }
    }
}

/// A learned kernel together with its spectrum and solver metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct KernelEstimate {
    pub kernel: ImageGrid,
    pub spectrum: SpectralField,
    pub lambda: f64,
    pub iterations: usize,
    /// Relative sup-norm change of the last sweep (0 for the closed form).
    pub final_residual: f64,
    pub converged: bool,
}

/// Per-sweep history of a regularized solve.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct JacobiTrace {
    /// Relative sup-norm change of each sweep.
    pub changes: Vec<f64>,
    /// Sup-norm of the optimality residual at the iterate entering each sweep.
    pub residuals: Vec<f64>,
}

/// Coefficient `λ/4π²` in front of the Laplacian.
pub fn laplacian_coefficient(lambda: f64) -> f64 {
    lambda / (4.0 * PI * PI)
}

fn check_lambda(lambda: f64) -> Result<()> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::Argument(format!("lambda must be finite and >= 0, got {lambda}")));
    }
    Ok(())
}

/// Jacobi denominators `aa + λ/π²`, plus the ridge when `λ = 0`.
pub fn jacobi_denominators(stats: &SufficientStatistics, lambda: f64, ridge: f64) -> ImageGrid {
    let extra = 4.0 * laplacian_coefficient(lambda) + if lambda == 0.0 { ridge } else { 0.0 };
    stats
        .aa()
        .map(|a| a + extra)
        .expect("denominators are finite")
}

/// One simultaneous Jacobi sweep with periodic neighbors:
///
/// `û⁺ = (ab + (λ/4π²)(û[i±1, j] + û[i, j±1])) / (aa + λ/π²)`.
///
/// When `λ = 0` the ridge `epsilon` enters the denominator.
pub fn jacobi_step(
    u_hat: &SpectralField,
    stats: &SufficientStatistics,
    lambda: f64,
    epsilon: f64,
) -> Result<SpectralField> {
    check_lambda(lambda)?;
    check_dims(stats.dims(), u_hat.dims())?;
    let inv = inverse_denominators(stats, lambda, epsilon);
    let mut out = vec![Complex64::new(0.0, 0.0); u_hat.len()];
    let sweep = sweep(
        u_hat.data(),
        &mut out,
        stats.ab().data(),
        &inv,
        stats.dims(),
        laplacian_coefficient(lambda),
    );
    if let Some(index) = sweep.non_finite {
        let w = stats.width();
        return Err(Error::Divergence {
            row: index / w,
            col: index % w,
            iteration: 1,
        });
    }
    let (h, w) = stats.dims();
    Ok(SpectralField::from_raw(h, w, out))
}

fn inverse_denominators(stats: &SufficientStatistics, lambda: f64, epsilon: f64) -> Vec<f64> {
    jacobi_denominators(stats, lambda, epsilon)
        .data()
        .iter()
        .map(|d| 1.0 / d)
        .collect()
}

struct Sweep {
    /// Largest `|û⁺ − û|²`.
    max_change_sq: f64,
    /// Largest `|û⁺|²`.
    max_norm_sq: f64,
    non_finite: Option<usize>,
}

fn sweep(
    prev: &[Complex64],
    next: &mut [Complex64],
    ab: &[Complex64],
    inv_den: &[f64],
    (h, w): (usize, usize),
    mu: f64,
) -> Sweep {
    let mut max_change_sq: f64 = 0.0;
    let mut max_norm_sq: f64 = 0.0;
    let mut non_finite = None;
    for row in 0..h {
        let up = ((row + h - 1) % h) * w;
        let down = ((row + 1) % h) * w;
        let base = row * w;
        for col in 0..w {
            let left = if col == 0 { w - 1 } else { col - 1 };
            let right = if col + 1 == w { 0 } else { col + 1 };
            let i = base + col;
            let neighbors = prev[up + col] + prev[down + col] + prev[base + left] + prev[base + right];
            let v = (ab[i] + neighbors * mu) * inv_den[i];
            let change = (v - prev[i]).norm_sqr();
            let norm = v.norm_sqr();
            if !(norm <= f64::MAX) && non_finite.is_none() {
                non_finite = Some(i);
            }
            max_change_sq = max_change_sq.max(change);
            max_norm_sq = max_norm_sq.max(norm);
            next[i] = v;
        }
    }
    Sweep {
        max_change_sq,
        max_norm_sq,
        non_finite,
    }
}

/// Solver bound to one grid size; reuses its DFT plan across solves.
#[derive(Debug, Clone)]
pub struct KernelSolver {
    plan: DftPlan,
    options: SolverOptions,
}

impl KernelSolver {
    pub fn new(height: usize, width: usize, options: SolverOptions) -> Result<Self> {
        options.validate()?;
        Ok(KernelSolver {
            plan: DftPlan::new(height, width)?,
            options,
        })
    }

    pub fn with_plan(plan: DftPlan, options: SolverOptions) -> Result<Self> {
        options.validate()?;
        Ok(KernelSolver { plan, options })
    }

    pub fn plan(&self) -> &DftPlan {
        &self.plan
    }

    pub fn options(&self) -> &SolverOptions {
        &self.options
    }

    fn check_stats(&self, stats: &SufficientStatistics) -> Result<()> {
        check_dims(self.plan.dims(), stats.dims())?;
        if stats.n_pairs() == 0 {
            return Err(Error::EmptyStatistics);
        }
        Ok(())
    }

    /// Unregularized least-squares kernel `û = ab / (aa + ε)`.
    pub fn closed_form(&self, stats: &SufficientStatistics) -> Result<KernelEstimate> {
        self.check_stats(stats)?;
        let eps = self.options.ridge_for(stats);
        let data: Vec<Complex64> = stats
            .ab()
            .data()
            .iter()
            .zip(stats.aa().data())
            .map(|(b, a)| b / (a + eps))
            .collect();
        let (h, w) = stats.dims();
        let spectrum = SpectralField::new(h, w, data)?;
        let kernel = self.plan.idft2(&spectrum)?;
        Ok(KernelEstimate {
            kernel,
            spectrum,
            lambda: 0.0,
            iterations: 0,
            final_residual: 0.0,
            converged: true,
        })
    }

    /// Scale-regularized kernel by Jacobi relaxation. `λ = 0` reduces to
    /// [`KernelSolver::closed_form`].
    pub fn regularized(&self, stats: &SufficientStatistics, lambda: f64) -> Result<KernelEstimate> {
        self.regularized_traced(stats, lambda, None)
    }

    /// As [`KernelSolver::regularized`], recording per-sweep history.
    pub fn regularized_with_trace(
        &self,
        stats: &SufficientStatistics,
        lambda: f64,
    ) -> Result<(KernelEstimate, JacobiTrace)> {
        let mut trace = JacobiTrace::default();
        let estimate = self.regularized_traced(stats, lambda, Some(&mut trace))?;
        Ok((estimate, trace))
    }

    /// Initial iterate `ab / (aa + λ/π² + ε)`, the point where the stencil
    /// contribution is dropped.
    pub fn initial_spectrum(&self, stats: &SufficientStatistics, lambda: f64) -> Result<SpectralField> {
        check_lambda(lambda)?;
        self.check_stats(stats)?;
        let inv = inverse_denominators(stats, lambda, self.options.ridge_for(stats));
        let data = stats.ab().data().iter().zip(&inv).map(|(b, d)| b * d).collect();
        let (h, w) = stats.dims();
        SpectralField::new(h, w, data)
    }

    fn regularized_traced(
        &self,
        stats: &SufficientStatistics,
        lambda: f64,
        mut trace: Option<&mut JacobiTrace>,
    ) -> Result<KernelEstimate> {
        check_lambda(lambda)?;
        if lambda == 0.0 {
            return self.closed_form(stats);
        }
        self.check_stats(stats)?;
        let (h, w) = stats.dims();
        let mu = laplacian_coefficient(lambda);
        let den = jacobi_denominators(stats, lambda, 0.0);
        let inv: Vec<f64> = den.data().iter().map(|d| 1.0 / d).collect();
        let ab = stats.ab().data();
        let ab_scale = stats.ab().max_norm();
        let tol = self.options.tolerance;

        let mut current: Vec<Complex64> = ab.iter().zip(&inv).map(|(b, d)| b * d).collect();
        let mut next = vec![Complex64::new(0.0, 0.0); current.len()];
        let mut iterations = 0;
        let mut final_change = f64::INFINITY;
        let mut converged = false;

        while iterations < self.options.max_iterations {
            let s = sweep(&current, &mut next, ab, &inv, (h, w), mu);
            iterations += 1;
            if let Some(index) = s.non_finite {
                return Err(Error::Divergence {
                    row: index / w,
                    col: index % w,
                    iteration: iterations,
                });
            }
            // residual of the iterate entering the sweep: den ⊙ (û − û⁺)
            let residual = max_weighted_change(&current, &next, den.data());
            let norm = s.max_norm_sq.sqrt();
            final_change = if norm > 0.0 {
                s.max_change_sq.sqrt() / norm
            } else {
                0.0
            };
            if let Some(t) = trace.as_deref_mut() {
                t.changes.push(final_change);
                t.residuals.push(residual);
            }
            std::mem::swap(&mut current, &mut next);
            if final_change <= tol && residual <= 10.0 * tol * ab_scale {
                converged = true;
                break;
            }
        }

        let spectrum = SpectralField::new(h, w, current)?;
        let kernel = self.plan.idft2(&spectrum)?;
        Ok(KernelEstimate {
            kernel,
            spectrum,
            lambda,
            iterations,
            final_residual: final_change,
            converged,
        })
    }

    /// Sup-norm of `aa ⊙ û − ab − (λ/4π²) Δû` with the periodic 5-point Laplacian.
    pub fn optimality_residual(
        &self,
        stats: &SufficientStatistics,
        u_hat: &SpectralField,
        lambda: f64,
    ) -> Result<f64> {
        check_dims(stats.dims(), u_hat.dims())?;
        let (h, w) = stats.dims();
        let mu = laplacian_coefficient(lambda);
        let u = u_hat.data();
        let mut worst: f64 = 0.0;
        for row in 0..h {
            for col in 0..w {
                let i = row * w + col;
                let lap = u[((row + 1) % h) * w + col]
                    + u[((row + h - 1) % h) * w + col]
                    + u[row * w + (col + 1) % w]
                    + u[row * w + (col + w - 1) % w]
                    - u[i] * 4.0;
                let r = u[i] * stats.aa().data()[i] - stats.ab().data()[i] - lap * mu;
                worst = worst.max(r.norm());
            }
        }
        Ok(worst)
    }
}

fn max_weighted_change(a: &[Complex64], b: &[Complex64], weight: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .zip(weight)
        .fold(0.0, |m, ((x, y), d)| m.max(d * (x - y).norm()))
}

/// Unregularized fit using a freshly planned solver.
pub fn solve_closed_form(stats: &SufficientStatistics, options: SolverOptions) -> Result<KernelEstimate> {
    KernelSolver::new(stats.height(), stats.width(), options)?.closed_form(stats)
}

/// Scale-regularized fit using a freshly planned solver.
pub fn solve_regularized(
    stats: &SufficientStatistics,
    lambda: f64,
    options: SolverOptions,
) -> Result<KernelEstimate> {
    KernelSolver::new(stats.height(), stats.width(), options)?.regularized(stats, lambda)
}
