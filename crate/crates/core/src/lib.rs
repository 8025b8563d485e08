//! Learning a single linear convolution kernel from input/output image pairs.
//!
//! The unregularized problem is solved in closed form in the Fourier domain.
//! The scale-regularized problem penalizes kernel mass far from the kernel
//! origin; in the Fourier domain that penalty is the Dirichlet energy of the
//! kernel spectrum and the resulting optimality system is solved by Jacobi
//! relaxation with a periodic 5-point Laplacian.
//!
//! Modules:
//! - [`gridfield`]: real and complex 2D fields, PGM and binary field IO.
//! - [`spectral`]: 2D DFT plans, circular convolution, gradient energy.
//! - [`estimator`]: sufficient statistics, closed-form and Jacobi solvers, objectives.
//! - [`synthlab`]: synthetic kernels, textures, SNR-calibrated noise.
//! - [`harness`]: experiment sweeps, metrics, paired t-test, CSV output.

pub mod error;
pub mod estimator;
pub mod gridfield;
pub mod harness;
pub mod spectral;
pub mod synthlab;

pub use error::{Error, Result};
pub use estimator::{KernelEstimate, SolverOptions, SufficientStatistics};
pub use gridfield::{ImageGrid, SpectralField};
pub use spectral::DftPlan;
