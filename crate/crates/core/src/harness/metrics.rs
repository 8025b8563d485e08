use statrs::function::beta::beta_reg;

use crate::error::{check_dims, Error, Result};
use crate::gridfield::ImageGrid;
use crate::synthlab::snr_to_sigma;

/// Mean over pixels of the squared difference.
pub fn mse(predicted: &ImageGrid, target: &ImageGrid) -> Result<f64> {
    check_dims(predicted.dims(), target.dims())?;
    let sum: f64 = predicted
        .data()
        .iter()
        .zip(target.data())
        .map(|(p, t)| (p - t) * (p - t))
        .sum();
    Ok(sum / predicted.len() as f64)
}

/// Mean noise variance σ² over the test images: the expected MSE of the true
/// kernel against noisy targets.
pub fn noise_floor(snr_db: f64, clean_test_outputs: &[ImageGrid]) -> Result<f64> {
    if clean_test_outputs.is_empty() {
        return Err(Error::Argument("noise floor needs at least one image".into()));
    }
    let mut total = 0.0;
    for clean in clean_test_outputs {
        total += snr_to_sigma(clean, snr_db)?.powi(2);
    }
    Ok(total / clean_test_outputs.len() as f64)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairedTTest {
    pub t: f64,
    pub p_two_sided: f64,
    /// Set when the differences have zero variance; `p` is then 0 (or 1 when
    /// all differences are zero).
    pub degenerate: bool,
    pub degrees_of_freedom: usize,
}

/// Paired t-test on `a − b` with `n − 1` degrees of freedom.
pub fn paired_t_test(errors_a: &[f64], errors_b: &[f64]) -> Result<PairedTTest> {
    if errors_a.len() != errors_b.len() {
        return Err(Error::Argument(format!(
            "paired samples differ in length: {} vs {}",
            errors_a.len(),
            errors_b.len()
        )));
    }
    let n = errors_a.len();
    if n < 2 {
        return Err(Error::Argument(format!("paired t-test needs n >= 2, got {n}")));
    }
    let diffs: Vec<f64> = errors_a.iter().zip(errors_b).map(|(a, b)| a - b).collect();
    let mean = diffs.iter().sum::<f64>() / n as f64;
    let var = diffs.iter().map(|d| (d - mean) * (d - mean)).sum::<f64>() / (n - 1) as f64;
    let df = n - 1;
    if var == 0.0 {
        let all_zero = mean == 0.0;
        return Ok(PairedTTest {
            t: if all_zero { 0.0 } else { mean.signum() * f64::INFINITY },
            p_two_sided: if all_zero { 1.0 } else { 0.0 },
            degenerate: true,
            degrees_of_freedom: df,
        });
    }
    let t = mean / (var.sqrt() / (n as f64).sqrt());
    Ok(PairedTTest {
        t,
        p_two_sided: student_t_two_sided(t, df as f64),
        degenerate: false,
        degrees_of_freedom: df,
    })
}

/// `P(|T| >= |t|)` for Student's t with `df` degrees of freedom, via the
/// regularized incomplete beta function `I_{df/(df+t²)}(df/2, 1/2)`.
pub fn student_t_two_sided(t: f64, df: f64) -> f64 {
    if t == 0.0 {
        return 1.0;
    }
    let x = df / (df + t * t);
    beta_reg(df / 2.0, 0.5, x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mse_examples() {
        let a = ImageGrid::new(2, 2, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        assert_eq!(mse(&a, &a).unwrap(), 0.0);
        let shifted = a.map(|v| v + 0.5).unwrap();
        assert_eq!(mse(&a, &shifted).unwrap(), 0.25);
        let p = ImageGrid::new(3, 3, vec![1.0, -2.0, 0.5, 0.0, 3.0, 1.0, -1.0, 2.0, 0.25]).unwrap();
        let t = ImageGrid::new(3, 3, vec![0.0, 0.0, 0.5, 1.0, 1.0, 1.0, 1.0, 1.0, 0.0]).unwrap();
        // 1 + 4 + 0 + 1 + 4 + 0 + 4 + 1 + 0.0625 = 15.0625
        assert!((mse(&p, &t).unwrap() - 15.0625 / 9.0).abs() < 1e-15);
        assert!(mse(&a, &ImageGrid::zeros(1, 4)).is_err());
    }

    #[test]
    fn noise_floor_examples() {
        let clean = ImageGrid::new(1, 2, vec![-1.0, 1.0]).unwrap();
        assert_eq!(noise_floor(f64::INFINITY, &[clean.clone()]).unwrap(), 0.0);
        assert!((noise_floor(0.0, &[clean]).unwrap() - 1.0).abs() < 1e-15);
        assert!(noise_floor(0.0, &[]).is_err());
    }

    #[test]
    fn t_test_identical_samples() {
        let a = [0.3, 1.2, -0.4];
        let r = paired_t_test(&a, &a).unwrap();
        assert_eq!((r.t, r.p_two_sided), (0.0, 1.0));
    }

    #[test]
    fn t_test_zero_variance_is_degenerate() {
        let r = paired_t_test(&[2.0, 3.0, 4.0, 5.0], &[1.0, 2.0, 3.0, 4.0]).unwrap();
        assert!(r.degenerate);
        assert_eq!(r.p_two_sided, 0.0);
    }

    #[test]
    fn t_test_argument_errors() {
        assert!(paired_t_test(&[1.0], &[0.0]).is_err());
        assert!(paired_t_test(&[1.0, 2.0], &[0.0]).is_err());
    }

    /// Two-sided tail of Student's t by composite Simpson integration of the
    /// density over [0, |t|].
    fn t_tail_by_quadrature(t: f64, nu: f64) -> f64 {
        let ln_norm = ln_gamma((nu + 1.0) / 2.0) - ln_gamma(nu / 2.0) - 0.5 * (nu * std::f64::consts::PI).ln();
        let density = |x: f64| (ln_norm - (nu + 1.0) / 2.0 * (1.0 + x * x / nu).ln()).exp();
        let n = 200_000;
        let h = t.abs() / n as f64;
        let mut s = density(0.0) + density(t.abs());
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * density(i as f64 * h);
        }
        1.0 - 2.0 * s * h / 3.0
    }

    fn ln_gamma(x: f64) -> f64 {
        // half-integer and integer arguments only
        if x == 0.5 {
            return 0.5 * std::f64::consts::PI.ln();
        }
        if x == 1.0 {
            return 0.0;
        }
        (x - 1.0).ln() + ln_gamma(x - 1.0)
    }

    #[test]
    fn t_test_against_quadrature() {
        let r = paired_t_test(&[1.0, 2.0, 3.0], &[0.0, 0.0, 0.0]).unwrap();
        assert!((r.t - 2.0 * 3f64.sqrt()).abs() < 1e-12);
        let oracle = t_tail_by_quadrature(r.t, 2.0);
        assert!((r.p_two_sided - oracle).abs() < 1e-6, "{} vs {oracle}", r.p_two_sided);
        // closed form for nu = 2: p = 1 - |t|/sqrt(t² + 2)
        let exact = 1.0 - r.t / (r.t * r.t + 2.0).sqrt();
        assert!((r.p_two_sided - exact).abs() < 1e-12);

        for (t, nu) in [(0.7, 9.0), (2.3, 9.0), (4.1, 5.0), (1.5, 3.0)] {
            let p = student_t_two_sided(t, nu);
            assert!((p - t_tail_by_quadrature(t, nu)).abs() < 1e-6, "t={t} nu={nu}");
        }
    }
}
