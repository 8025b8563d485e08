#![allow(dead_code)]

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use scalereg::{DftPlan, ImageGrid, SufficientStatistics};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_grid(h: usize, w: usize, rng: &mut ChaCha8Rng) -> ImageGrid {
    ImageGrid::from_fn(h, w, |_, _| rng.gen_range(-1.0..1.0)).unwrap()
}

/// Statistics with `aa` in roughly `[0.5, 2.5]`, symmetric under `k -> -k`,
/// and a Hermitian `ab`.
pub fn random_positive_stats(h: usize, w: usize, rng: &mut ChaCha8Rng) -> SufficientStatistics {
    let raw = ImageGrid::from_fn(h, w, |_, _| rng.gen_range(0.0..1.0)).unwrap();
    let aa = ImageGrid::from_fn(h, w, |r, c| {
        0.5 + raw.get(r, c) + raw.get((h - r) % h, (w - c) % w)
    })
    .unwrap();
    let plan = DftPlan::new(h, w).unwrap();
    let ab = plan.dft2(&random_grid(h, w, rng)).unwrap();
    SufficientStatistics::from_parts(aa, ab, 1).unwrap()
}

/// Solves `A x = b` by Gaussian elimination with partial pivoting.
pub fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Vec<f64> {
    let n = b.len();
    for k in 0..n {
        let p = (k..n).max_by(|&i, &j| a[i][k].abs().total_cmp(&a[j][k].abs())).unwrap();
        a.swap(k, p);
        b.swap(k, p);
        for i in k + 1..n {
            let f = a[i][k] / a[k][k];
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for k in (0..n).rev() {
        let s: f64 = (k + 1..n).map(|j| a[k][j] * x[j]).sum();
        x[k] = (b[k] - s) / a[k][k];
    }
    x
}

/// Dense direct solve of `(diag(aa) + (λ/4π²) L) û = ab`, where `L` is the
/// periodic 5-point Laplacian with a positive diagonal. The matrix is real,
/// so real and imaginary parts are solved separately.
pub fn dense_solve(stats: &SufficientStatistics, lambda: f64) -> Vec<Complex64> {
    let (h, w) = stats.dims();
    let n = h * w;
    let mu = lambda / (4.0 * PI * PI);
    let mut a = vec![vec![0.0; n]; n];
    for r in 0..h {
        for c in 0..w {
            let i = r * w + c;
            a[i][i] += stats.aa().data()[i] + 4.0 * mu;
            for (nr, nc) in [((r + 1) % h, c), ((r + h - 1) % h, c), (r, (c + 1) % w), (r, (c + w - 1) % w)] {
                a[i][nr * w + nc] -= mu;
            }
        }
    }
    let re = gauss_solve(a.clone(), stats.ab().data().iter().map(|z| z.re).collect());
    let im = gauss_solve(a, stats.ab().data().iter().map(|z| z.im).collect());
    re.into_iter().zip(im).map(|(x, y)| Complex64::new(x, y)).collect()
}

/// `max |x - y| / max |y|`.
pub fn relative_sup(x: &[Complex64], y: &[Complex64]) -> f64 {
    let diff = x.iter().zip(y).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
    let scale = y.iter().map(|b| b.norm()).fold(0.0, f64::max);
    diff / scale
}
