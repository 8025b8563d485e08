//! Experiment configuration and its flat text format.
//!
//! One `key = value` per line; `#` starts a comment; blank lines are ignored.
//! Lists are comma separated. Keys, all optional:
//!
//! ```text
//! image_height = 128              # pixels
//! image_width = 128
//! n_images = 8                    # size of the image pool
//! snr_db = 65.8, 25.8, -14.2
//! lambda = 0, 1e-6, 1e-4, 1e-2, 1, 1e2, 1e4, 1e6
//! train_sizes = 1, 2, 4           # each < n_images
//! repetitions = 10
//! base_seed = 1
//! kernel_positive_radius = 2
//! kernel_negative_inner = 2.5
//! kernel_negative_outer = 5
//! texture_correlation_length = 2  # generated textures only
//! input_dir = path/to/pgms        # use PGM files instead of textures
//! solver_tolerance = 1e-10
//! solver_max_iterations = 100000
//! solver_epsilon_ridge = auto     # or a number
//! ```

use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::estimator::SolverOptions;
use crate::synthlab::ZeroSumKernelSpec;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub image_height: usize,
    pub image_width: usize,
    pub n_images: usize,
    pub snr_db_list: Vec<f64>,
    pub lambda_list: Vec<f64>,
    pub train_sizes: Vec<usize>,
    pub repetitions: usize,
    pub base_seed: u64,
    pub kernel_spec: ZeroSumKernelSpec,
    pub texture_correlation_length: f64,
    pub input_dir: Option<PathBuf>,
    pub solver: SolverOptions,
}

/// `0` followed by `count` powers of ten from `10^lo` to `10^hi`.
pub fn geometric_lambda_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let mut grid = vec![0.0];
    if count == 1 {
        grid.push(10f64.powf(lo));
    } else {
        let step = (hi - lo) / (count - 1) as f64;
        grid.extend((0..count).map(|i| 10f64.powf(lo + step * i as f64)));
    }
    grid
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            image_height: 128,
            image_width: 128,
            n_images: 8,
            snr_db_list: vec![65.8, 25.8, -14.2],
            lambda_list: geometric_lambda_grid(-6.0, 6.0, 7),
            train_sizes: vec![1, 2, 4],
            repetitions: 10,
            base_seed: 1,
            kernel_spec: ZeroSumKernelSpec::compact(128, 128),
            texture_correlation_length: 2.0,
            input_dir: None,
            solver: SolverOptions::default(),
        }
    }
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Argument(m));
        if self.image_height == 0 || self.image_width == 0 {
            return fail("image dimensions must be positive".into());
        }
        if (self.kernel_spec.height, self.kernel_spec.width) != (self.image_height, self.image_width) {
            return fail("kernel grid must match the image size".into());
        }
        if self.repetitions == 0 {
            return fail("repetitions must be at least 1".into());
        }
        if self.snr_db_list.is_empty() || self.lambda_list.is_empty() || self.train_sizes.is_empty() {
            return fail("snr_db, lambda and train_sizes must be non-empty".into());
        }
        if let Some(l) = self.lambda_list.iter().find(|l| !(**l >= 0.0 && l.is_finite())) {
            return fail(format!("lambda {l} is not a finite nonnegative number"));
        }
        if let Some(s) = self.snr_db_list.iter().find(|s| s.is_nan()) {
            return fail(format!("snr {s} is not a number"));
        }
        if let Some(t) = self.train_sizes.iter().find(|&&t| t == 0 || t >= self.n_images) {
            return fail(format!(
                "train size {t} must be in 1..{} to leave a test image",
                self.n_images
            ));
        }
        if !(self.texture_correlation_length > 0.0) {
            return fail("texture_correlation_length must be positive".into());
        }
        self.solver.validate()
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = Self::parse(&text)?;
        if let Some(dir) = &config.input_dir {
            if dir.is_relative() {
                if let Some(parent) = path.parent() {
                    config.input_dir = Some(parent.join(dir));
                }
            }
        }
        Ok(config)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut config = ExperimentConfig::default();
        let mut offset = 0;
        for raw_line in text.split_inclusive('\n') {
            let line_start = offset;
            offset += raw_line.len();
            let line = raw_line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::format(line_start, format!("expected `key = value`, got `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let bad = |what: &str| Error::format(line_start, format!("{key}: invalid {what} `{value}`"));
            match key {
                "image_height" => config.image_height = scalar(value).map_err(|_| bad("integer"))?,
                "image_width" => config.image_width = scalar(value).map_err(|_| bad("integer"))?,
                "n_images" => config.n_images = scalar(value).map_err(|_| bad("integer"))?,
                "snr_db" => config.snr_db_list = list(value).map_err(|_| bad("number list"))?,
                "lambda" => config.lambda_list = list(value).map_err(|_| bad("number list"))?,
                "train_sizes" => config.train_sizes = list(value).map_err(|_| bad("integer list"))?,
                "repetitions" => config.repetitions = scalar(value).map_err(|_| bad("integer"))?,
                "base_seed" => config.base_seed = scalar(value).map_err(|_| bad("integer"))?,
                "kernel_positive_radius" => {
                    config.kernel_spec.positive_radius = scalar(value).map_err(|_| bad("number"))?;
                }
                "kernel_negative_inner" => {
                    config.kernel_spec.negative_inner = scalar(value).map_err(|_| bad("number"))?;
                }
                "kernel_negative_outer" => {
                    config.kernel_spec.negative_outer = scalar(value).map_err(|_| bad("number"))?;
                }
                "texture_correlation_length" => {
                    config.texture_correlation_length = scalar(value).map_err(|_| bad("number"))?
                }
                "input_dir" => config.input_dir = Some(PathBuf::from(value)),
                "solver_tolerance" => config.solver.tolerance = scalar(value).map_err(|_| bad("number"))?,
                "solver_max_iterations" => {
                    config.solver.max_iterations = scalar(value).map_err(|_| bad("integer"))?
                }
                "solver_epsilon_ridge" => {
                    config.solver.epsilon_ridge = if value == "auto" {
                        None
                    } else {
                        Some(scalar(value).map_err(|_| bad("number"))?)
                    }
                }
                _ => return Err(Error::format(line_start, format!("unknown key `{key}`"))),
            }
        }
        config.kernel_spec.height = config.image_height;
        config.kernel_spec.width = config.image_width;
        config.validate()?;
        Ok(config)
    }

    /// Renders the configuration in the text format accepted by [`ExperimentConfig::parse`].
    pub fn to_text(&self) -> String {
        let join = |v: &[f64]| v.iter().map(|x| format!("{x:e}")).collect::<Vec<_>>().join(", ");
        let mut out = String::new();
        out.push_str(&format!("image_height = {}\n", self.image_height));
        out.push_str(&format!("image_width = {}\n", self.image_width));
        out.push_str(&format!("n_images = {}\n", self.n_images));
        out.push_str(&format!("snr_db = {}\n", join(&self.snr_db_list)));
        out.push_str(&format!("lambda = {}\n", join(&self.lambda_list)));
        let sizes: Vec<String> = self.train_sizes.iter().map(|t| t.to_string()).collect();
        out.push_str(&format!("train_sizes = {}\n", sizes.join(", ")));
        out.push_str(&format!("repetitions = {}\n", self.repetitions));
        out.push_str(&format!("base_seed = {}\n", self.base_seed));
        out.push_str(&format!("kernel_positive_radius = {:e}\n", self.kernel_spec.positive_radius));
        out.push_str(&format!("kernel_negative_inner = {:e}\n", self.kernel_spec.negative_inner));
        out.push_str(&format!("kernel_negative_outer = {:e}\n", self.kernel_spec.negative_outer));
        out.push_str(&format!(
            "texture_correlation_length = {:e}\n",
            self.texture_correlation_length
        ));
        if let Some(dir) = &self.input_dir {
            out.push_str(&format!("input_dir = {}\n", dir.display()));
        }
        out.push_str(&format!("solver_tolerance = {:e}\n", self.solver.tolerance));
        out.push_str(&format!("solver_max_iterations = {}\n", self.solver.max_iterations));
        match self.solver.epsilon_ridge {
            Some(eps) => out.push_str(&format!("solver_epsilon_ridge = {eps:e}\n")),
            None => out.push_str("solver_epsilon_ridge = auto\n"),
        }
        out
    }
}

fn scalar<T: FromStr>(value: &str) -> std::result::Result<T, ()> {
    value.parse().map_err(|_| ())
}

fn list<T: FromStr>(value: &str) -> std::result::Result<Vec<T>, ()> {
    value
        .split(',')
        .map(|item| item.trim().parse().map_err(|_| ()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_all_keys() {
        let text = "\
# desk-scale run
image_height = 32
image_width = 48
n_images = 5
snr_db = 25.8, -14.2
lambda = 0, 1e2, 1e4   # grid
train_sizes = 1, 2
repetitions = 3
base_seed = 99
kernel_positive_radius = 1.5
kernel_negative_inner = 2
kernel_negative_outer = 4
texture_correlation_length = 1.25
solver_tolerance = 1e-9
solver_max_iterations = 500
solver_epsilon_ridge = 1e-6
";
        let c = ExperimentConfig::parse(text).unwrap();
        assert_eq!((c.image_height, c.image_width, c.n_images), (32, 48, 5));
        assert_eq!(c.snr_db_list, vec![25.8, -14.2]);
        assert_eq!(c.lambda_list, vec![0.0, 100.0, 1e4]);
        assert_eq!(c.train_sizes, vec![1, 2]);
        assert_eq!((c.repetitions, c.base_seed), (3, 99));
        assert_eq!(c.kernel_spec.positive_radius, 1.5);
        assert_eq!((c.kernel_spec.height, c.kernel_spec.width), (32, 48));
        assert_eq!(c.solver.max_iterations, 500);
        assert_eq!(c.solver.epsilon_ridge, Some(1e-6));
        assert_eq!(ExperimentConfig::parse(&c.to_text()).unwrap(), c);
    }

    #[test]
    fn defaults_are_valid() {
        let c = ExperimentConfig::parse("").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        assert_eq!(c.lambda_list.len(), 8);
        assert_eq!(c.lambda_list[0], 0.0);
        let span = c.lambda_list[7] / c.lambda_list[1];
        assert!((span.log10() - 12.0).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(matches!(ExperimentConfig::parse("bogus = 1"), Err(Error::Format { .. })));
        assert!(matches!(ExperimentConfig::parse("repetitions 3"), Err(Error::Format { .. })));
        assert!(ExperimentConfig::parse("n_images = 4\ntrain_sizes = 4").is_err());
        assert!(ExperimentConfig::parse("lambda = 0, -1").is_err());
        assert!(ExperimentConfig::parse("repetitions = 0").is_err());
        match ExperimentConfig::parse("n_images = 8\nlambda = 1, x\n") {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 13),
            other => panic!("{other:?}"),
        }
    }
}
