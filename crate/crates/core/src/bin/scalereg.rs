//! Command-line front end.
//!
//! Images and kernels are read from `.pgm` files or from binary field files
//! (any other extension). A pairs directory holds `input_NNNN.*` and
//! `output_NNNN.*` files matched by their numeric suffix.
//!
//! Exit codes: 0 success, 1 usage error, 2 data or format error, 3 solver did
//! not converge (only with `--strict`).

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use scalereg::estimator::{load_statistics, save_statistics, KernelSolver};
use scalereg::gridfield::{load_image_field, load_pgm, save_field, save_pgm};
use scalereg::harness::{derive_seed, emit_csv, mse, run_experiment, summarize, ExperimentConfig};
use scalereg::synthlab::{make_dataset_detailed, make_texture, make_zero_sum_kernel, NoiseSpec, ZeroSumKernelSpec};
use scalereg::{DftPlan, Error, ImageGrid, Result, SolverOptions, SufficientStatistics};

const EXIT_USAGE: u8 = 1;
const EXIT_DATA: u8 = 2;
const EXIT_NOT_CONVERGED: u8 = 3;

const TEXTURE_STREAM: u64 = 1;

#[derive(Parser)]
#[command(name = "scalereg", version, about = "Learn a convolution kernel from image pairs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a zero-sum center-surround kernel.
    SynthKernel(SynthKernelArgs),
    /// Convolve inputs with a kernel and add noise, writing a pairs directory.
    MakeDataset(MakeDatasetArgs),
    /// Accumulate sufficient statistics from image pairs.
    Stats(StatsArgs),
    /// Solve for a kernel from saved statistics.
    Fit(FitArgs),
    /// Convolve an image with a kernel.
    Predict(PredictArgs),
    /// Report the MSE of a kernel on image pairs.
    Evaluate(EvaluateArgs),
    /// Run an experiment sweep and write the records as CSV.
    Experiment(ExperimentArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Compact,
    Wide,
}

#[derive(Args)]
struct SynthKernelArgs {
    #[arg(long)]
    height: usize,
    #[arg(long)]
    width: usize,
    #[arg(long, value_enum, default_value = "compact")]
    preset: Preset,
    /// Override the preset's positive radius.
    #[arg(long)]
    positive_radius: Option<f64>,
    #[arg(long)]
    negative_inner: Option<f64>,
    #[arg(long)]
    negative_outer: Option<f64>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct MakeDatasetArgs {
    #[arg(long)]
    kernel: PathBuf,
    /// Directory of PGM inputs; textures are generated when absent.
    #[arg(long)]
    inputs_dir: Option<PathBuf>,
    /// Number of generated textures.
    #[arg(long, default_value_t = 4)]
    count: usize,
    #[arg(long, default_value_t = 2.0)]
    correlation_length: f64,
    /// Output SNR in dB; `inf` for noiseless outputs.
    #[arg(long, allow_hyphen_values = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Args)]
struct PairArgs {
    /// Input image; repeat together with --output.
    #[arg(long = "input")]
    inputs: Vec<PathBuf>,
    #[arg(long = "output")]
    outputs: Vec<PathBuf>,
    /// Directory of input_NNNN / output_NNNN files.
    #[arg(long)]
    pairs_dir: Option<PathBuf>,
}

#[derive(Args)]
struct StatsArgs {
    #[command(flatten)]
    pairs: PairArgs,
    /// Add to the statistics already in --out instead of replacing them.
    #[arg(long)]
    append: bool,
    /// Statistics directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct FitArgs {
    /// Statistics directory written by `stats`.
    #[arg(long)]
    stats: PathBuf,
    #[arg(long, default_value_t = 0.0)]
    lambda: f64,
    #[arg(long, default_value_t = SolverOptions::default().tolerance)]
    tolerance: f64,
    #[arg(long, default_value_t = SolverOptions::default().max_iterations)]
    max_iterations: usize,
    /// Ridge for λ = 0 fits when aa vanishes somewhere; defaults to 1e-12 * max(aa).
    #[arg(long)]
    epsilon_ridge: Option<f64>,
    /// Exit with code 3 when the solver stops before converging.
    #[arg(long)]
    strict: bool,
    /// Kernel output (field file, or PGM scaled to the kernel's range).
    #[arg(long)]
    out: PathBuf,
    /// Also write a PGM of the kernel's central crop of this size.
    #[arg(long)]
    preview: Option<PathBuf>,
    #[arg(long, default_value_t = 31)]
    preview_size: usize,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    kernel: PathBuf,
    #[arg(long)]
    image: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    kernel: PathBuf,
    #[command(flatten)]
    pairs: PairArgs,
}

#[derive(Args)]
struct ExperimentArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Print per-sweep summaries to stdout.
    #[arg(long)]
    summary: bool,
}

enum Failure {
    Lib(Error),
    NotConverged,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let outcome = match cli.command {
        Command::SynthKernel(a) => synth_kernel(a),
        Command::MakeDataset(a) => make_dataset(a),
        Command::Stats(a) => stats(a),
        Command::Fit(a) => fit(a),
        Command::Predict(a) => predict(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Experiment(a) => experiment(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::NotConverged) => ExitCode::from(EXIT_NOT_CONVERGED),
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            if e.is_data_error() {
                ExitCode::from(EXIT_DATA)
            } else {
                ExitCode::from(EXIT_USAGE)
            }
        }
    }
}

fn is_pgm(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm"))
}

fn load_image(path: &Path) -> Result<ImageGrid> {
    if is_pgm(path) {
        load_pgm(path)
    } else {
        load_image_field(path)
    }
}

fn save_image(image: &ImageGrid, path: &Path) -> Result<()> {
    if is_pgm(path) {
        save_pgm(image, path, image.min(), image.max()).map(|_| ())
    } else {
        save_field(image.clone(), path)
    }
}

fn collect_pairs(args: &PairArgs) -> Result<Vec<(PathBuf, PathBuf)>> {
    if args.inputs.len() != args.outputs.len() {
        return Err(Error::Argument(format!(
            "{} --input but {} --output",
            args.inputs.len(),
            args.outputs.len()
        )));
    }
    let mut pairs: Vec<_> = args.inputs.iter().cloned().zip(args.outputs.iter().cloned()).collect();
    if let Some(dir) = &args.pairs_dir {
        pairs.extend(pairs_in_dir(dir)?);
    }
    if pairs.is_empty() {
        return Err(Error::Argument("no pairs given; use --input/--output or --pairs-dir".into()));
    }
    Ok(pairs)
}

fn pairs_in_dir(dir: &Path) -> Result<Vec<(PathBuf, PathBuf)>> {
    let mut inputs: Vec<PathBuf> = fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| p.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("input_")))
        .collect();
    inputs.sort();
    inputs
        .into_iter()
        .map(|input| {
            let name = input.file_name().and_then(|n| n.to_str()).unwrap_or_default();
            let output = input.with_file_name(name.replacen("input_", "output_", 1));
            if !output.exists() {
                return Err(Error::Argument(format!(
                    "{} has no matching {}",
                    input.display(),
                    output.display()
                )));
            }
            Ok((input, output))
        })
        .collect()
}

fn synth_kernel(a: SynthKernelArgs) -> std::result::Result<(), Failure> {
    let mut spec = match a.preset {
        Preset::Compact => ZeroSumKernelSpec::compact(a.height, a.width),
        Preset::Wide => ZeroSumKernelSpec::wide(a.height, a.width),
    };
    if let Some(r) = a.positive_radius {
        spec.positive_radius = r;
    }
    if let Some(r) = a.negative_inner {
        spec.negative_inner = r;
    }
    if let Some(r) = a.negative_outer {
        spec.negative_outer = r;
    }
    let kernel = make_zero_sum_kernel(&spec)?;
    let (pos, neg) = spec.counts()?;
    save_image(&kernel, &a.out)?;
    println!("kernel {}x{}: {pos} positive, {neg} negative pixels", a.height, a.width);
    Ok(())
}

fn make_dataset(a: MakeDatasetArgs) -> std::result::Result<(), Failure> {
    let kernel = load_image(&a.kernel)?;
    let (h, w) = kernel.dims();
    let inputs: Vec<ImageGrid> = match &a.inputs_dir {
        Some(dir) => {
            let mut paths: Vec<PathBuf> = fs::read_dir(dir)
                .map_err(|e| Error::io(dir, e))?
                .filter_map(|entry| entry.ok().map(|e| e.path()))
                .filter(|p| is_pgm(p))
                .collect();
            paths.sort();
            paths.iter().map(|p| load_pgm(p)).collect::<Result<_>>()?
        }
        None => (0..a.count)
            .map(|i| make_texture(h, w, derive_seed(a.seed, &[TEXTURE_STREAM, i as u64]), a.correlation_length))
            .collect::<Result<_>>()?,
    };
    let spec = NoiseSpec {
        snr_db: a.snr_db,
        seed: a.seed,
    };
    let pairs = make_dataset_detailed(&inputs, &kernel, &spec)?;
    fs::create_dir_all(&a.out_dir).map_err(|e| Error::io(&a.out_dir, e))?;
    for (i, pair) in pairs.iter().enumerate() {
        save_field(pair.input.clone(), a.out_dir.join(format!("input_{i:04}.field")))?;
        save_field(pair.output.clone(), a.out_dir.join(format!("output_{i:04}.field")))?;
        save_field(pair.clean.clone(), a.out_dir.join(format!("clean_{i:04}.field")))?;
        println!("pair {i}: sigma {:.6e}", pair.sigma);
    }
    Ok(())
}

fn stats(a: StatsArgs) -> std::result::Result<(), Failure> {
    let pairs = collect_pairs(&a.pairs)?;
    let first = load_image(&pairs[0].0)?;
    let (h, w) = first.dims();
    let mut stats = if a.append && a.out.join("header.txt").exists() {
        load_statistics(&a.out)?
    } else {
        SufficientStatistics::empty(h, w)
    };
    let plan = DftPlan::new(stats.height(), stats.width())?;
    for (input, output) in &pairs {
        let alpha = load_image(input)?;
        let beta = load_image(output)?;
        stats.accumulate(&plan, &alpha, &beta)?;
    }
    save_statistics(&stats, &a.out)?;
    println!("{} pairs accumulated, {} in total", pairs.len(), stats.n_pairs());
    Ok(())
}

fn fit(a: FitArgs) -> std::result::Result<(), Failure> {
    let stats = load_statistics(&a.stats)?;
    let options = SolverOptions {
        tolerance: a.tolerance,
        max_iterations: a.max_iterations,
        epsilon_ridge: a.epsilon_ridge,
    };
    let solver = KernelSolver::new(stats.height(), stats.width(), options)?;
    let est = solver.regularized(&stats, a.lambda)?;
    save_image(&est.kernel, &a.out)?;
    if let Some(preview) = &a.preview {
        let size = a.preview_size.min(stats.height()).min(stats.width());
        let crop = scalereg::gridfield::center_crop(&est.kernel, size, size)?;
        let bound = crop.max_abs().max(f64::MIN_POSITIVE);
        save_pgm(&crop, preview, -bound, bound)?;
    }
    println!("lambda {:e} over {} pairs", a.lambda, stats.n_pairs());
    if a.lambda > 0.0 {
        // the data term is a sum over pairs, so λ acts like λ/N of a mean objective
        println!("effective lambda per pair {:e}", a.lambda / stats.n_pairs() as f64);
    }
    println!("iterations {}", est.iterations);
    println!("final change {:e}", est.final_residual);
    println!("converged {}", est.converged);
    if a.strict && !est.converged {
        eprintln!("solver stopped after {} iterations without converging", est.iterations);
        return Err(Failure::NotConverged);
    }
    Ok(())
}

fn predict(a: PredictArgs) -> std::result::Result<(), Failure> {
    let kernel = load_image(&a.kernel)?;
    let image = load_image(&a.image)?;
    let plan = DftPlan::new(image.height(), image.width())?;
    let predicted = plan.circ_convolve(&image, &kernel)?;
    save_image(&predicted, &a.out)?;
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> std::result::Result<(), Failure> {
    let kernel = load_image(&a.kernel)?;
    let plan = DftPlan::new(kernel.height(), kernel.width())?;
    let pairs = collect_pairs(&a.pairs)?;
    let mut total = 0.0;
    for (input, output) in &pairs {
        let predicted = plan.circ_convolve(&load_image(input)?, &kernel)?;
        let err = mse(&predicted, &load_image(output)?)?;
        println!("{}: mse {err:.10e}", input.display());
        total += err;
    }
    let mean = total / pairs.len() as f64;
    println!("mean mse {mean:.10e} (log10 {:.6})", mean.log10());
    Ok(())
}

fn experiment(a: ExperimentArgs) -> std::result::Result<(), Failure> {
    let config = ExperimentConfig::from_file(&a.config)?;
    let records = run_experiment(&config)?;
    emit_csv(&records, &a.out)?;
    let failed = records.iter().filter(|r| r.failed).count();
    println!("{} records written to {}, {failed} failed", records.len(), a.out.display());
    if a.summary {
        for s in summarize(&records)? {
            print!("snr {} dB, train size {}:", s.snr_db, s.train_size);
            match (s.best_lambda, s.improvement()) {
                (Some(l), Some(r)) => print!(" best lambda {l:e}, improvement {r:.3}x"),
                _ => print!(" no positive lambda"),
            }
            if let Some(t) = s.t_test {
                print!(", t {:.3}, p {:.3e}", t.t, t.p_two_sided);
            }
            println!();
        }
    }
    Ok(())
}
