use std::path::Path;
use std::process::{Command, Output};

use scalereg::estimator::load_statistics;
use scalereg::gridfield::{load_image_field, save_field};
use scalereg::synthlab::{make_dataset, make_texture, make_zero_sum_kernel, NoiseSpec, ZeroSumKernelSpec};
use scalereg::{DftPlan, SufficientStatistics};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_scalereg")).args(args).output().unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = run(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn noiseless_fit_recovers_generator_kernel() {
    let dir = tempfile::tempdir().unwrap();
    let kernel = dir.path().join("kernel.field");
    let pairs = dir.path().join("pairs");
    let stats = dir.path().join("stats");
    let fitted = dir.path().join("fitted.field");
    ok(&["synth-kernel", "--height", "32", "--width", "32", "--out", p(&kernel)]);
    ok(&[
        "make-dataset", "--kernel", p(&kernel), "--count", "3", "--correlation-length", "1",
        "--snr-db", "inf", "--seed", "4", "--out-dir", p(&pairs),
    ]);
    ok(&["stats", "--pairs-dir", p(&pairs), "--out", p(&stats)]);
    let report = ok(&["fit", "--stats", p(&stats), "--lambda", "0", "--out", p(&fitted)]);
    assert!(report.contains("converged true"), "{report}");

    let truth = load_image_field(&kernel).unwrap();
    let learned = load_image_field(&fitted).unwrap();
    assert!(learned.max_abs_diff(&truth).unwrap() <= 1e-8);

    // predicting with the generator reproduces the clean output
    let predicted = dir.path().join("pred.field");
    let input = pairs.join("input_0000.field");
    ok(&["predict", "--kernel", p(&kernel), "--image", p(&input), "--out", p(&predicted)]);
    let clean = load_image_field(pairs.join("clean_0000.field")).unwrap();
    assert!(load_image_field(&predicted).unwrap().max_abs_diff(&clean).unwrap() < 1e-12);

    let report = ok(&["evaluate", "--kernel", p(&kernel), "--pairs-dir", p(&pairs)]);
    let mean: f64 = report
        .lines()
        .find_map(|l| l.strip_prefix("mean mse "))
        .and_then(|l| l.split_whitespace().next())
        .unwrap()
        .parse()
        .unwrap();
    assert!(mean < 1e-24, "{mean}");
}

#[test]
fn appending_one_pair_at_a_time_matches_batch() {
    let dir = tempfile::tempdir().unwrap();
    let spec = ZeroSumKernelSpec::compact(16, 16);
    let kernel = make_zero_sum_kernel(&spec).unwrap();
    let inputs: Vec<_> = (0..4).map(|i| make_texture(16, 16, 100 + i, 1.5).unwrap()).collect();
    let pairs = make_dataset(&inputs, &kernel, &NoiseSpec { snr_db: 10.0, seed: 9 }).unwrap();
    let mut paths = Vec::new();
    for (i, (a, b)) in pairs.iter().enumerate() {
        let ia = dir.path().join(format!("a{i}.field"));
        let ib = dir.path().join(format!("b{i}.field"));
        save_field(a.clone(), &ia).unwrap();
        save_field(b.clone(), &ib).unwrap();
        paths.push((ia, ib));
    }

    let inc = dir.path().join("inc");
    for (ia, ib) in &paths {
        ok(&["stats", "--append", "--input", p(ia), "--output", p(ib), "--out", p(&inc)]);
    }
    let batch = dir.path().join("batch");
    let mut args = vec!["stats", "--out", p(&batch)];
    for (ia, ib) in &paths {
        args.extend(["--input", p(ia), "--output", p(ib)]);
    }
    ok(&args);

    let inc = load_statistics(&inc).unwrap();
    let batch = load_statistics(&batch).unwrap();
    assert_eq!((inc.n_pairs(), batch.n_pairs()), (4, 4));
    assert!(inc.max_relative_diff(&batch).unwrap() <= 1e-15);

    let plan = DftPlan::new(16, 16).unwrap();
    let lib = SufficientStatistics::from_pairs(&plan, pairs.iter().map(|(a, b)| (a, b))).unwrap();
    assert!(lib.max_relative_diff(&batch).unwrap() <= 1e-15);
}

#[test]
fn experiment_output_is_byte_identical_across_runs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("run.cfg");
    std::fs::write(
        &config,
        "image_height = 24\nimage_width = 24\nn_images = 4\nsnr_db = 20, -5\n\
         lambda = 0, 1, 100\ntrain_sizes = 1, 2\nrepetitions = 2\nbase_seed = 17\n",
    )
    .unwrap();
    let first = dir.path().join("first.csv");
    let second = dir.path().join("second.csv");
    ok(&["experiment", "--config", p(&config), "--out", p(&first)]);
    let summary = ok(&["experiment", "--config", p(&config), "--out", p(&second), "--summary"]);
    assert!(summary.contains("train size 2"), "{summary}");
    let a = std::fs::read(&first).unwrap();
    assert_eq!(a, std::fs::read(&second).unwrap());
    assert_eq!(String::from_utf8(a).unwrap().lines().count(), 1 + 2 * 2 * 2 * 3);
}

#[test]
fn exit_codes() {
    assert_eq!(run(&[]).status.code(), Some(1));
    assert_eq!(run(&["fit", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["--help"]).status.code(), Some(0));

    let dir = tempfile::tempdir().unwrap();
    let garbage = dir.path().join("garbage.field");
    std::fs::write(&garbage, b"not a field").unwrap();
    let out = run(&["predict", "--kernel", p(&garbage), "--image", p(&garbage), "--out", p(&dir.path().join("x"))]);
    assert_eq!(out.status.code(), Some(2));

    let missing = dir.path().join("nope");
    assert_eq!(run(&["fit", "--stats", p(&missing), "--out", p(&garbage)]).status.code(), Some(2));

    // negative lambda is a usage error
    let kernel = dir.path().join("k.field");
    let pairs = dir.path().join("pairs");
    let stats = dir.path().join("stats");
    ok(&["synth-kernel", "--height", "16", "--width", "16", "--out", p(&kernel)]);
    ok(&["make-dataset", "--kernel", p(&kernel), "--count", "1", "--snr-db", "-3", "--out-dir", p(&pairs)]);
    ok(&["stats", "--pairs-dir", p(&pairs), "--out", p(&stats)]);
    let out = dir.path().join("fit.field");
    let code = |args: &[&str]| run(args).status.code();
    assert_eq!(code(&["fit", "--stats", p(&stats), "--lambda", "-1", "--out", p(&out)]), Some(1));

    // a single sweep cannot converge; only --strict turns that into exit 3
    let base = ["fit", "--stats", p(&stats), "--lambda", "1e6", "--max-iterations", "1", "--out", p(&out)];
    assert_eq!(code(&base), Some(0));
    let mut strict = base.to_vec();
    strict.push("--strict");
    assert_eq!(code(&strict), Some(3));
}

#[test]
fn pgm_outputs_and_preview() {
    let dir = tempfile::tempdir().unwrap();
    let kernel = dir.path().join("kernel.pgm");
    ok(&["synth-kernel", "--height", "16", "--width", "16", "--preset", "compact", "--out", p(&kernel)]);
    let bytes = std::fs::read(&kernel).unwrap();
    assert!(bytes.starts_with(b"P5"));

    let field = dir.path().join("kernel.field");
    ok(&["synth-kernel", "--height", "16", "--width", "16", "--out", p(&field)]);
    let pairs = dir.path().join("pairs");
    ok(&["make-dataset", "--kernel", p(&field), "--count", "2", "--snr-db", "30", "--out-dir", p(&pairs)]);
    let stats = dir.path().join("stats");
    ok(&["stats", "--pairs-dir", p(&pairs), "--out", p(&stats)]);
    let preview = dir.path().join("preview.pgm");
    let report = ok(&[
        "fit", "--stats", p(&stats), "--lambda", "10", "--out", p(&dir.path().join("fit.field")),
        "--preview", p(&preview), "--preview-size", "9",
    ]);
    assert!(report.contains("effective lambda per pair 5e0"), "{report}");
    let img = scalereg::gridfield::load_pgm(&preview).unwrap();
    assert_eq!(img.dims(), (9, 9));
}
