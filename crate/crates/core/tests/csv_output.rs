use proptest::prelude::*;
use scalereg::harness::{emit_csv, write_csv, ExperimentRecord, CSV_COLUMNS};

fn record(seed: f64, ids: Vec<usize>) -> ExperimentRecord {
    ExperimentRecord {
        snr_db: -14.2,
        lambda: seed * 1e3,
        train_size: ids.len(),
        repetition: 3,
        test_mse: seed.exp(),
        log10_mse: seed.exp().log10(),
        test_mse_clean: seed / 7.0,
        noise_floor: 26.302679918953825,
        train_image_ids: ids,
        solver_iterations: 1234,
        final_residual: 1e-300 * seed,
        converged: true,
        failed: false,
        clipped_fraction: 0.1 + 0.2,
    }
}

fn parse_real(s: &str) -> f64 {
    match s {
        "NaN" => f64::NAN,
        "inf" => f64::INFINITY,
        "-inf" => f64::NEG_INFINITY,
        _ => s.parse().unwrap(),
    }
}

fn same(a: f64, b: f64) -> bool {
    a.to_bits() == b.to_bits() || (a.is_nan() && b.is_nan())
}

fn round_trip(records: &[ExperimentRecord]) -> Vec<csv::StringRecord> {
    let mut bytes = Vec::new();
    write_csv(records, &mut bytes).unwrap();
    let mut reader = csv::Reader::from_reader(bytes.as_slice());
    let header: Vec<String> = reader.headers().unwrap().iter().map(String::from).collect();
    assert_eq!(header, CSV_COLUMNS);
    reader.records().map(|r| r.unwrap()).collect()
}

fn check(row: &csv::StringRecord, r: &ExperimentRecord) {
    let real = |i: usize| parse_real(&row[i]);
    assert!(same(real(0), r.snr_db));
    assert!(same(real(1), r.lambda));
    assert_eq!(row[2].parse::<usize>().unwrap(), r.train_size);
    assert_eq!(row[3].parse::<usize>().unwrap(), r.repetition);
    assert!(same(real(4), r.test_mse));
    assert!(same(real(5), r.log10_mse));
    assert!(same(real(6), r.test_mse_clean));
    assert!(same(real(7), r.noise_floor));
    assert!(same(real(8), r.clipped_fraction));
    assert_eq!(row[9].parse::<usize>().unwrap(), r.solver_iterations);
    assert!(same(real(10), r.final_residual));
    assert_eq!(row[11].parse::<bool>().unwrap(), r.converged);
    assert_eq!(row[12].parse::<bool>().unwrap(), r.failed);
    let ids: Vec<usize> = if row[13].is_empty() {
        Vec::new()
    } else {
        row[13].split(';').map(|s| s.parse().unwrap()).collect()
    };
    assert_eq!(ids, r.train_image_ids);
}

#[test]
fn empty_list_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    emit_csv(&[], &path).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text, format!("{}\n", CSV_COLUMNS.join(",")));
}

#[test]
fn one_record_is_two_lines() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("out.csv");
    emit_csv(&[record(0.5, vec![2])], &path).unwrap();
    assert_eq!(std::fs::read_to_string(&path).unwrap().lines().count(), 2);
}

#[test]
fn failed_records_round_trip() {
    let mut r = record(1.0, vec![0, 5]);
    r.test_mse = f64::NAN;
    r.log10_mse = f64::NAN;
    r.final_residual = f64::INFINITY;
    r.failed = true;
    r.converged = false;
    let rows = round_trip(std::slice::from_ref(&r));
    check(&rows[0], &r);
}

#[test]
fn unwritable_path_is_an_io_error() {
    let dir = tempfile::tempdir().unwrap();
    let err = emit_csv(&[], dir.path().join("missing").join("out.csv")).unwrap_err();
    assert!(matches!(err, scalereg::Error::Io { .. }));
}

proptest! {
    #[test]
    fn values_round_trip_exactly(
        seeds in prop::collection::vec(-700.0f64..700.0, 1..6),
        ids in prop::collection::vec(0usize..1000, 0..5),
    ) {
        let records: Vec<_> = seeds.iter().map(|&s| record(s, ids.clone())).collect();
        let rows = round_trip(&records);
        prop_assert_eq!(rows.len(), records.len());
        for (row, r) in rows.iter().zip(&records) {
            check(row, r);
        }
    }
}
