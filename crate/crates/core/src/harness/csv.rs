//! CSV output of experiment records.
//!
//! Columns, in order, are [`CSV_COLUMNS`]. Reals are printed in scientific
//! notation with 17 significant digits so they parse back to the same bits;
//! NaN marks the error columns of failed fits. `train_image_ids` is a
//! `;`-separated list. Fields containing `,`, `"` or line breaks are quoted
//! with doubled inner quotes.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::ExperimentRecord;
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 14] = [
    "snr_db",
    "lambda",
    "train_size",
    "repetition",
    "test_mse",
    "log10_mse",
    "test_mse_clean",
    "noise_floor",
    "clipped_fraction",
    "solver_iterations",
    "final_residual",
    "converged",
    "failed",
    "train_image_ids",
];

fn real(v: f64) -> String {
    if v.is_nan() {
        "NaN".to_string()
    } else if v.is_infinite() {
        if v > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn quote(field: &str) -> String {
    if field.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

pub fn write_csv(records: &[ExperimentRecord], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "{}", CSV_COLUMNS.join(","))?;
    for r in records {
        let ids: Vec<String> = r.train_image_ids.iter().map(|i| i.to_string()).collect();
        let fields = [
            real(r.snr_db),
            real(r.lambda),
            r.train_size.to_string(),
            r.repetition.to_string(),
            real(r.test_mse),
            real(r.log10_mse),
            real(r.test_mse_clean),
            real(r.noise_floor),
            real(r.clipped_fraction),
            r.solver_iterations.to_string(),
            real(r.final_residual),
            r.converged.to_string(),
            r.failed.to_string(),
            ids.join(";"),
        ];
        let line: Vec<String> = fields.iter().map(|f| quote(f)).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn emit_csv(records: &[ExperimentRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let file = File::create(path).map_err(|e| Error::io(path, e))?;
    let mut writer = BufWriter::new(file);
    write_csv(records, &mut writer)
        .and_then(|_| writer.flush())
        .map_err(|e| Error::io(path, e))
}
