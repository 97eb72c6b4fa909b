//! Coefficient CSV input and report output plumbing.

use std::fs::File;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};

use num_complex::Complex64;

use blochfrac::TaylorPoly;

use crate::CliError;

/// Reads a coefficient CSV with header `n,re,im`. Rows may arrive in any
/// order; missing indices are zero coefficients.
pub fn read_coeffs(path: &Path) -> Result<TaylorPoly, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut rows: Vec<(usize, Complex64)> = Vec::new();
    for record in reader.records() {
        let record = record?;
        if record.len() != 3 {
            return Err(CliError::Usage(format!(
                "{}: expected 3 columns n,re,im, found {}",
                path.display(),
                record.len()
            )));
        }
        let n: usize = parse_field(path, &record, 0)?;
        let re: f64 = parse_field(path, &record, 1)?;
        let im: f64 = parse_field(path, &record, 2)?;
        rows.push((n, Complex64::new(re, im)));
    }
    if rows.is_empty() {
        return Err(CliError::Usage(format!(
            "{}: no coefficient rows",
            path.display()
        )));
    }
    let top = rows.iter().map(|r| r.0).max().unwrap();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); top + 1];
    for (n, c) in rows {
        coeffs[n] += c;
    }
    Ok(TaylorPoly::new(coeffs))
}

fn parse_field<T: std::str::FromStr>(
    path: &Path,
    record: &csv::StringRecord,
    idx: usize,
) -> Result<T, CliError> {
    record[idx].parse().map_err(|_| {
        CliError::Usage(format!(
            "{}: bad value {:?} in column {}",
            path.display(),
            &record[idx],
            idx
        ))
    })
}

/// Report sink: a file when `--out` is given, stdout otherwise.
pub struct Sink {
    target: Option<PathBuf>,
}

impl Sink {
    pub fn new(out: Option<PathBuf>) -> Self {
        Sink { target: out }
    }

    pub fn write_all(&self, bytes: &[u8]) -> io::Result<()> {
        match &self.target {
            Some(path) => File::create(path)?.write_all(bytes),
            None => io::stdout().write_all(bytes),
        }
    }
}

/// Serializes a value as pretty JSON with a trailing newline.
pub fn to_json<T: serde::Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(bytes)
}

/// Builds a CSV document from a header and formatted rows.
pub fn to_csv(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut writer = csv::Writer::from_writer(Vec::new());
    writer.write_record(header)?;
    for row in rows {
        writer.write_record(row)?;
    }
    Ok(writer.into_inner().map_err(|e| io::Error::other(e.to_string()))?)
}

/// Shortest round-trip decimal form; infinities spelled so CSV consumers
/// can parse them back.
pub fn fmt(v: f64) -> String {
    if v.is_finite() {
        format!("{v}")
    } else if v.is_nan() {
        "nan".into()
    } else if v > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

/// Reads a whole file (used by the determinism tests).
#[allow(dead_code)]
pub fn slurp(path: &Path) -> io::Result<Vec<u8>> {
    let mut buf = Vec::new();
    File::open(path)?.read_to_end(&mut buf)?;
    Ok(buf)
}
