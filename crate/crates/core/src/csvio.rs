//! CSV dumps of vectors, matrices and tables.
//!
//! Floats are written with 17 significant digits so that every `f64`
//! survives a write/read round trip unchanged.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use ndarray::Array2;

use crate::error::{Error, Result};

pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Matrix as CSV, row-major, no header.
pub fn write_matrix<W: Write>(out: W, m: &Array2<f64>) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    for row in m.rows() {
        w.write_record(row.iter().map(|&v| format_f64(v)))?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Vector as a single CSV row.
pub fn write_vector<W: Write>(out: W, v: &[f64]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(v.iter().map(|&x| format_f64(x)))?;
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

/// Header plus numeric rows.
pub fn write_table<W: Write>(out: W, header: &[String], rows: &[Vec<f64>]) -> Result<()> {
    let mut w = csv::WriterBuilder::new()
        .has_headers(false)
        .from_writer(out);
    w.write_record(header)?;
    for row in rows {
        w.write_record(row.iter().map(|&v| format_f64(v)))?;
    }
    w.flush().map_err(|e| Error::io("<csv>", e))?;
    Ok(())
}

pub fn create(path: &Path) -> Result<File> {
    File::create(path).map_err(|e| Error::io(path, e))
}

/// Reads every numeric field of a headerless CSV, row by row.
pub fn read_values(path: &Path) -> Result<Vec<f64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut out = Vec::new();
    for record in r.records() {
        for field in record?.iter().filter(|f| !f.is_empty()) {
            out.push(parse_f64(field)?);
        }
    }
    Ok(out)
}

pub fn read_matrix(path: &Path) -> Result<Array2<f64>> {
    let file = File::open(path).map_err(|e| Error::io(path, e))?;
    let mut r = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_reader(file);
    let mut data = Vec::new();
    let mut rows = 0;
    for record in r.records() {
        let record = record?;
        for field in record.iter() {
            data.push(parse_f64(field)?);
        }
        rows += 1;
    }
    let cols = data.len().checked_div(rows).unwrap_or(0);
    Array2::from_shape_vec((rows, cols), data)
        .map_err(|e| Error::Parse(format!("ragged matrix: {e}")))
}

pub fn parse_f64(s: &str) -> Result<f64> {
    s.trim()
        .parse::<f64>()
        .map_err(|_| Error::Parse(format!("not a number: `{s}`")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn seventeen_digits_round_trip(v in proptest::num::f64::NORMAL | proptest::num::f64::SUBNORMAL | proptest::num::f64::ZERO) {
            prop_assert_eq!(parse_f64(&format_f64(v)).unwrap().to_bits(), v.to_bits());
        }
    }

    #[test]
    fn matrix_file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.csv");
        let m = ndarray::array![[0.1, 1.0 / 3.0], [2.0f64.sqrt(), -5e-300]];
        write_matrix(create(&path).unwrap(), &m).unwrap();
        assert_eq!(read_matrix(&path).unwrap(), m);
        let text = std::fs::read_to_string(&path).unwrap();
        assert!(text.starts_with("1.0000000000000001e-1,3.3333333333333331e-1\n"));
    }

    #[test]
    fn reads_values_across_lines() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("v.csv");
        std::fs::write(&path, "3, 1\n2\n").unwrap();
        assert_eq!(read_values(&path).unwrap(), vec![3.0, 1.0, 2.0]);
        std::fs::write(&path, "3,x\n").unwrap();
        assert!(matches!(read_values(&path), Err(Error::Parse(_))));
    }
}
