use std::io;
use std::path::Path;

use serde::Serialize;
use serde_json::ser::Formatter;

use super::study::RateStudyResult;
use crate::error::{Error, Result};

pub const CSV_HEADER: [&str; 10] = [
    "delta",
    "alpha",
    "admissible",
    "discrepancy",
    "error_norm",
    "d_j",
    "d_j_sym",
    "d_g",
    "d_f",
    "sym_residual",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_csv_string(result: &RateStudyResult) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER)?;
    for r in &result.rows {
        w.write_record([
            num(r.delta),
            num(r.alpha),
            r.admissible.to_string(),
            num(r.discrepancy),
            num(r.error_norm),
            num(r.d_j),
            num(r.d_j_sym),
            num(r.d_g),
            num(r.d_f),
            num(r.sym_residual),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is ASCII"))
}

/// Compact JSON with every finite number written to 17 significant digits.
struct SeventeenDigits;

impl Formatter for SeventeenDigits {
    fn write_f64<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f64) -> io::Result<()> {
        writer.write_all(num(value).as_bytes())
    }

    fn write_f32<W: ?Sized + io::Write>(&mut self, writer: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(writer, value as f64)
    }
}

pub fn to_json_string(result: &RateStudyResult) -> Result<String> {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, SeventeenDigits);
    result.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json writes UTF-8"))
}

pub fn parse_json_report(text: &str) -> Result<RateStudyResult> {
    Ok(serde_json::from_str(text)?)
}

pub fn emit_report(result: &RateStudyResult, format: ReportFormat, path: &Path) -> Result<()> {
    let text = match format {
        ReportFormat::Csv => to_csv_string(result)?,
        ReportFormat::Json => to_json_string(result)?,
    };
    std::fs::write(path, text).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits() {
        assert_eq!(num(0.1), "1.0000000000000001e-1");
        assert_eq!(num(1.0).parse::<f64>().unwrap(), 1.0);
        let x = 0.1 + 0.2;
        assert_eq!(num(x).parse::<f64>().unwrap().to_bits(), x.to_bits());
    }
}
