//! CSV data files: a header row of labels, one observation per line.

use std::path::Path;

use crate::error::{Error, Result};
use crate::linalg::DataMatrix;

/// Formats like C's `%.17g`: 17 significant digits, trailing zeros removed,
/// exponent notation outside `1e-4 ≤ |x| < 1e17`.
pub fn format_g17(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return if x.is_sign_negative() {
            "-0".into()
        } else {
            "0".into()
        };
    }
    let sci = format!("{x:.16e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-4..17).contains(&exp) {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim_zeros(mantissa), exp.abs())
    } else {
        let fixed = format!("{:.*}", (16 - exp) as usize, x);
        trim_zeros(&fixed).to_string()
    }
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

/// Labeled data read from CSV.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledData {
    pub labels: Vec<String>,
    pub data: DataMatrix,
}

/// Reads numeric CSV. Without a header, columns are named `x0..x{p−1}`.
/// Empty fields are errors; nothing is imputed.
pub fn read_csv(path: impl AsRef<Path>, has_header: bool) -> Result<LabeledData> {
    let file = std::fs::File::open(path)?;
    parse_csv(file, has_header)
}

pub fn parse_csv(input: impl std::io::Read, has_header: bool) -> Result<LabeledData> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(input);
    let mut labels: Option<Vec<String>> = None;
    let mut values = Vec::new();
    let mut n = 0;
    for record in reader.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line() as usize);
            Error::parse(line, e.to_string())
        })?;
        let line = record.position().map_or(0, |p| p.line() as usize);
        if record.iter().all(|f| f.trim().is_empty()) {
            continue;
        }
        if labels.is_none() && has_header {
            let names: Vec<String> = record.iter().map(|s| s.trim().to_string()).collect();
            if let Some(bad) = names.iter().find(|s| s.is_empty()) {
                return Err(Error::parse(line, format!("empty column label `{bad}`")));
            }
            labels = Some(names);
            continue;
        }
        let p = labels
            .get_or_insert_with(|| (0..record.len()).map(|j| format!("x{j}")).collect())
            .len();
        if record.len() != p {
            return Err(Error::parse(
                line,
                format!("expected {p} fields, found {}", record.len()),
            ));
        }
        for (j, field) in record.iter().enumerate() {
            let field = field.trim();
            let name = &labels.as_ref().expect("labels set")[j];
            if field.is_empty() {
                return Err(Error::parse(
                    line,
                    format!("missing value in column `{name}`"),
                ));
            }
            let x: f64 = field.parse().map_err(|_| {
                Error::parse(
                    line,
                    format!("non-numeric value `{field}` in column `{name}`"),
                )
            })?;
            if !x.is_finite() {
                return Err(Error::parse(
                    line,
                    format!("non-finite value in column `{name}`"),
                ));
            }
            values.push(x);
        }
        n += 1;
    }
    let labels = labels.ok_or_else(|| Error::parse(1, "empty file"))?;
    let data = DataMatrix::new(n, labels.len(), values)?;
    Ok(LabeledData { labels, data })
}

pub fn write_csv(path: impl AsRef<Path>, labels: &[String], data: &DataMatrix) -> Result<()> {
    std::fs::write(path, csv_string(labels, data))?;
    Ok(())
}

pub fn csv_string(labels: &[String], data: &DataMatrix) -> String {
    let mut out = labels.join(",");
    out.push('\n');
    for row in data.rows() {
        let line: Vec<String> = row.iter().map(|&x| format_g17(x)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}
