//! Output formats: JSON-lines trial records, a pretty-printed aggregate JSON
//! document and the β-sweep CSV.
//!
//! All writers are deterministic: floats are printed with shortest
//! round-trip (JSON) or fixed significant-digit (CSV) formatting, and every
//! file ends with a newline when non-empty.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;
use sparsemap_core::bounds::Fig1Row;
use sparsemap_core::harness::TrialRecord;

use crate::error::CliError;

/// Significant digits in CSV output.
pub const CSV_DIGITS: usize = 12;

pub const FIG1_HEADER: &str = "beta,k1,prob_lower";

/// Formats `v` with at most `digits` significant digits, dropping trailing
/// zeros, in positional notation unless the exponent is below -5 or at least
/// `digits` (C's `%.{digits}g`).
pub fn format_sig(v: f64, digits: usize) -> String {
    assert!(digits >= 1);
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let sci = format!("{:.*e}", digits - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("exponent marker");
    let exp: i32 = exp.parse().expect("integer exponent");
    let negative = mantissa.starts_with('-');
    let digits_str: String = mantissa.chars().filter(|c| c.is_ascii_digit()).collect();
    let sign = if negative { "-" } else { "" };

    if exp < -5 || exp >= digits as i32 {
        let lead = &digits_str[..1];
        let rest = digits_str[1..].trim_end_matches('0');
        let e_sign = if exp < 0 { '-' } else { '+' };
        let body = if rest.is_empty() {
            lead.to_string()
        } else {
            format!("{lead}.{rest}")
        };
        return format!("{sign}{body}e{e_sign}{:02}", exp.abs());
    }
    let body = if exp >= 0 {
        let split = exp as usize + 1;
        let (int, frac) = digits_str.split_at(split);
        let frac = frac.trim_end_matches('0');
        if frac.is_empty() {
            int.to_string()
        } else {
            format!("{int}.{frac}")
        }
    } else {
        let zeros = "0".repeat((-exp - 1) as usize);
        format!("0.{zeros}{}", digits_str.trim_end_matches('0'))
    };
    format!("{sign}{body}")
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::io(path, e))
}

pub fn write_records_to<'a, W: Write>(
    mut w: W,
    records: impl IntoIterator<Item = &'a TrialRecord>,
) -> std::io::Result<()> {
    for r in records {
        serde_json::to_writer(&mut w, r)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

/// One JSON object per line, in the order given. An empty iterator produces
/// an empty file.
pub fn write_records<'a>(
    path: &Path,
    records: impl IntoIterator<Item = &'a TrialRecord>,
) -> Result<(), CliError> {
    write_records_to(create(path)?, records).map_err(|e| CliError::io(path, e))
}

pub fn read_records(path: &Path) -> Result<Vec<TrialRecord>, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            serde_json::from_str(l).map_err(|e| CliError::Config {
                path: path.to_path_buf(),
                message: format!("line {}: {e}", i + 1),
            })
        })
        .collect()
}

pub fn to_json_pretty<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    std::fs::write(path, to_json_pretty(value)).map_err(|e| CliError::io(path, e))
}

pub fn write_fig1_to<W: Write>(mut w: W, rows: &[Fig1Row]) -> std::io::Result<()> {
    writeln!(w, "{FIG1_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{},{},{}",
            format_sig(r.beta, CSV_DIGITS),
            format_sig(r.k1, CSV_DIGITS),
            format_sig(r.prob_lower, CSV_DIGITS)
        )?;
    }
    w.flush()
}

pub fn write_fig1(path: &Path, rows: &[Fig1Row]) -> Result<(), CliError> {
    write_fig1_to(create(path)?, rows).map_err(|e| CliError::io(path, e))
}
