//! Text formats: complex scalars, matrix dumps and factorization dumps.
//!
//! Matrix dump layout:
//!
//! ```text
//! carleman dim=3 map=0+0i,1+0i
//! 1+0i,0+0i,0+0i
//! 0+0i,1+0i,0+0i
//! 0+0i,0+0i,1+0i
//! ```
//!
//! Entries are written as `re+imi` / `re-imi` using the shortest decimal
//! representation that round-trips the `f64`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// `re+imi` with negative zeros normalized to `0`.
pub fn format_complex(z: Complex64) -> String {
    let re = z.re + 0.0;
    let im = z.im + 0.0;
    if im.is_sign_negative() {
        format!("{re}-{}i", -im)
    } else {
        format!("{re}+{im}i")
    }
}

/// Parse `a`, `bi`, `a+bi` or `a-bi` (exponents such as `1e-3` allowed).
pub fn parse_complex(s: &str) -> Result<Complex64> {
    let s = s.trim();
    let err = || Error::Parse(format!("bad complex number '{s}'"));
    if s.is_empty() {
        return Err(err());
    }
    let Some(body) = s.strip_suffix('i') else {
        return s.parse::<f64>().map(|re| Complex64::new(re, 0.0)).map_err(|_| err());
    };
    // split at the last sign that is not leading and not part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'e' | b'E'));
    let parse_im = |t: &str| -> Result<f64> {
        match t {
            "" | "+" => Ok(1.0),
            "-" => Ok(-1.0),
            _ => t.parse::<f64>().map_err(|_| err()),
        }
    };
    match split {
        Some(i) => {
            let re = body[..i].parse::<f64>().map_err(|_| err())?;
            Ok(Complex64::new(re, parse_im(&body[i..])?))
        }
        None => Ok(Complex64::new(0.0, parse_im(body)?)),
    }
}

pub(crate) fn format_row<'a>(row: impl Iterator<Item = &'a Complex64>) -> String {
    row.map(|&z| format_complex(z)).collect::<Vec<_>>().join(",")
}

/// Write a square matrix block, one row per line.
pub(crate) fn write_block(out: &mut String, m: &DMatrix<Complex64>) {
    for j in 0..m.nrows() {
        let line = format_row((0..m.ncols()).map(|k| &m[(j, k)]));
        let _ = writeln!(out, "{line}");
    }
}

/// Parse `rows` lines of comma-separated complex entries.
pub(crate) fn parse_block<'a>(
    lines: &mut impl Iterator<Item = &'a str>,
    rows: usize,
    cols: usize,
) -> Result<DMatrix<Complex64>> {
    let mut m = DMatrix::zeros(rows, cols);
    for j in 0..rows {
        let line = lines
            .next()
            .ok_or_else(|| Error::Parse(format!("missing matrix row {j}")))?;
        let entries = line
            .split(',')
            .map(parse_complex)
            .collect::<Result<Vec<_>>>()?;
        if entries.len() != cols {
            return Err(Error::Parse(format!(
                "row {j} has {} entries, expected {cols}",
                entries.len()
            )));
        }
        for (k, z) in entries.into_iter().enumerate() {
            m[(j, k)] = z;
        }
    }
    Ok(m)
}

/// Read `key=value` out of a whitespace-separated header line.
pub(crate) fn header_field<'a>(header: &'a str, key: &str) -> Option<&'a str> {
    header
        .split_whitespace()
        .find_map(|tok| tok.strip_prefix(key)?.strip_prefix('='))
}
