//! Plain-text matrix format.
//!
//! ```text
//! 2 2
//! 1+0i 0.5-2i
//! 0+0i 1e-3+4i
//! ```
//!
//! The first line holds `rows cols`; each following line holds one row of
//! whitespace-separated complex entries written `a+bi` or `a-bi`. The `i`
//! suffix is mandatory.

use std::fmt::Write as _;

use super::matrix::{CMatrix, C64};
use crate::error::{Error, Result};

fn parse_err(line: usize, message: impl Into<String>) -> Error {
    Error::Parse {
        line,
        message: message.into(),
    }
}

/// Parses a single `a+bi` token.
pub fn parse_complex(token: &str) -> std::result::Result<C64, String> {
    let body = token
        .strip_suffix('i')
        .ok_or_else(|| format!("entry '{token}' lacks the 'i' suffix"))?;
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| {
            (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E')
        })
        .ok_or_else(|| format!("entry '{token}' is not of the form a+bi"))?;
    let (re, im) = body.split_at(split);
    let re: f64 = re
        .parse()
        .map_err(|_| format!("bad real part in '{token}'"))?;
    let im: f64 = im
        .strip_prefix('+')
        .unwrap_or(im)
        .parse()
        .map_err(|_| format!("bad imaginary part in '{token}'"))?;
    if !re.is_finite() || !im.is_finite() {
        return Err(format!("non-finite entry '{token}'"));
    }
    Ok(C64::new(re, im))
}

pub fn format_complex(z: C64) -> String {
    let sign = if z.im.is_sign_negative() { "" } else { "+" };
    format!("{:?}{}{:?}i", z.re, sign, z.im)
}

/// Reads one matrix from a line iterator; `line_offset` is the 1-based number
/// of the first line consumed, used in diagnostics.
pub(crate) fn read_matrix<'a, I>(lines: &mut I, line_no: &mut usize) -> Result<CMatrix>
where
    I: Iterator<Item = &'a str>,
{
    let header = next_nonempty(lines, line_no).ok_or_else(|| parse_err(*line_no, "missing 'rows cols' header"))?;
    let dims: Vec<&str> = header.split_whitespace().collect();
    if dims.len() != 2 {
        return Err(parse_err(*line_no, "header must be 'rows cols'"));
    }
    let rows: usize = dims[0]
        .parse()
        .map_err(|_| parse_err(*line_no, "bad row count"))?;
    let cols: usize = dims[1]
        .parse()
        .map_err(|_| parse_err(*line_no, "bad column count"))?;
    if rows == 0 || cols == 0 {
        return Err(parse_err(*line_no, "dimensions must be positive"));
    }
    let mut data = Vec::with_capacity(rows * cols);
    for r in 0..rows {
        let line = next_nonempty(lines, line_no)
            .ok_or_else(|| parse_err(*line_no, format!("missing row {r}")))?;
        let before = data.len();
        for tok in line.split_whitespace() {
            data.push(parse_complex(tok).map_err(|m| parse_err(*line_no, m))?);
        }
        if data.len() - before != cols {
            return Err(parse_err(
                *line_no,
                format!("expected {cols} entries, found {}", data.len() - before),
            ));
        }
    }
    CMatrix::from_row_major(rows, cols, data)
}

pub(crate) fn next_nonempty<'a, I>(lines: &mut I, line_no: &mut usize) -> Option<&'a str>
where
    I: Iterator<Item = &'a str>,
{
    for l in lines.by_ref() {
        *line_no += 1;
        let t = l.trim();
        if !t.is_empty() && !t.starts_with('#') {
            return Some(t);
        }
    }
    None
}

pub fn parse_matrix(text: &str) -> Result<CMatrix> {
    let mut lines = text.lines();
    let mut line_no = 0;
    let m = read_matrix(&mut lines, &mut line_no)?;
    if let Some(extra) = next_nonempty(&mut lines, &mut line_no) {
        return Err(parse_err(line_no, format!("trailing content '{extra}'")));
    }
    Ok(m)
}

pub fn write_matrix(m: &CMatrix, out: &mut String) {
    let _ = writeln!(out, "{} {}", m.rows(), m.cols());
    for i in 0..m.rows() {
        let row: Vec<String> = m.row(i).iter().map(|&z| format_complex(z)).collect();
        let _ = writeln!(out, "{}", row.join(" "));
    }
}

pub fn format_matrix(m: &CMatrix) -> String {
    let mut s = String::new();
    write_matrix(m, &mut s);
    s
}
