//! Plain-text matrix format: one row per line, entries separated by
//! whitespace, complex entries written `a+bi` without inner spaces. Blank
//! lines and `#` comments are ignored.

use crate::error::{Error, Result};
use crate::matrix::{Field, Matrix, C64};

pub fn parse_matrix(text: &str) -> Result<Matrix> {
    let mut rows: Vec<Vec<C64>> = Vec::new();
    let mut complex = false;
    let mut first_row_line = 0;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        let mut row = Vec::new();
        for (col, token) in tokens(line) {
            let (z, is_complex) = parse_entry(token).map_err(|message| Error::Parse {
                line: line_no,
                column: col,
                message,
            })?;
            complex |= is_complex;
            row.push(z);
        }
        if row.is_empty() {
            continue;
        }
        if let Some(first) = rows.first() {
            if row.len() != first.len() {
                let column = tokens(line)
                    .nth(first.len().min(row.len()))
                    .map_or(line.trim_end().len() + 1, |(c, _)| c);
                return Err(Error::Parse {
                    line: line_no,
                    column,
                    message: format!(
                        "row has {} entries but line {first_row_line} has {}",
                        row.len(),
                        first.len()
                    ),
                });
            }
        } else {
            first_row_line = line_no;
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Parse {
            line: 1,
            column: 1,
            message: "no matrix entries found".into(),
        });
    }
    let (r, c) = (rows.len(), rows[0].len());
    let field = if complex { Field::Complex } else { Field::Real };
    Matrix::new(r, c, field, rows.into_iter().flatten().collect())
}

/// `(1-based column, token)` for each whitespace-separated token.
fn tokens(line: &str) -> impl Iterator<Item = (usize, &str)> {
    let mut rest = line;
    let mut offset = 0;
    std::iter::from_fn(move || {
        let start = rest.find(|c: char| !c.is_whitespace())?;
        let tail = &rest[start..];
        let len = tail.find(char::is_whitespace).unwrap_or(tail.len());
        let token = &tail[..len];
        let col = line[..offset + start].chars().count() + 1;
        offset += start + len;
        rest = &tail[len..];
        Some((col, token))
    })
}

fn parse_real(s: &str) -> std::result::Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("malformed number {s:?}"))?;
    if !v.is_finite() {
        return Err(format!("non-finite value {s:?}"));
    }
    Ok(v)
}

fn parse_entry(token: &str) -> std::result::Result<(C64, bool), String> {
    let Some(body) = token.strip_suffix('i') else {
        return Ok((C64::new(parse_real(token)?, 0.0), false));
    };
    // split at the last sign that is not leading and not an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(k) => (parse_real(&body[..k])?, &body[k..]),
        None => (0.0, body),
    };
    let im = match im {
        "" | "+" => 1.0,
        "-" => -1.0,
        s => parse_real(s).map_err(|_| format!("malformed complex entry {token:?}"))?,
    };
    Ok((C64::new(re, im), true))
}

pub fn format_real(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn format_entry(z: C64, field: Field) -> String {
    match field {
        Field::Real => format_real(z.re),
        Field::Complex => {
            let sign = if z.im.is_sign_negative() { "" } else { "+" };
            format!("{}{sign}{}i", format_real(z.re), format_real(z.im))
        }
    }
}

/// One string per row, entries separated by single spaces. Values use the
/// shortest representation that parses back to the same `f64`.
pub fn format_rows(a: &Matrix) -> Vec<String> {
    (0..a.rows())
        .map(|i| {
            (0..a.cols())
                .map(|j| format_entry(a[(i, j)], a.field()))
                .collect::<Vec<_>>()
                .join(" ")
        })
        .collect()
}

pub fn format_matrix(a: &Matrix) -> String {
    let mut s = format_rows(a).join("\n");
    s.push('\n');
    s
}
