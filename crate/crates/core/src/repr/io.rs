//! Representation CSV files.
//!
//! ```text
//! # rep=quat order=w,x,y,z
//! 1.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0,0.0000000000000000e0
//! ```
//!
//! Values are written with 17 significant digits so files round-trip
//! losslessly. A *paired* file carries two operands per row, back to back,
//! under the same header.

use super::{RepKind, Representation};
use crate::error::{Error, Result};

/// One value at 17 significant digits.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn header(kind: RepKind) -> String {
    format!("# rep={} order={}", kind.tag(), kind.fields().join(","))
}

pub fn write_rows(kind: RepKind, rows: &[Vec<f64>]) -> String {
    let mut out = header(kind);
    out.push('\n');
    for row in rows {
        let line: Vec<String> = row.iter().map(|v| fmt_f64(*v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn write_reps(kind: RepKind, reps: &[Representation]) -> String {
    let rows: Vec<Vec<f64>> = reps.iter().map(|r| r.to_vector()).collect();
    write_rows(kind, &rows)
}

/// Parsed file: the declared representation and its numeric rows, each
/// paired with its 1-based line number.
#[derive(Debug, Clone, PartialEq)]
pub struct RepTable {
    pub kind: RepKind,
    pub rows: Vec<(usize, Vec<f64>)>,
}

/// Parses a representation CSV. `operands` is 1 for plain files and 2 for
/// paired files; every row must hold `operands × dim` values.
pub fn parse(text: &str, operands: usize) -> Result<RepTable> {
    let mut lines = text.lines().enumerate();
    let (_, first) = lines.next().ok_or(Error::Parse {
        line: 1,
        msg: "missing `# rep=` header".into(),
    })?;
    let kind = parse_header(first)?;
    let width = kind.dim() * operands;
    let mut rows = Vec::new();
    for (i, line) in lines {
        let line_no = i + 1;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let values = trimmed
            .split(',')
            .map(|s| {
                s.trim().parse::<f64>().map_err(|e| Error::Parse {
                    line: line_no,
                    msg: format!("`{}`: {e}", s.trim()),
                })
            })
            .collect::<Result<Vec<f64>>>()?;
        if values.len() != width {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("expected {width} values, found {}", values.len()),
            });
        }
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Parse {
                line: line_no,
                msg: format!("non-finite value {v}"),
            });
        }
        rows.push((line_no, values));
    }
    Ok(RepTable { kind, rows })
}

fn parse_header(line: &str) -> Result<RepKind> {
    let bad = |msg: String| Error::Parse { line: 1, msg };
    let body = line
        .trim()
        .strip_prefix('#')
        .ok_or_else(|| bad("header must start with `#`".into()))?;
    let mut kind = None;
    let mut order = None;
    for tok in body.split_whitespace() {
        if let Some(v) = tok.strip_prefix("rep=") {
            kind = Some(v.parse::<RepKind>().map_err(|e| bad(e.to_string()))?);
        } else if let Some(v) = tok.strip_prefix("order=") {
            order = Some(v.to_string());
        }
    }
    let kind = kind.ok_or_else(|| bad("header lacks `rep=`".into()))?;
    if let Some(order) = order {
        let expected = kind.fields().join(",");
        if order != expected {
            return Err(bad(format!(
                "field order `{order}` does not match `{expected}` for {kind}"
            )));
        }
    }
    Ok(kind)
}
