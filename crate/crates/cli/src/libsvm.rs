//! LIBSVM text format: one `<label> <idx>:<val> ...` row per line, 1-based
//! strictly increasing indices, `#` starts a comment.

use std::io::{BufRead, Write};

use adaprox::SparseDesign;

use crate::error::{HarnessError, Result};

fn parse_err<T>(line: usize, msg: impl Into<String>) -> Result<T> {
    Err(HarnessError::Parse {
        line,
        msg: msg.into(),
    })
}

fn parse_label(tok: &str, line: usize) -> Result<f64> {
    match tok.parse::<f64>() {
        Ok(v) if v == 1.0 || v == 0.0 || v == -1.0 => Ok(v.max(0.0)),
        _ => parse_err(line, format!("unknown label '{tok}'")),
    }
}

/// Reads a binary-labelled design. Labels `-1` map to `0`; the column count is
/// the largest index seen.
pub fn parse_libsvm<R: BufRead>(reader: R) -> Result<SparseDesign> {
    let mut rows: Vec<(Vec<(usize, f64)>, f64)> = Vec::new();
    let mut n_cols = 0;
    for (i, text) in reader.lines().enumerate() {
        let line = i + 1;
        let text = text.map_err(|e| HarnessError::Parse {
            line,
            msg: e.to_string(),
        })?;
        let body = text.split('#').next().unwrap_or("");
        let mut toks = body.split_whitespace();
        let Some(label) = toks.next() else { continue };
        let label = parse_label(label, line)?;
        let mut entries: Vec<(usize, f64)> = Vec::new();
        for tok in toks {
            let Some((idx, val)) = tok.split_once(':') else {
                return parse_err(line, format!("malformed token '{tok}'"));
            };
            let idx: usize = match idx.parse() {
                Ok(j) if j >= 1 => j,
                _ => return parse_err(line, format!("bad index in '{tok}'")),
            };
            let val: f64 = match val.parse() {
                Ok(v) if f64::is_finite(v) => v,
                _ => return parse_err(line, format!("bad value in '{tok}'")),
            };
            if entries.last().is_some_and(|&(prev, _)| prev >= idx - 1) {
                return parse_err(line, format!("index {idx} does not increase"));
            }
            entries.push((idx - 1, val));
            n_cols = n_cols.max(idx);
        }
        rows.push((entries, label));
    }
    let mut design = SparseDesign::new(n_cols);
    for (entries, label) in &rows {
        design.push_row(entries, *label)?;
    }
    Ok(design)
}

/// Writes `design` so that [`parse_libsvm`] recovers it exactly (up to
/// trailing empty columns). Values use the shortest round-trip decimal form.
pub fn write_libsvm<W: Write>(design: &SparseDesign, mut out: W) -> std::io::Result<()> {
    for i in 0..design.n_rows() {
        write!(out, "{}", design.label(i) as u8)?;
        let (idx, val) = design.row(i);
        for (j, v) in idx.iter().zip(val) {
            write!(out, " {}:{}", j + 1, v)?;
        }
        writeln!(out)?;
    }
    Ok(())
}
