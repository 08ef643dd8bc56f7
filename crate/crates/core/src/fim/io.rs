//! Plain-text FIM files.
//!
//! ```text
//! dim 4
//! # normalization stddev          (optional directive)
//! 1.0000000000000000e0 0.0000000000000000e0 ...
//! ...                               (dim rows, whitespace separated)
//! E,mean,6.9e10                     (dim labels: variable,kind,nominal)
//! ...
//! ```
//!
//! Values are written with 17 significant digits, which round-trips every
//! `f64` exactly. Other `#` lines are comments. A file with no label lines
//! gets placeholder labels `p1..pN` of kind `other`.

use std::fs;
use std::path::Path;

use nalgebra::DMatrix;

use super::{FisherMatrix, Normalization, ParamKind, ParamLabel};
use crate::error::{Error, Result};
use crate::linalg::SymMatrix;

pub fn write_matrix_file(f: &FisherMatrix, path: &Path) -> Result<()> {
    fs::write(path, render(f))?;
    Ok(())
}

pub fn read_matrix_file(path: &Path) -> Result<FisherMatrix> {
    parse(&fs::read_to_string(path)?)
}

pub(crate) fn render(f: &FisherMatrix) -> String {
    let n = f.dim();
    let mut out = format!("dim {n}\n");
    if f.normalization() != Normalization::Raw {
        out.push_str(&format!("# normalization {}\n", f.normalization().as_str()));
    }
    for i in 0..n {
        let row: Vec<String> = (0..n).map(|j| format!("{:.16e}", f.get(i, j))).collect();
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    for l in f.labels() {
        out.push_str(&format!("{},{},{:.16e}\n", l.variable, l.kind, l.nominal));
    }
    out
}

pub(crate) fn parse(text: &str) -> Result<FisherMatrix> {
    let mut normalization = Normalization::Raw;
    let mut lines = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(mode) = comment.trim().strip_prefix("normalization") {
                normalization = Normalization::parse(mode).ok_or_else(|| Error::Parse {
                    line: no + 1,
                    message: format!("unknown normalization '{}'", mode.trim()),
                })?;
            }
            continue;
        }
        lines.push((no + 1, line));
    }

    let mut it = lines.into_iter();
    let (first_no, first) = it.next().ok_or(Error::Parse {
        line: 1,
        message: "empty file".into(),
    })?;
    let dim: usize = first
        .strip_prefix("dim")
        .and_then(|s| s.trim().parse().ok())
        .ok_or_else(|| Error::Parse {
            line: first_no,
            message: "expected 'dim <n>'".into(),
        })?;

    let mut data = Vec::with_capacity(dim * dim);
    for _ in 0..dim {
        let (no, line) = it.next().ok_or(Error::Parse {
            line: first_no,
            message: format!("expected {dim} matrix rows"),
        })?;
        let row = line
            .split_whitespace()
            .map(|t| t.parse::<f64>())
            .collect::<std::result::Result<Vec<_>, _>>()
            .map_err(|e| Error::Parse {
                line: no,
                message: e.to_string(),
            })?;
        if row.len() != dim {
            return Err(Error::Parse {
                line: no,
                message: format!("expected {dim} values, found {}", row.len()),
            });
        }
        data.extend(row);
    }

    let mut labels = Vec::with_capacity(dim);
    for (no, line) in it {
        let mut parts = line.rsplitn(3, ',');
        let (nominal, kind, variable) = match (parts.next(), parts.next(), parts.next()) {
            (Some(n), Some(k), Some(v)) => (n, k, v),
            _ => {
                return Err(Error::Parse {
                    line: no,
                    message: "expected 'variable,kind,nominal'".into(),
                })
            }
        };
        let nominal: f64 = nominal.trim().parse().map_err(|_| Error::Parse {
            line: no,
            message: format!("bad nominal '{nominal}'"),
        })?;
        labels.push(ParamLabel::new(variable.trim(), ParamKind::parse(kind), nominal)?);
    }
    if labels.is_empty() {
        labels = (1..=dim)
            .map(|i| ParamLabel::new(format!("p{i}"), ParamKind::Other("other".into()), 1.0))
            .collect::<Result<_>>()?;
    }

    let m = DMatrix::from_row_slice(dim, dim, &data);
    FisherMatrix::new(SymMatrix::new(m)?, labels, normalization)
}
