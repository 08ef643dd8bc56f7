//! Report files.
//!
//! `report.json` carries everything (schema 1). The CSVs hold the same
//! numbers in plotting-friendly shape and contain no timestamps, so two runs
//! with the same config and seed produce byte-identical CSVs. Floats are
//! written with Rust's shortest round-trip formatting.
//!
//! | file | contents |
//! |------|----------|
//! | `fim.csv` | normalized FIM, interleaved order, labelled rows and columns |
//! | `fim_raw.csv` | raw FIM, same layout |
//! | `fim.txt` | normalized FIM as a matrix file for `decompose --fim` |
//! | `eigen.csv` | `lambda` row, then one row per parameter with eigenvector components |
//! | `symplectic.csv` | `d` row (over the u and v columns), then u/v components per parameter |
//! | `config.toml` | the resolved configuration; re-running it reproduces the report |
//! | `plotdata/*.csv` | spectra, eigenvector bars and contributions |

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use nalgebra::DMatrix;
use serde::Serialize;
use serde_json::json;
use symfisher::fim::write_matrix_file;
use symfisher::{EigenSpectrum, FisherMatrix, ParamLabel, SymplecticSpectrum};

use crate::error::{CliError, Stage};
use crate::pipeline::{PairingComparison, SensitivityReport};

pub const SCHEMA_VERSION: u32 = 1;

/// Bound on `|prod lambda / prod d^2 - 1|`, checked before anything is written.
pub const DETERMINANT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DeterminantAudit {
    pub log_prod_lambda: f64,
    pub log_prod_d2: f64,
    pub relative_gap: f64,
}

/// Compares `prod lambda_j` with `prod d_j^2` in the log domain so that
/// determinants like `1e-60` neither underflow nor lose precision.
pub fn determinant_audit(
    eig: &EigenSpectrum,
    sym: &SymplecticSpectrum,
) -> Result<DeterminantAudit, CliError> {
    let log_lambda: f64 = eig.eigenvalues.iter().map(|l| l.ln()).sum();
    let log_d2: f64 = sym.d.iter().map(|d| 2.0 * d.ln()).sum();
    let gap = (log_lambda - log_d2).exp_m1().abs();
    // Also rejects NaN from a non-positive eigenvalue.
    if !(gap <= DETERMINANT_TOL) {
        return Err(CliError::DeterminantAudit {
            log_lambda,
            log_d2,
        });
    }
    Ok(DeterminantAudit {
        log_prod_lambda: log_lambda,
        log_prod_d2: log_d2,
        relative_gap: gap,
    })
}

fn write(path: &Path, contents: &str) -> Result<(), CliError> {
    fs::write(path, contents).map_err(|e| CliError::io(path, e))
}

/// Shortest round-trip text for `v`: integral values print without a
/// fraction (`2`), extreme magnitudes in exponent form (`1.5e-31`).
pub fn fmt_float(v: f64) -> String {
    let s = format!("{v:?}");
    match s.strip_suffix(".0") {
        Some(t) => t.to_string(),
        None => s,
    }
}

fn row(label: &str, values: impl IntoIterator<Item = f64>) -> String {
    let mut s = label.to_string();
    for v in values {
        write!(s, ",{}", fmt_float(v)).unwrap();
    }
    s.push('\n');
    s
}

fn header(first: &str, names: impl IntoIterator<Item = String>) -> String {
    let mut s = first.to_string();
    for n in names {
        s.push(',');
        s.push_str(&n);
    }
    s.push('\n');
    s
}

fn label_names(labels: &[ParamLabel]) -> Vec<String> {
    labels.iter().map(|l| l.to_string()).collect()
}

pub fn fim_csv(f: &FisherMatrix) -> String {
    let names = label_names(f.labels());
    let mut s = header("parameter", names.clone());
    for (i, name) in names.iter().enumerate() {
        s.push_str(&row(name, (0..f.dim()).map(|j| f.get(i, j))));
    }
    s
}

pub fn eigen_csv(eig: &EigenSpectrum, labels: &[ParamLabel]) -> String {
    let mut s = header("parameter", (1..=eig.dim()).map(|k| format!("q{k}")));
    s.push_str(&row("lambda", eig.eigenvalues.iter().copied()));
    for (i, l) in labels.iter().enumerate() {
        s.push_str(&row(&l.to_string(), eig.eigenvectors.row(i).iter().copied()));
    }
    s
}

pub fn symplectic_csv(sym: &SymplecticSpectrum, labels: &[ParamLabel]) -> String {
    let n = sym.n;
    let mut s = header(
        "parameter",
        (1..=n).map(|j| format!("u{j}")).chain((1..=n).map(|j| format!("v{j}"))),
    );
    s.push_str(&row("d", sym.d.iter().chain(&sym.d).copied()));
    for (i, l) in labels.iter().enumerate() {
        s.push_str(&row(
            &l.to_string(),
            sym.u.row(i).iter().chain(sym.v.row(i).iter()).copied(),
        ));
    }
    s
}

fn spectrum_csv(name: &str, values: &[f64]) -> String {
    let total: f64 = values.iter().sum();
    let mut s = format!("index,{name},share\n");
    for (k, v) in values.iter().enumerate() {
        writeln!(s, "{},{},{}", k + 1, fmt_float(*v), fmt_float(v / total)).unwrap();
    }
    s
}

/// Long-form bar data: one line per (vector, parameter).
fn vector_bars_csv(columns: &[(String, DMatrix<f64>)], labels: &[ParamLabel]) -> String {
    let mut s = String::from("vector,parameter,variable,kind,value\n");
    for (prefix, m) in columns {
        for j in 0..m.ncols() {
            for (i, l) in labels.iter().enumerate() {
                let value = fmt_float(m[(i, j)]);
                writeln!(s, "{prefix}{},{l},{},{},{value}", j + 1, l.variable, l.kind).unwrap();
            }
        }
    }
    s
}

fn contributions_csv(report: &SensitivityReport) -> String {
    let c = &report.contributions;
    let labels = report.paired.labels();
    let n = report.sym.n;
    let mut s = String::from("variable,standard,first_eigenvector,first_symplectic_pair\n");
    for k in 0..n {
        let (a, b) = (&labels[k], &labels[n + k]);
        let name = if a.variable == b.variable {
            a.variable.clone()
        } else {
            format!("{a}|{b}")
        };
        s.push_str(&row(
            &name,
            [
                c.standard.per_variable[k],
                c.first_eigenvector.per_variable[k],
                c.first_symplectic_pair.per_variable[k],
            ],
        ));
    }
    s
}

fn matrix_json(f: &FisherMatrix) -> serde_json::Value {
    let rows: Vec<Vec<f64>> = (0..f.dim())
        .map(|i| (0..f.dim()).map(|j| f.get(i, j)).collect())
        .collect();
    json!({
        "labels": f.labels(),
        "normalization": f.normalization(),
        "matrix": rows,
    })
}

fn columns(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.column_iter().map(|c| c.iter().copied().collect()).collect()
}

pub fn report_json(report: &SensitivityReport, audit: &DeterminantAudit) -> serde_json::Value {
    let cfg = &report.config;
    json!({
        "schema": SCHEMA_VERSION,
        "metadata": {
            "tool": env!("CARGO_PKG_NAME"),
            "version": env!("CARGO_PKG_VERSION"),
            "seed": cfg.seed,
            "samples": cfg.samples,
            "started": report.started,
            "finished": report.finished,
            "config": cfg,
        },
        "condition_numbers": report.condition_numbers,
        "fim": {
            "raw": matrix_json(&report.raw),
            "normalized": matrix_json(&report.normalized),
            "paired": matrix_json(&report.paired),
            "pairing": report.paired.pairing().map(|p| p.to_string()),
        },
        "eig": {
            "eigenvalues": report.eig.eigenvalues,
            "eigenvectors": columns(&report.eig.eigenvectors),
        },
        "sym": {
            "d": report.sym.d,
            "u": columns(&report.sym.u),
            "v": columns(&report.sym.v),
        },
        "contributions": report.contributions,
        "determinant_audit": audit,
    })
}

/// Writes the report set into `dir`, creating it. Fails before writing
/// anything if the determinant audit does not pass.
pub fn emit_report(report: &SensitivityReport, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    let audit = determinant_audit(&report.eig, &report.sym)?;
    let plot = dir.join("plotdata");
    fs::create_dir_all(&plot).map_err(|e| CliError::io(&plot, e))?;

    let labels = report.paired.labels();
    let json = serde_json::to_string_pretty(&report_json(report, &audit))
        .expect("report values serialize");
    let mut files = vec![
        (dir.join("report.json"), json + "\n"),
        (dir.join("config.toml"), report.config.to_toml()),
        (dir.join("fim.csv"), fim_csv(&report.normalized)),
        (dir.join("fim_raw.csv"), fim_csv(&report.raw)),
        (dir.join("eigen.csv"), eigen_csv(&report.eig, labels)),
        (dir.join("symplectic.csv"), symplectic_csv(&report.sym, labels)),
        (plot.join("eigen_spectrum.csv"), spectrum_csv("lambda", &report.eig.eigenvalues)),
        (plot.join("symplectic_spectrum.csv"), spectrum_csv("d", &report.sym.d)),
        (
            plot.join("eigenvectors.csv"),
            vector_bars_csv(&[("q".into(), report.eig.eigenvectors.clone())], labels),
        ),
        (
            plot.join("symplectic_vectors.csv"),
            vector_bars_csv(
                &[("u".into(), report.sym.u.clone()), ("v".into(), report.sym.v.clone())],
                labels,
            ),
        ),
        (plot.join("contributions.csv"), contributions_csv(report)),
    ];
    for (path, contents) in &files {
        write(path, contents)?;
    }
    let fim_txt = dir.join("fim.txt");
    write_matrix_file(&report.normalized, &fim_txt).map_err(|e| match e {
        symfisher::Error::Io(source) => CliError::io(&fim_txt, source),
        other => CliError::Stage {
            stage: Stage::Report,
            source: other,
        },
    })?;
    files.push((fim_txt, String::new()));
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

/// `compare.csv`: one row per pairing with its `d` values, plus the shared
/// standard eigenvalues; `compare.json` holds the full spectra.
pub fn emit_comparison(cmp: &PairingComparison, dir: &Path) -> Result<Vec<PathBuf>, CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
    let n = cmp.normalized.dim() / 2;
    let mut csv = header("pairing", (1..=n).map(|j| format!("d{j}")));
    for (spec, sym) in &cmp.spectra {
        csv.push_str(&row(&format!("\"{spec}\""), sym.d.iter().copied()));
    }
    let mut eig = header("spectrum", (1..=2 * n).map(|k| format!("lambda{k}")));
    eig.push_str(&row("standard", cmp.eigenvalues.iter().copied()));

    let spectra: Vec<_> = cmp
        .spectra
        .iter()
        .map(|(spec, sym)| {
            json!({
                "pairing": spec.to_string(),
                "d": sym.d,
                "u": columns(&sym.u),
                "v": columns(&sym.v),
            })
        })
        .collect();
    let json = json!({
        "schema": SCHEMA_VERSION,
        "normalized_fim": matrix_json(&cmp.normalized),
        "eigenvalues": cmp.eigenvalues,
        "spectra": spectra,
    });

    let files = [
        (dir.join("compare.csv"), csv),
        (dir.join("compare_eigen.csv"), eig),
        (
            dir.join("compare.json"),
            serde_json::to_string_pretty(&json).expect("serializable") + "\n",
        ),
    ];
    for (path, contents) in &files {
        write(path, contents)?;
    }
    Ok(files.into_iter().map(|(p, _)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use symfisher::linalg::{sym_eig, williamson};
    use symfisher::SymMatrix;

    #[test]
    fn audit_accepts_consistent_spectra() {
        let f = SymMatrix::from_diagonal(&[1e-3, 3.0, 4e5, 2.0]);
        let a = determinant_audit(&sym_eig(&f), &williamson(&f).unwrap()).unwrap();
        assert!(a.relative_gap < 1e-12);
    }

    #[test]
    fn audit_rejects_mismatch() {
        let f = SymMatrix::from_diagonal(&[1.0, 2.0]);
        let mut sym = williamson(&f).unwrap();
        sym.d[0] *= 1.0 + 1e-6;
        assert!(matches!(
            determinant_audit(&sym_eig(&f), &sym),
            Err(CliError::DeterminantAudit { .. })
        ));
    }

    #[test]
    fn csv_rows_use_round_trip_floats() {
        assert_eq!(row("lambda", [2.0, 2.0, 1.0, 1.0]), "lambda,2,2,1,1\n");
        assert_eq!(fmt_float(1.5e-31), "1.5e-31");
        assert_eq!(fmt_float(-4e22), "-4e22");
        for v in [0.1 + 0.2, 1.5e-31, -4e22, 3.0, 0.0] {
            let text = row("x", [v]);
            let parsed: f64 = text.trim().split(',').nth(1).unwrap().parse().unwrap();
            assert_eq!(parsed.to_bits(), v.to_bits());
        }
    }
}
