//! The 15-input benchmark `f(x) = a1'x + a2' sin(x) + a3' cos(x) + x'Mx`.
//!
//! Coefficient file layout: a line `a1:` followed by 15 numbers, likewise
//! `a2:` and `a3:`, then `M:` followed by 15 rows of 15 numbers. Numbers may
//! share the header line or wrap freely; `#` starts a comment.

use std::fs;
use std::path::Path;

use nalgebra::{DMatrix, DVector};

use super::OutputMap;
use crate::error::{Error, Result};

pub const BENCHMARK_DIM: usize = 15;

/// Shipped coefficient set (synthetic, three importance groups of five).
pub const DEFAULT_COEFFICIENTS: &str = include_str!("../../data/benchmark_coefficients.txt");

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchmarkFunction {
    pub a1: Vec<f64>,
    pub a2: Vec<f64>,
    pub a3: Vec<f64>,
    pub m: DMatrix<f64>,
}

impl BenchmarkFunction {
    /// All coefficients zero.
    pub fn zeros() -> Self {
        Self {
            a1: vec![0.0; BENCHMARK_DIM],
            a2: vec![0.0; BENCHMARK_DIM],
            a3: vec![0.0; BENCHMARK_DIM],
            m: DMatrix::zeros(BENCHMARK_DIM, BENCHMARK_DIM),
        }
    }

    pub fn shipped() -> Self {
        Self::parse(DEFAULT_COEFFICIENTS).expect("shipped coefficient file is well formed")
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::parse(&fs::read_to_string(path)?)
    }

    pub fn is_loaded(&self) -> bool {
        self.a1.len() == BENCHMARK_DIM
            && self.a2.len() == BENCHMARK_DIM
            && self.a3.len() == BENCHMARK_DIM
            && self.m.shape() == (BENCHMARK_DIM, BENCHMARK_DIM)
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut sections: Vec<(String, usize, Vec<f64>)> = Vec::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let mut rest = line;
            if let Some((head, tail)) = line.split_once(':') {
                let key = head.trim();
                if !matches!(key, "a1" | "a2" | "a3" | "M") {
                    return Err(Error::Parse {
                        line: no + 1,
                        message: format!("unknown section '{key}'"),
                    });
                }
                if sections.iter().any(|(k, _, _)| k == key) {
                    return Err(Error::Parse {
                        line: no + 1,
                        message: format!("section '{key}' repeated"),
                    });
                }
                sections.push((key.to_string(), no + 1, Vec::new()));
                rest = tail;
            }
            let Some((_, _, values)) = sections.last_mut() else {
                return Err(Error::Parse {
                    line: no + 1,
                    message: "numbers before first section header".into(),
                });
            };
            for tok in rest.split_whitespace() {
                values.push(tok.parse().map_err(|_| Error::Parse {
                    line: no + 1,
                    message: format!("bad number '{tok}'"),
                })?);
            }
        }

        let take = |key: &str, expected: usize| -> Result<Vec<f64>> {
            let (_, _, v) = sections
                .iter()
                .find(|(k, _, _)| k == key)
                .ok_or_else(|| Error::Parse {
                    line: 0,
                    message: format!("missing section '{key}'"),
                })?;
            if v.len() != expected {
                return Err(Error::CoefficientDimension {
                    section: key.to_string(),
                    expected,
                    found: v.len(),
                });
            }
            Ok(v.clone())
        };
        let d = BENCHMARK_DIM;
        Ok(Self {
            a1: take("a1", d)?,
            a2: take("a2", d)?,
            a3: take("a3", d)?,
            m: DMatrix::from_row_slice(d, d, &take("M", d * d)?),
        })
    }

    pub fn render(&self) -> String {
        let fmt_row = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:.17e}"))
                .collect::<Vec<_>>()
                .join(" ")
        };
        let mut s = String::new();
        for (name, v) in [("a1", &self.a1), ("a2", &self.a2), ("a3", &self.a3)] {
            s.push_str(&format!("{name}:\n{}\n", fmt_row(v)));
        }
        s.push_str("M:\n");
        for r in 0..self.m.nrows() {
            let row: Vec<f64> = self.m.row(r).iter().copied().collect();
            s.push_str(&fmt_row(&row));
            s.push('\n');
        }
        s
    }

    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        if !self.is_loaded() {
            return Err(Error::CoefficientsNotLoaded);
        }
        if x.len() != BENCHMARK_DIM {
            return Err(Error::DimensionMismatch {
                context: "benchmark input",
                expected: BENCHMARK_DIM,
                found: x.len(),
            });
        }
        Ok(self.eval_unchecked(x))
    }

    fn eval_unchecked(&self, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for i in 0..BENCHMARK_DIM {
            acc += self.a1[i] * x[i] + self.a2[i] * x[i].sin() + self.a3[i] * x[i].cos();
        }
        let xv = DVector::from_column_slice(x);
        acc + xv.dot(&(&self.m * &xv))
    }

    /// `a1 + a2 * cos(x) - a3 * sin(x) + (M + M') x`.
    pub fn gradient(&self, x: &[f64]) -> Result<Vec<f64>> {
        self.eval(x)?;
        let xv = DVector::from_column_slice(x);
        let quad = (&self.m + self.m.transpose()) * xv;
        Ok((0..BENCHMARK_DIM)
            .map(|i| self.a1[i] + self.a2[i] * x[i].cos() - self.a3[i] * x[i].sin() + quad[i])
            .collect())
    }
}

/// Loaded benchmark as a scalar output map.
#[derive(Debug, Clone)]
pub struct BenchmarkMap(BenchmarkFunction);

impl BenchmarkMap {
    pub fn new(f: BenchmarkFunction) -> Result<Self> {
        if !f.is_loaded() {
            return Err(Error::CoefficientsNotLoaded);
        }
        Ok(Self(f))
    }

    pub fn function(&self) -> &BenchmarkFunction {
        &self.0
    }
}

impl OutputMap for BenchmarkMap {
    fn input_dim(&self) -> usize {
        BENCHMARK_DIM
    }
    fn output_dim(&self) -> usize {
        1
    }
    fn eval(&self, x: &[f64], y: &mut [f64]) {
        y[0] = self.0.eval_unchecked(x);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn unit(i: usize) -> Vec<f64> {
        let mut e = vec![0.0; BENCHMARK_DIM];
        e[i] = 1.0;
        e
    }

    #[test]
    fn eval_examples() {
        let mut f = BenchmarkFunction::zeros();
        assert_eq!(f.eval(&[0.3; BENCHMARK_DIM]).unwrap(), 0.0);

        f.a1 = unit(0);
        assert_eq!(f.eval(&unit(0)).unwrap(), 1.0);

        let mut f = BenchmarkFunction::zeros();
        f.a2 = vec![1.0; BENCHMARK_DIM];
        assert_eq!(f.eval(&[0.0; BENCHMARK_DIM]).unwrap(), 0.0);
        let mut f = BenchmarkFunction::zeros();
        f.a3 = vec![1.0; BENCHMARK_DIM];
        assert_eq!(f.eval(&[0.0; BENCHMARK_DIM]).unwrap(), 15.0);
    }

    #[test]
    fn unloaded_is_rejected() {
        let f = BenchmarkFunction::default();
        assert!(matches!(
            f.eval(&[0.0; BENCHMARK_DIM]),
            Err(Error::CoefficientsNotLoaded)
        ));
        assert!(BenchmarkMap::new(f).is_err());
    }

    #[test]
    fn parse_counts() {
        let f = BenchmarkFunction::shipped();
        assert!(f.is_loaded());
        let again = BenchmarkFunction::parse(&f.render()).unwrap();
        assert_eq!(f, again);

        let short = f.render().replacen("a2:\n", "a2:\n1.0 ", 1);
        assert!(matches!(
            BenchmarkFunction::parse(&short),
            Err(Error::CoefficientDimension { ref section, expected: 15, found: 16 }) if section == "a2"
        ));
        assert!(matches!(
            BenchmarkFunction::parse("a1: 1 x"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            BenchmarkFunction::parse("1 2 3"),
            Err(Error::Parse { .. })
        ));
    }

    proptest! {
        #[test]
        fn gradient_matches_finite_differences(
            x in proptest::collection::vec(-3.0f64..3.0, BENCHMARK_DIM)
        ) {
            let f = BenchmarkFunction::shipped();
            let g = f.gradient(&x).unwrap();
            let h = 1e-5;
            for i in 0..BENCHMARK_DIM {
                let mut xp = x.clone();
                let mut xm = x.clone();
                xp[i] += h;
                xm[i] -= h;
                let fd = (f.eval(&xp).unwrap() - f.eval(&xm).unwrap()) / (2.0 * h);
                prop_assert!((g[i] - fd).abs() <= 1e-6 * g[i].abs().max(1.0),
                    "component {}: {} vs {}", i, g[i], fd);
            }
        }
    }

    #[test]
    fn gradient_at_origin() {
        let f = BenchmarkFunction::shipped();
        let g = f.gradient(&[0.0; BENCHMARK_DIM]).unwrap();
        for i in 0..BENCHMARK_DIM {
            assert_relative_eq!(g[i], f.a1[i] + f.a2[i], max_relative = 1e-15);
        }
    }
}
